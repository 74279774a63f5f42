//! Compact Lie algebras and their linear representations. At a point `x`
//! this computes the action map `sigma_x`, whose kernel is the stabilizer
//! algebra, and the operator `Q_x = sigma_x^* sigma_x` on the complement.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen, SVD};
use num::rational::Rational64;
use num::{Integer, Zero};

use crate::error::{Error, Result};
use crate::rational::best_rational;

pub type C64 = Complex<f64>;

pub const DEFAULT_RANK_TOL: f64 = 1e-8;
const ANTI_HERMITIAN_TOL: f64 = 1e-8;
const HOMOMORPHISM_TOL: f64 = 1e-10;
const SPECTRUM_TOL: f64 = 1e-9;
const MAX_SPECTRUM_DEN: i64 = 64;
const LIMIT_COORD_TOL: f64 = 1e-12;

/// Negative trace pairing `-Re tr(AB)`; real for anti-Hermitian inputs.
pub fn trace_pairing(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    -(a * b).trace().re
}

fn anti_hermitian_residual(a: &DMatrix<C64>) -> f64 {
    (a + a.adjoint()).norm()
}

fn commutator(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a * b - b * a
}

/// Flattens a complex vector to `[re; im]`.
pub fn realify(v: &DVector<C64>) -> DVector<f64> {
    let n = v.len();
    DVector::from_fn(2 * n, |i, _| if i < n { v[i].re } else { v[i - n].im })
}

/// Inverse of [`realify`].
pub fn complexify(v: &DVector<f64>) -> DVector<C64> {
    let n = v.len() / 2;
    DVector::from_fn(n, |i, _| C64::new(v[i], v[i + n]))
}

/// The standard linear symplectic form `Im<a, b>`.
pub fn omega0(a: &DVector<C64>, b: &DVector<C64>) -> f64 {
    a.dotc(b).im
}

/// Trace-orthonormal basis of a compact Lie algebra realized inside `u(n)`.
#[derive(Clone, Debug)]
pub struct LieAlgebraBasis {
    generators: Vec<DMatrix<C64>>,
    matrix_size: usize,
    closure_residual: f64,
}

impl LieAlgebraBasis {
    /// Gram-Schmidt under the negative trace form. The commutator-closure
    /// residual of the resulting span is recorded, not enforced.
    pub fn orthonormalize(generators: &[DMatrix<C64>]) -> Result<Self> {
        Self::orthonormalize_with_transform(generators).map(|(b, _)| b)
    }

    /// Also returns `T` with `B_a = sum_l T[(a, l)] G_l`.
    pub(crate) fn orthonormalize_with_transform(
        generators: &[DMatrix<C64>],
    ) -> Result<(Self, DMatrix<f64>)> {
        let count = generators.len();
        let size = generators.first().map_or(0, |g| g.nrows());
        for (index, g) in generators.iter().enumerate() {
            if g.nrows() != size || g.ncols() != size {
                return Err(Error::DimensionMismatch { expected: size, got: g.nrows() });
            }
            let residual = anti_hermitian_residual(g);
            if residual > ANTI_HERMITIAN_TOL {
                return Err(Error::NonAntiHermitian { index, residual });
            }
        }
        let mut basis: Vec<DMatrix<C64>> = Vec::with_capacity(count);
        let mut coeffs: Vec<DVector<f64>> = Vec::with_capacity(count);
        for (index, g) in generators.iter().enumerate() {
            let scale = trace_pairing(g, g).max(0.0).sqrt();
            let mut v = g.clone();
            let mut c = DVector::<f64>::zeros(count);
            c[index] = 1.0;
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for (b, cb) in basis.iter().zip(&coeffs) {
                    let p = trace_pairing(b, &v);
                    v -= b * C64::new(p, 0.0);
                    c -= cb * p;
                }
            }
            let norm = trace_pairing(&v, &v).max(0.0).sqrt();
            if scale == 0.0 || norm < 1e-10 * scale {
                return Err(Error::RankDeficient { index });
            }
            basis.push(v / C64::new(norm, 0.0));
            coeffs.push(c / norm);
        }
        let transform = DMatrix::from_fn(count, count, |a, l| coeffs[a][l]);
        let closure_residual = closure_residual(&basis);
        Ok((Self { generators: basis, matrix_size: size, closure_residual }, transform))
    }

    /// Standard torus basis: the trace-orthonormalization of the diagonal
    /// generators `i diag(w_l)`, dropping directions that act trivially.
    fn torus(weights: &[Vec<i64>], n: usize) -> (Self, DMatrix<f64>, DMatrix<f64>) {
        let k = weights.len();
        let gram = DMatrix::from_fn(k, k, |a, b| {
            (0..n).map(|j| (weights[a][j] * weights[b][j]) as f64).sum::<f64>()
        });
        let ip = |x: &DVector<f64>, y: &DVector<f64>| (x.transpose() * &gram * y)[(0, 0)];
        let mut lattice: Vec<DVector<f64>> = Vec::new();
        for l in 0..k {
            let mut v = DVector::<f64>::zeros(k);
            v[l] = 1.0;
            let scale = gram[(l, l)];
            for _ in 0..2 {
                for b in &lattice {
                    let p = ip(b, &v);
                    v -= b * p;
                }
            }
            let n2 = ip(&v, &v);
            if scale > 0.0 && n2 > 1e-12 * scale {
                lattice.push(v / n2.sqrt());
            }
        }
        let r = lattice.len();
        let lattice_basis = DMatrix::from_fn(k, r, |l, a| lattice[a][l]);
        let pairings = torus_pairings(&lattice_basis, weights, n);
        let generators = (0..r).map(|a| diag_generator(&pairings, a)).collect::<Vec<_>>();
        let basis = Self { generators, matrix_size: n, closure_residual: 0.0 };
        (basis, lattice_basis, pairings)
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    pub fn matrix_size(&self) -> usize {
        self.matrix_size
    }

    pub fn generators(&self) -> &[DMatrix<C64>] {
        &self.generators
    }

    pub fn closure_residual(&self) -> f64 {
        self.closure_residual
    }

    /// `f[a][b][c] = <[B_a, B_b], B_c>`.
    pub fn structure_constants(&self) -> Vec<Vec<Vec<f64>>> {
        let k = self.dim();
        let g = &self.generators;
        (0..k)
            .map(|a| {
                (0..k)
                    .map(|b| {
                        let c_ab = commutator(&g[a], &g[b]);
                        (0..k).map(|c| trace_pairing(&c_ab, &g[c])).collect()
                    })
                    .collect()
            })
            .collect()
    }

    /// The matrix `sum_a xi_a B_a`.
    pub fn element(&self, xi: &DVector<f64>) -> DMatrix<C64> {
        combine(&self.generators, xi, self.matrix_size)
    }
}

fn closure_residual(basis: &[DMatrix<C64>]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..basis.len() {
        for j in (i + 1)..basis.len() {
            let c = commutator(&basis[i], &basis[j]);
            let mut proj = c.clone();
            for b in basis {
                proj -= b * C64::new(trace_pairing(b, &c), 0.0);
            }
            worst = worst.max(proj.norm());
        }
    }
    worst
}

fn combine(mats: &[DMatrix<C64>], xi: &DVector<f64>, n: usize) -> DMatrix<C64> {
    let mut out = DMatrix::<C64>::zeros(n, n);
    for (m, &c) in mats.iter().zip(xi.iter()) {
        out += m * C64::new(c, 0.0);
    }
    out
}

fn torus_pairings(lattice_basis: &DMatrix<f64>, weights: &[Vec<i64>], n: usize) -> DMatrix<f64> {
    let (k, r) = lattice_basis.shape();
    DMatrix::from_fn(r, n, |a, j| (0..k).map(|l| lattice_basis[(l, a)] * weights[l][j] as f64).sum())
}

fn diag_generator(pairings: &DMatrix<f64>, a: usize) -> DMatrix<C64> {
    let n = pairings.ncols();
    DMatrix::from_fn(n, n, |i, j| if i == j { C64::new(0.0, pairings[(a, j)]) } else { C64::zero() })
}

/// Integer weights of a torus action together with the orthonormal basis
/// of the effective algebra expressed in lattice coordinates.
#[derive(Clone, Debug)]
pub struct TorusWeights {
    /// `k` rows of `N` integer weights; column `j` is the weight of coordinate `j`.
    weights: Vec<Vec<i64>>,
    /// `k x r`: column `a` is basis element `a` in lattice coordinates.
    lattice_basis: DMatrix<f64>,
    /// `r x N`: `A_a = i diag(pairings[a, ..])`.
    pairings: DMatrix<f64>,
}

impl TorusWeights {
    pub fn weights(&self) -> &[Vec<i64>] {
        &self.weights
    }

    /// Lattice rank `k`.
    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    pub fn pairings(&self) -> &DMatrix<f64> {
        &self.pairings
    }

    /// Weight vector of coordinate `j`.
    pub fn weight(&self, j: usize) -> Vec<i64> {
        self.weights.iter().map(|row| row[j]).collect()
    }
}

#[derive(Clone, Debug)]
pub enum Representation {
    Torus(TorusWeights),
    Matrix(Vec<DMatrix<C64>>),
}

/// A compact algebra acting linearly on `C^N`.
#[derive(Clone, Debug)]
pub struct GroupAction {
    basis: LieAlgebraBasis,
    rep: Representation,
    ambient_dim: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpDirection {
    /// `exp(s A_xi)`, the compact group.
    Real,
    /// `exp(s i A_xi)`, the Hermitian directions of the complexification.
    Imaginary,
}

impl GroupAction {
    /// Torus action from a `k x N` integer weight matrix.
    pub fn torus(weights: Vec<Vec<i64>>) -> Result<Self> {
        let n = validate_weights(&weights)?;
        let (basis, lattice_basis, pairings) = LieAlgebraBasis::torus(&weights, n);
        Ok(Self {
            basis,
            rep: Representation::Torus(TorusWeights { weights, lattice_basis, pairings }),
            ambient_dim: n,
        })
    }

    /// Another representation of this torus (same algebra basis, same
    /// lattice) with different weights.
    pub fn torus_with_weights(&self, weights: Vec<Vec<i64>>) -> Result<Self> {
        let inner = self.torus_weights().ok_or(Error::NotTorus)?;
        if weights.len() != inner.rank() {
            return Err(Error::DimensionMismatch { expected: inner.rank(), got: weights.len() });
        }
        let n = validate_weights(&weights)?;
        let pairings = torus_pairings(&inner.lattice_basis, &weights, n);
        Ok(Self {
            basis: self.basis.clone(),
            rep: Representation::Torus(TorusWeights {
                weights,
                lattice_basis: inner.lattice_basis.clone(),
                pairings,
            }),
            ambient_dim: n,
        })
    }

    /// Representation given by one anti-Hermitian `N x N` matrix per basis
    /// element of an already orthonormal basis.
    pub fn matrix(basis: LieAlgebraBasis, reps: Vec<DMatrix<C64>>) -> Result<Self> {
        if reps.len() != basis.dim() {
            return Err(Error::DimensionMismatch { expected: basis.dim(), got: reps.len() });
        }
        let n = reps.first().map_or(0, |m| m.nrows());
        for (index, m) in reps.iter().enumerate() {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch { expected: n, got: m.nrows() });
            }
            let residual = anti_hermitian_residual(m);
            if residual > ANTI_HERMITIAN_TOL {
                return Err(Error::NonAntiHermitian { index, residual });
            }
        }
        if basis.closure_residual() > HOMOMORPHISM_TOL {
            return Err(Error::NotClosed { residual: basis.closure_residual() });
        }
        let residual = homomorphism_residual(&basis, &reps);
        if residual > HOMOMORPHISM_TOL {
            return Err(Error::NotAHomomorphism { residual });
        }
        Ok(Self { basis, rep: Representation::Matrix(reps), ambient_dim: n })
    }

    /// Orthonormalizes raw generators and transforms the representation
    /// matrices by the same change of basis.
    pub fn from_generators(generators: &[DMatrix<C64>], reps: &[DMatrix<C64>]) -> Result<Self> {
        if generators.len() != reps.len() {
            return Err(Error::DimensionMismatch { expected: generators.len(), got: reps.len() });
        }
        let (basis, t) = LieAlgebraBasis::orthonormalize_with_transform(generators)?;
        let n = reps.first().map_or(0, |m| m.nrows());
        let transformed = (0..basis.dim())
            .map(|a| combine(reps, &DVector::from_fn(reps.len(), |l, _| t[(a, l)]), n))
            .collect();
        Self::matrix(basis, transformed)
    }

    /// The defining representation of a matrix algebra.
    pub fn defining(basis: LieAlgebraBasis) -> Result<Self> {
        let reps = basis.generators().to_vec();
        Self::matrix(basis, reps)
    }

    /// The same action with the torus converted to diagonal matrices.
    pub fn to_matrix_rep(&self) -> Self {
        let reps = (0..self.dim()).map(|a| self.rep_matrix(a)).collect();
        Self { basis: self.basis.clone(), rep: Representation::Matrix(reps), ambient_dim: self.ambient_dim }
    }

    pub fn basis(&self) -> &LieAlgebraBasis {
        &self.basis
    }

    pub fn representation(&self) -> &Representation {
        &self.rep
    }

    /// Dimension of the (effective) algebra.
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn is_torus(&self) -> bool {
        matches!(self.rep, Representation::Torus(_))
    }

    pub fn torus_weights(&self) -> Option<&TorusWeights> {
        match &self.rep {
            Representation::Torus(t) => Some(t),
            Representation::Matrix(_) => None,
        }
    }

    pub fn rep_matrix(&self, a: usize) -> DMatrix<C64> {
        match &self.rep {
            Representation::Torus(t) => diag_generator(&t.pairings, a),
            Representation::Matrix(m) => m[a].clone(),
        }
    }

    /// `A_xi = sum_a xi_a A_a`.
    pub fn algebra_matrix(&self, xi: &DVector<f64>) -> DMatrix<C64> {
        match &self.rep {
            Representation::Torus(t) => {
                let p = t.pairings.transpose() * xi;
                DMatrix::from_fn(self.ambient_dim, self.ambient_dim, |i, j| {
                    if i == j { C64::new(0.0, p[j]) } else { C64::zero() }
                })
            }
            Representation::Matrix(m) => combine(m, xi, self.ambient_dim),
        }
    }

    /// `A_xi x`.
    pub fn apply(&self, xi: &DVector<f64>, x: &DVector<C64>) -> DVector<C64> {
        match &self.rep {
            Representation::Torus(t) => {
                let p = t.pairings.transpose() * xi;
                DVector::from_fn(x.len(), |j, _| C64::new(0.0, p[j]) * x[j])
            }
            Representation::Matrix(_) => self.algebra_matrix(xi) * x,
        }
    }

    fn apply_basis(&self, a: usize, x: &DVector<C64>) -> DVector<C64> {
        match &self.rep {
            Representation::Torus(t) => {
                DVector::from_fn(x.len(), |j, _| C64::new(0.0, t.pairings[(a, j)]) * x[j])
            }
            Representation::Matrix(m) => &m[a] * x,
        }
    }

    fn check_point(&self, x: &StatePoint) -> Result<()> {
        if x.dim() != self.ambient_dim {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim, got: x.dim() });
        }
        Ok(())
    }

    /// Complex `N x k` matrix with columns `A_a x`.
    pub fn infinitesimal_action_complex(&self, x: &StatePoint) -> Result<DMatrix<C64>> {
        self.check_point(x)?;
        let cols: Vec<DVector<C64>> = (0..self.dim()).map(|a| self.apply_basis(a, &x.coords)).collect();
        Ok(DMatrix::from_fn(self.ambient_dim, self.dim(), |i, a| cols[a][i]))
    }

    /// The real-linear map `sigma_x : xi -> A_xi x` as a `2N x k` real matrix.
    pub fn infinitesimal_action(&self, x: &StatePoint) -> Result<DMatrix<f64>> {
        let c = self.infinitesimal_action_complex(x)?;
        let n = self.ambient_dim;
        Ok(DMatrix::from_fn(2 * n, self.dim(), |i, a| if i < n { c[(i, a)].re } else { c[(i - n, a)].im }))
    }

    /// `exp(s A_xi)` (unitary) or `exp(s i A_xi)` (positive Hermitian).
    pub fn exp_matrix(&self, xi: &DVector<f64>, s: f64, direction: ExpDirection) -> DMatrix<C64> {
        let n = self.ambient_dim;
        match &self.rep {
            Representation::Torus(t) => {
                let p = t.pairings.transpose() * xi;
                DMatrix::from_fn(n, n, |i, j| if i == j { diag_exp(p[j], s, direction) } else { C64::zero() })
            }
            Representation::Matrix(_) => {
                // A = iH with H Hermitian
                let h = self.algebra_matrix(xi) * C64::new(0.0, -1.0);
                let eig = SymmetricEigen::new(h);
                let u = &eig.eigenvectors;
                let d = DMatrix::from_fn(n, n, |i, j| {
                    if i == j { diag_exp(eig.eigenvalues[i], s, direction) } else { C64::zero() }
                });
                u * d * u.adjoint()
            }
        }
    }

    pub fn exp_action(&self, xi: &DVector<f64>, s: f64, x: &StatePoint, direction: ExpDirection) -> StatePoint {
        if s == 0.0 {
            return x.clone();
        }
        match &self.rep {
            Representation::Torus(t) => {
                let p = t.pairings.transpose() * xi;
                StatePoint::new(DVector::from_fn(x.dim(), |j, _| diag_exp(p[j], s, direction) * x.coords[j]))
            }
            Representation::Matrix(_) => StatePoint::new(self.exp_matrix(xi, s, direction) * &x.coords),
        }
    }

    /// Orthonormal coordinates of a lattice vector of a torus action.
    pub fn lattice_to_algebra(&self, lattice: &[f64]) -> Result<DVector<f64>> {
        let t = self.torus_weights().ok_or(Error::NotTorus)?;
        if lattice.len() != t.rank() {
            return Err(Error::DimensionMismatch { expected: t.rank(), got: lattice.len() });
        }
        // c_a = b_a^T G xi with G = W W^T
        let n = self.ambient_dim;
        let wx: Vec<f64> = (0..n)
            .map(|j| (0..t.rank()).map(|l| t.weights[l][j] as f64 * lattice[l]).sum())
            .collect();
        Ok(DVector::from_fn(self.dim(), |a, _| (0..n).map(|j| t.pairings[(a, j)] * wx[j]).sum()))
    }

    /// Lattice coordinates (minimal representative) of an algebra element.
    pub fn algebra_to_lattice(&self, xi: &DVector<f64>) -> Result<Vec<f64>> {
        let t = self.torus_weights().ok_or(Error::NotTorus)?;
        Ok((&t.lattice_basis * xi).iter().copied().collect())
    }

    /// Generator of a one-parameter subgroup in orthonormal coordinates.
    /// Torus subgroups are given in lattice coordinates, matrix subgroups in
    /// the orthonormal basis.
    pub fn subgroup_generator(&self, rho: &OneParameterSubgroup) -> Result<DVector<f64>> {
        let xi = rho.to_f64();
        match &self.rep {
            Representation::Torus(_) => self.lattice_to_algebra(&xi),
            Representation::Matrix(_) => {
                if xi.len() != self.dim() {
                    return Err(Error::DimensionMismatch { expected: self.dim(), got: xi.len() });
                }
                Ok(DVector::from_vec(xi))
            }
        }
    }

    /// Length of the coordinate vector expected for one-parameter subgroups.
    pub fn subgroup_dim(&self) -> usize {
        match &self.rep {
            Representation::Torus(t) => t.rank(),
            Representation::Matrix(_) => self.dim(),
        }
    }
}

fn diag_exp(p: f64, s: f64, direction: ExpDirection) -> C64 {
    match direction {
        ExpDirection::Real => C64::new(0.0, s * p).exp(),
        ExpDirection::Imaginary => C64::new((-s * p).exp(), 0.0),
    }
}

fn validate_weights(weights: &[Vec<i64>]) -> Result<usize> {
    let n = weights.first().map(|r| r.len()).ok_or_else(|| Error::Parse("empty weight matrix".into()))?;
    if n == 0 {
        return Err(Error::Parse("weight matrix has no columns".into()));
    }
    for row in weights {
        if row.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: row.len() });
        }
    }
    Ok(n)
}

fn homomorphism_residual(basis: &LieAlgebraBasis, reps: &[DMatrix<C64>]) -> f64 {
    let f = basis.structure_constants();
    let n = reps.first().map_or(0, |m| m.nrows());
    let mut worst = 0.0f64;
    for a in 0..reps.len() {
        for b in (a + 1)..reps.len() {
            let lhs = commutator(&reps[a], &reps[b]);
            let rhs = combine(reps, &DVector::from_vec(f[a][b].clone()), n);
            let scale = 1.0 + reps[a].norm() * reps[b].norm();
            worst = worst.max((lhs - rhs).norm() / scale);
        }
    }
    worst
}

/// A point of the representation space with its cached squared norm.
#[derive(Clone, Debug, PartialEq)]
pub struct StatePoint {
    coords: DVector<C64>,
    norm_sq: f64,
}

impl StatePoint {
    pub fn new(coords: DVector<C64>) -> Self {
        let norm_sq = coords.norm_squared();
        Self { coords, norm_sq }
    }

    pub fn from_vec(coords: Vec<C64>) -> Self {
        Self::new(DVector::from_vec(coords))
    }

    /// Shorthand for real coordinates.
    pub fn from_real(coords: &[f64]) -> Self {
        Self::new(DVector::from_iterator(coords.len(), coords.iter().map(|&x| C64::new(x, 0.0))))
    }

    pub fn zero(n: usize) -> Self {
        Self::new(DVector::zeros(n))
    }

    pub fn coords(&self) -> &DVector<C64> {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq.sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.norm_sq == 0.0
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self::new(&self.coords * C64::new(t, 0.0))
    }

    /// Indices of nonzero coordinates.
    pub fn support(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&j| self.coords[j] != C64::zero()).collect()
    }
}

/// Stabilizer algebra `k_x` of a point, from the singular value
/// decomposition of `sigma_x`.
#[derive(Clone, Debug)]
pub struct StabilizerData {
    pub point: StatePoint,
    /// `k x d` orthonormal basis of `k_x`.
    pub kernel: DMatrix<f64>,
    /// `k x (k - d)` orthonormal basis of `k_x^perp`, right singular vectors.
    pub complement: DMatrix<f64>,
    /// Singular values of `sigma_x` on the complement, same column order.
    pub complement_singular_values: Vec<f64>,
    pub dim: usize,
    pub sigma_min_perp: Option<f64>,
    pub threshold: f64,
    /// Some singular value lies within a factor 100 of the threshold.
    pub conditioning_warning: bool,
}

impl StabilizerData {
    pub fn complement_dim(&self) -> usize {
        self.complement.ncols()
    }
}

/// Numerical stabilizer with threshold `rank_tol * max(|x|, 1)`.
pub fn stabilizer(action: &GroupAction, x: &StatePoint, rank_tol: f64) -> Result<StabilizerData> {
    let sigma = action.infinitesimal_action(x)?;
    Ok(stabilizer_of_map(&sigma, x, rank_tol))
}

/// Stabilizer data of an arbitrary real `sigma` (used for pulled-back
/// geometries of slice models).
pub fn stabilizer_of_map(sigma: &DMatrix<f64>, x: &StatePoint, rank_tol: f64) -> StabilizerData {
    let k = sigma.ncols();
    let threshold = rank_tol * x.norm().max(1.0);
    let (values, vectors) = right_singular_pairs(sigma);
    let mut kernel_cols = Vec::new();
    let mut comp_cols = Vec::new();
    let mut comp_vals = Vec::new();
    let mut warning = false;
    for (s, v) in values.iter().zip(vectors) {
        if *s > threshold / 100.0 && *s < threshold * 100.0 {
            warning = true;
        }
        if *s <= threshold {
            kernel_cols.push(v);
        } else {
            comp_vals.push(*s);
            comp_cols.push(v);
        }
    }
    let kernel = columns(k, &kernel_cols);
    let complement = columns(k, &comp_cols);
    let sigma_min_perp = comp_vals.iter().copied().reduce(f64::min);
    StabilizerData {
        point: x.clone(),
        dim: kernel_cols.len(),
        kernel,
        complement,
        complement_singular_values: comp_vals,
        sigma_min_perp,
        threshold,
        conditioning_warning: warning,
    }
}

fn columns(rows: usize, cols: &[DVector<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols.len(), |i, j| cols[j][i])
}

/// Singular values (descending) with their right singular vectors,
/// complete even when `sigma` has fewer rows than columns.
fn right_singular_pairs(sigma: &DMatrix<f64>) -> (Vec<f64>, Vec<DVector<f64>>) {
    let (m, k) = sigma.shape();
    if k == 0 {
        return (Vec::new(), Vec::new());
    }
    let padded = if m >= k {
        sigma.clone()
    } else {
        let mut p = DMatrix::<f64>::zeros(k, k);
        p.view_mut((0, 0), (m, k)).copy_from(sigma);
        p
    };
    let svd = SVD::new(padded, false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let mut pairs: Vec<(f64, DVector<f64>)> = (0..k)
        .map(|i| (svd.singular_values[i], vt.row(i).transpose()))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs.into_iter().unzip()
}

/// Dimension of the complex stabilizer `{zeta in k^C : A_zeta x = 0}`,
/// which is constant along orbits of the complexified group.
pub fn complex_stabilizer_dim(action: &GroupAction, x: &StatePoint, rank_tol: f64) -> Result<usize> {
    let c = action.infinitesimal_action_complex(x)?;
    let (n, k) = c.shape();
    if k == 0 {
        return Ok(0);
    }
    let threshold = rank_tol * x.norm().max(1.0);
    let padded = if n >= k {
        c
    } else {
        let mut p = DMatrix::<C64>::zeros(k, k);
        p.view_mut((0, 0), (n, k)).copy_from(&c);
        p
    };
    let svd = SVD::new(padded, false, false);
    Ok(svd.singular_values.iter().filter(|&&s| s <= threshold).count())
}

/// The operator `Q_x = sigma_x^* sigma_x` on `k_x^perp`.
#[derive(Clone, Debug)]
pub struct QOperator {
    /// `k x m` basis of `k_x^perp`.
    pub complement: DMatrix<f64>,
    /// `m x m` symmetric positive definite matrix in that basis.
    pub q: DMatrix<f64>,
    pub min_eigenvalue: f64,
    /// `Lambda_x = |Q_x^{-1}|`.
    pub lambda: f64,
}

impl QOperator {
    /// `Q_x^{-1}` applied to the projection of `rhs` onto `k_x^perp`,
    /// returned in algebra coordinates.
    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let projected = self.complement.transpose() * rhs;
        let sol = match self.q.clone().cholesky() {
            Some(ch) => ch.solve(&projected),
            None => self.q.clone().pseudo_inverse(1e-300).expect("pseudo-inverse") * projected,
        };
        &self.complement * sol
    }
}

pub fn q_operator(action: &GroupAction, x: &StatePoint) -> Result<QOperator> {
    let sigma = action.infinitesimal_action(x)?;
    let stab = stabilizer_of_map(&sigma, x, DEFAULT_RANK_TOL);
    q_operator_from(&sigma, &stab)
}

pub fn q_operator_from(sigma: &DMatrix<f64>, stab: &StabilizerData) -> Result<QOperator> {
    if stab.complement_dim() == 0 {
        return Err(Error::EmptyComplement);
    }
    let sv = sigma * &stab.complement;
    let q = sv.transpose() * &sv;
    let q = (&q + q.transpose()) * 0.5;
    let min_eigenvalue = SymmetricEigen::new(q.clone()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(QOperator { complement: stab.complement.clone(), q, min_eigenvalue, lambda: 1.0 / min_eigenvalue })
}

/// A rational one-parameter subgroup. For torus actions the coordinates are
/// lattice coordinates pairing with the integer weights; for matrix actions
/// they are coordinates in the orthonormal algebra basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneParameterSubgroup {
    xi: Vec<Rational64>,
}

impl OneParameterSubgroup {
    pub fn new(xi: Vec<Rational64>) -> Self {
        Self { xi }
    }

    pub fn from_integers(xi: &[i64]) -> Self {
        Self { xi: xi.iter().map(|&n| Rational64::from_integer(n)).collect() }
    }

    pub fn trivial(dim: usize) -> Self {
        Self { xi: vec![Rational64::zero(); dim] }
    }

    pub fn xi(&self) -> &[Rational64] {
        &self.xi
    }

    pub fn dim(&self) -> usize {
        self.xi.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.xi.iter().all(|r| r.is_zero())
    }

    pub fn inverse(&self) -> Self {
        Self { xi: self.xi.iter().map(|r| -r).collect() }
    }

    /// Integer entries with gcd one.
    pub fn is_primitive(&self) -> bool {
        self.xi.iter().all(|r| r.is_integer())
            && self.xi.iter().fold(0i64, |g, r| g.gcd(r.numer())) == 1
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.xi.iter().map(|r| *r.numer() as f64 / *r.denom() as f64).collect()
    }
}

/// `lim_{lambda -> 0} rho(lambda) x`, or `None` when the limit does not exist.
///
/// `rho(lambda)` acts by `lambda^h` on the eigenspace of `-i A_rho` with
/// eigenvalue `h`, so positive eigenvalues are contracted away and
/// negative ones with a nonzero component diverge.
pub fn ops_limit(action: &GroupAction, rho: &OneParameterSubgroup, x: &StatePoint) -> Result<Option<StatePoint>> {
    action.check_point(x)?;
    if rho.dim() != action.subgroup_dim() {
        return Err(Error::DimensionMismatch { expected: action.subgroup_dim(), got: rho.dim() });
    }
    let tol = LIMIT_COORD_TOL * x.norm();
    match action.representation() {
        Representation::Torus(t) => {
            let mut out = x.coords.clone();
            for j in 0..x.dim() {
                let pairing: Rational64 = (0..t.rank())
                    .map(|l| rho.xi[l] * Rational64::from_integer(t.weights[l][j]))
                    .fold(Rational64::zero(), |acc, v| acc + v);
                if pairing > Rational64::zero() {
                    out[j] = C64::zero();
                } else if pairing < Rational64::zero() {
                    if x.coords[j].norm() > tol {
                        return Ok(None);
                    }
                    out[j] = C64::zero();
                }
            }
            Ok(Some(StatePoint::new(out)))
        }
        Representation::Matrix(_) => {
            let xi = DVector::from_vec(rho.to_f64());
            let h = action.algebra_matrix(&xi) * C64::new(0.0, -1.0);
            let eig = SymmetricEigen::new(h);
            let scale = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if scale == 0.0 {
                return Ok(Some(x.clone()));
            }
            let u = &eig.eigenvectors;
            let comps = u.adjoint() * &x.coords;
            let mut out = DVector::<C64>::zeros(x.dim());
            for i in 0..x.dim() {
                let ratio = eig.eigenvalues[i] / scale;
                let r = best_rational(ratio, MAX_SPECTRUM_DEN);
                let approx = *r.numer() as f64 / *r.denom() as f64;
                if (approx - ratio).abs() > SPECTRUM_TOL {
                    return Err(Error::IrrationalSpectrum { value: ratio });
                }
                if r.is_zero() {
                    out += u.column(i) * comps[i];
                } else if r < Rational64::zero() && comps[i].norm() > tol {
                    return Ok(None);
                }
            }
            Ok(Some(StatePoint::new(out)))
        }
    }
}
