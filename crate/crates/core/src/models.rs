//! Bundled slice models shared by the tests and the CLI self-test.

use nalgebra::DMatrix;
use num::Zero;

use crate::algebra::{GroupAction, LieAlgebraBasis, StatePoint, C64};
use crate::error::Result;
use crate::moment::{Monomial, PolynomialMap, SliceModel};

pub const DEFAULT_EPSILON: f64 = 0.5;

#[derive(Clone, Debug)]
pub struct BundledModel {
    pub name: &'static str,
    pub model: SliceModel,
    /// Test vectors with vanishing linearized moment.
    pub balanced: Vec<StatePoint>,
}

impl BundledModel {
    pub fn is_linear(&self) -> bool {
        self.model.is_linear()
    }
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn mono(coeff: f64, powers: &[u32]) -> Monomial {
    Monomial::new(c(coeff), powers.to_vec())
}

/// Coordinate inclusion terms `z_j`, one output per input.
fn inclusion(n: usize) -> Vec<Vec<Monomial>> {
    PolynomialMap::identity(n).outputs().to_vec()
}

pub fn pauli_generators() -> Vec<DMatrix<C64>> {
    let i = C64::new(0.0, 1.0);
    let z = C64::zero();
    vec![
        DMatrix::from_row_slice(2, 2, &[i, z, z, -i]),
        DMatrix::from_row_slice(2, 2, &[z, i, i, z]),
        DMatrix::from_row_slice(2, 2, &[z, c(1.0), c(-1.0), z]),
    ]
}

pub fn su2_basis() -> LieAlgebraBasis {
    LieAlgebraBasis::orthonormalize(&pauli_generators()).expect("pauli generators are independent")
}

pub fn u2_basis() -> LieAlgebraBasis {
    let mut gens = pauli_generators();
    gens.push(DMatrix::identity(2, 2) * C64::new(0.0, 1.0));
    LieAlgebraBasis::orthonormalize(&gens).expect("u(2) generators are independent")
}

/// Induced action on `Sym^2 C^2` in the orthonormal basis
/// `e1 e1, (e1 e2 + e2 e1)/sqrt 2, e2 e2`.
pub fn sym2_rep(a: &DMatrix<C64>) -> DMatrix<C64> {
    let id = DMatrix::<C64>::identity(2, 2);
    let tensor = a.kronecker(&id) + id.kronecker(a);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut s = DMatrix::<C64>::zeros(4, 3);
    s[(0, 0)] = c(1.0);
    s[(1, 1)] = c(r);
    s[(2, 1)] = c(r);
    s[(3, 2)] = c(1.0);
    s.adjoint() * tensor * s
}

pub fn block_diag(blocks: &[DMatrix<C64>]) -> DMatrix<C64> {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::<C64>::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        out.view_mut((at, at), (b.nrows(), b.ncols())).copy_from(b);
        at += b.nrows();
    }
    out
}

/// `Phi = id` on the torus with weights `(1, -1)`.
pub fn linear_torus() -> Result<SliceModel> {
    SliceModel::identity(GroupAction::torus(vec![vec![1, -1]])?, 10.0)
}

/// `Phi = id` on two copies of the defining representation of `SU(2)`.
pub fn linear_su2() -> Result<SliceModel> {
    let basis = su2_basis();
    let reps = basis.generators().iter().map(|g| block_diag(&[g.clone(), g.clone()])).collect();
    SliceModel::identity(GroupAction::matrix(basis, reps)?, 10.0)
}

/// `(z1, z2) -> (z1, z2, eps z1^2)` for weights `(1, -1)` into `(1, -1, 2)`.
pub fn quadratic_torus(eps: f64) -> Result<SliceModel> {
    let inner = GroupAction::torus(vec![vec![1, -1]])?;
    let outer = inner.torus_with_weights(vec![vec![1, -1, 2]])?;
    let mut out = inclusion(2);
    out.push(vec![mono(eps, &[2, 0])]);
    SliceModel::new(inner, outer, PolynomialMap::new(2, out)?, 2.0, 1.0)
}

/// `(z1, z2, z3) -> (z1, z2 + eps z1^2, z3)` for weights `(1, 2, -3)`.
pub fn cubic_torus(eps: f64) -> Result<SliceModel> {
    let inner = GroupAction::torus(vec![vec![1, 2, -3]])?;
    let outer = inner.clone();
    let mut out = inclusion(3);
    out[1].push(mono(eps, &[2, 0, 0]));
    SliceModel::new(inner, outer, PolynomialMap::new(3, out)?, 2.0, 1.0)
}

/// Rank-two torus on `C^4` with an extra output `eps z1 z3` of weight `(1, 1)`.
pub fn two_torus(eps: f64) -> Result<SliceModel> {
    let inner = GroupAction::torus(vec![vec![1, -1, 0, 0], vec![0, 0, 1, -1]])?;
    let outer = inner.torus_with_weights(vec![vec![1, -1, 0, 0, 1], vec![0, 0, 1, -1, 1]])?;
    let mut out = inclusion(4);
    out.push(vec![mono(eps, &[1, 0, 1, 0])]);
    SliceModel::new(inner, outer, PolynomialMap::new(4, out)?, 2.0, 1.0)
}

fn pair_model(basis: LieAlgebraBasis, eps: f64) -> Result<SliceModel> {
    let inner_reps: Vec<_> = basis.generators().iter().map(|g| block_diag(&[g.clone(), g.clone()])).collect();
    let outer_reps: Vec<_> = basis.generators().iter().map(|g| block_diag(&[g.clone(), g.clone(), sym2_rep(g)])).collect();
    let inner = GroupAction::matrix(basis.clone(), inner_reps)?;
    let outer = GroupAction::matrix(basis, outer_reps)?;
    let mut out = inclusion(4);
    out.push(vec![mono(eps, &[2, 0, 0, 0])]);
    out.push(vec![mono(eps * std::f64::consts::SQRT_2, &[1, 1, 0, 0])]);
    out.push(vec![mono(eps, &[0, 2, 0, 0])]);
    SliceModel::new(inner, outer, PolynomialMap::new(4, out)?, 2.0, 1.0)
}

/// `(v, w) -> (v, w, eps v.v)` for `SU(2)` on `C^2 + C^2`, with the square
/// landing in `Sym^2 C^2`.
pub fn su2_pair(eps: f64) -> Result<SliceModel> {
    pair_model(su2_basis(), eps)
}

/// Same map for `U(2)`; every nonzero point has nonzero moment, so the
/// model only contributes stabilizer strata.
pub fn u2_pair(eps: f64) -> Result<SliceModel> {
    pair_model(u2_basis(), eps)
}

pub fn bundled_models() -> Vec<BundledModel> {
    let eps = DEFAULT_EPSILON;
    let z = C64::zero();
    let one = c(1.0);
    let cv = |v: &[C64]| StatePoint::from_vec(v.to_vec());
    vec![
        BundledModel {
            name: "linear_torus",
            model: linear_torus().expect("bundled model"),
            balanced: vec![StatePoint::from_real(&[1.0, 1.0])],
        },
        BundledModel {
            name: "linear_su2",
            model: linear_su2().expect("bundled model"),
            balanced: vec![cv(&[one, z, z, one])],
        },
        BundledModel {
            name: "quadratic_torus",
            model: quadratic_torus(eps).expect("bundled model"),
            balanced: vec![StatePoint::from_real(&[1.0, 1.0]), cv(&[C64::new(0.6, 0.8), one])],
        },
        BundledModel {
            name: "cubic_torus",
            model: cubic_torus(eps).expect("bundled model"),
            balanced: vec![StatePoint::from_real(&[1.0, 1.0, 1.0]), StatePoint::from_real(&[3f64.sqrt(), 0.0, 1.0])],
        },
        BundledModel {
            name: "two_torus",
            model: two_torus(eps).expect("bundled model"),
            balanced: vec![StatePoint::from_real(&[1.0, 1.0, 1.0, 1.0])],
        },
        BundledModel {
            name: "su2_pair",
            model: su2_pair(eps).expect("bundled model"),
            balanced: vec![cv(&[one, z, z, one])],
        },
        BundledModel { name: "u2_pair", model: u2_pair(eps).expect("bundled model"), balanced: vec![] },
    ]
}

pub fn bundled(name: &str) -> Option<BundledModel> {
    bundled_models().into_iter().find(|m| m.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ExpDirection;
    use nalgebra::DVector;

    #[test]
    fn sym2_is_a_representation() {
        let basis = su2_basis();
        let g = basis.generators();
        let d: Vec<_> = g.iter().map(sym2_rep).collect();
        for a in 0..3 {
            assert!((&d[a] + d[a].adjoint()).norm() < 1e-14);
            for b in 0..3 {
                let lhs = &d[a] * &d[b] - &d[b] * &d[a];
                let comm = &g[a] * &g[b] - &g[b] * &g[a];
                let rhs = sym2_rep(&comm);
                assert!((lhs - rhs).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn all_bundled_models_build() {
        let models = bundled_models();
        assert_eq!(models.len(), 7);
        for m in &models {
            for v in &m.balanced {
                assert!(m.model.linearized_moment(v).norm() < 1e-14, "{}", m.name);
            }
        }
    }

    #[test]
    fn pair_map_is_equivariant_under_imaginary_directions() {
        let model = su2_pair(0.5).unwrap();
        let x = StatePoint::from_vec(vec![C64::new(0.2, 0.1), C64::new(-0.3, 0.2), c(0.1), C64::new(0.0, 0.4)]);
        let xi = DVector::from_vec(vec![0.3, -0.2, 0.5]);
        let moved = model.inner().exp_action(&xi, 0.7, &x, ExpDirection::Imaginary);
        let lhs = model.phi().eval(moved.coords());
        let rhs = model.outer().exp_action(&xi, 0.7, &StatePoint::new(model.phi().eval(x.coords())), ExpDirection::Imaginary);
        assert!((lhs - rhs.coords()).norm() < 1e-12);
    }
}
