//! Moment maps: the quadratic map `nu` of a linear action and the nonlinear
//! map `mu` pulled back through an equivariant polynomial slice, with the
//! second-order Taylor diagnostics relating the two.

use nalgebra::{DMatrix, DVector, SVD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{omega0, ExpDirection, GroupAction, StatePoint, C64};
use crate::error::{Error, Result};

/// An element of the algebra in orthonormal coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentValue {
    pub coeffs: DVector<f64>,
}

impl MomentValue {
    pub fn zero(dim: usize) -> Self {
        Self { coeffs: DVector::zeros(dim) }
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }

    pub fn pairing(&self, xi: &DVector<f64>) -> f64 {
        self.coeffs.dot(xi)
    }
}

/// `<nu(v), xi_a> = 1/2 Im<A_a v, v>`.
pub fn linear_moment(action: &GroupAction, v: &StatePoint) -> MomentValue {
    let x = v.coords();
    let coeffs = match action.torus_weights() {
        Some(t) => {
            let p = t.pairings();
            DVector::from_fn(action.dim(), |a, _| {
                -0.5 * (0..x.len()).map(|j| p[(a, j)] * x[j].norm_sqr()).sum::<f64>()
            })
        }
        None => DVector::from_fn(action.dim(), |a, _| 0.5 * (action.rep_matrix(a) * x).dotc(x).im),
    };
    MomentValue { coeffs }
}

/// `d nu_v(u)`, characterized by `<d nu_v(u), xi> = Im<A_xi v, u>`.
pub fn moment_derivative(action: &GroupAction, v: &StatePoint, u: &DVector<C64>) -> MomentValue {
    let coeffs = DVector::from_fn(action.dim(), |a, _| {
        let mut xi = DVector::zeros(action.dim());
        xi[a] = 1.0;
        omega0(&action.apply(&xi, v.coords()), u)
    });
    MomentValue { coeffs }
}

/// A complex monomial `coeff * prod_j z_j^powers[j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub coeff: C64,
    pub powers: Vec<u32>,
}

impl Monomial {
    pub fn new(coeff: C64, powers: Vec<u32>) -> Self {
        Self { coeff, powers }
    }

    pub fn degree(&self) -> u32 {
        self.powers.iter().sum()
    }

    fn eval(&self, x: &DVector<C64>) -> C64 {
        self.powers.iter().enumerate().fold(self.coeff, |acc, (j, &p)| acc * x[j].powu(p))
    }

    fn partial(&self, x: &DVector<C64>, j: usize) -> C64 {
        let pj = self.powers[j];
        if pj == 0 {
            return C64::new(0.0, 0.0);
        }
        self.powers.iter().enumerate().fold(self.coeff * pj as f64, |acc, (i, &p)| {
            let e = if i == j { p - 1 } else { p };
            acc * x[i].powu(e)
        })
    }
}

/// A holomorphic polynomial map `C^N -> C^M`, one monomial list per output.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialMap {
    input_dim: usize,
    outputs: Vec<Vec<Monomial>>,
}

impl PolynomialMap {
    pub fn new(input_dim: usize, outputs: Vec<Vec<Monomial>>) -> Result<Self> {
        for m in outputs.iter().flatten() {
            if m.powers.len() != input_dim {
                return Err(Error::DimensionMismatch { expected: input_dim, got: m.powers.len() });
            }
        }
        Ok(Self { input_dim, outputs })
    }

    /// The inclusion `C^N -> C^N`.
    pub fn identity(n: usize) -> Self {
        let outputs = (0..n)
            .map(|j| {
                let mut powers = vec![0; n];
                powers[j] = 1;
                vec![Monomial::new(C64::new(1.0, 0.0), powers)]
            })
            .collect();
        Self { input_dim: n, outputs }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.outputs.len()
    }

    pub fn outputs(&self) -> &[Vec<Monomial>] {
        &self.outputs
    }

    pub fn eval(&self, x: &DVector<C64>) -> DVector<C64> {
        DVector::from_iterator(self.outputs.len(), self.outputs.iter().map(|ms| ms.iter().map(|m| m.eval(x)).sum()))
    }

    /// Complex Jacobian `M x N`.
    pub fn jacobian(&self, x: &DVector<C64>) -> DMatrix<C64> {
        DMatrix::from_fn(self.outputs.len(), self.input_dim, |i, j| {
            self.outputs[i].iter().map(|m| m.partial(x, j)).sum()
        })
    }

    /// Largest total degree appearing.
    pub fn degree(&self) -> u32 {
        self.outputs.iter().flatten().map(Monomial::degree).max().unwrap_or(0)
    }
}

/// Anything with a moment map for a group action, and the infinitesimal
/// action measured in its own metric.
pub trait MomentMap {
    fn action(&self) -> &GroupAction;
    fn moment(&self, x: &StatePoint) -> Result<MomentValue>;
    /// Real matrix whose Gram matrix is `Q_x` in the relevant metric.
    fn sigma(&self, x: &StatePoint) -> Result<DMatrix<f64>>;
}

impl MomentMap for GroupAction {
    fn action(&self) -> &GroupAction {
        self
    }

    fn moment(&self, x: &StatePoint) -> Result<MomentValue> {
        if x.dim() != self.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim(), got: x.dim() });
        }
        Ok(linear_moment(self, x))
    }

    fn sigma(&self, x: &StatePoint) -> Result<DMatrix<f64>> {
        self.infinitesimal_action(x)
    }
}

const EQUIVARIANCE_TOL: f64 = 1e-9;
const EQUIVARIANCE_SAMPLES: usize = 16;

/// An equivariant polynomial embedding of a ball in the inner space into an
/// outer representation of the same algebra, with the symplectic form
/// `omega_scale * Im<.,.>` on the outer space pulled back.
#[derive(Clone, Debug)]
pub struct SliceModel {
    inner: GroupAction,
    outer: GroupAction,
    phi: PolynomialMap,
    ball_radius: f64,
    omega_scale: f64,
}

impl SliceModel {
    pub fn new(
        inner: GroupAction,
        outer: GroupAction,
        phi: PolynomialMap,
        ball_radius: f64,
        omega_scale: f64,
    ) -> Result<Self> {
        if inner.dim() != outer.dim() {
            return Err(Error::DimensionMismatch { expected: inner.dim(), got: outer.dim() });
        }
        if phi.input_dim() != inner.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: inner.ambient_dim(), got: phi.input_dim() });
        }
        if phi.output_dim() != outer.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: outer.ambient_dim(), got: phi.output_dim() });
        }
        if !(ball_radius > 0.0) || !(omega_scale > 0.0) {
            return Err(Error::InvalidModel("ball radius and form scale must be positive".into()));
        }
        let model = Self { inner, outer, phi, ball_radius, omega_scale };
        model.validate()?;
        Ok(model)
    }

    /// `Phi = id` on a linear action.
    pub fn identity(action: GroupAction, ball_radius: f64) -> Result<Self> {
        let n = action.ambient_dim();
        Self::new(action.clone(), action, PolynomialMap::identity(n), ball_radius, 1.0)
    }

    fn validate(&self) -> Result<()> {
        let n = self.inner.ambient_dim();
        let origin = DVector::<C64>::zeros(n);
        let base = StatePoint::new(self.phi.eval(&origin));
        let base_moment = linear_moment(&self.outer, &base).norm();
        if base_moment > 1e-12 {
            return Err(Error::InvalidModel(format!("base point is not a moment zero (|nu| = {base_moment:.3e})")));
        }
        let j0 = self.phi.jacobian(&origin);
        let smin = SVD::new(j0, false, false).singular_values.iter().copied().fold(f64::INFINITY, f64::min);
        if !(smin > 1e-10) {
            return Err(Error::InvalidModel("derivative at the origin is not injective".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let k = self.inner.dim();
        for _ in 0..EQUIVARIANCE_SAMPLES {
            let mut x = DVector::from_fn(n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let scale = 0.5 * self.ball_radius / x.norm().max(1e-300);
            x *= C64::new(scale, 0.0);
            let xi = DVector::from_fn(k, |_, _| rng.gen_range(-1.0..1.0));
            let s = rng.gen_range(-2.0..2.0);
            let moved = self.inner.exp_action(&xi, s, &StatePoint::new(x.clone()), ExpDirection::Real);
            let lhs = self.phi.eval(moved.coords());
            let rhs = self.outer.exp_action(&xi, s, &StatePoint::new(self.phi.eval(&x)), ExpDirection::Real);
            let residual = (&lhs - rhs.coords()).norm();
            if residual > EQUIVARIANCE_TOL * (1.0 + lhs.norm()) {
                return Err(Error::InvalidModel(format!("map is not equivariant (residual {residual:.3e})")));
            }
        }
        Ok(())
    }

    pub fn inner(&self) -> &GroupAction {
        &self.inner
    }

    pub fn outer(&self) -> &GroupAction {
        &self.outer
    }

    pub fn phi(&self) -> &PolynomialMap {
        &self.phi
    }

    pub fn ball_radius(&self) -> f64 {
        self.ball_radius
    }

    pub fn omega_scale(&self) -> f64 {
        self.omega_scale
    }

    pub fn is_linear(&self) -> bool {
        self.phi.degree() <= 1
    }

    pub fn check_ball(&self, x: &StatePoint) -> Result<()> {
        if x.dim() != self.inner.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.inner.ambient_dim(), got: x.dim() });
        }
        if x.norm() > self.ball_radius * (1.0 + 1e-12) {
            return Err(Error::OutsideBall { norm: x.norm(), radius: self.ball_radius });
        }
        Ok(())
    }

    /// Linear moment map of the action linearized at the origin, for the
    /// form pulled back by the derivative there.
    pub fn linearized_moment(&self, v: &StatePoint) -> MomentValue {
        let j0 = self.phi.jacobian(&DVector::zeros(self.inner.ambient_dim()));
        let image = StatePoint::new(j0 * v.coords());
        let mut m = linear_moment(&self.outer, &image);
        m.coeffs *= self.omega_scale;
        m
    }

    pub fn derivative_at_origin(&self) -> DMatrix<C64> {
        self.phi.jacobian(&DVector::zeros(self.inner.ambient_dim()))
    }
}

impl MomentMap for SliceModel {
    fn action(&self) -> &GroupAction {
        &self.inner
    }

    fn moment(&self, x: &StatePoint) -> Result<MomentValue> {
        slice_moment(self, x)
    }

    fn sigma(&self, x: &StatePoint) -> Result<DMatrix<f64>> {
        pulled_back_sigma(self, x)
    }
}

/// `mu(x) = omega_scale * nu_W(Phi(x))`.
pub fn slice_moment(model: &SliceModel, x: &StatePoint) -> Result<MomentValue> {
    model.check_ball(x)?;
    let image = StatePoint::new(model.phi.eval(x.coords()));
    let mut m = linear_moment(&model.outer, &image);
    m.coeffs *= model.omega_scale;
    Ok(m)
}

/// `Omega_x(u, w) = omega_scale * Im<dPhi_x u, dPhi_x w>`.
pub fn pulled_back_form(model: &SliceModel, x: &StatePoint, u: &DVector<C64>, w: &DVector<C64>) -> Result<f64> {
    model.check_ball(x)?;
    let j = model.phi.jacobian(x.coords());
    Ok(model.omega_scale * omega0(&(&j * u), &(&j * w)))
}

/// The infinitesimal action at `x` measured in the pulled-back metric: a
/// `2M x k` real matrix with columns `sqrt(scale) * dPhi_x(A_a x)`.
pub fn pulled_back_sigma(model: &SliceModel, x: &StatePoint) -> Result<DMatrix<f64>> {
    model.check_ball(x)?;
    let j = model.phi.jacobian(x.coords());
    let c = model.inner.infinitesimal_action_complex(x)?;
    let image = j * c;
    let root = model.omega_scale.sqrt();
    let m = image.nrows();
    Ok(DMatrix::from_fn(2 * m, image.ncols(), |i, a| {
        root * if i < m { image[(i, a)].re } else { image[(i - m, a)].im }
    }))
}

/// `|mu(tv) - t^2 nu_1(v)|`, where `nu_1` is the linearized moment map; the
/// quadratic part of `mu` along the ray.
pub fn taylor_defect(model: &SliceModel, v: &StatePoint, t: f64) -> Result<f64> {
    let mu = slice_moment(model, &v.scaled(t))?;
    let quad = model.linearized_moment(v);
    Ok((mu.coeffs - quad.coeffs * (t * t)).norm())
}
