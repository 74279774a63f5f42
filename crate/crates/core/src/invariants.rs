//! Degenerations along one-parameter subgroups: where a point goes in the
//! limit, and whether the limit stays in its orbit.

use nalgebra::{DMatrix, DVector};

use crate::algebra::{ops_limit, stabilizer_of_map, ExpDirection, GroupAction, OneParameterSubgroup, StatePoint, DEFAULT_RANK_TOL};
use crate::error::{Error, Result};
use crate::moment::{linear_moment, MomentMap};

/// `<mu(x), xi_i>` over an orthonormal basis of the stabilizer of `x`.
/// Every entry vanishes for a genuine moment map, so a nonzero value flags a
/// broken model.
pub fn futaki_character(map: &dyn MomentMap, x: &StatePoint) -> Result<Vec<f64>> {
    let sigma = map.sigma(x)?;
    let st = stabilizer_of_map(&sigma, x, DEFAULT_RANK_TOL);
    let mu = map.moment(x)?;
    Ok((st.kernel.transpose() * &mu.coeffs).iter().copied().collect())
}

/// `<nu(v0), xi_rho>` at the limit `v0 = lim rho(lambda) v`.
pub fn degeneration_weight(action: &GroupAction, rho: &OneParameterSubgroup, v: &StatePoint) -> Result<f64> {
    let limit = ops_limit(action, rho, v)?.ok_or(Error::NoLimit)?;
    let xi = action.subgroup_generator(rho)?;
    Ok(linear_moment(action, &limit).pairing(&xi))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DegenerationRecord {
    pub rho: OneParameterSubgroup,
    pub start: StatePoint,
    pub limit: StatePoint,
    pub weight: f64,
    /// `(dim k_start, dim k_limit)`.
    pub dim_jump: (usize, usize),
    pub orbit_distance: f64,
    pub is_product: bool,
}

#[derive(Clone, Debug)]
pub struct OrbitOptions {
    /// Relative to `|v|`.
    pub orbit_tol: f64,
    pub max_iter: usize,
    /// Cap on the accumulated imaginary part of the group element.
    pub max_imaginary: f64,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        Self { orbit_tol: 1e-7, max_iter: 200, max_imaginary: 10.0 }
    }
}

/// Distance from `target` to the part of the complexified orbit of `v`
/// reached by group elements of bounded imaginary size, minimized by
/// Levenberg-Marquardt with left-trivialized updates.
pub fn orbit_distance(action: &GroupAction, v: &StatePoint, target: &StatePoint, opts: &OrbitOptions) -> Result<f64> {
    let k = action.dim();
    let n = action.ambient_dim();
    let mut w = v.clone();
    let mut residual = w.coords() - target.coords();
    let mut best = residual.norm();
    if k == 0 || best == 0.0 {
        return Ok(best);
    }
    let mut damping = 1e-3;
    let mut imaginary = DVector::<f64>::zeros(k);
    for _ in 0..opts.max_iter {
        let c = action.infinitesimal_action_complex(&w)?;
        // columns: A_a w for real directions, i A_a w for imaginary ones
        let jac = DMatrix::from_fn(2 * n, 2 * k, |i, col| {
            let (row, im) = if i < n { (i, false) } else { (i - n, true) };
            let z = if col < k { c[(row, col)] } else { c[(row, col - k)] * crate::algebra::C64::new(0.0, 1.0) };
            if im { z.im } else { z.re }
        });
        let r = crate::algebra::realify(&residual);
        let jt = jac.transpose();
        let normal = &jt * &jac;
        let grad = &jt * &r;
        let mut improved = false;
        for _ in 0..20 {
            let scaled = &normal + DMatrix::from_diagonal(&normal.diagonal().map(|d| damping * (d + 1e-12)));
            let Some(ch) = scaled.cholesky() else {
                damping *= 10.0;
                continue;
            };
            let step = -ch.solve(&grad);
            let re = step.rows(0, k).into_owned();
            let mut im = step.rows(k, k).into_owned();
            let next_imag = &imaginary + &im;
            if next_imag.norm() > opts.max_imaginary {
                let excess = opts.max_imaginary / next_imag.norm();
                im = &next_imag * excess - &imaginary;
            }
            let cand = action.exp_action(&re, 1.0, &action.exp_action(&im, 1.0, &w, ExpDirection::Imaginary), ExpDirection::Real);
            let cres = cand.coords() - target.coords();
            if cres.norm() < best {
                best = cres.norm();
                imaginary += &im;
                w = cand;
                residual = cres;
                damping = (damping * 0.3).max(1e-12);
                improved = true;
                break;
            }
            damping *= 10.0;
        }
        if !improved || best <= 1e-15 * v.norm() {
            break;
        }
    }
    Ok(best)
}

pub fn analyze_degeneration(
    action: &GroupAction,
    rho: &OneParameterSubgroup,
    v: &StatePoint,
    opts: &OrbitOptions,
) -> Result<DegenerationRecord> {
    let limit = ops_limit(action, rho, v)?.ok_or(Error::NoLimit)?;
    let xi = action.subgroup_generator(rho)?;
    let weight = linear_moment(action, &limit).pairing(&xi);
    let dim_start = crate::algebra::stabilizer(action, v, DEFAULT_RANK_TOL)?.dim;
    let dim_limit = crate::algebra::stabilizer(action, &limit, DEFAULT_RANK_TOL)?.dim;
    let orbit_distance = orbit_distance(action, v, &limit, opts)?;
    let is_product = dim_start == dim_limit && orbit_distance < opts.orbit_tol * v.norm().max(f64::MIN_POSITIVE);
    Ok(DegenerationRecord {
        rho: rho.clone(),
        start: v.clone(),
        limit,
        weight,
        dim_jump: (dim_start, dim_limit),
        orbit_distance,
        is_product,
    })
}

#[derive(Clone, Debug, Default)]
pub struct SemicontinuityReport {
    pub records: Vec<DegenerationRecord>,
    pub violations: Vec<String>,
}

impl SemicontinuityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `dim k_limit >= dim k_v` on every case, strictly whenever the
/// limit left the orbit.
pub fn semicontinuity_scan(
    action: &GroupAction,
    cases: &[(OneParameterSubgroup, StatePoint)],
    opts: &OrbitOptions,
) -> SemicontinuityReport {
    let mut report = SemicontinuityReport::default();
    for (i, (rho, v)) in cases.iter().enumerate() {
        match analyze_degeneration(action, rho, v, opts) {
            Ok(rec) => {
                let (a, b) = rec.dim_jump;
                if b < a {
                    report.violations.push(format!("case {i}: stabilizer dimension drops {a} -> {b}"));
                }
                let left = rec.orbit_distance >= opts.orbit_tol * v.norm().max(f64::MIN_POSITIVE);
                if (left || !rec.is_product) && b <= a {
                    report.violations.push(format!("case {i}: limit left the orbit without a stabilizer jump ({a} -> {b})"));
                }
                report.records.push(rec);
            }
            Err(e) => report.violations.push(format!("case {i}: {e}")),
        }
    }
    report
}
