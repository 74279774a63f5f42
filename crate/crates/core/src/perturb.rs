//! Perturbing approximate zeros of a slice moment map to genuine zeros
//! along `y = exp(i eta) x0`, with a certificate that can be rechecked from
//! its raw fields, and the scaling pipeline that finds a small enough `t`
//! for `t v`.

use nalgebra::{DMatrix, DVector};

use crate::algebra::{q_operator_from, stabilizer, stabilizer_of_map, ExpDirection, StatePoint, DEFAULT_RANK_TOL};
use crate::error::{Error, Result};
use crate::moment::{pulled_back_sigma, slice_moment, SliceModel};
use crate::sampling::ball_samples;
use crate::stability::{kempf_ness_flow, FlowOptions};

#[derive(Clone, Debug)]
pub struct LambdaOptions {
    pub margin: f64,
    /// Interior low-discrepancy samples, on top of the centre and the
    /// `2k` axis points near the boundary.
    pub samples: usize,
    pub seed: u64,
    pub rank_tol: f64,
}

impl Default for LambdaOptions {
    fn default() -> Self {
        Self { margin: 0.25, samples: 32, seed: 0, rank_tol: DEFAULT_RANK_TOL }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LambdaSample {
    pub xi: DVector<f64>,
    pub lambda: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LambdaEstimate {
    /// `(1 + margin) * max` of the sampled values.
    pub lambda: f64,
    pub max_sampled: f64,
    pub margin: f64,
    pub seed: u64,
    pub interior_samples: usize,
    pub samples: Vec<LambdaSample>,
}

fn sample_points(dim: usize, delta: f64, opts: &LambdaOptions) -> Vec<DVector<f64>> {
    let mut pts = vec![DVector::zeros(dim)];
    let edge = delta * (1.0 - 1e-9);
    for a in 0..dim {
        for sign in [1.0, -1.0] {
            let mut p = DVector::zeros(dim);
            p[a] = sign * edge;
            pts.push(p);
        }
    }
    pts.extend(ball_samples(dim, opts.samples, opts.seed).into_iter().map(|p| p * delta));
    pts
}

/// `Lambda_x = |Q_x^{-1}|` in the pulled-back geometry.
pub fn lambda_at(model: &SliceModel, x: &StatePoint, rank_tol: f64) -> Result<f64> {
    let sigma = pulled_back_sigma(model, x)?;
    let st = stabilizer_of_map(&sigma, x, rank_tol);
    Ok(q_operator_from(&sigma, &st)?.lambda)
}

/// Sampled upper estimate of `Lambda_x` over `x = exp(i xi) x0`, `|xi| < delta`.
pub fn lambda_bound(model: &SliceModel, x0: &StatePoint, delta: f64, opts: &LambdaOptions) -> Result<LambdaEstimate> {
    model.check_ball(x0)?;
    let dim = model.inner().dim();
    let mut samples = Vec::new();
    let mut max_sampled = 0.0f64;
    for xi in sample_points(dim, delta, opts) {
        let x = model.inner().exp_action(&xi, 1.0, x0, ExpDirection::Imaginary);
        if x.norm() > model.ball_radius() {
            return Err(Error::BallExitsModel { norm: x.norm(), radius: model.ball_radius() });
        }
        let lambda = lambda_at(model, &x, opts.rank_tol)?;
        max_sampled = max_sampled.max(lambda);
        samples.push(LambdaSample { xi, lambda });
    }
    Ok(LambdaEstimate {
        lambda: (1.0 + opts.margin) * max_sampled,
        max_sampled,
        margin: opts.margin,
        seed: opts.seed,
        interior_samples: opts.samples,
        samples,
    })
}

/// Record of a verified zero `y = exp(i eta) x0` of the slice moment map.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroCertificate {
    pub x0: StatePoint,
    pub eta: DVector<f64>,
    pub y: StatePoint,
    pub lambda_used: f64,
    pub delta_used: f64,
    pub mu_norm_initial: f64,
    pub mu_norm_final: f64,
    pub eta_norm: f64,
    pub zero_tol: f64,
    pub lambda_margin: f64,
    pub lambda_seed: u64,
    pub lambda_interior_samples: usize,
    pub lambda_samples: Vec<LambdaSample>,
    /// `(|eta|, |mu|)` along the accepted continuation path.
    pub trace: Vec<(f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct PerturbOptions {
    pub lambda: LambdaOptions,
    pub max_steps: usize,
    pub max_backtracks: usize,
    pub orthogonality_tol: f64,
    /// Overrides the default `1e-10 (1 + |x0|^2)`.
    pub zero_tol: Option<f64>,
}

impl Default for PerturbOptions {
    fn default() -> Self {
        Self { lambda: LambdaOptions::default(), max_steps: 500, max_backtracks: 40, orthogonality_tol: 1e-9, zero_tol: None }
    }
}

pub fn default_zero_tol(x0: &StatePoint) -> f64 {
    1e-10 * (1.0 + x0.norm_sq())
}

/// Damped Newton continuation from `x0` to a zero of the slice moment map
/// inside the `delta`-ball of `k_{x0}^perp`.
pub fn perturb_to_zero(model: &SliceModel, x0: &StatePoint, delta: f64, opts: &PerturbOptions) -> Result<ZeroCertificate> {
    model.check_ball(x0)?;
    if !(delta > 0.0) {
        return Err(Error::PreconditionFailed(format!("delta must be positive, got {delta}")));
    }
    let inner = model.inner();
    let mu0 = slice_moment(model, x0)?;
    let mu0_norm = mu0.norm();
    let st0 = stabilizer(inner, x0, opts.lambda.rank_tol)?;
    let residual = (st0.kernel.transpose() * &mu0.coeffs).amax();
    if residual > opts.orthogonality_tol {
        return Err(Error::OrthogonalityFailed { residual });
    }
    let zero_tol = opts.zero_tol.unwrap_or_else(|| default_zero_tol(x0));
    let complement = st0.complement.clone();
    let trivial = |lambda: Option<LambdaEstimate>| {
        let (lambda_used, samples) = lambda.map_or((0.0, Vec::new()), |l| (l.lambda, l.samples));
        ZeroCertificate {
            x0: x0.clone(),
            eta: DVector::zeros(inner.dim()),
            y: x0.clone(),
            lambda_used,
            delta_used: delta,
            mu_norm_initial: mu0_norm,
            mu_norm_final: mu0_norm,
            eta_norm: 0.0,
            zero_tol,
            lambda_margin: opts.lambda.margin,
            lambda_seed: opts.lambda.seed,
            lambda_interior_samples: opts.lambda.samples,
            lambda_samples: samples,
            trace: vec![(0.0, mu0_norm)],
        }
    };
    if complement.ncols() == 0 {
        if mu0_norm < zero_tol {
            return Ok(trivial(None));
        }
        return Err(Error::InternalConsistency(format!(
            "stabilizer is the whole algebra but |mu(x0)| = {mu0_norm:.3e}"
        )));
    }
    let lambda = lambda_bound(model, x0, delta, &opts.lambda)?;
    if mu0_norm < zero_tol {
        return Ok(trivial(Some(lambda)));
    }
    let product = lambda.lambda * mu0_norm;
    if product >= delta {
        return Err(Error::HypothesisFailed { product, delta, lambda: lambda.lambda, mu_norm: mu0_norm });
    }

    let max_step = delta / 8.0;
    let mut eta = DVector::<f64>::zeros(inner.dim());
    let mut y = x0.clone();
    let mut mu = mu0.coeffs.clone();
    let mut mu_norm = mu0_norm;
    let mut trace = vec![(0.0, mu0_norm)];
    let mut steps = 0;
    while mu_norm >= zero_tol {
        if steps == opts.max_steps {
            return Err(Error::Stagnation { iterations: steps, mu_norm });
        }
        steps += 1;
        let sigma = pulled_back_sigma(model, &y)?;
        let sv = &sigma * &complement;
        let m: DMatrix<f64> = sv.transpose() * &sv;
        let rhs = complement.transpose() * &mu;
        let Some(ch) = m.cholesky() else {
            return Err(Error::Stagnation { iterations: steps, mu_norm });
        };
        let mut d = -(&complement * ch.solve(&rhs));
        let dn = d.norm();
        if dn > max_step {
            d *= max_step / dn;
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..opts.max_backtracks {
            let candidate = &eta + &d * alpha;
            let cy = inner.exp_action(&candidate, 1.0, x0, ExpDirection::Imaginary);
            if model.check_ball(&cy).is_ok() {
                let cmu = slice_moment(model, &cy)?.coeffs;
                if cmu.norm() < mu_norm {
                    accepted = Some((candidate, cy, cmu));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((e, cy, cmu)) = accepted else {
            return Err(Error::Stagnation { iterations: steps, mu_norm });
        };
        eta = e;
        y = cy;
        mu_norm = cmu.norm();
        mu = cmu;
        trace.push((eta.norm(), mu_norm));
        if eta.norm() >= delta {
            return Err(Error::LeftBall { eta_norm: eta.norm(), delta, trace });
        }
    }
    let eta_norm = eta.norm();
    let bound = lambda.lambda * mu0_norm;
    if eta_norm > bound * (1.0 + 1e-6) {
        return Err(Error::EtaBoundExceeded { eta_norm, bound });
    }
    Ok(ZeroCertificate {
        x0: x0.clone(),
        eta,
        y,
        lambda_used: lambda.lambda,
        delta_used: delta,
        mu_norm_initial: mu0_norm,
        mu_norm_final: mu_norm,
        eta_norm,
        zero_tol,
        lambda_margin: lambda.margin,
        lambda_seed: lambda.seed,
        lambda_interior_samples: lambda.interior_samples,
        lambda_samples: lambda.samples,
        trace,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateCheck {
    pub failures: Vec<String>,
}

impl CertificateCheck {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Recomputes every certificate invariant from the raw fields, using only
/// the model and the algebra.
pub fn check_certificate(model: &SliceModel, cert: &ZeroCertificate) -> CertificateCheck {
    let mut failures = Vec::new();
    let inner = model.inner();
    let n = inner.ambient_dim();
    if cert.x0.dim() != n || cert.y.dim() != n || cert.eta.len() != inner.dim() {
        failures.push("dimensions do not match the model".into());
        return CertificateCheck { failures };
    }
    if model.check_ball(&cert.x0).is_err() {
        failures.push("x0 lies outside the model ball".into());
        return CertificateCheck { failures };
    }
    if !(cert.delta_used > 0.0) {
        failures.push("delta is not positive".into());
    }
    let y = inner.exp_action(&cert.eta, 1.0, &cert.x0, ExpDirection::Imaginary);
    let dy = (y.coords() - cert.y.coords()).norm();
    if !(dy <= 1e-9 * y.norm().max(1.0)) {
        failures.push(format!("y differs from exp(i eta) x0 by {dy:.3e}"));
    }
    match slice_moment(model, &cert.x0) {
        Ok(m) if close(m.norm(), cert.mu_norm_initial) => {}
        Ok(m) => failures.push(format!("|mu(x0)| = {:.12e}, recorded {:.12e}", m.norm(), cert.mu_norm_initial)),
        Err(e) => failures.push(format!("mu(x0): {e}")),
    }
    match slice_moment(model, &y) {
        Ok(m) => {
            if !close(m.norm(), cert.mu_norm_final) {
                failures.push(format!("|mu(y)| = {:.12e}, recorded {:.12e}", m.norm(), cert.mu_norm_final));
            }
            if !(m.norm() < cert.zero_tol) {
                failures.push(format!("|mu(y)| = {:.3e} is not below zero_tol {:.3e}", m.norm(), cert.zero_tol));
            }
        }
        Err(e) => failures.push(format!("mu(y): {e}")),
    }
    if !(cert.zero_tol > 0.0 && cert.zero_tol <= 1e-6 * (1.0 + cert.x0.norm_sq())) {
        failures.push(format!("zero_tol {:.3e} is out of range", cert.zero_tol));
    }
    if !close(cert.eta.norm(), cert.eta_norm) {
        failures.push(format!("|eta| = {:.12e}, recorded {:.12e}", cert.eta.norm(), cert.eta_norm));
    }
    match stabilizer(inner, &cert.x0, DEFAULT_RANK_TOL) {
        Ok(st) => {
            let r = if st.dim > 0 { (st.kernel.transpose() * &cert.eta).amax() } else { 0.0 };
            if r > 1e-9 * cert.eta.norm().max(1.0) {
                failures.push(format!("eta has component {r:.3e} along the stabilizer of x0"));
            }
            if st.complement_dim() == 0 {
                if cert.eta.norm() != 0.0 || !cert.lambda_samples.is_empty() || cert.lambda_used != 0.0 {
                    failures.push("trivial certificate carries a nonzero eta or lambda".into());
                }
            } else {
                let opts = LambdaOptions {
                    margin: cert.lambda_margin,
                    samples: cert.lambda_interior_samples,
                    seed: cert.lambda_seed,
                    rank_tol: DEFAULT_RANK_TOL,
                };
                match lambda_bound(model, &cert.x0, cert.delta_used, &opts) {
                    Ok(est) => {
                        let same = est.samples.len() == cert.lambda_samples.len()
                            && est.samples.iter().zip(&cert.lambda_samples).all(|(a, b)| {
                                a.xi.len() == b.xi.len()
                                    && a.xi.iter().zip(b.xi.iter()).all(|(p, q)| close(*p, *q))
                                    && close(a.lambda, b.lambda)
                            });
                        if !same {
                            failures.push("lambda samples do not match their regeneration".into());
                        }
                        if !close(est.lambda, cert.lambda_used) {
                            failures.push(format!("lambda = {:.12e}, recorded {:.12e}", est.lambda, cert.lambda_used));
                        }
                    }
                    Err(e) => failures.push(format!("lambda regeneration: {e}")),
                }
                let recorded_max = cert.lambda_samples.iter().map(|s| s.lambda).fold(0.0, f64::max);
                if !close((1.0 + cert.lambda_margin) * recorded_max, cert.lambda_used) {
                    failures.push("lambda is not the margin times the sampled maximum".into());
                }
            }
        }
        Err(e) => failures.push(format!("stabilizer: {e}")),
    }
    if cert.mu_norm_initial >= cert.zero_tol && !(cert.lambda_used * cert.mu_norm_initial < cert.delta_used) {
        failures.push("hypothesis lambda |mu(x0)| < delta does not hold".into());
    }
    if !(cert.eta_norm <= cert.lambda_used * cert.mu_norm_initial * (1.0 + 1e-6)) {
        failures.push("|eta| exceeds lambda |mu(x0)|".into());
    }
    CertificateCheck { failures }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingSample {
    pub t: f64,
    pub mu_norm: f64,
    /// `Lambda` at `t v` itself.
    pub lambda_point: f64,
    /// Sampled bound over the `delta`-ball, `None` if it could not be formed.
    pub lambda_bound: Option<f64>,
    pub product: Option<f64>,
    pub note: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ScalingReport {
    pub v: StatePoint,
    /// `v` after flowing its linearization to a zero.
    pub v_balanced: StatePoint,
    pub t_star: f64,
    pub certificate: ZeroCertificate,
    pub samples: Vec<ScalingSample>,
    /// `(t, |mu(t v_balanced)|)` over the whole grid.
    pub decay: Vec<(f64, f64)>,
}

/// Least-squares slope of `log y` against `log x`, skipping nonpositive values.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// `count` geometric points from `start` to `stop` inclusive.
pub fn geometric_grid(start: f64, stop: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![start];
    }
    let ratio = (stop / start).ln() / (count - 1) as f64;
    (0..count).map(|i| start * (ratio * i as f64).exp()).collect()
}

/// Walks `t` down the grid until the hypothesis holds at `t v`, then
/// certifies a zero there.
pub fn scaling_search(
    model: &SliceModel,
    v: &StatePoint,
    delta: f64,
    t_grid: &[f64],
    opts: &PerturbOptions,
) -> Result<ScalingReport> {
    let j0 = model.derivative_at_origin();
    let image = StatePoint::new(&j0 * v.coords());
    let verdict = kempf_ness_flow(model.outer(), &image, &FlowOptions::default())?;
    if !verdict.class.is_polystable() {
        return Err(Error::PreconditionFailed(format!(
            "linearization of v is {}, not polystable",
            verdict.class.as_str()
        )));
    }
    let zero = verdict.zero_point.expect("polystable verdicts carry a zero");
    let pinv = j0.pseudo_inverse(1e-12).map_err(|e| Error::InternalConsistency(e.to_string()))?;
    let v_balanced = StatePoint::new(pinv * zero.coords());
    let nu1 = model.linearized_moment(&v_balanced).norm();
    if nu1 > 1e-8 * v_balanced.norm_sq().max(1e-300) {
        return Err(Error::PreconditionFailed(format!("linearized moment {nu1:.3e} does not vanish")));
    }
    let mut grid = t_grid.to_vec();
    grid.sort_by(|a, b| b.total_cmp(a));
    let decay = grid
        .iter()
        .filter_map(|&t| slice_moment(model, &v_balanced.scaled(t)).ok().map(|m| (t, m.norm())))
        .collect();
    let mut samples = Vec::new();
    for &t in &grid {
        let x0 = v_balanced.scaled(t);
        let mu_norm = match slice_moment(model, &x0) {
            Ok(m) => m.norm(),
            Err(e) => {
                samples.push(ScalingSample { t, mu_norm: f64::NAN, lambda_point: f64::NAN, lambda_bound: None, product: None, note: Some(e.to_string()) });
                continue;
            }
        };
        let lambda_point = lambda_at(model, &x0, opts.lambda.rank_tol).unwrap_or(f64::INFINITY);
        let (bound, note) = match lambda_bound(model, &x0, delta, &opts.lambda) {
            Ok(l) => (Some(l.lambda), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let product = bound.map(|l| l * mu_norm);
        samples.push(ScalingSample { t, mu_norm, lambda_point, lambda_bound: bound, product, note });
        if product.is_some_and(|p| p < delta) || mu_norm < opts.zero_tol.unwrap_or_else(|| default_zero_tol(&x0)) {
            let certificate = perturb_to_zero(model, &x0, delta, opts)?;
            return Ok(ScalingReport { v: v.clone(), v_balanced, t_star: t, certificate, samples, decay });
        }
    }
    Err(Error::NeverSatisfied {
        v_balanced,
        samples: samples
            .iter()
            .map(|s| (s.t, s.mu_norm, s.lambda_bound.unwrap_or(f64::NAN), s.product.unwrap_or(f64::NAN)))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{linear_torus, quadratic_torus};
    use crate::moment::linear_moment;

    #[test]
    fn lambda_at_origin_of_ball_matches_closed_form() {
        let model = linear_torus().unwrap();
        let x0 = StatePoint::from_real(&[2.0, 1.0]);
        let est = lambda_bound(&model, &x0, 0.1, &LambdaOptions::default()).unwrap();
        assert!((est.samples[0].lambda - 0.4).abs() < 1e-14);
        assert!(est.lambda >= 1.25 * 0.4);
        assert_eq!(
            lambda_bound(&model, &StatePoint::zero(2), 0.1, &LambdaOptions::default()).unwrap_err(),
            Error::EmptyComplement
        );
    }

    #[test]
    fn lambda_scales_inverse_quadratically() {
        let model = linear_torus().unwrap();
        let x0 = StatePoint::from_real(&[2.0, 1.0]);
        let a = lambda_bound(&model, &x0, 0.2, &LambdaOptions::default()).unwrap().lambda;
        let b = lambda_bound(&model, &x0.scaled(0.1), 0.2, &LambdaOptions::default()).unwrap().lambda;
        assert!((b * 0.01 - a).abs() < 1e-10 * a);
    }

    #[test]
    fn linear_example_certificate() {
        let model = linear_torus().unwrap();
        let x0 = StatePoint::from_real(&[2.0, 1.0]);
        let cert = perturb_to_zero(&model, &x0, 1.0, &PerturbOptions::default()).unwrap();
        let expect = std::f64::consts::SQRT_2 / 2.0 * 2f64.ln();
        assert!((cert.eta_norm - expect).abs() < 1e-8);
        assert!((cert.y.coords()[0].norm() - std::f64::consts::SQRT_2).abs() < 1e-8);
        assert!((cert.y.coords()[1].norm() - std::f64::consts::SQRT_2).abs() < 1e-8);
        assert!(linear_moment(model.inner(), &cert.y).norm() < cert.zero_tol);
        assert!(check_certificate(&model, &cert).passed(), "{:?}", check_certificate(&model, &cert));
        // the continuation path is monotone in |mu|
        assert!(cert.trace.windows(2).all(|w| w[1].1 < w[0].1));
    }

    #[test]
    fn refusal_is_honest() {
        let model = linear_torus().unwrap();
        let x0 = StatePoint::from_real(&[2.0, 1.0]);
        match perturb_to_zero(&model, &x0, 0.3, &PerturbOptions::default()) {
            Err(Error::HypothesisFailed { product, delta, lambda, mu_norm }) => {
                assert!(product >= delta);
                assert!((lambda * mu_norm - product).abs() < 1e-15);
            }
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn zero_start_gives_trivial_certificate() {
        let model = linear_torus().unwrap();
        let x0 = StatePoint::from_real(&[1.0, 1.0]);
        let cert = perturb_to_zero(&model, &x0, 0.5, &PerturbOptions::default()).unwrap();
        assert_eq!(cert.eta_norm, 0.0);
        assert_eq!(cert.y, x0);
        assert!(check_certificate(&model, &cert).passed());
    }

    #[test]
    fn tampered_fields_are_rejected() {
        let model = linear_torus().unwrap();
        let cert = perturb_to_zero(&model, &StatePoint::from_real(&[2.0, 1.0]), 1.0, &PerturbOptions::default()).unwrap();
        let mut bad = cert.clone();
        bad.eta_norm *= 1.1;
        assert!(!check_certificate(&model, &bad).passed());
        let mut bad = cert.clone();
        bad.y = StatePoint::new(bad.y.coords() * crate::algebra::C64::new(1.0 + 1e-8, 0.0));
        assert!(!check_certificate(&model, &bad).passed());
        let mut bad = cert;
        bad.delta_used *= 1.05;
        assert!(!check_certificate(&model, &bad).passed());
    }

    #[test]
    fn quadratic_model_scaling_search() {
        let model = quadratic_torus(0.5).unwrap();
        let v = StatePoint::from_real(&[1.0, 1.0]);
        let grid = geometric_grid(0.5, 1e-3, 20);
        let report = scaling_search(&model, &v, 0.5, &grid, &PerturbOptions::default()).unwrap();
        assert!(report.t_star > 0.0);
        assert!(check_certificate(&model, &report.certificate).passed());
        let slope = loglog_slope(&report.decay).unwrap();
        assert!(slope > 3.9, "slope {slope}");
    }

    #[test]
    fn unstable_linearization_is_rejected() {
        let model = quadratic_torus(0.5).unwrap();
        let v = StatePoint::from_real(&[1.0, 0.0]);
        let r = scaling_search(&model, &v, 0.5, &geometric_grid(0.1, 1e-3, 5), &PerturbOptions::default());
        assert!(matches!(r, Err(Error::PreconditionFailed(_))));
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = geometric_grid(1e-3, 1e-1, 20).into_iter().map(|t| (t, 3.0 * t.powi(3))).collect();
        assert!((loglog_slope(&pts).unwrap() - 3.0).abs() < 1e-12);
    }
}
