//! Stability classification by the Kempf-Ness flow, checked against an
//! exact combinatorial verdict on tori.

use nalgebra::DVector;
use num::Zero;

use crate::algebra::{
    complex_stabilizer_dim, ops_limit, q_operator_from, stabilizer, stabilizer_of_map, ExpDirection, GroupAction,
    StatePoint, DEFAULT_RANK_TOL,
};
pub use crate::algebra::OneParameterSubgroup;
use crate::error::{Error, Result};
use crate::hull::{self, Q};
use crate::moment::linear_moment;
use crate::rational::{primitive_from_big, round_direction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StabilityClass {
    Stable,
    PolystableNotStable,
    SemistableNotPolystable,
    Unstable,
}

impl StabilityClass {
    pub fn is_polystable(self) -> bool {
        matches!(self, Self::Stable | Self::PolystableNotStable)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Stable => "stable",
            Self::PolystableNotStable => "polystable_not_stable",
            Self::SemistableNotPolystable => "semistable_not_polystable",
            Self::Unstable => "unstable",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Self::Stable, Self::PolystableNotStable, Self::SemistableNotPolystable, Self::Unstable]
            .into_iter()
            .find(|c| c.as_str() == s)
    }
}

/// How a verdict was reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Evidence {
    /// Exact rational computation on the weight polytope.
    Exact,
    /// Flow on a torus action, checkable against the exact verdict.
    Flow,
    /// Flow on a non-abelian action; no exact verdict to compare with.
    FlowEvidenceOnly,
}

impl Evidence {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Flow => "flow",
            Self::FlowEvidenceOnly => "flow-evidence only",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowStep {
    pub norm: f64,
    /// `|nu|` at the normalized point.
    pub moment_norm: f64,
    pub step: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FlowDiagnostics {
    pub iterations: usize,
    pub initial_norm: f64,
    pub final_norm: f64,
    pub final_moment_norm: f64,
    pub conditioning_warning: bool,
    pub note: Option<String>,
    pub trace: Vec<FlowStep>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityVerdict {
    pub class: StabilityClass,
    pub witness: Option<OneParameterSubgroup>,
    pub zero_point: Option<StatePoint>,
    pub evidence: Evidence,
    pub diagnostics: FlowDiagnostics,
}

#[derive(Clone, Debug)]
pub struct FlowOptions {
    /// Moment norm at the normalized point below which the flow stops.
    pub zero_tol: f64,
    /// Newton step length below which the flow counts as converged.
    pub step_tol: f64,
    /// Moment norm at which an escaping orbit is declared to have escaped.
    pub escape_tol: f64,
    pub max_iter: usize,
    pub rank_tol: f64,
    pub max_step: f64,
    pub armijo: f64,
    pub max_backtracks: usize,
    /// `|x| / |v|` below which the orbit is declared to reach the origin.
    pub unstable_ratio: f64,
    pub max_den: i64,
    pub record_trace: bool,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            zero_tol: 1e-10,
            step_tol: 1e-7,
            escape_tol: 1e-20,
            max_iter: 2000,
            rank_tol: DEFAULT_RANK_TOL,
            max_step: 2.0,
            armijo: 1e-4,
            max_backtracks: 50,
            unstable_ratio: 1e-10,
            max_den: 64,
            record_trace: false,
        }
    }
}

/// `1/2 |exp(s i A_xi) v|^2`.
pub fn kempf_ness_value(action: &GroupAction, v: &StatePoint, xi: &DVector<f64>, s: f64) -> f64 {
    0.5 * action.exp_action(xi, s, v, ExpDirection::Imaginary).norm_sq()
}

/// Damped Newton descent of `1/2 |x|^2` along `exp(i A_xi) x`.
///
/// Stops at a moment zero (polystable), when the norm collapses (unstable),
/// or when the moment vanishes while the complex stabilizer jumps, which
/// means the flow is running off to a boundary orbit (semistable).
pub fn kempf_ness_flow(action: &GroupAction, v: &StatePoint, opts: &FlowOptions) -> Result<StabilityVerdict> {
    if v.dim() != action.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: action.ambient_dim(), got: v.dim() });
    }
    let evidence = if action.is_torus() { Evidence::Flow } else { Evidence::FlowEvidenceOnly };
    let mut diag = FlowDiagnostics { initial_norm: v.norm(), ..Default::default() };
    if v.is_zero() {
        let class = if action.dim() == 0 { StabilityClass::Stable } else { StabilityClass::PolystableNotStable };
        return Ok(StabilityVerdict { class, witness: None, zero_point: Some(v.clone()), evidence, diagnostics: diag });
    }
    let v_norm = v.norm();
    let v_hat = v.scaled(1.0 / v_norm);
    let base_dim = complex_stabilizer_dim(action, &v_hat, opts.rank_tol)?;
    let mut x = v.clone();
    let mut eta = DVector::<f64>::zeros(action.dim());
    let mut history = vec![eta.clone()];
    for it in 0..opts.max_iter {
        let xn = x.norm();
        diag.iterations = it;
        diag.final_norm = xn;
        if xn < opts.unstable_ratio * v_norm {
            let (witness, note) = extract_witness(action, v, &history, StabilityClass::Unstable, opts);
            diag.note = note;
            return Ok(StabilityVerdict { class: StabilityClass::Unstable, witness, zero_point: None, evidence, diagnostics: diag });
        }
        let x_hat = x.scaled(1.0 / xn);
        let nu = linear_moment(action, &x_hat);
        let mn = nu.norm();
        diag.final_moment_norm = mn;
        let sigma = action.infinitesimal_action(&x_hat)?;
        let st = stabilizer_of_map(&sigma, &x_hat, opts.rank_tol);
        diag.conditioning_warning |= st.conditioning_warning;
        let mut d = match q_operator_from(&sigma, &st) {
            Ok(q) => -q.solve(&nu.coeffs),
            Err(_) => DVector::zeros(action.dim()),
        };
        if mn < opts.zero_tol && (d.norm() < opts.step_tol || mn < opts.escape_tol) {
            let dim = complex_stabilizer_dim(action, &x_hat, opts.rank_tol * 100.0)?;
            if dim > base_dim {
                let (witness, note) = extract_witness(action, v, &history, StabilityClass::SemistableNotPolystable, opts);
                diag.note = note;
                return Ok(StabilityVerdict {
                    class: StabilityClass::SemistableNotPolystable,
                    witness,
                    zero_point: None,
                    evidence,
                    diagnostics: diag,
                });
            }
            let class = if base_dim == 0 { StabilityClass::Stable } else { StabilityClass::PolystableNotStable };
            return Ok(StabilityVerdict { class, witness: None, zero_point: Some(x), evidence, diagnostics: diag });
        }
        let dn = d.norm();
        if dn > opts.max_step {
            d *= opts.max_step / dn;
        }
        let f0 = 0.5 * x.norm_sq();
        let slope = 2.0 * x.norm_sq() * nu.pairing(&d);
        if !(slope < 0.0) {
            return Err(Error::LineSearchFailed { iteration: it, moment_norm: mn });
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..opts.max_backtracks {
            let y = action.exp_action(&d, alpha, &x, ExpDirection::Imaginary);
            let f1 = 0.5 * y.norm_sq();
            let predicted = opts.armijo * alpha * slope;
            let armijo_ok = f1 <= f0 + predicted;
            // below rounding level the functional cannot resolve the decrease;
            // fall back to a decrease of the normalized moment
            let flat_ok = -predicted < 1e-13 * f0
                && f1 <= f0 * (1.0 + 4.0 * f64::EPSILON)
                && y.norm() > 0.0
                && linear_moment(action, &y.scaled(1.0 / y.norm())).norm() < mn;
            if armijo_ok || flat_ok {
                accepted = Some(y);
                break;
            }
            alpha *= 0.5;
        }
        let Some(y) = accepted else {
            return Err(Error::LineSearchFailed { iteration: it, moment_norm: mn });
        };
        if opts.record_trace {
            diag.trace.push(FlowStep { norm: xn, moment_norm: mn, step: alpha * d.norm() });
        }
        eta += &d * alpha;
        history.push(eta.clone());
        x = y;
    }
    Err(Error::MaxIterExceeded { iterations: opts.max_iter, moment_norm: diag.final_moment_norm })
}

/// Rounds drift directions of the flow to rational one-parameter subgroups
/// and keeps the first one whose limit confirms the verdict.
fn extract_witness(
    action: &GroupAction,
    v: &StatePoint,
    history: &[DVector<f64>],
    class: StabilityClass,
    opts: &FlowOptions,
) -> (Option<OneParameterSubgroup>, Option<String>) {
    let last = history.last().expect("history is never empty");
    let n = history.len();
    let mut starts: Vec<usize> = Vec::new();
    let mut gap = n.saturating_sub(1);
    while gap >= 1 {
        starts.push(n - 1 - gap);
        gap /= 2;
    }
    starts.reverse();
    let base_dim = stabilizer(action, v, opts.rank_tol).map(|s| s.dim).unwrap_or(usize::MAX);
    let mut tried = 0;
    for m in starts {
        let diff = last - &history[m];
        if diff.norm() == 0.0 {
            continue;
        }
        let coords = match action.algebra_to_lattice(&diff) {
            Ok(l) => l,
            Err(_) => diff.iter().copied().collect(),
        };
        for den in [opts.max_den, 16, 8, 4] {
            let Some(ints) = round_direction(&coords, den) else { continue };
            tried += 1;
            let rho = OneParameterSubgroup::from_integers(&ints);
            let Ok(Some(limit)) = ops_limit(action, &rho, v) else { continue };
            let ok = match class {
                StabilityClass::Unstable => limit.norm() <= 1e-10 * v.norm(),
                _ => {
                    limit.norm() > 1e-10 * v.norm()
                        && stabilizer(action, &limit, opts.rank_tol).map(|s| s.dim).unwrap_or(0) > base_dim
                }
            };
            if ok {
                return (Some(rho), None);
            }
        }
    }
    (None, Some(format!("no rounded drift direction verified ({tried} candidates)")))
}

/// Exact verdict for a torus action from the weights of the nonzero
/// coordinates. Weight vectors are the columns of the `k x N` matrix.
pub fn torus_polystability(weights: &[Vec<i64>], support: &[usize]) -> StabilityVerdict {
    let k = weights.len();
    let column = |j: usize| -> Vec<Q> { (0..k).map(|l| hull::q(weights[l][j])).collect() };
    let n = weights.first().map_or(0, |r| r.len());
    let all: Vec<Vec<Q>> = (0..n).map(column).collect();
    let full_rank = hull::rank(&all);
    let verdict = |class, witness| StabilityVerdict {
        class,
        witness,
        zero_point: None,
        evidence: Evidence::Exact,
        diagnostics: FlowDiagnostics::default(),
    };
    let active: Vec<Vec<Q>> = support.iter().map(|&j| column(j)).collect();
    let polystable_class = |pts: &[Vec<Q>]| {
        if hull::rank(pts) == full_rank { StabilityClass::Stable } else { StabilityClass::PolystableNotStable }
    };
    if active.is_empty() {
        return verdict(polystable_class(&active), None);
    }
    let marks = hull::positive_circuit_union(&active);
    if marks.iter().all(|&m| m) {
        return verdict(polystable_class(&active), None);
    }
    let balanced: Vec<Vec<Q>> = active.iter().zip(&marks).filter(|(_, &m)| m).map(|(p, _)| p.clone()).collect();
    let rest: Vec<Vec<Q>> = active.iter().zip(&marks).filter(|(_, &m)| !m).map(|(p, _)| p.clone()).collect();
    let projected = hull::project_out(&rest, &balanced);
    let point = hull::min_norm_point(&projected);
    debug_assert!(point.iter().any(|x| !x.is_zero()));
    let witness = OneParameterSubgroup::from_integers(&primitive_from_big(&point));
    let class = if balanced.is_empty() { StabilityClass::Unstable } else { StabilityClass::SemistableNotPolystable };
    verdict(class, Some(witness))
}

#[derive(Clone, Debug)]
pub struct CrossValidation {
    pub flow: StabilityVerdict,
    pub oracle: StabilityVerdict,
}

/// Runs both classifiers on a torus action and fails on disagreement.
pub fn cross_validate(action: &GroupAction, v: &StatePoint, opts: &FlowOptions) -> Result<CrossValidation> {
    let weights = action.torus_weights().ok_or(Error::NotTorus)?.weights().to_vec();
    let oracle = torus_polystability(&weights, &v.support());
    let flow = kempf_ness_flow(action, v, opts)?;
    if flow.class != oracle.class {
        return Err(Error::OracleMismatch { flow: flow.class, oracle: oracle.class });
    }
    Ok(CrossValidation { flow, oracle })
}
