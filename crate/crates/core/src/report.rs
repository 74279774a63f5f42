//! JSON reports: an envelope carrying the input file text and its digest, plus
//! per-command results. Certificates round-trip exactly so they can be
//! rechecked later from the report alone.

use indexmap::IndexMap;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::algebra::{OneParameterSubgroup, StatePoint, C64};
use crate::error::{Error, Result};
use crate::invariants::DegenerationRecord;
use crate::perturb::{check_certificate, LambdaSample, ScalingReport, ScalingSample, ZeroCertificate};
use crate::rational::format_rational;
use crate::spec::Spec;
use crate::stability::{CrossValidation, StabilityVerdict};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const TOOL_NAME: &str = "momentkit";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn point_json(p: &StatePoint) -> Vec<[f64; 2]> {
    p.coords().iter().map(|z| [z.re, z.im]).collect()
}

pub fn point_from_json(v: &[[f64; 2]]) -> StatePoint {
    StatePoint::from_vec(v.iter().map(|[re, im]| C64::new(*re, *im)).collect())
}

pub fn subgroup_json(rho: &OneParameterSubgroup) -> Vec<String> {
    rho.xi().iter().map(format_rational).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaSampleRecord {
    pub xi: Vec<f64>,
    pub lambda: f64,
}

/// Wire form of a [`ZeroCertificate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateRecord {
    pub x0: Vec<[f64; 2]>,
    pub eta: Vec<f64>,
    pub y: Vec<[f64; 2]>,
    pub lambda_used: f64,
    pub delta_used: f64,
    pub mu_norm_initial: f64,
    pub mu_norm_final: f64,
    pub eta_norm: f64,
    pub zero_tol: f64,
    pub lambda_margin: f64,
    pub lambda_seed: u64,
    pub lambda_interior_samples: usize,
    pub lambda_samples: Vec<LambdaSampleRecord>,
    pub trace: Vec<[f64; 2]>,
}

impl From<&ZeroCertificate> for CertificateRecord {
    fn from(c: &ZeroCertificate) -> Self {
        Self {
            x0: point_json(&c.x0),
            eta: c.eta.iter().copied().collect(),
            y: point_json(&c.y),
            lambda_used: c.lambda_used,
            delta_used: c.delta_used,
            mu_norm_initial: c.mu_norm_initial,
            mu_norm_final: c.mu_norm_final,
            eta_norm: c.eta_norm,
            zero_tol: c.zero_tol,
            lambda_margin: c.lambda_margin,
            lambda_seed: c.lambda_seed,
            lambda_interior_samples: c.lambda_interior_samples,
            lambda_samples: c
                .lambda_samples
                .iter()
                .map(|s| LambdaSampleRecord { xi: s.xi.iter().copied().collect(), lambda: s.lambda })
                .collect(),
            trace: c.trace.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }
}

impl From<&CertificateRecord> for ZeroCertificate {
    fn from(r: &CertificateRecord) -> Self {
        Self {
            x0: point_from_json(&r.x0),
            eta: DVector::from_vec(r.eta.clone()),
            y: point_from_json(&r.y),
            lambda_used: r.lambda_used,
            delta_used: r.delta_used,
            mu_norm_initial: r.mu_norm_initial,
            mu_norm_final: r.mu_norm_final,
            eta_norm: r.eta_norm,
            zero_tol: r.zero_tol,
            lambda_margin: r.lambda_margin,
            lambda_seed: r.lambda_seed,
            lambda_interior_samples: r.lambda_interior_samples,
            lambda_samples: r
                .lambda_samples
                .iter()
                .map(|s| LambdaSample { xi: DVector::from_vec(s.xi.clone()), lambda: s.lambda })
                .collect(),
            trace: r.trace.iter().map(|[a, b]| (*a, *b)).collect(),
        }
    }
}

pub fn certificate_json(c: &ZeroCertificate) -> Value {
    serde_json::to_value(CertificateRecord::from(c)).expect("certificate records serialize")
}

pub fn certificate_from_json(v: &Value) -> Result<ZeroCertificate> {
    let rec: CertificateRecord =
        serde_json::from_value(v.clone()).map_err(|e| Error::SchemaMismatch(format!("certificate: {e}")))?;
    Ok(ZeroCertificate::from(&rec))
}

pub fn verdict_json(v: &StabilityVerdict) -> Value {
    let d = &v.diagnostics;
    json!({
        "class": v.class.as_str(),
        "witness": v.witness.as_ref().map(subgroup_json),
        "zero_point": v.zero_point.as_ref().map(point_json),
        "evidence": v.evidence.as_str(),
        "iterations": d.iterations,
        "initial_norm": d.initial_norm,
        "final_norm": d.final_norm,
        "final_moment_norm": d.final_moment_norm,
        "conditioning_warning": d.conditioning_warning,
        "note": d.note,
    })
}

pub fn flow_trace_json(v: &StabilityVerdict) -> Value {
    Value::Array(
        v.diagnostics
            .trace
            .iter()
            .map(|s| json!({"norm": s.norm, "moment_norm": s.moment_norm, "step": s.step}))
            .collect(),
    )
}

pub fn cross_validation_json(c: &CrossValidation) -> Value {
    json!({
        "flow": verdict_json(&c.flow),
        "oracle": verdict_json(&c.oracle),
        "agree": c.oracle.class == c.flow.class,
    })
}

fn scaling_sample_json(s: &ScalingSample) -> Value {
    json!({
        "t": s.t,
        "mu_norm": s.mu_norm,
        "lambda_point": s.lambda_point,
        "lambda_bound": s.lambda_bound,
        "product": s.product,
        "note": s.note,
    })
}

pub fn scaling_json(r: &ScalingReport) -> Value {
    json!({
        "v": point_json(&r.v),
        "v_balanced": point_json(&r.v_balanced),
        "t_star": r.t_star,
        "samples": r.samples.iter().map(scaling_sample_json).collect::<Vec<_>>(),
        "decay": r.decay.iter().map(|&(t, m)| [t, m]).collect::<Vec<_>>(),
        "certificate": certificate_json(&r.certificate),
    })
}

pub fn degeneration_json(r: &DegenerationRecord) -> Value {
    json!({
        "rho": subgroup_json(&r.rho),
        "start": point_json(&r.start),
        "limit": point_json(&r.limit),
        "weight": r.weight,
        "dim_jump": [r.dim_jump.0, r.dim_jump.1],
        "orbit_distance": r.orbit_distance,
        "is_product": r.is_product,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub args: Vec<String>,
    pub spec_sha256: Option<String>,
    pub spec: Option<String>,
    pub seed: u64,
    pub tolerances: IndexMap<String, f64>,
    /// `ok`, `refused`, `inconsistent` or `parse_error`.
    pub status: String,
    pub exit_code: i32,
    pub results: Value,
    pub diagnostics: Vec<String>,
    pub timings_ms: IndexMap<String, f64>,
}

impl Report {
    pub fn new(command: &str, args: Vec<String>, spec: Option<&Spec>, seed: u64) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            tool: TOOL_NAME.into(),
            tool_version: TOOL_VERSION.into(),
            command: command.into(),
            args,
            spec_sha256: spec.map(|s| sha256_hex(&s.text)),
            spec: spec.map(|s| s.text.clone()),
            seed,
            tolerances: spec.map(|s| s.file.tolerances.effective(seed)).unwrap_or_default(),
            status: "ok".into(),
            exit_code: 0,
            results: Value::Null,
            diagnostics: Vec::new(),
            timings_ms: IndexMap::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// The report without wall-clock timings, for determinism comparisons.
    pub fn without_timings(&self) -> Self {
        Self { timings_ms: IndexMap::new(), ..self.clone() }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::SchemaMismatch(format!("report is not JSON: {e}")))?;
        match value.get("schema_version").and_then(Value::as_u64) {
            Some(v) if v == REPORT_SCHEMA_VERSION as u64 => {}
            Some(v) => return Err(Error::SchemaMismatch(format!("report schema_version {v} is not supported"))),
            None => return Err(Error::SchemaMismatch("report has no schema_version".into())),
        }
        serde_json::from_value(value).map_err(|e| Error::SchemaMismatch(e.to_string()))
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerificationOutcome {
    pub certificates: usize,
    pub failures: Vec<String>,
}

impl VerificationOutcome {
    pub fn passed(&self) -> bool {
        self.certificates > 0 && self.failures.is_empty()
    }
}

/// Collects `(model name, certificate)` pairs from a report's results.
fn certificates_in(results: &Value) -> Result<Vec<(String, &Value)>> {
    let entries: Vec<&Value> = match results {
        Value::Array(items) => items.iter().collect(),
        Value::Object(_) => vec![results],
        _ => Vec::new(),
    };
    let mut out = Vec::new();
    for e in entries {
        let cert = e.get("certificate").or_else(|| e.get("scaling").and_then(|s| s.get("certificate")));
        if let Some(cert) = cert {
            let model = e
                .get("model")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::SchemaMismatch("certificate entry has no model name".into()))?;
            out.push((model.to_string(), cert));
        }
    }
    Ok(out)
}

/// Rechecks every certificate in a parsed report against the input file it embeds.
pub fn verify_report(report: &Report) -> Result<VerificationOutcome> {
    let text = report.spec.as_ref().ok_or_else(|| Error::SchemaMismatch("report embeds no spec".into()))?;
    let mut outcome = VerificationOutcome::default();
    if report.spec_sha256.as_deref() != Some(sha256_hex(text).as_str()) {
        outcome.failures.push("spec digest does not match the embedded spec".into());
    }
    let spec = Spec::parse(text)?;
    let certs = certificates_in(&report.results)?;
    if certs.is_empty() {
        return Err(Error::SchemaMismatch("report contains no certificates".into()));
    }
    for (name, value) in certs {
        outcome.certificates += 1;
        let model = spec.model(&name)?;
        match certificate_from_json(value) {
            Ok(cert) => {
                let check = check_certificate(model, &cert);
                outcome.failures.extend(check.failures.into_iter().map(|f| format!("{name}: {f}")));
            }
            Err(e) => outcome.failures.push(format!("{name}: {e}")),
        }
    }
    Ok(outcome)
}

/// True iff every certificate in the report at `path` passes.
pub fn verify_certificate(path: &std::path::Path) -> Result<bool> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(verify_report(&Report::from_json(&text)?)?.passed())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perturb::{perturb_to_zero, PerturbOptions};

    const SPEC: &str = r#"
schema_version = 1
[group]
type = "torus"
[representation]
weights = [[1, -1]]
[points]
p = [1.0, 0.9]
[models.lin]
bundled = "linear_torus"
"#;

    fn certified_report() -> Report {
        let spec = Spec::parse(SPEC).unwrap();
        let cert = perturb_to_zero(spec.model("lin").unwrap(), spec.point("p").unwrap(), 0.5, &PerturbOptions::default()).unwrap();
        let mut report = Report::new("perturb", vec![], Some(&spec), 0);
        report.results = json!({"model": "lin", "point": "p", "certificate": certificate_json(&cert)});
        report
    }

    #[test]
    fn certificate_json_round_trips_exactly() {
        let spec = Spec::parse(SPEC).unwrap();
        let cert = perturb_to_zero(spec.model("lin").unwrap(), spec.point("p").unwrap(), 0.5, &PerturbOptions::default()).unwrap();
        let text = serde_json::to_string(&certificate_json(&cert)).unwrap();
        let back = certificate_from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, cert);
    }

    #[test]
    fn verify_accepts_and_rejects() {
        let report = certified_report();
        let text = report.to_json();
        let parsed = Report::from_json(&text).unwrap();
        assert_eq!(parsed, report);
        assert!(verify_report(&parsed).unwrap().passed());

        let mut tampered = parsed.clone();
        let eta_norm = tampered.results["certificate"]["eta_norm"].as_f64().unwrap();
        tampered.results["certificate"]["eta_norm"] = json!(eta_norm * 1.1);
        assert!(!verify_report(&tampered).unwrap().passed());

        let mut bad_spec = parsed.clone();
        bad_spec.spec = Some(SPEC.replace("[1.0, 0.9]", "[1.0, 0.8]"));
        assert!(!verify_report(&bad_spec).unwrap().passed());

        let mut no_cert = parsed;
        no_cert.results = json!({});
        assert!(matches!(verify_report(&no_cert), Err(Error::SchemaMismatch(_))));
        assert!(matches!(Report::from_json("{\"schema_version\": 9}"), Err(Error::SchemaMismatch(_))));
    }

    #[test]
    fn verify_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        std::fs::write(&path, certified_report().to_json()).unwrap();
        assert!(verify_certificate(&path).unwrap());
    }
}
