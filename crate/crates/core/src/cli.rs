//! Command-line driver: parses a spec file, runs one analysis and assembles
//! a [`Report`] whose `exit_code` separates refusals from inconsistencies.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::algebra::{omega0, stabilizer, GroupAction, OneParameterSubgroup, StatePoint, C64, DEFAULT_RANK_TOL};
use crate::error::{Error, Result};
use crate::invariants::{analyze_degeneration, futaki_character, OrbitOptions};
use crate::models::bundled_models;
use crate::moment::linear_moment;
use crate::perturb::{check_certificate, geometric_grid, perturb_to_zero, scaling_search, PerturbOptions};
use crate::report::{
    certificate_json, cross_validation_json, degeneration_json, flow_trace_json, scaling_json, verdict_json, verify_report, Report,
};
use crate::spec::{Spec, Tolerances};
use crate::stability::{cross_validate, kempf_ness_flow, torus_polystability, FlowOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUSED: i32 = 2;
pub const EXIT_INCONSISTENT: i32 = 3;
pub const EXIT_PARSE: i32 = 4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Machine,
}

#[derive(Clone, Debug, Parser)]
#[command(name = "momentkit", version, about = "Stability, moment-map zeros and certificates for compact group actions")]
pub struct Cli {
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    /// Overrides the seed given in the input file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// `name=value`, repeatable.
    #[arg(long = "tol", global = true)]
    pub tol: Vec<String>,
    /// Write the machine-readable report here.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// Stability class of a point, cross-checked against the exact criterion on tori.
    Classify { point: String },
    /// Kempf-Ness flow trace of a point.
    Flow { point: String },
    /// Certified zero of a slice model near a point.
    Perturb {
        model: String,
        point: String,
        #[arg(long)]
        delta: f64,
    },
    /// Scaling search for `t v` along a grid.
    Scan {
        model: String,
        point: String,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        /// `start:stop:count`, geometric.
        #[arg(long = "t-grid", default_value = "1e-3:1e-1:20")]
        t_grid: String,
    },
    /// Limit of a point along a one-parameter subgroup.
    Degenerate {
        point: String,
        /// Subgroup name from the input file, or inline `p/q` entries separated by commas.
        #[arg(long)]
        ops: String,
    },
    /// Runs a reduced invariant suite over the bundled models.
    Selftest,
    /// Rechecks every certificate in a report.
    Verify { report: PathBuf },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Classify { .. } => "classify",
            Self::Flow { .. } => "flow",
            Self::Perturb { .. } => "perturb",
            Self::Scan { .. } => "scan",
            Self::Degenerate { .. } => "degenerate",
            Self::Selftest => "selftest",
            Self::Verify { .. } => "verify",
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::SchemaMismatch(_) | Error::Io(_) => EXIT_PARSE,
        Error::HypothesisFailed { .. }
        | Error::NeverSatisfied { .. }
        | Error::PreconditionFailed(_)
        | Error::NoLimit
        | Error::BallExitsModel { .. }
        | Error::OutsideBall { .. } => EXIT_REFUSED,
        _ => EXIT_INCONSISTENT,
    }
}

fn status_for(code: i32) -> &'static str {
    match code {
        EXIT_OK => "ok",
        EXIT_REFUSED => "refused",
        EXIT_PARSE => "parse_error",
        _ => "inconsistent",
    }
}

/// Structured detail for errors that carry data beyond their message.
fn error_json(e: &Error) -> Value {
    let mut v = json!({"error": e.to_string()});
    match e {
        Error::HypothesisFailed { product, delta, lambda, mu_norm } => {
            v["hypothesis"] = json!({"product": product, "delta": delta, "lambda": lambda, "mu_norm": mu_norm});
        }
        Error::NeverSatisfied { v_balanced, samples } => {
            v["v_balanced"] = json!(crate::report::point_json(v_balanced));
            v["samples"] = json!(samples.iter().map(|&(t, m, l, p)| json!({"t": t, "mu_norm": m, "lambda": l, "product": p})).collect::<Vec<_>>());
        }
        Error::LeftBall { trace, .. } => v["trace"] = json!(trace.iter().map(|&(a, b)| [a, b]).collect::<Vec<_>>()),
        Error::OracleMismatch { flow, oracle } => v["mismatch"] = json!({"flow": flow.as_str(), "oracle": oracle.as_str()}),
        _ => {}
    }
    v
}

pub fn parse_t_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::Parse(format!("t-grid {s:?} is not start:stop:count"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(start > 0.0 && stop > 0.0 && start.is_finite() && stop.is_finite()) || count == 0 {
        return Err(Error::Parse(format!("t-grid {s:?} needs positive endpoints and count")));
    }
    Ok(geometric_grid(start, stop, count))
}

fn check_point_dim(p: &StatePoint, n: usize) -> Result<()> {
    if p.dim() != n {
        return Err(Error::Parse(format!("point has {} coordinates, the action acts on C^{n}", p.dim())));
    }
    Ok(())
}

struct Context<'a> {
    spec: Option<&'a Spec>,
    tolerances: Tolerances,
    seed: u64,
    timings: Vec<(String, f64)>,
}

impl Context<'_> {
    fn spec(&self) -> Result<&Spec> {
        self.spec.ok_or_else(|| Error::Parse("this command needs --spec".into()))
    }

    fn timed<T>(&mut self, label: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.push((label.into(), start.elapsed().as_secs_f64() * 1e3));
        out
    }
}

fn classify(ctx: &mut Context, point: &str) -> Result<(Value, i32)> {
    let spec = ctx.spec()?;
    let v = spec.point(point)?.clone();
    check_point_dim(&v, spec.action.ambient_dim())?;
    let opts = ctx.tolerances.flow_options();
    let action = spec.action.clone();
    if action.is_torus() {
        let checked = ctx.timed("classify", || cross_validate(&action, &v, &opts))?;
        let mut out = cross_validation_json(&checked);
        out["point"] = json!(point);
        out["class"] = json!(checked.flow.class.as_str());
        Ok((out, EXIT_OK))
    } else {
        let verdict = ctx.timed("classify", || kempf_ness_flow(&action, &v, &opts))?;
        Ok((json!({"point": point, "class": verdict.class.as_str(), "flow": verdict_json(&verdict)}), EXIT_OK))
    }
}

fn flow(ctx: &mut Context, point: &str) -> Result<(Value, i32)> {
    let spec = ctx.spec()?;
    let v = spec.point(point)?.clone();
    check_point_dim(&v, spec.action.ambient_dim())?;
    let opts = FlowOptions { record_trace: true, ..ctx.tolerances.flow_options() };
    let action = spec.action.clone();
    let verdict = ctx.timed("flow", || kempf_ness_flow(&action, &v, &opts))?;
    Ok((json!({"point": point, "verdict": verdict_json(&verdict), "trace": flow_trace_json(&verdict)}), EXIT_OK))
}

fn perturb(ctx: &mut Context, model_name: &str, point: &str, delta: f64) -> Result<(Value, i32)> {
    let spec = ctx.spec()?;
    let model = spec.model(model_name)?.clone();
    let x0 = spec.point(point)?.clone();
    check_point_dim(&x0, model.inner().ambient_dim())?;
    let opts = ctx.tolerances.perturb_options(ctx.seed);
    let cert = ctx.timed("perturb", || perturb_to_zero(&model, &x0, delta, &opts))?;
    let check = ctx.timed("check", || check_certificate(&model, &cert));
    let code = if check.passed() { EXIT_OK } else { EXIT_INCONSISTENT };
    Ok((
        json!({
            "model": model_name,
            "point": point,
            "certificate": certificate_json(&cert),
            "check": {"passed": check.passed(), "failures": check.failures},
        }),
        code,
    ))
}

fn scan(ctx: &mut Context, model_name: &str, point: &str, delta: f64, grid: &str) -> Result<(Value, i32)> {
    let spec = ctx.spec()?;
    let model = spec.model(model_name)?.clone();
    let v = spec.point(point)?.clone();
    check_point_dim(&v, model.inner().ambient_dim())?;
    let grid = parse_t_grid(grid)?;
    let opts = ctx.tolerances.perturb_options(ctx.seed);
    let report = ctx.timed("scan", || scaling_search(&model, &v, delta, &grid, &opts));
    match report {
        Ok(r) => {
            let check = check_certificate(&model, &r.certificate);
            let code = if check.passed() { EXIT_OK } else { EXIT_INCONSISTENT };
            Ok((
                json!({
                    "model": model_name,
                    "point": point,
                    "scaling": scaling_json(&r),
                    "check": {"passed": check.passed(), "failures": check.failures},
                }),
                code,
            ))
        }
        Err(e @ Error::NeverSatisfied { .. }) => {
            let mut out = error_json(&e);
            out["model"] = json!(model_name);
            out["point"] = json!(point);
            Ok((out, EXIT_REFUSED))
        }
        Err(e) => Err(e),
    }
}

fn degenerate(ctx: &mut Context, point: &str, ops: &str) -> Result<(Value, i32)> {
    let spec = ctx.spec()?;
    let v = spec.point(point)?.clone();
    check_point_dim(&v, spec.action.ambient_dim())?;
    let rho = spec.subgroup(ops)?;
    let opts = ctx.tolerances.orbit_options();
    let action = spec.action.clone();
    let rec = ctx.timed("degenerate", || analyze_degeneration(&action, &rho, &v, &opts))?;
    let consistent = rec.is_product || rec.dim_jump.1 > rec.dim_jump.0;
    let mut out = degeneration_json(&rec);
    out["point"] = json!(point);
    out["consistent"] = json!(consistent);
    Ok((out, if consistent { EXIT_OK } else { EXIT_INCONSISTENT }))
}

fn random_torus(rng: &mut ChaCha8Rng) -> (GroupAction, Vec<Vec<i64>>, StatePoint) {
    let k = rng.gen_range(1..=3);
    let n = rng.gen_range(1..=6);
    let w: Vec<Vec<i64>> = (0..k).map(|_| (0..n).map(|_| rng.gen_range(-5..=5)).collect()).collect();
    let v = StatePoint::from_vec(
        (0..n)
            .map(|_| if rng.gen_bool(0.3) { C64::new(0.0, 0.0) } else { C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)) })
            .collect(),
    );
    (GroupAction::torus(w.clone()).expect("integer weights give a torus"), w, v)
}

fn selftest_checks(seed: u64) -> Vec<(String, bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (action, _, v) = random_torus(&mut rng);
        let n = action.ambient_dim();
        let u = DVector::from_fn(n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let xi = DVector::from_fn(action.dim(), |_, _| rng.gen_range(-1.0..1.0));
        let h = 1e-5;
        let plus = StatePoint::new(v.coords() + &u * C64::new(h, 0.0));
        let minus = StatePoint::new(v.coords() - &u * C64::new(h, 0.0));
        let fd = (linear_moment(&action, &plus).pairing(&xi) - linear_moment(&action, &minus).pairing(&xi)) / (2.0 * h);
        worst = worst.max((fd - omega0(&action.apply(&xi, v.coords()), &u)).abs());
    }
    out.push(("moment identity".into(), worst < 1e-8, format!("max defect {worst:.3e}")));

    let mut agree = 0;
    let total = 30;
    for _ in 0..total {
        let (action, w, v) = random_torus(&mut rng);
        let oracle = torus_polystability(&w, &v.support());
        if kempf_ness_flow(&action, &v, &FlowOptions::default()).map(|f| f.class == oracle.class).unwrap_or(false) {
            agree += 1;
        }
    }
    out.push(("flow vs exact criterion".into(), agree == total, format!("{agree}/{total}")));

    let mut worst = 0.0f64;
    let mut failed = None;
    for m in bundled_models() {
        let n = m.model.inner().ambient_dim();
        for _ in 0..10 {
            let mut x = DVector::from_fn(n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            if rng.gen_bool(0.5) {
                x[0] = C64::new(0.0, 0.0);
            }
            let x = StatePoint::new(x * C64::new(0.4 * m.model.ball_radius() / (n as f64).sqrt(), 0.0));
            match futaki_character(&m.model, &x) {
                Ok(c) => worst = c.iter().fold(worst, |a, b| a.max(b.abs())),
                Err(e) => failed = Some(format!("{}: {e}", m.name)),
            }
        }
    }
    out.push((
        "moment orthogonal to stabilizer".into(),
        failed.is_none() && worst < 1e-9,
        failed.unwrap_or_else(|| format!("max pairing {worst:.3e}")),
    ));

    let linear = crate::models::linear_torus().expect("bundled model");
    let cert = perturb_to_zero(&linear, &StatePoint::from_real(&[1.0, 0.9]), 0.5, &PerturbOptions::default());
    let detail = match &cert {
        Ok(c) => {
            let check = check_certificate(&linear, c);
            (check.passed(), format!("|eta| = {:.6e}, |mu(y)| = {:.3e}", c.eta_norm, c.mu_norm_final))
        }
        Err(e) => (false, e.to_string()),
    };
    out.push(("certificate".into(), detail.0, detail.1));

    let action = GroupAction::torus(vec![vec![1, -1, 0]]).expect("torus");
    let v = StatePoint::from_real(&[0.8, 0.0, 1.2]);
    let rec = analyze_degeneration(&action, &OneParameterSubgroup::from_integers(&[1]), &v, &OrbitOptions::default());
    let (ok, detail) = match rec {
        Ok(r) => (
            !r.is_product && r.dim_jump == (0, 1) && r.weight == 0.0,
            format!("product {}, jump {:?}, weight {}", r.is_product, r.dim_jump, r.weight),
        ),
        Err(e) => (false, e.to_string()),
    };
    out.push(("zero-weight degeneration".into(), ok, detail));

    let scan_ok = stabilizer(&action, &StatePoint::from_real(&[0.0, 0.0, 1.0]), DEFAULT_RANK_TOL).map(|s| s.dim == 1).unwrap_or(false);
    out.push(("stabilizer of weight-zero line".into(), scan_ok, String::new()));
    out
}

fn selftest(ctx: &mut Context) -> Result<(Value, i32)> {
    let seed = ctx.seed;
    let checks = ctx.timed("selftest", || selftest_checks(seed));
    let all = checks.iter().all(|c| c.1);
    let items: Vec<Value> = checks.iter().map(|(n, p, d)| json!({"check": n, "passed": p, "detail": d})).collect();
    Ok((json!({"checks": items, "passed": all}), if all { EXIT_OK } else { EXIT_INCONSISTENT }))
}

fn verify(report_path: &std::path::Path) -> Result<(Value, i32)> {
    let text = std::fs::read_to_string(report_path).map_err(|e| Error::Io(format!("{}: {e}", report_path.display())))?;
    let report = Report::from_json(&text)?;
    let outcome = verify_report(&report)?;
    let passed = outcome.passed();
    Ok((
        json!({"report": report_path.display().to_string(), "certificates": outcome.certificates, "passed": passed, "failures": outcome.failures}),
        if passed { EXIT_OK } else { EXIT_INCONSISTENT },
    ))
}

/// Runs a parsed command line and returns the assembled report.
pub fn run(cli: &Cli, args: Vec<String>) -> Report {
    let spec = cli.spec.as_ref().map(|p| Spec::read(p));
    let (spec, spec_error) = match spec {
        Some(Ok(s)) => (Some(s), None),
        Some(Err(e)) => (None, Some(e)),
        None => (None, None),
    };
    let seed = cli.seed.or(spec.as_ref().map(|s| s.file.seed)).unwrap_or(0);
    let mut report = Report::new(cli.command.name(), args, spec.as_ref(), seed);
    let mut tolerances = spec.as_ref().map(|s| s.file.tolerances.clone()).unwrap_or_default();
    let tol_error = cli.tol.iter().find_map(|t| tolerances.set(t).err());

    let outcome = if let Some(e) = spec_error.or(tol_error) {
        Err(e)
    } else {
        report.tolerances = tolerances.effective(seed);
        let mut ctx = Context { spec: spec.as_ref(), tolerances, seed, timings: Vec::new() };
        let start = Instant::now();
        let r = match &cli.command {
            Command::Classify { point } => classify(&mut ctx, point),
            Command::Flow { point } => flow(&mut ctx, point),
            Command::Perturb { model, point, delta } => perturb(&mut ctx, model, point, *delta),
            Command::Scan { model, point, delta, t_grid } => scan(&mut ctx, model, point, *delta, t_grid),
            Command::Degenerate { point, ops } => degenerate(&mut ctx, point, ops),
            Command::Selftest => selftest(&mut ctx),
            Command::Verify { report } => verify(report),
        };
        ctx.timings.push(("total".into(), start.elapsed().as_secs_f64() * 1e3));
        report.timings_ms = ctx.timings.into_iter().collect();
        r
    };
    match outcome {
        Ok((results, code)) => {
            report.results = results;
            report.exit_code = code;
        }
        Err(e) => {
            report.exit_code = exit_code(&e);
            report.diagnostics.push(e.to_string());
            report.results = error_json(&e);
        }
    }
    report.status = status_for(report.exit_code).into();
    report
}

fn fmt_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

/// Short human-readable summary of a report.
pub fn render_text(report: &Report) -> String {
    let mut out = format!("{} {}: {} (exit {})\n", report.tool, report.command, report.status, report.exit_code);
    let r = &report.results;
    let field = |k: &str| r.get(k).map(fmt_value);
    match report.command.as_str() {
        "classify" => {
            if let Some(c) = field("class") {
                out += &format!("class: {c}\n");
            }
            if let Some(f) = r.get("flow") {
                out += &format!("evidence: {}\nwitness: {}\n", fmt_value(&f["evidence"]), fmt_value(&f["witness"]));
            }
            if let Some(o) = r.get("oracle") {
                out += &format!("exact criterion: {}\n", fmt_value(&o["class"]));
            }
        }
        "flow" => {
            let v = &r["verdict"];
            out += &format!(
                "class: {}\niterations: {}\nfinal |nu|: {}\n",
                fmt_value(&v["class"]),
                fmt_value(&v["iterations"]),
                fmt_value(&v["final_moment_norm"])
            );
            if let Some(trace) = r["trace"].as_array() {
                out += "norm\tmoment_norm\tstep\n";
                for s in trace {
                    out += &format!("{}\t{}\t{}\n", fmt_value(&s["norm"]), fmt_value(&s["moment_norm"]), fmt_value(&s["step"]));
                }
            }
        }
        "perturb" | "scan" => {
            let cert = r.get("certificate").or_else(|| r.get("scaling").map(|s| &s["certificate"]));
            if let Some(s) = r.get("scaling") {
                out += &format!("t*: {}\n", fmt_value(&s["t_star"]));
            }
            if let Some(c) = cert {
                out += &format!(
                    "|mu(x0)|: {}\n|mu(y)|: {}\n|eta|: {}\nlambda: {}\ndelta: {}\n",
                    fmt_value(&c["mu_norm_initial"]),
                    fmt_value(&c["mu_norm_final"]),
                    fmt_value(&c["eta_norm"]),
                    fmt_value(&c["lambda_used"]),
                    fmt_value(&c["delta_used"])
                );
            }
            if let Some(c) = r.get("check") {
                out += &format!("check passed: {}\n", fmt_value(&c["passed"]));
            }
            if let Some(s) = r.get("samples").and_then(Value::as_array) {
                out += "t\tmu_norm\tlambda\tproduct\n";
                for x in s {
                    out += &format!("{}\t{}\t{}\t{}\n", fmt_value(&x["t"]), fmt_value(&x["mu_norm"]), fmt_value(&x["lambda"]), fmt_value(&x["product"]));
                }
            }
        }
        "degenerate" => {
            for k in ["rho", "limit", "weight", "dim_jump", "orbit_distance", "is_product"] {
                if let Some(v) = field(k) {
                    out += &format!("{k}: {v}\n");
                }
            }
        }
        "selftest" => {
            for c in r["checks"].as_array().into_iter().flatten() {
                let mark = if c["passed"].as_bool() == Some(true) { "PASS" } else { "FAIL" };
                out += &format!("{mark} {} {}\n", fmt_value(&c["check"]), fmt_value(&c["detail"]));
            }
        }
        "verify" => {
            out += &format!("certificates: {}\npassed: {}\n", fmt_value(&r["certificates"]), fmt_value(&r["passed"]));
            for f in r["failures"].as_array().into_iter().flatten() {
                out += &format!("  {}\n", fmt_value(f));
            }
        }
        _ => {}
    }
    for d in &report.diagnostics {
        out += &format!("error: {d}\n");
    }
    out
}

/// Entry point shared by the binary: parses `args`, runs, prints and
/// returns the process exit code.
pub fn main_with_args(args: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_PARSE,
            };
            let _ = e.print();
            return code;
        }
    };
    let report = run(&cli, args.into_iter().skip(1).collect());
    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, report.to_json()) {
            eprintln!("cannot write {}: {e}", path.display());
            return EXIT_PARSE;
        }
    }
    match cli.format {
        Format::Text => print!("{}", render_text(&report)),
        Format::Machine => println!("{}", report.to_json()),
    }
    report.exit_code
}
