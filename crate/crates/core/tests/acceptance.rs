//! The nine acceptance criteria. Each one checks the library against an
//! oracle written here, is timed against its budget, and prints one line.

use std::time::{Duration, Instant};

use momentkit::algebra::{omega0, GroupAction, OneParameterSubgroup, StatePoint, C64};
use momentkit::invariants::{analyze_degeneration, degeneration_weight, semicontinuity_scan, OrbitOptions};
use momentkit::models::{block_diag, bundled_models, su2_basis, sym2_rep, u2_basis, BundledModel};
use momentkit::moment::{linear_moment, slice_moment, SliceModel};
use momentkit::perturb::{
    geometric_grid, lambda_at, lambda_bound, perturb_to_zero, scaling_search, LambdaOptions, PerturbOptions, ZeroCertificate,
};
use momentkit::report::{certificate_json, verify_report, Report};
use momentkit::stability::{kempf_ness_flow, torus_polystability, FlowOptions, StabilityClass};
use momentkit::Error;
use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num::rational::Rational64;
use num::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

type R = Rational64;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn cnum(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn random_complex(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DVector<C64> {
    DVector::from_fn(n, |_, _| cnum(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)))
}

/// Random torus with integer weights and a point whose coordinates vanish
/// with probability 0.3. Draws again if the weight matrix has a zero row.
fn random_torus(rng: &mut ChaCha8Rng, max_k: usize, max_n: usize) -> (Vec<Vec<i64>>, GroupAction, StatePoint) {
    loop {
        let k = rng.gen_range(1..=max_k);
        let n = rng.gen_range(1..=max_n);
        let w: Vec<Vec<i64>> = (0..k).map(|_| (0..n).map(|_| rng.gen_range(-5..=5)).collect()).collect();
        let v = StatePoint::from_vec(
            (0..n)
                .map(|_| if rng.gen_bool(0.3) { cnum(0.0, 0.0) } else { cnum(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)) })
                .collect(),
        );
        if let Ok(a) = GroupAction::torus(w.clone()) {
            return (w, a, v);
        }
    }
}

fn random_matrix_action(rng: &mut ChaCha8Rng) -> GroupAction {
    let basis = if rng.gen_bool(0.5) { su2_basis() } else { u2_basis() };
    let nblocks = rng.gen_range(1..=3);
    let kinds: Vec<u8> = (0..nblocks).map(|_| rng.gen_range(0..3)).collect();
    let reps = basis
        .generators()
        .iter()
        .map(|g| {
            let parts: Vec<DMatrix<C64>> = kinds
                .iter()
                .map(|k| match k {
                    0 => g.clone(),
                    1 => sym2_rep(g),
                    _ => DMatrix::zeros(1, 1),
                })
                .collect();
            block_diag(&parts)
        })
        .collect();
    GroupAction::matrix(basis, reps).expect("direct sums of representations")
}

// ---- exact rational oracle for torus stability ----

fn rank_exact(rows: &[Vec<R>]) -> usize {
    let mut m: Vec<Vec<R>> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(rank, p);
        for i in 0..m.len() {
            if i != rank && !m[i][c].is_zero() {
                let f = m[i][c] / m[rank][c];
                for j in 0..cols {
                    let d = m[rank][j] * f;
                    m[i][j] -= d;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Unique solution of `A c = b` (A given by columns), if consistent and the
/// columns are independent.
fn solve_unique(columns: &[Vec<R>], b: &[R]) -> Option<Vec<R>> {
    let rows = b.len();
    let m = columns.len();
    let mut aug: Vec<Vec<R>> = (0..rows).map(|i| columns.iter().map(|c| c[i]).chain([b[i]]).collect()).collect();
    let mut r = 0;
    for c in 0..m {
        let Some(p) = (r..rows).find(|&i| !aug[i][c].is_zero()) else { return None };
        aug.swap(r, p);
        let inv = R::one() / aug[r][c];
        for j in 0..=m {
            aug[r][j] *= inv;
        }
        for i in 0..rows {
            if i != r && !aug[i][c].is_zero() {
                let f = aug[i][c];
                for j in 0..=m {
                    let d = aug[r][j] * f;
                    aug[i][j] -= d;
                }
            }
        }
        r += 1;
    }
    if (r..rows).any(|i| !aug[i][m].is_zero()) {
        return None;
    }
    Some((0..m).map(|c| aug[c][m]).collect())
}

fn subsets(items: &[usize], max_len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &x in items {
        let extra: Vec<Vec<usize>> = out.iter().filter(|s| s.len() < max_len).map(|s| [s.clone(), vec![x]].concat()).collect();
        out.extend(extra);
    }
    out
}

/// Classification from Caratheodory enumeration: semistable iff the origin
/// is a convex combination of affinely independent support weights,
/// polystable iff each `-w_j` lies in the cone of the support weights.
fn exact_class(w: &[Vec<i64>], support: &[usize]) -> StabilityClass {
    let k = w.len();
    // the origin is its own closed orbit
    if support.is_empty() {
        return StabilityClass::PolystableNotStable;
    }
    let col = |j: usize| -> Vec<R> { (0..k).map(|a| R::from_integer(w[a][j])).collect() };
    let semistable = subsets(support, k + 1).iter().filter(|t| !t.is_empty()).any(|t| {
        let cols: Vec<Vec<R>> = t.iter().map(|&j| [col(j), vec![R::one()]].concat()).collect();
        let rhs: Vec<R> = vec![R::zero(); k].into_iter().chain([R::one()]).collect();
        solve_unique(&cols, &rhs).is_some_and(|c| c.iter().all(|x| !x.is_negative()))
    });
    if !semistable {
        return StabilityClass::Unstable;
    }
    let cands = subsets(support, k);
    let polystable = support.iter().all(|&j| {
        let target: Vec<R> = col(j).into_iter().map(|x| -x).collect();
        cands.iter().any(|t| {
            let cols: Vec<Vec<R>> = t.iter().map(|&i| col(i)).collect();
            solve_unique(&cols, &target).is_some_and(|c| c.iter().all(|x| !x.is_negative()))
        })
    });
    if !polystable {
        return StabilityClass::SemistableNotPolystable;
    }
    let rows: Vec<Vec<R>> = (0..k).map(|a| support.iter().map(|&j| R::from_integer(w[a][j])).collect()).collect();
    if rank_exact(&rows) == rank_exact(&integer_rows(w)) {
        StabilityClass::Stable
    } else {
        StabilityClass::PolystableNotStable
    }
}

fn integer_rows(w: &[Vec<i64>]) -> Vec<Vec<R>> {
    w.iter().map(|r| r.iter().map(|&x| R::from_integer(x)).collect()).collect()
}

/// Stabilizer dimension of a torus point: `rank W - rank W_S`, the torus
/// acting through its image of dimension `rank W`.
fn torus_stabilizer_dim(w: &[Vec<i64>], x: &StatePoint) -> usize {
    let support: Vec<usize> = (0..x.dim()).filter(|&j| x.coords()[j].norm() > 0.0).collect();
    let full = rank_exact(&integer_rows(w));
    if support.is_empty() {
        return full;
    }
    let rows: Vec<Vec<R>> = w.iter().map(|r| support.iter().map(|&j| R::from_integer(r[j])).collect()).collect();
    full - rank_exact(&rows)
}

/// Null space of the real infinitesimal action, from an SVD computed here.
fn stabilizer_basis(action: &GroupAction, x: &StatePoint) -> DMatrix<f64> {
    let a = action.infinitesimal_action(x).expect("point has the right dimension");
    let k = a.ncols();
    let ata = a.transpose() * &a;
    let eig = SymmetricEigen::new(ata);
    let tol = (1e-8 * x.norm().max(1.0)).powi(2);
    let cols: Vec<DVector<f64>> = (0..k).filter(|&i| eig.eigenvalues[i] <= tol).map(|i| eig.eigenvectors.column(i).into_owned()).collect();
    if cols.is_empty() {
        DMatrix::zeros(k, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// `exp(i A_eta) x0`, with the matrix exponential taken here.
fn imaginary_exp(action: &GroupAction, eta: &DVector<f64>, x0: &StatePoint) -> StatePoint {
    let i = cnum(0.0, 1.0);
    let m = action.algebra_matrix(eta) * i;
    StatePoint::new(m.exp() * x0.coords())
}

/// `1 / lambda_min` of `sigma^T sigma` on the complement of its kernel.
fn lambda_oracle(action: &GroupAction, x: &StatePoint) -> f64 {
    let a = action.infinitesimal_action(x).unwrap();
    let sv = SVD::new(a, false, false).singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().filter(|&s| s > 1e-8 * smax).fold(f64::INFINITY, f64::min);
    1.0 / (smin * smin)
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn balanced_cases() -> Vec<(BundledModel, StatePoint)> {
    bundled_models().into_iter().flat_map(|m| m.balanced.clone().into_iter().map(move |v| (m.clone(), v))).collect()
}

// ---- criteria ----

fn moment_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let h = 1e-5;
    let mut worst = 0.0f64;
    for i in 0..200 {
        let action = if i % 2 == 0 { random_torus(&mut rng, 3, 6).1 } else { random_matrix_action(&mut rng) };
        let n = action.ambient_dim();
        let v = random_complex(&mut rng, n, 1.5);
        let u = random_complex(&mut rng, n, 1.0);
        let xi = DVector::from_fn(action.dim(), |_, _| rng.gen_range(-1.0..1.0));
        let at = |s: f64| linear_moment(&action, &StatePoint::new(&v + &u * cnum(s, 0.0))).pairing(&xi);
        let fd = (at(h) - at(-h)) / (2.0 * h);
        let sigma = action.apply(&xi, &v);
        worst = worst.max((fd - omega0(&sigma, &u)).abs());
    }
    outcome(worst < 1e-8, format!("200 instances, max defect {worst:.3e}"))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut flow_agree = 0;
    let mut lib_agree = 0;
    let mut first_miss = None;
    for i in 0..200 {
        let (w, action, v) = random_torus(&mut rng, 3, 6);
        let exact = exact_class(&w, &v.support());
        let flow = kempf_ness_flow(&action, &v, &FlowOptions::default()).map(|f| f.class);
        if flow.as_ref().ok() == Some(&exact) {
            flow_agree += 1;
        } else if first_miss.is_none() {
            first_miss = Some(format!("instance {i}: weights {w:?}, support {:?}, exact {exact:?}, flow {flow:?}", v.support()));
        }
        if torus_polystability(&w, &v.support()).class == exact {
            lib_agree += 1;
        }
    }
    let mut detail = format!("flow {flow_agree}/200, polytope criterion {lib_agree}/200");
    if let Some(m) = first_miss {
        detail += &format!("; {m}");
    }
    outcome(flow_agree == 200 && lib_agree == 200, detail)
}

/// Generic points and points on stabilizer strata of a model.
fn sample_point(rng: &mut ChaCha8Rng, m: &BundledModel, stratum: bool) -> StatePoint {
    let n = m.model.inner().ambient_dim();
    let radius = 0.9 * m.model.ball_radius();
    let mut x = random_complex(rng, n, 1.0);
    if stratum {
        match rng.gen_range(0..3) {
            0 => x.iter_mut().for_each(|z| {
                if rng.gen_bool(0.5) {
                    *z = cnum(0.0, 0.0)
                }
            }),
            1 if n == 4 && !m.model.inner().is_torus() => {
                let c = cnum(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                x[2] = x[0] * c;
                x[3] = x[1] * c;
            }
            1 => {
                let keep = rng.gen_range(0..n);
                x.iter_mut().enumerate().for_each(|(j, z)| {
                    if j != keep {
                        *z = cnum(0.0, 0.0)
                    }
                });
            }
            _ => x.fill(cnum(0.0, 0.0)),
        }
    }
    let norm = x.norm();
    if norm > 0.0 {
        x *= cnum(rng.gen_range(0.05..1.0) * radius / norm, 0.0);
    }
    StatePoint::new(x)
}

fn orthogonality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let models = bundled_models();
    let mut worst = 0.0f64;
    let mut on_strata = 0;
    for i in 0..500 {
        let m = &models[i % models.len()];
        let x = sample_point(&mut rng, m, i % 2 == 1);
        let basis = stabilizer_basis(m.model.inner(), &x);
        if basis.ncols() > 0 {
            on_strata += 1;
        }
        let mu = slice_moment(&m.model, &x).expect("sample lies in the ball");
        let pairing = (basis.transpose() * &mu.coeffs).amax();
        worst = worst.max(if basis.ncols() > 0 { pairing } else { 0.0 });
    }
    outcome(worst < 1e-9, format!("500 points ({on_strata} with nontrivial stabilizer), max pairing {worst:.3e}"))
}

fn cubic_decay() -> Outcome {
    let grid = geometric_grid(1e-3, 1e-1, 20);
    let mut lines = Vec::new();
    let mut passed = true;
    for (m, v) in balanced_cases() {
        let pts: Vec<(f64, f64)> = grid.iter().map(|&t| (t, slice_moment(&m.model, &v.scaled(t)).unwrap().norm())).collect();
        if m.is_linear() {
            // mu(t v) = t^2 nu(v) vanishes identically; check it is zero to rounding
            let worst = pts.iter().map(|&(t, y)| y / (t * t * v.norm_sq())).fold(0.0, f64::max);
            passed &= worst < 1e-14;
            lines.push(format!("{} zero ({worst:.1e})", m.name));
        } else {
            let slope = least_squares_slope(&pts);
            passed &= slope >= 2.9;
            lines.push(format!("{} {slope:.4}", m.name));
        }
    }
    outcome(passed, lines.join(", "))
}

fn scaling_law() -> Outcome {
    let grid = geometric_grid(1e-3, 1e-1, 20);
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst = 0.0f64;
    let mut mismatch = 0.0f64;
    let mut count = 0;
    for m in bundled_models().into_iter().filter(|m| m.is_linear()) {
        let n = m.model.inner().ambient_dim();
        let mut vs = m.balanced.clone();
        vs.extend((0..3).map(|_| StatePoint::new(random_complex(&mut rng, n, 1.0))));
        for v in vs {
            let scaled: Vec<f64> = grid.iter().map(|&t| lambda_at(&m.model, &v.scaled(t), 1e-8).unwrap() * t * t).collect();
            for (&t, &s) in grid.iter().zip(&scaled) {
                let o = lambda_oracle(m.model.inner(), &v.scaled(t)) * t * t;
                mismatch = mismatch.max((s - o).abs() / o);
            }
            let mean = scaled.iter().sum::<f64>() / scaled.len() as f64;
            let spread = scaled.iter().fold(0.0f64, |a, &s| a.max((s - mean).abs() / mean));
            worst = worst.max(spread);
            count += 1;
        }
    }
    outcome(
        worst < 0.01 && mismatch < 1e-6,
        format!("{count} vectors, max relative variation {worst:.3e}, max deviation from direct computation {mismatch:.3e}"),
    )
}

/// Independent recheck of a certificate's headline claims.
fn certificate_sound(model: &SliceModel, c: &ZeroCertificate) -> Result<(), String> {
    let y = imaginary_exp(model.inner(), &c.eta, &c.x0);
    let dy = (y.coords() - c.y.coords()).norm();
    if dy > 1e-9 * y.norm().max(1.0) {
        return Err(format!("y off by {dy:.3e}"));
    }
    let mu0 = slice_moment(model, &c.x0).map_err(|e| e.to_string())?.norm();
    let mu_y = slice_moment(model, &y).map_err(|e| e.to_string())?.norm();
    if !(mu_y < c.zero_tol) {
        return Err(format!("|mu(y)| = {mu_y:.3e} not below {:.3e}", c.zero_tol));
    }
    if (mu0 - c.mu_norm_initial).abs() > 1e-12 * (1.0 + mu0) {
        return Err("recorded |mu(x0)| is wrong".into());
    }
    let eta = c.eta.norm();
    if !(eta <= c.lambda_used * mu0 * (1.0 + 1e-6)) {
        return Err(format!("|eta| = {eta:.6e} exceeds lambda |mu(x0)| = {:.6e}", c.lambda_used * mu0));
    }
    if mu0 >= c.zero_tol && !(c.lambda_used * mu0 < c.delta_used) {
        return Err("hypothesis does not hold".into());
    }
    let basis = stabilizer_basis(model.inner(), &c.x0);
    if basis.ncols() > 0 && (basis.transpose() * &c.eta).amax() > 1e-9 * eta.max(1.0) {
        return Err("eta is not orthogonal to the stabilizer".into());
    }
    let est = lambda_bound(
        model,
        &c.x0,
        c.delta_used,
        &LambdaOptions { margin: c.lambda_margin, samples: c.lambda_interior_samples, seed: c.lambda_seed, ..LambdaOptions::default() },
    );
    match est {
        Ok(est) if (est.lambda - c.lambda_used).abs() <= 1e-9 * est.lambda => Ok(()),
        Ok(est) => Err(format!("lambda regenerates to {:.6e}", est.lambda)),
        Err(Error::EmptyComplement) if eta == 0.0 => Ok(()),
        Err(e) => Err(e.to_string()),
    }
}

struct SearchRun {
    name: &'static str,
    certificate: Option<ZeroCertificate>,
}

fn certificate_soundness() -> (Outcome, Vec<SearchRun>) {
    let grid = geometric_grid(1e-3, 1e-1, 20);
    let mut runs = Vec::new();
    let mut problems = Vec::new();
    let (mut certified, mut refused) = (0, 0);
    for (m, v) in balanced_cases() {
        for delta in [0.1, 1e-2, 1e-5] {
            let opts = PerturbOptions::default();
            match scaling_search(&m.model, &v, delta, &grid, &opts) {
                Ok(r) => match certificate_sound(&m.model, &r.certificate) {
                    Ok(()) => {
                        certified += 1;
                        runs.push(SearchRun { name: m.name, certificate: Some(r.certificate) });
                    }
                    Err(e) => problems.push(format!("{} delta {delta}: {e}", m.name)),
                },
                Err(Error::NeverSatisfied { v_balanced, samples }) => {
                    // every grid point must fail the hypothesis on recomputation
                    let mut honest = samples.len() == grid.len();
                    for &(t, _, _, _) in &samples {
                        let x0 = v_balanced.scaled(t);
                        let mu = slice_moment(&m.model, &x0).unwrap().norm();
                        let lambda = lambda_bound(&m.model, &x0, delta, &opts.lambda).map(|l| l.lambda);
                        honest &= matches!(lambda, Ok(l) if l * mu >= delta) && mu >= momentkit::perturb::default_zero_tol(&x0);
                    }
                    if honest {
                        refused += 1;
                        runs.push(SearchRun { name: m.name, certificate: None });
                    } else {
                        problems.push(format!("{} delta {delta}: refusal not confirmed", m.name));
                    }
                }
                Err(e) => problems.push(format!("{} delta {delta}: {e}", m.name)),
            }
        }
    }
    let mut detail = format!("{certified} certified, {refused} honest refusals, {} unverifiable", problems.len());
    if !problems.is_empty() {
        detail += &format!(": {}", problems.join("; "));
    }
    (outcome(problems.is_empty() && certified > 0, detail), runs)
}

fn semicontinuity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let opts = OrbitOptions::default();
    let mut cases = 0;
    let mut jumps = 0;
    let mut problems = Vec::new();
    while cases < 50 {
        let (w, action, v) = random_torus(&mut rng, 3, 6);
        let k = w.len();
        let rho_int: Vec<i64> = (0..k).map(|_| rng.gen_range(-3..=3)).collect();
        // limit from the signs of the lattice pairings
        let mut limit = Vec::new();
        let mut exists = true;
        for j in 0..v.dim() {
            let p: i64 = (0..k).map(|a| w[a][j] * rho_int[a]).sum();
            let z = v.coords()[j];
            if p > 0 {
                limit.push(cnum(0.0, 0.0));
            } else if p < 0 && z.norm() > 0.0 {
                exists = false;
            } else {
                limit.push(z);
            }
        }
        let rho = OneParameterSubgroup::from_integers(&rho_int);
        if !exists || v.is_zero() {
            continue;
        }
        cases += 1;
        let limit = StatePoint::from_vec(limit);
        let rec = match analyze_degeneration(&action, &rho, &v, &opts) {
            Ok(r) => r,
            Err(e) => {
                problems.push(format!("case {cases}: {e}"));
                continue;
            }
        };
        let dims = (torus_stabilizer_dim(&w, &v), torus_stabilizer_dim(&w, &limit));
        if rec.limit != limit || rec.dim_jump != dims {
            problems.push(format!("case {cases}: record {:?} differs from direct {:?}", rec.dim_jump, dims));
        }
        if dims.1 < dims.0 {
            problems.push(format!("case {cases}: stabilizer shrinks {dims:?}"));
        }
        if !rec.is_product && dims.1 <= dims.0 {
            problems.push(format!("case {cases}: non-product without a jump {dims:?}"));
        }
        if dims.1 > dims.0 {
            jumps += 1;
        }
        let scan = semicontinuity_scan(&action, &[(rho, v)], &opts);
        problems.extend(scan.violations);
    }
    outcome(problems.is_empty(), format!("50 degenerations, {jumps} strict jumps, {} violations {problems:?}", problems.len()))
}

fn zero_weight_example() -> Outcome {
    let action = GroupAction::torus(vec![vec![1, -1, 0]]).unwrap();
    let rho = OneParameterSubgroup::from_integers(&[1]);
    let mut ok = true;
    let mut detail = String::new();
    for (a, c) in [(0.8, 1.2), (1.0, 1.0), (3.0, -0.5)] {
        let v = StatePoint::from_real(&[a, 0.0, c]);
        let rec = analyze_degeneration(&action, &rho, &v, &OrbitOptions::default()).unwrap();
        let weight = degeneration_weight(&action, &rho, &v).unwrap();
        ok &= !rec.is_product && rec.dim_jump == (0, 1) && rec.weight == 0.0 && weight == 0.0;
        ok &= rec.limit == StatePoint::from_real(&[0.0, 0.0, c]);
        detail = format!("is_product {}, jump {:?}, weight {}", rec.is_product, rec.dim_jump, rec.weight);
    }
    outcome(ok, detail)
}

const SPEC_TEMPLATE: &str = "schema_version = 1\n[group]\ntype = \"torus\"\n[representation]\nweights = [[1, -1]]\n";

fn tamper_detection(runs: &[SearchRun]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut base: Vec<(String, ZeroCertificate)> =
        runs.iter().filter_map(|r| r.certificate.clone().map(|c| (r.name.to_string(), c))).collect();
    // add certificates with a nontrivial continuation path
    let linear = momentkit::models::linear_torus().unwrap();
    for x0 in [[2.0, 1.0], [1.0, 0.9], [0.8, 1.1]] {
        base.push(("linear_torus".into(), perturb_to_zero(&linear, &StatePoint::from_real(&x0), 1.0, &PerturbOptions::default()).unwrap()));
    }
    let base: Vec<_> = base.into_iter().filter(|(_, c)| c.eta_norm > 0.0).collect();
    let mut spec = SPEC_TEMPLATE.to_string();
    let mut seen = Vec::new();
    for (name, _) in &base {
        if !seen.contains(name) {
            spec += &format!("[models.{name}]\nbundled = \"{name}\"\n");
            seen.push(name.clone());
        }
    }
    let report_for = |name: &str, cert: &ZeroCertificate| {
        let parsed = momentkit::spec::Spec::parse(&spec).unwrap();
        let mut r = Report::new("perturb", vec![], Some(&parsed), 0);
        r.results = json!({"model": name, "certificate": certificate_json(cert)});
        r
    };
    for (name, c) in &base {
        if !verify_report(&report_for(name, c)).unwrap().passed() {
            return outcome(false, format!("untampered {name} certificate rejected"));
        }
    }
    let fields = ["x0", "eta", "y", "lambda_used", "delta_used", "mu_norm_initial", "mu_norm_final", "eta_norm"];
    let mut accepted = Vec::new();
    for i in 0..200 {
        let (name, cert) = &base[i % base.len()];
        let field = fields[i % fields.len()];
        let r = rng.gen_range(0.01..0.5);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let bump = |x: f64| x + sign * (r * x.abs()).max(1e-6);
        let mut value = certificate_json(cert);
        match field {
            "x0" | "y" => {
                let j = rng.gen_range(0..cert.x0.dim());
                let part = rng.gen_range(0..2);
                let old = value[field][j][part].as_f64().unwrap();
                value[field][j][part] = json!(bump(old));
            }
            "eta" => {
                let j = rng.gen_range(0..cert.eta.len());
                let old = value["eta"][j].as_f64().unwrap();
                value["eta"][j] = json!(bump(old));
            }
            _ => {
                let old = value[field].as_f64().unwrap();
                value[field] = json!(bump(old));
            }
        }
        let mut report = report_for(name, cert);
        report.results["certificate"] = value;
        let outcome = verify_report(&report).unwrap();
        if outcome.passed() {
            accepted.push(format!("{name}.{field}"));
        }
    }
    outcome(accepted.is_empty(), format!("200 mutations over {} certificates, {} accepted {accepted:?}", base.len(), accepted.len()))
}

fn timed(label: &str, budget: Duration, f: impl FnOnce() -> Outcome, report: &mut Vec<(String, bool)>) {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let passed = out.passed && elapsed <= budget;
    println!(
        "{} {label} [{:.2}s / {}s] {}",
        if passed { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs(),
        out.detail
    );
    report.push((label.to_string(), passed));
}

#[test]
fn acceptance() {
    let s = Duration::from_secs;
    let mut results = Vec::new();
    timed("1 moment-map defining identity", s(5), moment_identity, &mut results);
    timed("2 flow agrees with exact criterion", s(60), oracle_equivalence, &mut results);
    timed("3 moment orthogonal to stabilizer", s(10), orthogonality, &mut results);
    timed("4 cubic decay on balanced vectors", s(10), cubic_decay, &mut results);
    timed("5 inverse-square scaling of lambda", s(5), scaling_law, &mut results);
    let mut runs = Vec::new();
    timed(
        "6 scaling search certificates",
        s(60),
        || {
            let (o, r) = certificate_soundness();
            runs = r;
            o
        },
        &mut results,
    );
    timed("7 stabilizer semicontinuity", s(10), semicontinuity, &mut results);
    timed("8 zero-weight non-product degeneration", s(1), zero_weight_example, &mut results);
    timed("9 certificate tamper detection", s(5), || tamper_detection(&runs), &mut results);
    let failed: Vec<_> = results.iter().filter(|r| !r.1).map(|r| r.0.clone()).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
