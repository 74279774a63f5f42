//! TOML input files: the group action and the named objects that commands
//! refer to.

use indexmap::IndexMap;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{GroupAction, LieAlgebraBasis, OneParameterSubgroup, StatePoint, C64, DEFAULT_RANK_TOL};
use crate::error::{Error, Result};
use crate::invariants::OrbitOptions;
use crate::models::{self, block_diag, sym2_rep};
use crate::moment::{Monomial, PolynomialMap, SliceModel};
use crate::perturb::{LambdaOptions, PerturbOptions};
use crate::rational::parse_rational;
use crate::stability::FlowOptions;

pub const SPEC_SCHEMA_VERSION: u32 = 1;

/// A complex number written either as `[re, im]` or as a bare real.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexEntry {
    Pair([f64; 2]),
    Real(f64),
}

impl ComplexEntry {
    pub fn value(self) -> C64 {
        match self {
            Self::Pair([re, im]) => C64::new(re, im),
            Self::Real(re) => C64::new(re, 0.0),
        }
    }
}

/// Rows of complex entries.
pub type MatrixSpec = Vec<Vec<ComplexEntry>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    /// `torus`, `su2`, `u2` or `matrix`.
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    /// Anti-Hermitian generators for `matrix` groups.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<MatrixSpec>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentationSpec {
    /// `k x N` weight matrix of a torus.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<Vec<i64>>>,
    /// Images of the group generators.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<Vec<MatrixSpec>>,
    /// Direct sum of `defining`, `sym2` and `trivial` blocks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub output: usize,
    pub coeff: ComplexEntry,
    pub powers: Vec<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundled: Option<String>,
    /// Multiplies every term of degree at least two.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer: Option<RepresentationSpec>,
    /// Start from the coordinate inclusion of the inner space.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub include_identity: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<TermSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ball_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_scale: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub escape_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbit_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate_zero_tol: Option<f64>,
}

pub const TOLERANCE_NAMES: [&str; 9] = [
    "zero_tol",
    "step_tol",
    "escape_tol",
    "rank_tol",
    "max_iter",
    "orbit_tol",
    "lambda_margin",
    "lambda_samples",
    "certificate_zero_tol",
];

fn parse_count(name: &str, value: &str) -> Result<usize> {
    value.trim().parse().map_err(|_| Error::Parse(format!("tolerance {name} expects an integer, got {value:?}")))
}

impl Tolerances {
    /// Applies a `name=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (name, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("tolerance override {assignment:?} is not name=value")))?;
        let name = name.trim();
        let real = || -> Result<f64> {
            let v: f64 = value.trim().parse().map_err(|_| Error::Parse(format!("tolerance {name} expects a number, got {value:?}")))?;
            if v.is_finite() && v >= 0.0 {
                Ok(v)
            } else {
                Err(Error::Parse(format!("tolerance {name} must be finite and nonnegative")))
            }
        };
        match name {
            "zero_tol" => self.zero_tol = Some(real()?),
            "step_tol" => self.step_tol = Some(real()?),
            "escape_tol" => self.escape_tol = Some(real()?),
            "rank_tol" => self.rank_tol = Some(real()?),
            "max_iter" => self.max_iter = Some(parse_count(name, value)?),
            "orbit_tol" => self.orbit_tol = Some(real()?),
            "lambda_margin" => self.lambda_margin = Some(real()?),
            "lambda_samples" => self.lambda_samples = Some(parse_count(name, value)?),
            "certificate_zero_tol" => self.certificate_zero_tol = Some(real()?),
            _ => return Err(Error::Parse(format!("unknown tolerance {name:?}; known: {}", TOLERANCE_NAMES.join(", ")))),
        }
        Ok(())
    }

    pub fn flow_options(&self) -> FlowOptions {
        let d = FlowOptions::default();
        FlowOptions {
            zero_tol: self.zero_tol.unwrap_or(d.zero_tol),
            step_tol: self.step_tol.unwrap_or(d.step_tol),
            escape_tol: self.escape_tol.unwrap_or(d.escape_tol),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
            rank_tol: self.rank_tol.unwrap_or(d.rank_tol),
            ..d
        }
    }

    pub fn perturb_options(&self, seed: u64) -> PerturbOptions {
        let d = LambdaOptions::default();
        PerturbOptions {
            lambda: LambdaOptions {
                margin: self.lambda_margin.unwrap_or(d.margin),
                samples: self.lambda_samples.unwrap_or(d.samples),
                seed,
                rank_tol: self.rank_tol.unwrap_or(DEFAULT_RANK_TOL),
            },
            zero_tol: self.certificate_zero_tol,
            ..PerturbOptions::default()
        }
    }

    pub fn orbit_options(&self) -> OrbitOptions {
        let d = OrbitOptions::default();
        OrbitOptions { orbit_tol: self.orbit_tol.unwrap_or(d.orbit_tol), ..d }
    }

    /// Every tolerance with its effective value, for report echoes.
    pub fn effective(&self, seed: u64) -> IndexMap<String, f64> {
        let f = self.flow_options();
        let p = self.perturb_options(seed);
        let o = self.orbit_options();
        let mut out = IndexMap::new();
        out.insert("zero_tol".into(), f.zero_tol);
        out.insert("step_tol".into(), f.step_tol);
        out.insert("escape_tol".into(), f.escape_tol);
        out.insert("rank_tol".into(), f.rank_tol);
        out.insert("max_iter".into(), f.max_iter as f64);
        out.insert("orbit_tol".into(), o.orbit_tol);
        out.insert("lambda_margin".into(), p.lambda.margin);
        out.insert("lambda_samples".into(), p.lambda.samples as f64);
        if let Some(z) = p.zero_tol {
            out.insert("certificate_zero_tol".into(), z);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    pub group: GroupSpec,
    #[serde(default)]
    pub representation: RepresentationSpec,
    #[serde(default)]
    pub points: IndexMap<String, Vec<ComplexEntry>>,
    /// Lattice directions as `"p/q"` strings.
    #[serde(default)]
    pub subgroups: IndexMap<String, Vec<String>>,
    #[serde(default)]
    pub models: IndexMap<String, ModelSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl SpecFile {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// A parsed and validated spec file.
#[derive(Clone, Debug)]
pub struct Spec {
    pub file: SpecFile,
    pub text: String,
    pub action: GroupAction,
    pub points: IndexMap<String, StatePoint>,
    pub subgroups: IndexMap<String, OneParameterSubgroup>,
    pub models: IndexMap<String, SliceModel>,
}

fn matrix_from_spec(m: &MatrixSpec, what: &str) -> Result<DMatrix<C64>> {
    let rows = m.len();
    if rows == 0 || m.iter().any(|r| r.len() != rows) {
        return Err(Error::Parse(format!("{what} must be a nonempty square matrix")));
    }
    Ok(DMatrix::from_fn(rows, rows, |i, j| m[i][j].value()))
}

fn matrices_from_spec(ms: &[MatrixSpec], what: &str) -> Result<Vec<DMatrix<C64>>> {
    ms.iter().enumerate().map(|(i, m)| matrix_from_spec(m, &format!("{what} {i}"))).collect()
}

fn check_weights(weights: &[Vec<i64>], rank: Option<usize>) -> Result<()> {
    if weights.is_empty() || weights[0].is_empty() {
        return Err(Error::Parse("weight matrix must be nonempty".into()));
    }
    let n = weights[0].len();
    if weights.iter().any(|r| r.len() != n) {
        return Err(Error::Parse("weight matrix rows have different lengths".into()));
    }
    if let Some(k) = rank {
        if k != weights.len() {
            return Err(Error::Parse(format!("torus rank {k} does not match {} weight rows", weights.len())));
        }
    }
    Ok(())
}

fn group_basis(group: &GroupSpec) -> Result<LieAlgebraBasis> {
    match group.kind.as_str() {
        "su2" => Ok(models::su2_basis()),
        "u2" => Ok(models::u2_basis()),
        "matrix" => {
            let gens = group.generators.as_ref().ok_or_else(|| Error::Parse("matrix group needs generators".into()))?;
            LieAlgebraBasis::orthonormalize(&matrices_from_spec(gens, "generator")?)
        }
        other => Err(Error::Parse(format!("unknown group type {other:?}"))),
    }
}

fn build_action(group: &GroupSpec, rep: &RepresentationSpec, inner: Option<&GroupAction>) -> Result<GroupAction> {
    if group.kind == "torus" {
        let weights = rep.weights.clone().ok_or_else(|| Error::Parse("torus representation needs weights".into()))?;
        check_weights(&weights, group.rank)?;
        return match inner {
            Some(a) => a.torus_with_weights(weights),
            None => GroupAction::torus(weights),
        };
    }
    if rep.weights.is_some() {
        return Err(Error::Parse("weights are only meaningful for torus groups".into()));
    }
    let basis = match inner {
        Some(a) => a.basis().clone(),
        None => group_basis(group)?,
    };
    match (&rep.matrices, &rep.blocks) {
        (Some(_), Some(_)) => Err(Error::Parse("give either representation matrices or blocks, not both".into())),
        (Some(ms), None) => {
            if inner.is_some() {
                return Err(Error::Parse("outer matrices must be given as blocks over the inner basis".into()));
            }
            let gens = group.generators.as_ref().map(|g| matrices_from_spec(g, "generator")).transpose()?;
            let reps = matrices_from_spec(ms, "representation matrix")?;
            match gens {
                Some(g) => GroupAction::from_generators(&g, &reps),
                None => Err(Error::Parse("representation matrices need explicit group generators".into())),
            }
        }
        (None, blocks) => {
            let blocks = blocks.clone().unwrap_or_else(|| vec!["defining".into()]);
            if blocks.is_empty() {
                return Err(Error::Parse("representation needs at least one block".into()));
            }
            let reps = basis
                .generators()
                .iter()
                .map(|g| {
                    let parts = blocks
                        .iter()
                        .map(|b| match b.as_str() {
                            "defining" => Ok(g.clone()),
                            "sym2" if g.nrows() == 2 => Ok(sym2_rep(g)),
                            "sym2" => Err(Error::Parse("sym2 blocks need 2 x 2 generators".into())),
                            "trivial" => Ok(DMatrix::zeros(1, 1)),
                            other => Err(Error::Parse(format!("unknown block {other:?}"))),
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Ok(block_diag(&parts))
                })
                .collect::<Result<Vec<_>>>()?;
            GroupAction::matrix(basis, reps)
        }
    }
}

fn bundled_model(name: &str, eps: f64) -> Result<SliceModel> {
    match name {
        "linear_torus" => models::linear_torus(),
        "linear_su2" => models::linear_su2(),
        "quadratic_torus" => models::quadratic_torus(eps),
        "cubic_torus" => models::cubic_torus(eps),
        "two_torus" => models::two_torus(eps),
        "su2_pair" => models::su2_pair(eps),
        "u2_pair" => models::u2_pair(eps),
        other => Err(Error::Parse(format!("unknown bundled model {other:?}"))),
    }
}

fn build_model(file: &SpecFile, inner: &GroupAction, name: &str, m: &ModelSpec) -> Result<SliceModel> {
    let eps = m.epsilon.unwrap_or(models::DEFAULT_EPSILON);
    if let Some(b) = &m.bundled {
        if m.outer.is_some() || !m.terms.is_empty() || m.ball_radius.is_some() || m.omega_scale.is_some() || m.include_identity.is_some() {
            return Err(Error::Parse(format!("model {name}: bundled models take only an epsilon")));
        }
        return bundled_model(b, eps);
    }
    let outer = match &m.outer {
        Some(rep) => build_action(&file.group, rep, Some(inner))?,
        None => inner.clone(),
    };
    let n = inner.ambient_dim();
    let mut outputs: Vec<Vec<Monomial>> = vec![Vec::new(); outer.ambient_dim()];
    if m.include_identity.unwrap_or(true) {
        if outer.ambient_dim() < n {
            return Err(Error::Parse(format!("model {name}: outer space is smaller than the inner one")));
        }
        for (j, out) in PolynomialMap::identity(n).outputs().iter().enumerate() {
            outputs[j] = out.clone();
        }
    }
    for (i, t) in m.terms.iter().enumerate() {
        if t.output >= outputs.len() || t.powers.len() != n {
            return Err(Error::Parse(format!("model {name}: term {i} has the wrong shape")));
        }
        let scale = if t.powers.iter().sum::<u32>() >= 2 { eps } else { 1.0 };
        outputs[t.output].push(Monomial::new(t.coeff.value() * scale, t.powers.clone()));
    }
    let phi = PolynomialMap::new(n, outputs)?;
    SliceModel::new(inner.clone(), outer, phi, m.ball_radius.unwrap_or(1.0), m.omega_scale.unwrap_or(1.0))
        .map_err(|e| Error::Parse(format!("model {name}: {e}")))
}

pub fn parse_subgroup(entries: &[String]) -> Result<OneParameterSubgroup> {
    Ok(OneParameterSubgroup::new(entries.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?))
}

impl Spec {
    pub fn parse(text: &str) -> Result<Self> {
        let file: SpecFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if file.schema_version != SPEC_SCHEMA_VERSION {
            return Err(Error::SchemaMismatch(format!(
                "spec schema_version {} is not supported (expected {SPEC_SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        let action = build_action(&file.group, &file.representation, None).map_err(|e| match e {
            Error::Parse(_) => e,
            other => Error::Parse(format!("invalid group action: {other}")),
        })?;
        let points = file
            .points
            .iter()
            .map(|(k, v)| (k.clone(), StatePoint::from_vec(v.iter().map(|c| c.value()).collect())))
            .collect();
        let subgroups = file
            .subgroups
            .iter()
            .map(|(k, v)| {
                let rho = parse_subgroup(v)?;
                if rho.dim() != action.subgroup_dim() {
                    return Err(Error::Parse(format!("subgroup {k} has {} entries, expected {}", rho.dim(), action.subgroup_dim())));
                }
                Ok((k.clone(), rho))
            })
            .collect::<Result<IndexMap<_, _>>>()?;
        let models = file
            .models
            .iter()
            .map(|(k, m)| Ok((k.clone(), build_model(&file, &action, k, m)?)))
            .collect::<Result<IndexMap<_, _>>>()?;
        Ok(Self { file, text: text.to_string(), action, points, subgroups, models })
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn point(&self, name: &str) -> Result<&StatePoint> {
        self.points.get(name).ok_or_else(|| Error::Parse(format!("no point named {name:?}")))
    }

    pub fn model(&self, name: &str) -> Result<&SliceModel> {
        self.models.get(name).ok_or_else(|| Error::Parse(format!("no model named {name:?}")))
    }

    /// A named subgroup, or an inline comma-separated list of `p/q` entries.
    pub fn subgroup(&self, name: &str) -> Result<OneParameterSubgroup> {
        if let Some(rho) = self.subgroups.get(name) {
            return Ok(rho.clone());
        }
        let entries: Vec<String> = name.split(',').map(|s| s.trim().to_string()).collect();
        let rho = parse_subgroup(&entries).map_err(|_| Error::Parse(format!("no subgroup named {name:?}")))?;
        if rho.dim() != self.action.subgroup_dim() {
            return Err(Error::Parse(format!("subgroup {name:?} has {} entries, expected {}", rho.dim(), self.action.subgroup_dim())));
        }
        Ok(rho)
    }
}
