//! Run configuration: a TOML file with `[model]`, `[experiment]` and
//! `[output]` sections. The annotated schema lives in `configs/README.md`.

use std::collections::BTreeSet;
use std::path::PathBuf;

use rcm_core::model::{AdjacencySpec, Form, ModelSpec, Reach, WeightDistribution};
use serde::{Deserialize, Serialize};

use crate::error::LabError;

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub model: Option<ModelSection>,
    pub experiment: Option<ExperimentSection>,
    pub output: Option<OutputSection>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub dimension: Option<usize>,
    pub intensity: Option<f64>,
    pub half_width: Option<f64>,
    pub adjacency: Option<AdjacencySection>,
    pub weights: Option<WeightSection>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AdjacencySection {
    /// `gilbert`, `soft-power` or `constant`.
    pub form: Option<String>,
    pub radius: Option<f64>,
    pub exponent: Option<f64>,
    pub weighted: Option<bool>,
    pub value: Option<f64>,
    pub reach: Option<ReachSection>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ReachSection {
    /// `identity`, `linear`, `log1p`, `power` or `constant`.
    pub kind: Option<String>,
    pub scale: Option<f64>,
    pub exponent: Option<f64>,
    pub value: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSection {
    /// `point-mass`, `pareto` or `discrete`.
    pub law: Option<String>,
    pub shape: Option<f64>,
    pub truncation: Option<f64>,
    /// `[[weight, probability], ...]`.
    pub atoms: Option<Vec<[f64; 2]>>,
}

/// A seed written either as a TOML integer or as a decimal string (for
/// values beyond `i64`).
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum SeedValue {
    Int(u64),
    Text(String),
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub start: Option<f64>,
    pub step: Option<f64>,
    pub count: Option<usize>,
}

/// Every experiment parameter. Each command reads the subset it needs and
/// rejects the rest.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<SeedValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replica: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub with_origin: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_widths: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resamples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_lo: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_hi: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub size_cap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ghosts: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigmas: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice_half_width: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meshes: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub influence_samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub russo_samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe_weights: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight_set: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin_weight: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixtures: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instances: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_coordinates: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    /// `csv` or `json`.
    pub format: Option<String>,
    /// SVG canvas side in pixels.
    pub svg_size: Option<f64>,
    /// Node radius proportional to weight; defaults to true for weighted laws.
    pub radius_by_weight: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

pub fn parse(text: &str) -> Result<RawConfig, LabError> {
    toml::from_str(text).map_err(|e| LabError::Config(vec![e.message().to_string()]))
}

pub fn parse_seed(s: &str) -> Option<u128> {
    s.trim().parse().ok()
}

/// Collects missing and inapplicable keys so that all problems are
/// reported together.
#[derive(Debug, Default)]
pub struct Resolver {
    problems: Vec<String>,
    used: BTreeSet<&'static str>,
}

impl Resolver {
    pub fn require<T: Clone>(&mut self, v: &Option<T>, key: &'static str) -> Option<T> {
        self.used.insert(key);
        if v.is_none() {
            self.problems.push(format!("missing key `{key}`"));
        }
        v.clone()
    }

    pub fn optional<T: Clone>(&mut self, v: &Option<T>, key: &'static str) -> Option<T> {
        self.used.insert(key);
        v.clone()
    }

    pub fn problem(&mut self, msg: String) {
        self.problems.push(msg);
    }

    /// Flag present keys of `[experiment]` that the command did not read.
    pub fn reject_unused(&mut self, exp: &ExperimentSection, command: &str) {
        let table = toml::Table::try_from(exp).unwrap_or_default();
        for key in table.keys() {
            let full = format!("experiment.{key}");
            if !self.used.contains(full.as_str()) {
                self.problems.push(format!("key `{full}` is not used by `{command}`"));
            }
        }
    }

    pub fn finish(self) -> Result<(), LabError> {
        if self.problems.is_empty() { Ok(()) } else { Err(LabError::Config(self.problems)) }
    }
}

fn unused<T>(r: &mut Resolver, v: &Option<T>, key: &str, owner: &str) {
    if v.is_some() {
        r.problem(format!("key `{key}` does not apply to {owner}"));
    }
}

pub fn resolve_model(section: &Option<ModelSection>, r: &mut Resolver) -> Option<ModelSpec> {
    let Some(m) = section else {
        r.problem("missing section `[model]`".into());
        return None;
    };
    let dimension = r.require(&m.dimension, "model.dimension");
    let intensity = r.require(&m.intensity, "model.intensity");
    let half_width = r.require(&m.half_width, "model.half_width");
    let form = match &m.adjacency {
        Some(a) => resolve_form(a, r),
        None => {
            r.problem("missing section `[model.adjacency]`".into());
            None
        }
    };
    let reach = m.adjacency.as_ref().and_then(|a| a.reach.as_ref()).and_then(|s| resolve_reach(s, r));
    let reach_given = m.adjacency.as_ref().is_some_and(|a| a.reach.is_some());
    let weights = match &m.weights {
        Some(w) => resolve_weights(w, r),
        None => Some(WeightDistribution::PointMass),
    };
    let (dimension, intensity, half_width, form, weights) = (dimension?, intensity?, half_width?, form?, weights?);
    if reach_given && reach.is_none() {
        return None;
    }
    let adj = AdjacencySpec { dimension, form, reach };
    match ModelSpec::new(adj, weights, intensity, half_width) {
        Ok(spec) => Some(spec),
        Err(e) => {
            r.problem(format!("model: {e}"));
            None
        }
    }
}

fn resolve_form(a: &AdjacencySection, r: &mut Resolver) -> Option<Form> {
    let form = r.require(&a.form, "model.adjacency.form")?;
    let owner = format!("form `{form}`");
    match form.as_str() {
        "gilbert" => {
            unused(r, &a.exponent, "model.adjacency.exponent", &owner);
            unused(r, &a.weighted, "model.adjacency.weighted", &owner);
            unused(r, &a.value, "model.adjacency.value", &owner);
            Some(Form::Gilbert { radius: r.require(&a.radius, "model.adjacency.radius")? })
        }
        "soft-power" => {
            unused(r, &a.radius, "model.adjacency.radius", &owner);
            unused(r, &a.value, "model.adjacency.value", &owner);
            let exponent = r.require(&a.exponent, "model.adjacency.exponent");
            let weighted = r.require(&a.weighted, "model.adjacency.weighted");
            Some(Form::SoftPower { exponent: exponent?, weighted: weighted? })
        }
        "constant" => {
            unused(r, &a.radius, "model.adjacency.radius", &owner);
            unused(r, &a.exponent, "model.adjacency.exponent", &owner);
            unused(r, &a.weighted, "model.adjacency.weighted", &owner);
            Some(Form::Constant { value: r.require(&a.value, "model.adjacency.value")? })
        }
        other => {
            r.problem(format!("unknown adjacency form `{other}` (gilbert, soft-power, constant)"));
            None
        }
    }
}

fn resolve_reach(s: &ReachSection, r: &mut Resolver) -> Option<Reach> {
    let kind = r.require(&s.kind, "model.adjacency.reach.kind")?;
    let owner = format!("reach `{kind}`");
    match kind.as_str() {
        "identity" => {
            unused(r, &s.scale, "model.adjacency.reach.scale", &owner);
            unused(r, &s.exponent, "model.adjacency.reach.exponent", &owner);
            unused(r, &s.value, "model.adjacency.reach.value", &owner);
            Some(Reach::Identity)
        }
        "linear" | "log1p" => {
            unused(r, &s.exponent, "model.adjacency.reach.exponent", &owner);
            unused(r, &s.value, "model.adjacency.reach.value", &owner);
            let scale = r.require(&s.scale, "model.adjacency.reach.scale")?;
            Some(if kind == "linear" { Reach::Linear { scale } } else { Reach::Log1p { scale } })
        }
        "power" => {
            unused(r, &s.value, "model.adjacency.reach.value", &owner);
            let scale = r.require(&s.scale, "model.adjacency.reach.scale");
            let exponent = r.require(&s.exponent, "model.adjacency.reach.exponent");
            Some(Reach::Power { scale: scale?, exponent: exponent? })
        }
        "constant" => {
            unused(r, &s.scale, "model.adjacency.reach.scale", &owner);
            unused(r, &s.exponent, "model.adjacency.reach.exponent", &owner);
            Some(Reach::Constant { value: r.require(&s.value, "model.adjacency.reach.value")? })
        }
        other => {
            r.problem(format!("unknown reach kind `{other}` (identity, linear, log1p, power, constant)"));
            None
        }
    }
}

fn resolve_weights(w: &WeightSection, r: &mut Resolver) -> Option<WeightDistribution> {
    let law = r.require(&w.law, "model.weights.law")?;
    let owner = format!("law `{law}`");
    match law.as_str() {
        "point-mass" => {
            unused(r, &w.shape, "model.weights.shape", &owner);
            unused(r, &w.truncation, "model.weights.truncation", &owner);
            unused(r, &w.atoms, "model.weights.atoms", &owner);
            Some(WeightDistribution::PointMass)
        }
        "pareto" => {
            unused(r, &w.atoms, "model.weights.atoms", &owner);
            let shape = r.require(&w.shape, "model.weights.shape")?;
            Some(WeightDistribution::pareto(shape, w.truncation))
        }
        "discrete" => {
            unused(r, &w.shape, "model.weights.shape", &owner);
            unused(r, &w.truncation, "model.weights.truncation", &owner);
            let atoms = r.require(&w.atoms, "model.weights.atoms")?;
            Some(WeightDistribution::Discrete(atoms.iter().map(|a| (a[0], a[1])).collect()))
        }
        other => {
            r.problem(format!("unknown weight law `{other}` (point-mass, pareto, discrete)"));
            None
        }
    }
}
