//! Subcommands: resolve the configuration into a plan, run it, and write
//! the declared outputs next to a manifest.

use std::path::{Path, PathBuf};

use rcm_core::continuum::sample_ppp;
use rcm_core::estimators::{
    convergence_study, differential_diagnostic, domination_check, fit_exponential_rate, locate_from_thresholds, origin_sizes,
    ratio_diagnostics, reach_thresholds, slope_bootstrap, supercritical_from_thresholds, ChiEstimate, ConvergenceConfig, CurveSource,
    TailCurve,
};
use rcm_core::lattice::build_lattice;
use rcm_core::model::{default_weight_grid, gw_bounds, nb_bounds, ModelSpec, QuadratureParams, WeightDistribution};
use rcm_core::osss::{osss_mc, prop27_mc, vertex_profile, InequalityReport, RootPolicy};
use serde_json::json;

use crate::config::{self, ExperimentSection, Format, RawConfig, Resolver, SeedValue};
use crate::error::{Failure, LabError};
use crate::fixtures;
use crate::manifest::{self, RunManifest};
use crate::render::{cluster_labels, edges, render_svg, RenderOptions};
use crate::row;
use crate::table::Table;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Sample,
    Render,
    Tail,
    Chi,
    Scan,
    Fit,
    Converge,
    OsssVerify,
    OracleFixtures,
    Bounds,
    DiagnoseRatios,
    Dominate,
}

impl Command {
    pub const ALL: [Command; 12] = [
        Command::Sample,
        Command::Render,
        Command::Tail,
        Command::Chi,
        Command::Scan,
        Command::Fit,
        Command::Converge,
        Command::OsssVerify,
        Command::OracleFixtures,
        Command::Bounds,
        Command::DiagnoseRatios,
        Command::Dominate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Sample => "sample",
            Command::Render => "render",
            Command::Tail => "tail",
            Command::Chi => "chi",
            Command::Scan => "scan",
            Command::Fit => "fit",
            Command::Converge => "converge",
            Command::OsssVerify => "osss-verify",
            Command::OracleFixtures => "oracle-fixtures",
            Command::Bounds => "bounds",
            Command::DiagnoseRatios => "diagnose-ratios",
            Command::Dominate => "dominate",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

/// Command-line values that take precedence over the configuration.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u128>,
    pub samples: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Clone, Debug)]
pub enum Params {
    Sample { replica: u64, with_origin: bool, render: Option<RenderOptions> },
    Tail { lambda: f64, k_max: usize },
    Chi { lambdas: Vec<f64>, size_cap: usize },
    Scan { grid: Vec<f64>, half_widths: Vec<f64>, resamples: usize },
    FitExponential { lambda: f64, k_lo: usize, k_hi: usize, resamples: usize },
    FitSupercritical { lambda_hat: f64, half_widths: Vec<f64>, points: usize },
    FitDifferential { lambdas: Vec<f64>, k: usize, step: f64 },
    Converge { lambda: f64, study: ConvergenceConfig },
    OsssFixtures { path: PathBuf, tolerance: f64 },
    OsssLattice(LatticeCheck),
    OracleFixtures { instances: u64, max_coordinates: usize, k: usize, gamma: f64, step: f64 },
    Bounds { lambda: f64, grid_points: usize },
    DiagnoseRatios { lambda: f64, gamma: f64, lattice_half_width: u32, mesh: u32, probe_weights: Vec<f64>, k: usize, truncation_tol: f64 },
    Dominate { weight_set: (f64, f64), r2: f64, epsilon: f64, lambda: f64, origin_weight: f64 },
}

#[derive(Clone, Debug)]
pub struct LatticeCheck {
    pub lambda: f64,
    pub lattice_half_width: u32,
    pub mesh: u32,
    pub k: usize,
    /// Ghost intensities of the magnetization and OSSS checks.
    pub ghosts: Vec<f64>,
    /// `γ` of the Prop-2.7-type check.
    pub gamma: f64,
    pub policy: RootPolicy,
    pub sigmas: f64,
    pub truncation_tol: f64,
}

/// A validated run.
#[derive(Clone, Debug)]
pub struct Plan {
    pub command: Command,
    pub model: Option<ModelSpec>,
    pub params: Params,
    pub seed: u128,
    pub samples: Option<u64>,
    pub threads: Option<usize>,
    pub out_dir: PathBuf,
    pub format: Format,
    /// Resolved parameters recorded in the manifest.
    pub parameters: serde_json::Value,
}

/// Results of a run: tables, other files, and an optional failed check.
#[derive(Debug, Default)]
pub struct Outputs {
    pub tables: Vec<Table>,
    pub files: Vec<(String, Vec<u8>)>,
    pub failure: Option<Failure>,
}

fn policy(s: &str) -> Option<RootPolicy> {
    match s {
        "copy-only" => Some(RootPolicy::CopyOnly),
        "explore" => Some(RootPolicy::Explore),
        _ => None,
    }
}

fn grid_values(exp: &ExperimentSection, r: &mut Resolver) -> Option<Vec<f64>> {
    let g = r.require(&exp.grid, "experiment.grid")?;
    let start = r.require(&g.start, "experiment.grid.start");
    let step = r.require(&g.step, "experiment.grid.step");
    let count = r.require(&g.count, "experiment.grid.count");
    let (start, step, count) = (start?, step?, count?);
    Some((0..count).map(|i| start + step * i as f64).collect())
}

/// Resolve the configuration for `command`, reporting every missing or
/// inapplicable key at once.
pub fn plan(command: Command, raw: &RawConfig, ov: &Overrides) -> Result<Plan, LabError> {
    let mut r = Resolver::default();
    let empty = ExperimentSection::default();
    let exp = raw.experiment.as_ref().unwrap_or(&empty);
    let needs_model = !matches!(command, Command::OracleFixtures) && !(command == Command::OsssVerify && exp.fixtures.is_some());
    let model = if needs_model {
        config::resolve_model(&raw.model, &mut r)
    } else {
        if raw.model.is_some() {
            r.problem(format!("section `[model]` is not used by `{}`", command.name()));
        }
        None
    };
    let intensity = model.as_ref().map(|m| m.intensity);
    let seed_needed = !matches!(command, Command::Bounds) && !(command == Command::OsssVerify && exp.fixtures.is_some());
    let seed = match (ov.seed, r.optional(&exp.seed, "experiment.seed")) {
        (Some(s), _) => Some(s),
        (None, Some(SeedValue::Int(s))) => Some(s as u128),
        (None, Some(SeedValue::Text(t))) => {
            let s = config::parse_seed(&t);
            if s.is_none() {
                r.problem(format!("experiment.seed `{t}` is not an unsigned 128-bit integer"));
            }
            s
        }
        (None, None) if seed_needed => {
            r.problem("missing key `experiment.seed` (or pass --seed)".into());
            None
        }
        (None, None) => Some(0),
    };
    let samples_needed = !matches!(command, Command::Sample | Command::Render | Command::OracleFixtures | Command::Bounds)
        && !(command == Command::OsssVerify && exp.fixtures.is_some());
    let samples = if samples_needed {
        match (ov.samples, r.optional(&exp.samples, "experiment.samples")) {
            (Some(s), _) | (None, Some(s)) => Some(s),
            (None, None) => {
                r.problem("missing key `experiment.samples` (or pass --samples)".into());
                None
            }
        }
    } else {
        None
    };
    let lambda_or_model = |r: &mut Resolver| r.optional(&exp.lambda, "experiment.lambda").or(intensity);
    let params = match command {
        Command::Sample | Command::Render => {
            let replica = r.optional(&exp.replica, "experiment.replica").unwrap_or(0);
            let with_origin = r.optional(&exp.with_origin, "experiment.with_origin").unwrap_or(false);
            let render = (command == Command::Render).then(|| {
                let out = raw.output.clone().unwrap_or_default();
                let weighted = model.as_ref().is_some_and(|m| m.weights != WeightDistribution::PointMass);
                RenderOptions {
                    size: out.svg_size.unwrap_or(800.0),
                    radius_by_weight: out.radius_by_weight.unwrap_or(weighted),
                    ..Default::default()
                }
            });
            if command == Command::Render && model.as_ref().is_some_and(|m| m.dimension() != 2) {
                r.problem("`render` draws planar models only (model.dimension = 2)".into());
            }
            Some(Params::Sample { replica, with_origin, render })
        }
        Command::Tail => {
            let lambda = lambda_or_model(&mut r);
            let k_max = r.require(&exp.k_max, "experiment.k_max");
            Some(Params::Tail { lambda: lambda.unwrap_or(0.0), k_max: k_max.unwrap_or(0) })
        }
        Command::Chi => {
            let lambdas = r.optional(&exp.lambdas, "experiment.lambdas").or(intensity.map(|l| vec![l]));
            let size_cap = r.optional(&exp.size_cap, "experiment.size_cap").unwrap_or(1_000_000);
            Some(Params::Chi { lambdas: lambdas.unwrap_or_default(), size_cap })
        }
        Command::Scan => {
            let grid = grid_values(exp, &mut r);
            let half_widths = r.require(&exp.half_widths, "experiment.half_widths");
            let resamples = r.optional(&exp.resamples, "experiment.resamples").unwrap_or(1000);
            match (grid, half_widths) {
                (Some(grid), Some(half_widths)) => Some(Params::Scan { grid, half_widths, resamples }),
                _ => None,
            }
        }
        Command::Fit => match r.require(&exp.kind, "experiment.kind").as_deref() {
            Some("exponential") => {
                let lambda = lambda_or_model(&mut r).unwrap_or(0.0);
                let k_lo = r.require(&exp.k_lo, "experiment.k_lo");
                let k_hi = r.require(&exp.k_hi, "experiment.k_hi");
                let resamples = r.optional(&exp.resamples, "experiment.resamples").unwrap_or(1000);
                match (k_lo, k_hi) {
                    (Some(k_lo), Some(k_hi)) => Some(Params::FitExponential { lambda, k_lo, k_hi, resamples }),
                    _ => None,
                }
            }
            Some("supercritical") => {
                let lambda_hat = r.require(&exp.lambda_hat, "experiment.lambda_hat");
                let half_widths = r.require(&exp.half_widths, "experiment.half_widths");
                let points = r.optional(&exp.points, "experiment.points").unwrap_or(7);
                match (lambda_hat, half_widths) {
                    (Some(lambda_hat), Some(half_widths)) => Some(Params::FitSupercritical { lambda_hat, half_widths, points }),
                    _ => None,
                }
            }
            Some("differential") => {
                let lambdas = r.require(&exp.lambdas, "experiment.lambdas");
                let k = r.require(&exp.k, "experiment.k");
                let step = r.require(&exp.step, "experiment.step");
                match (lambdas, k, step) {
                    (Some(lambdas), Some(k), Some(step)) => Some(Params::FitDifferential { lambdas, k, step }),
                    _ => None,
                }
            }
            Some(other) => {
                r.problem(format!("unknown fit kind `{other}` (exponential, supercritical, differential)"));
                None
            }
            None => None,
        },
        Command::Converge => {
            let lambda = lambda_or_model(&mut r).unwrap_or(0.0);
            let half_width = r.require(&exp.lattice_half_width, "experiment.lattice_half_width");
            let meshes = r.require(&exp.meshes, "experiment.meshes");
            let k = r.require(&exp.k, "experiment.k");
            let gamma = r.optional(&exp.gamma, "experiment.gamma").unwrap_or(0.1);
            let influence_samples = r.optional(&exp.influence_samples, "experiment.influence_samples").unwrap_or(0);
            let russo_samples = r.optional(&exp.russo_samples, "experiment.russo_samples").unwrap_or(0);
            let truncation_tol = r.optional(&exp.truncation_tol, "experiment.truncation_tol").unwrap_or(1e-6);
            match (half_width, meshes, k) {
                (Some(half_width), Some(meshes), Some(k)) => Some(Params::Converge {
                    lambda,
                    study: ConvergenceConfig {
                        half_width,
                        meshes,
                        k,
                        gamma,
                        samples: samples.unwrap_or(0),
                        influence_samples,
                        russo_samples,
                        truncation_tol,
                    },
                }),
                _ => None,
            }
        }
        Command::OsssVerify => {
            if let Some(path) = r.optional(&exp.fixtures, "experiment.fixtures") {
                let tolerance = r.optional(&exp.tolerance, "experiment.tolerance").unwrap_or(1e-12);
                Some(Params::OsssFixtures { path, tolerance })
            } else {
                let lambda = lambda_or_model(&mut r).unwrap_or(0.0);
                let lattice_half_width = r.require(&exp.lattice_half_width, "experiment.lattice_half_width");
                let mesh = r.require(&exp.mesh, "experiment.mesh");
                let k = r.require(&exp.k, "experiment.k");
                let ghosts = r.require(&exp.ghosts, "experiment.ghosts");
                let gamma = r.require(&exp.gamma, "experiment.gamma");
                let pol = r.optional(&exp.policy, "experiment.policy").unwrap_or_else(|| "copy-only".into());
                let pol = policy(&pol).or_else(|| {
                    r.problem(format!("unknown policy `{pol}` (copy-only, explore)"));
                    None
                });
                let sigmas = r.optional(&exp.sigmas, "experiment.sigmas").unwrap_or(4.0);
                let truncation_tol = r.optional(&exp.truncation_tol, "experiment.truncation_tol").unwrap_or(1e-6);
                match (lattice_half_width, mesh, k, ghosts, gamma, pol) {
                    (Some(lattice_half_width), Some(mesh), Some(k), Some(ghosts), Some(gamma), Some(policy)) => {
                        Some(Params::OsssLattice(LatticeCheck {
                            lambda,
                            lattice_half_width,
                            mesh,
                            k,
                            ghosts,
                            gamma,
                            policy,
                            sigmas,
                            truncation_tol,
                        }))
                    }
                    _ => None,
                }
            }
        }
        Command::OracleFixtures => {
            let instances = r.optional(&exp.instances, "experiment.instances").unwrap_or(24);
            let max_coordinates = r.optional(&exp.max_coordinates, "experiment.max_coordinates").unwrap_or(20);
            let k = r.optional(&exp.k, "experiment.k").unwrap_or(2);
            let gamma = r.optional(&exp.gamma, "experiment.gamma").unwrap_or(1.0);
            let step = r.optional(&exp.step, "experiment.step").unwrap_or(1e-4);
            Some(Params::OracleFixtures { instances, max_coordinates, k, gamma, step })
        }
        Command::Bounds => {
            let lambda = lambda_or_model(&mut r).unwrap_or(0.0);
            let grid_points = r.optional(&exp.grid_points, "experiment.grid_points").unwrap_or(64);
            Some(Params::Bounds { lambda, grid_points })
        }
        Command::DiagnoseRatios => {
            let lambda = lambda_or_model(&mut r).unwrap_or(0.0);
            let gamma = r.require(&exp.gamma, "experiment.gamma");
            let lattice_half_width = r.require(&exp.lattice_half_width, "experiment.lattice_half_width");
            let mesh = r.require(&exp.mesh, "experiment.mesh");
            let probe_weights = r.require(&exp.probe_weights, "experiment.probe_weights");
            let k = r.require(&exp.k, "experiment.k");
            let truncation_tol = r.optional(&exp.truncation_tol, "experiment.truncation_tol").unwrap_or(1e-6);
            match (gamma, lattice_half_width, mesh, probe_weights, k) {
                (Some(gamma), Some(lattice_half_width), Some(mesh), Some(probe_weights), Some(k)) => {
                    Some(Params::DiagnoseRatios { lambda, gamma, lattice_half_width, mesh, probe_weights, k, truncation_tol })
                }
                _ => None,
            }
        }
        Command::Dominate => {
            let lambda = lambda_or_model(&mut r).unwrap_or(0.0);
            let weight_set = r.require(&exp.weight_set, "experiment.weight_set");
            let r2 = r.require(&exp.r2, "experiment.r2");
            let epsilon = r.require(&exp.epsilon, "experiment.epsilon");
            let origin_weight = r.optional(&exp.origin_weight, "experiment.origin_weight");
            match (weight_set, r2, epsilon) {
                (Some([lo, hi]), Some(r2), Some(epsilon)) => Some(Params::Dominate {
                    weight_set: (lo, hi),
                    r2,
                    epsilon,
                    lambda,
                    origin_weight: origin_weight.unwrap_or(lo),
                }),
                _ => None,
            }
        }
    };
    r.reject_unused(exp, command.name());
    let out_section = raw.output.clone().unwrap_or_default();
    if command != Command::Render && (out_section.svg_size.is_some() || out_section.radius_by_weight.is_some()) {
        r.problem(format!("output.svg_size and output.radius_by_weight apply to `render` only, not `{}`", command.name()));
    }
    let format = match (ov.format, out_section.format.as_deref()) {
        (Some(f), _) => Some(f),
        (None, None) => Some(Format::Csv),
        (None, Some(s)) => {
            let f = Format::parse(s);
            if f.is_none() {
                r.problem(format!("output.format `{s}` is not csv or json"));
            }
            f
        }
    };
    r.finish()?;
    let params = params.expect("resolver reported the missing keys");
    let out_dir = ov.out.clone().or(out_section.dir).unwrap_or_else(|| PathBuf::from("out").join(command.name()));
    let parameters = describe(&params);
    Ok(Plan {
        command,
        model,
        params,
        seed: seed.expect("resolved seed"),
        samples,
        threads: ov.threads,
        out_dir,
        format: format.expect("resolved format"),
        parameters,
    })
}

fn describe(p: &Params) -> serde_json::Value {
    match p {
        Params::Sample { replica, with_origin, render } => json!({
            "replica": replica, "with_origin": with_origin,
            "svg_size": render.map(|r| r.size), "radius_by_weight": render.map(|r| r.radius_by_weight),
        }),
        Params::Tail { lambda, k_max } => json!({"lambda": lambda, "k_max": k_max}),
        Params::Chi { lambdas, size_cap } => json!({"lambdas": lambdas, "size_cap": size_cap}),
        Params::Scan { grid, half_widths, resamples } => json!({"grid": grid, "half_widths": half_widths, "resamples": resamples}),
        Params::FitExponential { lambda, k_lo, k_hi, resamples } => {
            json!({"kind": "exponential", "lambda": lambda, "k_lo": k_lo, "k_hi": k_hi, "resamples": resamples})
        }
        Params::FitSupercritical { lambda_hat, half_widths, points } => {
            json!({"kind": "supercritical", "lambda_hat": lambda_hat, "half_widths": half_widths, "points": points})
        }
        Params::FitDifferential { lambdas, k, step } => json!({"kind": "differential", "lambdas": lambdas, "k": k, "step": step}),
        Params::Converge { lambda, study } => json!({
            "lambda": lambda, "lattice_half_width": study.half_width, "meshes": study.meshes, "k": study.k,
            "gamma": study.gamma, "influence_samples": study.influence_samples, "russo_samples": study.russo_samples,
            "truncation_tol": study.truncation_tol,
        }),
        Params::OsssFixtures { path, tolerance } => json!({"fixtures": path, "tolerance": tolerance}),
        Params::OsssLattice(c) => json!({
            "lambda": c.lambda, "lattice_half_width": c.lattice_half_width, "mesh": c.mesh, "k": c.k, "ghosts": c.ghosts,
            "gamma": c.gamma, "policy": format!("{:?}", c.policy), "sigmas": c.sigmas, "truncation_tol": c.truncation_tol,
        }),
        Params::OracleFixtures { instances, max_coordinates, k, gamma, step } => {
            json!({"instances": instances, "max_coordinates": max_coordinates, "k": k, "gamma": gamma, "step": step})
        }
        Params::Bounds { lambda, grid_points } => json!({"lambda": lambda, "grid_points": grid_points}),
        Params::DiagnoseRatios { lambda, gamma, lattice_half_width, mesh, probe_weights, k, truncation_tol } => json!({
            "lambda": lambda, "gamma": gamma, "lattice_half_width": lattice_half_width, "mesh": mesh,
            "probe_weights": probe_weights, "k": k, "truncation_tol": truncation_tol,
        }),
        Params::Dominate { weight_set, r2, epsilon, lambda, origin_weight } => json!({
            "weight_set": [weight_set.0, weight_set.1], "r2": r2, "epsilon": epsilon, "lambda": lambda, "origin_weight": origin_weight,
        }),
    }
}

/// File names a plan writes on success, in writing order.
pub fn declared_outputs(plan: &Plan) -> Vec<String> {
    let ext = plan.format.extension();
    let names: &[&str] = match &plan.params {
        Params::Sample { render: None, .. } => &["points", "edges", "clusters"],
        Params::Sample { render: Some(_), .. } => &["points", "edges", "clusters"],
        Params::Tail { .. } => &["tail_raw", "tail"],
        Params::Chi { .. } => &["chi_raw", "chi"],
        Params::Scan { .. } => &["scan_raw", "scan", "scan_summary"],
        Params::FitExponential { .. } => &["fit_raw", "fit", "fit_summary"],
        Params::FitSupercritical { .. } => &["supercritical_raw", "supercritical_reach", "supercritical_theta", "supercritical_summary"],
        Params::FitDifferential { .. } => &["differential", "differential_summary"],
        Params::Converge { .. } => &["converge"],
        Params::OsssFixtures { .. } => &["osss_fixtures"],
        Params::OsssLattice(_) => &["osss_vertices", "osss"],
        Params::OracleFixtures { .. } => &["oracle_fixtures"],
        Params::Bounds { .. } => &["bounds"],
        Params::DiagnoseRatios { .. } => &["ratios", "ratio_fits"],
        Params::Dominate { .. } => &["dominate"],
    };
    let mut out: Vec<String> = names.iter().map(|n| format!("{n}.{ext}")).collect();
    match plan.params {
        Params::Sample { render: Some(_), .. } => out.push("render.svg".into()),
        Params::OracleFixtures { .. } => out.push("oracle.json".into()),
        _ => {}
    }
    out
}

fn core(command: Command) -> impl Fn(rcm_core::Error) -> LabError {
    move |e| LabError::from_core(command.name(), e)
}

/// Run a plan without touching the file system.
pub fn execute(plan: &Plan) -> Result<Outputs, LabError> {
    let cmd = plan.command;
    let err = core(cmd);
    let seed = plan.seed;
    let samples = plan.samples.unwrap_or(0);
    let model = plan.model.as_ref();
    let mut out = Outputs::default();
    match &plan.params {
        Params::Sample { replica, with_origin, render } => {
            let m = model.expect("model");
            let mut cfg = sample_ppp(m, seed, *replica);
            if *with_origin {
                cfg = cfg.with_origin(1.0).map_err(&err)?;
            }
            let d = cfg.dimension();
            let (label, clusters) = cluster_labels(&cfg);
            let mut cols: Vec<String> = vec!["id".into()];
            cols.extend((0..d).map(|i| format!("x{i}")));
            cols.extend(["weight", "augmented", "cluster", "cluster_size"].map(String::from));
            let mut points = Table::with_columns("points", cols);
            for i in 0..cfg.len() {
                let mut r = row![i];
                r.extend(cfg.position(i).iter().map(|&x| x.into()));
                r.extend(row![cfg.weight(i), cfg.origin() == Some(i), label[i], clusters[label[i]].size]);
                points.push(r);
            }
            let mut e = Table::new("edges", &["a", "b", "distance"]);
            for (a, b) in edges(&cfg) {
                e.push(row![a, b, cfg.distance(a, b)]);
            }
            let mut c = Table::new("clusters", &["cluster", "size", "touches_boundary", "smallest_member"]);
            for (i, cl) in clusters.iter().enumerate() {
                c.push(row![i, cl.size, cl.touches_boundary, cl.members[0]]);
            }
            out.tables = vec![points, e, c];
            if let Some(opts) = render {
                out.files.push(("render.svg".into(), render_svg(&cfg, opts).into_bytes()));
            }
        }
        Params::Tail { lambda, k_max } => {
            let m = model.expect("model");
            let sizes = origin_sizes(m, *lambda, m.half_width, *k_max, samples, seed).map_err(&err)?;
            let curve = TailCurve::from_sizes(&sizes, *k_max, *lambda, m.half_width, CurveSource::Continuum, seed);
            out.tables = vec![sizes_table("tail_raw", *lambda, &sizes), tail_table("tail", &curve)];
        }
        Params::Chi { lambdas, size_cap } => {
            let m = model.expect("model");
            let mut raw = Table::new("chi_raw", &["lambda", "replica", "size"]);
            let mut agg = Table::new("chi", &["lambda", "chi", "stderr", "samples", "cap_hits", "cap_fraction", "divergent"]);
            for &l in lambdas {
                let sizes = origin_sizes(m, l, m.half_width, *size_cap, samples, seed).map_err(&err)?;
                for (r, &s) in sizes.iter().enumerate() {
                    raw.push(row![l, r, s]);
                }
                let c = ChiEstimate::from_sizes(&sizes, *size_cap, seed);
                agg.push(row![l, c.estimate.mean, c.estimate.stderr, c.estimate.samples, c.cap_hits, c.cap_fraction, c.divergent]);
            }
            out.tables = vec![raw, agg];
        }
        Params::Scan { grid, half_widths, resamples } => {
            let m = model.expect("model");
            let top = *grid.last().ok_or_else(|| LabError::Config(vec!["experiment.grid.count must be positive".into()]))?;
            let th = reach_thresholds(m, half_widths, top, samples, seed).map_err(&err)?;
            out.tables.push(thresholds_table("scan_raw", &th.half_widths, &th.thresholds));
            let mut curves = Table::new("scan", &["half_width", "lambda", "reach"]);
            let est = locate_from_thresholds(&th, grid, *resamples);
            let probs: Vec<Vec<f64>> =
                (0..half_widths.len()).map(|i| grid.iter().map(|&l| th.probability(i, l).mean).collect()).collect();
            for (i, &l) in half_widths.iter().enumerate() {
                for (j, &x) in grid.iter().enumerate() {
                    curves.push(row![l, x, probs[i][j]]);
                }
            }
            out.tables.push(curves);
            let mut s = Table::new(
                "scan_summary",
                &["lambda_hat", "lambda_t_hat", "lambda_c_hat", "ci_lo", "ci_hi", "stderr", "resamples", "bootstrap_failures", "samples"],
            );
            match est {
                Ok(e) => {
                    s.push(row![
                        e.lambda_hat,
                        e.lambda_hat,
                        e.lambda_hat,
                        e.ci.0,
                        e.ci.1,
                        e.stderr,
                        e.resamples,
                        e.bootstrap_failures,
                        e.samples
                    ]);
                }
                Err(e) => out.failure = Some(failure(cmd, e)),
            }
            out.tables.push(s);
        }
        Params::FitExponential { lambda, k_lo, k_hi, resamples } => {
            let m = model.expect("model");
            let sizes = origin_sizes(m, *lambda, m.half_width, *k_hi, samples, seed).map_err(&err)?;
            let curve = TailCurve::from_sizes(&sizes, *k_hi, *lambda, m.half_width, CurveSource::Continuum, seed);
            out.tables.push(sizes_table("fit_raw", *lambda, &sizes));
            let mut t = Table::new("fit", &["k", "theta", "stderr", "fitted", "residual"]);
            let mut s = Table::new(
                "fit_summary",
                &["k_lo", "k_hi", "slope", "slope_stderr", "intercept", "r2", "boot_lo", "boot_hi", "boot_failures"],
            );
            match fit_exponential_rate(&curve, *k_lo, *k_hi) {
                Ok(f) => {
                    for (i, &k) in f.ks.iter().enumerate() {
                        let e = curve.at(k).expect("k inside the curve");
                        t.push(row![k, e.mean, e.stderr, (f.intercept + f.slope * k as f64).exp(), f.residuals[i]]);
                    }
                    let ((lo, hi), fails) = slope_bootstrap(&sizes, *k_lo, *k_hi, *resamples, seed);
                    s.push(row![*k_lo, *k_hi, f.slope, f.slope_stderr, f.intercept, f.r2, lo, hi, fails]);
                    if f.slope >= 0.0 {
                        out.failure = Some(Failure {
                            command: cmd.name().into(),
                            check: "negative-slope".into(),
                            detail: format!("fitted log-tail slope {} is not negative", f.slope),
                            values: json!({"slope": f.slope, "r2": f.r2}),
                        });
                    }
                }
                Err(e) => out.failure = Some(failure(cmd, e)),
            }
            out.tables.push(t);
            out.tables.push(s);
        }
        Params::FitSupercritical { lambda_hat, half_widths, points } => {
            let m = model.expect("model");
            let th = reach_thresholds(m, half_widths, 1.5 * lambda_hat, samples, seed).map_err(&err)?;
            out.tables.push(thresholds_table("supercritical_raw", &th.half_widths, &th.thresholds));
            let f = supercritical_from_thresholds(&th, *lambda_hat, *points).map_err(&err)?;
            let mut reach = Table::new("supercritical_reach", &["half_width", "lambda", "reach", "stderr"]);
            for (l, e) in f.half_widths.iter().zip(&f.reach_above) {
                reach.push(row![*l, 1.5 * lambda_hat, e.mean, e.stderr]);
            }
            let mut theta = Table::new("supercritical_theta", &["lambda", "reach", "stderr", "fitted", "residual"]);
            for (i, (l, e)) in f.lambdas.iter().zip(&f.theta).enumerate() {
                theta.push(row![*l, e.mean, e.stderr, f.fit.intercept + f.fit.slope * l, f.fit.residuals[i]]);
            }
            let mut s = Table::new("supercritical_summary", &["lambda_hat", "slope", "slope_stderr", "intercept", "r2"]);
            s.push(row![*lambda_hat, f.fit.slope, f.fit.slope_stderr, f.fit.intercept, f.fit.r_squared]);
            if f.fit.slope <= 0.0 {
                out.failure = Some(Failure {
                    command: cmd.name().into(),
                    check: "positive-slope".into(),
                    detail: format!("reach probability slope {} above the critical estimate is not positive", f.fit.slope),
                    values: json!({"slope": f.fit.slope}),
                });
            }
            out.tables.extend([reach, theta, s]);
        }
        Params::FitDifferential { lambdas, k, step } => {
            let m = model.expect("model");
            let rep = differential_diagnostic(m, lambdas, m.half_width, *k, *step, samples, seed).map_err(&err)?;
            let mut t = Table::new("differential", &["lambda", "theta", "theta_stderr", "chi", "chi_stderr", "lhs", "derivative", "ratio"]);
            for r in &rep.rows {
                t.push(row![r.lambda, r.theta.mean, r.theta.stderr, r.chi.mean, r.chi.stderr, r.lhs, r.derivative, r.ratio]);
            }
            let mut s = Table::new("differential_summary", &["k", "constant"]);
            s.push(row![rep.k, rep.constant]);
            out.tables = vec![t, s];
        }
        Params::Converge { lambda, study } => {
            let m = model.expect("model");
            let rows = convergence_study(m, *lambda, study, seed).map_err(&err)?;
            let mut t = Table::new(
                "converge",
                &[
                    "mesh",
                    "theta_lattice",
                    "theta_lattice_stderr",
                    "theta_continuum",
                    "theta_continuum_stderr",
                    "difference",
                    "difference_stderr",
                    "distinct_replicas",
                    "distinct_mismatches",
                    "edge_influence",
                    "edge_influence_stderr",
                    "edge_influence_sum",
                    "russo_lattice",
                    "russo_continuum",
                    "russo_gap",
                    "russo_gap_stderr",
                ],
            );
            let mut mismatches = 0;
            for r in &rows {
                let (ei, eis, es) = r.edge_influence.map_or((f64::NAN, f64::NAN, f64::NAN), |e| (e.ratio, e.ratio_stderr, e.sum.mean));
                let (rl, rc, rg, rgs) =
                    r.russo.map_or((f64::NAN, f64::NAN, f64::NAN, f64::NAN), |x| (x.lattice.mean, x.continuum.mean, x.gap, x.gap_stderr));
                mismatches += r.distinct_mismatches;
                t.push(row![
                    r.mesh,
                    r.theta_lattice.mean,
                    r.theta_lattice.stderr,
                    r.theta_continuum.mean,
                    r.theta_continuum.stderr,
                    r.difference.mean,
                    r.difference.stderr,
                    r.distinct_replicas,
                    r.distinct_mismatches,
                    ei,
                    eis,
                    es,
                    rl,
                    rc,
                    rg,
                    rgs
                ]);
            }
            out.tables.push(t);
            if mismatches > 0 {
                out.failure = Some(Failure {
                    command: cmd.name().into(),
                    check: "distinct-cells".into(),
                    detail: format!("{mismatches} replicas with distinct cells have unequal lattice and continuum clusters"),
                    values: json!({"mismatches": mismatches}),
                });
            }
        }
        Params::OsssFixtures { path, tolerance } => {
            let f = fixtures::read(path)?;
            let mut t = Table::new(
                "osss_fixtures",
                &["name", "drift", "osss_slack", "prop27_slack", "magnetization_gap", "russo_relative", "ok"],
            );
            let mut bad = Vec::new();
            for x in &f.instances {
                let c = fixtures::check(x, f.k, f.gamma, f.step).map_err(&err)?;
                let ok = c.drift <= *tolerance
                    && c.osss_slack >= -tolerance
                    && c.prop27_slack >= -tolerance
                    && c.magnetization_gap <= *tolerance
                    && c.russo_relative <= 1e-6;
                if !ok {
                    bad.push(c.name.clone());
                }
                t.push(row![c.name, c.drift, c.osss_slack, c.prop27_slack, c.magnetization_gap, c.russo_relative, ok]);
            }
            out.tables.push(t);
            if !bad.is_empty() {
                out.failure = Some(Failure {
                    command: cmd.name().into(),
                    check: "exact-identities".into(),
                    detail: format!("{} fixtures fail an exact identity or inequality", bad.len()),
                    values: json!({"fixtures": bad}),
                });
            }
        }
        Params::OsssLattice(c) => {
            let m = model.expect("model");
            let spec = build_lattice(&m.with_half_width(c.lattice_half_width as f64), c.lattice_half_width, c.mesh, c.truncation_tol)
                .map_err(&err)?;
            let mut v = Table::new("osss_vertices", &["ghost", "vertex", "revealment", "magnetization", "difference", "stderr", "z"]);
            let mut t = Table::new("osss", &["check", "ghost", "lhs", "rhs", "slack", "slack_stderr", "samples", "holds"]);
            let mut failed = Vec::new();
            for &g in &c.ghosts {
                let p = vertex_profile(&spec, c.lambda, g, RootPolicy::Explore, samples, seed);
                let mut worst: f64 = 0.0;
                for (i, d) in p.difference.iter().enumerate() {
                    let z = if d.stderr > 0.0 { d.mean / d.stderr } else if d.mean == 0.0 { 0.0 } else { f64::INFINITY };
                    worst = worst.max(z.abs());
                    v.push(row![g, i, p.revealment[i].mean, p.magnetization[i].mean, d.mean, d.stderr, z]);
                }
                t.push(row!["magnetization-max-z", g, f64::NAN, f64::NAN, worst, f64::NAN, samples, true]);
                let o = osss_mc(&spec, c.lambda, g, c.k, c.policy, samples, seed);
                push_inequality(&mut t, "osss", g, &o, c.sigmas, &mut failed);
            }
            let p = prop27_mc(&spec, c.lambda, c.k, c.gamma, c.policy, samples, seed);
            push_inequality(&mut t, "prop27", c.gamma / c.k as f64, &p, c.sigmas, &mut failed);
            out.tables = vec![v, t];
            if !failed.is_empty() {
                out.failure = Some(Failure {
                    command: cmd.name().into(),
                    check: "inequality-slack".into(),
                    detail: format!("slack below −{}σ for {}", c.sigmas, failed.join(", ")),
                    values: json!({"failed": failed}),
                });
            }
        }
        Params::OracleFixtures { instances, max_coordinates, k, gamma, step } => {
            let f = fixtures::generate(seed, *instances, *max_coordinates, *k, *gamma, *step).map_err(&err)?;
            let mut t = Table::new("oracle_fixtures", &["name", "vertices", "edges", "lambda", "theta", "derivative", "osss_slack", "prop27_slack"]);
            for x in &f.instances {
                t.push(row![
                    x.name.clone(),
                    x.rates.len(),
                    x.edges.len(),
                    x.lambda,
                    x.theta,
                    x.derivative_covariance,
                    x.osss_rhs - x.osss_lhs,
                    x.prop27_rhs - x.prop27_lhs
                ]);
            }
            out.tables.push(t);
            let mut s = serde_json::to_string_pretty(&f)?;
            s.push('\n');
            out.files.push(("oracle.json".into(), s.into_bytes()));
        }
        Params::Bounds { lambda, grid_points } => {
            let m = model.expect("model");
            let grid = default_weight_grid(&m.weights, *grid_points);
            let nb = nb_bounds(&m.adjacency, &m.weights, &grid, &QuadratureParams::default());
            let gw = gw_bounds(m.dimension(), nb.i_sup, *lambda);
            let mut t = Table::new(
                "bounds",
                &["i_inf", "i_sup", "sup_at", "grid_only", "divergent", "lambda", "lambda_t_lower", "chi_upper"],
            );
            t.push(row![nb.i_inf, nb.i_sup, nb.sup_at, nb.grid_only, nb.divergent, *lambda, gw.lambda_t_lower, gw.chi_upper]);
            out.tables.push(t);
            if !nb.ok {
                out.failure = Some(Failure {
                    command: cmd.name().into(),
                    check: "neighbourhood-integral".into(),
                    detail: "the neighbourhood integral is zero, infinite or not computable".into(),
                    values: json!({"i_inf": nb.i_inf, "i_sup": nb.i_sup}),
                });
            }
        }
        Params::DiagnoseRatios { lambda, gamma, lattice_half_width, mesh, probe_weights, k, truncation_tol } => {
            let m = model.expect("model");
            let spec = build_lattice(&m.with_half_width(*lattice_half_width as f64), *lattice_half_width, *mesh, *truncation_tol)
                .map_err(&err)?;
            let rep = ratio_diagnostics(&spec, *lambda, *gamma, probe_weights, *k, samples, seed).map_err(&err)?;
            let fitted = rep.fitted();
            let mut t = Table::new(
                "ratios",
                &[
                    "m",
                    "reach_volume",
                    "delta",
                    "delta_stderr",
                    "delta_ratio",
                    "delta_ratio_stderr",
                    "pivotal_sum",
                    "pivotal_sum_stderr",
                    "pivotal_ratio",
                    "pivotal_ratio_stderr",
                    "fitted_delta_ratio",
                ],
            );
            let mut low = Vec::new();
            for (i, r) in rep.rows.iter().enumerate() {
                if r.delta_ratio < 1.0 - 3.0 * r.delta_ratio_stderr || r.pivotal_ratio < 1.0 - 3.0 * r.pivotal_ratio_stderr {
                    low.push(r.m);
                }
                t.push(row![
                    r.m,
                    r.reach_volume,
                    r.delta.mean,
                    r.delta.stderr,
                    r.delta_ratio,
                    r.delta_ratio_stderr,
                    r.pivotal_sum.mean,
                    r.pivotal_sum.stderr,
                    r.pivotal_ratio,
                    r.pivotal_ratio_stderr,
                    fitted[i]
                ]);
            }
            let mut f = Table::new("ratio_fits", &["quantity", "slope", "slope_stderr", "intercept", "r2"]);
            for (name, fit) in [("delta", &rep.delta_fit), ("pivotal", &rep.pivotal_fit)] {
                match fit {
                    Some(x) => f.push(row![name, x.slope, x.slope_stderr, x.intercept, x.r_squared]),
                    None => f.push(row![name, f64::NAN, f64::NAN, f64::NAN, f64::NAN]),
                }
            }
            out.tables = vec![t, f];
            if !low.is_empty() {
                out.failure = Some(Failure {
                    command: cmd.name().into(),
                    check: "ratio-lower-bound".into(),
                    detail: "a revealment or pivotal-sum ratio is below 1 − 3σ".into(),
                    values: json!({"weights": low}),
                });
            }
        }
        Params::Dominate { weight_set, r2, epsilon, lambda, origin_weight } => {
            let m = model.expect("model");
            let rep = domination_check(m, *weight_set, *r2, *epsilon, *lambda, m.half_width, *origin_weight, samples, seed)
                .map_err(&err)?;
            let mut t = Table::new(
                "dominate",
                &["samples", "epsilon", "r2", "edges_checked", "edge_violations", "cluster_violations", "mean_points", "expected_points", "z"],
            );
            t.push(row![
                rep.samples,
                rep.epsilon,
                rep.r2,
                rep.edges_checked,
                rep.edge_violations,
                rep.cluster_violations,
                rep.mean_points,
                rep.expected_points,
                rep.z
            ]);
            out.tables.push(t);
            if rep.edge_violations + rep.cluster_violations > 0 {
                out.failure = Some(Failure {
                    command: cmd.name().into(),
                    check: "domination".into(),
                    detail: format!("{} edge and {} cluster violations", rep.edge_violations, rep.cluster_violations),
                    values: json!({"edge_violations": rep.edge_violations, "cluster_violations": rep.cluster_violations}),
                });
            }
        }
    }
    Ok(out)
}

fn failure(cmd: Command, e: rcm_core::Error) -> Failure {
    match LabError::from_core(cmd.name(), e) {
        LabError::Check(f) => f,
        other => Failure { command: cmd.name().into(), check: "error".into(), detail: other.to_string(), values: serde_json::Value::Null },
    }
}

fn push_inequality(t: &mut Table, name: &str, ghost: f64, r: &InequalityReport, sigmas: f64, failed: &mut Vec<String>) {
    let holds = r.holds(sigmas, 0.0);
    if !holds {
        failed.push(format!("{name} (ghost {ghost})"));
    }
    t.push(row![name, ghost, r.lhs, r.rhs, r.slack, r.slack_stderr, r.samples, holds]);
}

fn sizes_table(name: &str, lambda: f64, sizes: &[usize]) -> Table {
    let mut t = Table::new(name, &["lambda", "replica", "size"]);
    for (r, &s) in sizes.iter().enumerate() {
        t.push(row![lambda, r, s]);
    }
    t
}

fn tail_table(name: &str, c: &TailCurve) -> Table {
    let mut t = Table::new(name, &["k", "theta", "stderr", "samples"]);
    for (k, e) in c.ks.iter().zip(&c.theta) {
        t.push(row![*k, e.mean, e.stderr, e.samples]);
    }
    t
}

fn thresholds_table(name: &str, half_widths: &[f64], thresholds: &[Vec<f64>]) -> Table {
    let mut t = Table::new(name, &["half_width", "replica", "threshold"]);
    for (l, th) in half_widths.iter().zip(thresholds) {
        for (r, &x) in th.iter().enumerate() {
            t.push(row![*l, r, x]);
        }
    }
    t
}

/// Load the configuration, write the manifest, run, and write the outputs.
/// On a failed check the manifest lists `failure.json` and the error is
/// returned after everything has been written.
pub fn run(command: Command, config_path: &Path, ov: &Overrides) -> Result<RunManifest, LabError> {
    let bytes = std::fs::read(config_path).map_err(|e| LabError::Usage(format!("{}: {e}", config_path.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| LabError::Config(vec!["configuration is not UTF-8".into()]))?;
    let raw = config::parse(&text)?;
    let mut plan = plan(command, &raw, ov)?;
    let config_path = std::fs::canonicalize(config_path)?;
    if let Params::OsssFixtures { path, .. } = &mut plan.params {
        if path.is_relative() {
            *path = config_path.parent().unwrap_or(Path::new(".")).join(&*path);
        }
    }
    std::fs::create_dir_all(&plan.out_dir)?;
    let mut m = RunManifest {
        artifact_version: env!("CARGO_PKG_VERSION").into(),
        command: command.name().into(),
        config_path,
        config_sha256: manifest::sha256_hex(&bytes),
        model_sha256: plan.model.as_ref().map(|m| manifest::sha256_hex(format!("{m:?}").as_bytes())),
        seed: plan.seed.to_string(),
        samples: plan.samples,
        threads: plan.threads,
        format: plan.format.extension().into(),
        parameters: plan.parameters.clone(),
        started_unix: manifest::now_unix(),
        finished_unix: None,
        wall_time_s: None,
        status: "running".into(),
        outputs: declared_outputs(&plan),
    };
    m.write(&plan.out_dir)?;
    let result = execute(&plan);
    let mut written = Vec::new();
    let failure = match result {
        Ok(outputs) => {
            for t in &outputs.tables {
                t.write(&plan.out_dir, plan.format)?;
                written.push(t.file_name(plan.format));
            }
            for (name, data) in &outputs.files {
                std::fs::write(plan.out_dir.join(name), data)?;
                written.push(name.clone());
            }
            debug_assert_eq!(written, m.outputs, "declared outputs of {}", command.name());
            outputs.failure
        }
        Err(LabError::Check(f)) => Some(f),
        Err(e) => {
            m.outputs = written;
            m.finish("failed");
            m.write(&plan.out_dir)?;
            return Err(e);
        }
    };
    m.outputs = written;
    match failure {
        Some(f) => {
            let mut s = serde_json::to_string_pretty(&f)?;
            s.push('\n');
            std::fs::write(plan.out_dir.join("failure.json"), s)?;
            m.outputs.push("failure.json".into());
            m.finish("failed");
            m.write(&plan.out_dir)?;
            Err(LabError::Check(f))
        }
        None => {
            m.finish("ok");
            m.write(&plan.out_dir)?;
            Ok(m)
        }
    }
}

/// Rerun the experiment recorded in a manifest. The configuration file must
/// still hash to the recorded value.
pub fn replay(manifest_path: &Path, out: Option<PathBuf>) -> Result<RunManifest, LabError> {
    let m = RunManifest::read(manifest_path)?;
    let command = Command::from_name(&m.command).ok_or_else(|| LabError::Usage(format!("unknown command `{}`", m.command)))?;
    let bytes = std::fs::read(&m.config_path).map_err(|e| LabError::Usage(format!("{}: {e}", m.config_path.display())))?;
    let hash = manifest::sha256_hex(&bytes);
    if hash != m.config_sha256 {
        return Err(LabError::Usage(format!(
            "{} changed since the run (sha256 {hash}, manifest {})",
            m.config_path.display(),
            m.config_sha256
        )));
    }
    let original = manifest_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let ov = Overrides {
        seed: Some(m.seed()?),
        samples: m.samples,
        threads: m.threads,
        out: Some(out.unwrap_or(original)),
        format: Format::parse(&m.format),
    };
    run(command, &m.config_path, &ov)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(text: &str) -> RawConfig {
        config::parse(text).unwrap()
    }

    const MODEL: &str = r#"
        [model]
        dimension = 2
        intensity = 0.2
        half_width = 5.0
        [model.adjacency]
        form = "gilbert"
        radius = 1.0
    "#;

    #[test]
    fn names_round_trip() {
        for c in Command::ALL {
            assert_eq!(Command::from_name(c.name()), Some(c));
        }
    }

    #[test]
    fn all_missing_keys_at_once() {
        let r = raw(&format!("{MODEL}[experiment]\nkind = \"exponential\"\n"));
        let LabError::Config(p) = plan(Command::Fit, &r, &Overrides::default()).unwrap_err() else { panic!() };
        for key in ["experiment.seed", "experiment.samples", "experiment.k_lo", "experiment.k_hi"] {
            assert!(p.iter().any(|x| x.contains(key)), "{key}: {p:?}");
        }
    }

    #[test]
    fn flags_override_config() {
        let r = raw(&format!("{MODEL}[experiment]\nseed = 1\nsamples = 10\nk_max = 5\n[output]\nformat = \"json\"\n"));
        let ov = Overrides { seed: Some(9), samples: Some(20), format: Some(Format::Csv), ..Default::default() };
        let p = plan(Command::Tail, &r, &ov).unwrap();
        assert_eq!((p.seed, p.samples, p.format), (9, Some(20), Format::Csv));
        let p = plan(Command::Tail, &r, &Overrides::default()).unwrap();
        assert_eq!((p.seed, p.samples, p.format), (1, Some(10), Format::Json));
    }

    #[test]
    fn foreign_keys_rejected() {
        let r = raw(&format!("{MODEL}[experiment]\nseed = 1\nsamples = 10\nk_max = 5\nr2 = 1.0\n"));
        let LabError::Config(p) = plan(Command::Tail, &r, &Overrides::default()).unwrap_err() else { panic!() };
        assert_eq!(p, vec!["key `experiment.r2` is not used by `tail`".to_string()]);
    }

    #[test]
    fn declared_outputs_match_execution() {
        let configs = [
            (Command::Sample, "replica = 2\nwith_origin = true\n"),
            (Command::Render, ""),
            (Command::Tail, "samples = 30\nk_max = 4\n"),
            (Command::Chi, "samples = 30\nlambdas = [0.1, 0.2]\n"),
            (Command::Scan, "samples = 30\nhalf_widths = [1.0, 2.0, 3.0]\ngrid = { start = 0.5, step = 0.5, count = 8 }\nresamples = 10\n"),
            (Command::Bounds, ""),
        ];
        for (cmd, extra) in configs {
            let r = raw(&format!("{MODEL}[experiment]\nseed = 3\n{extra}"));
            let p = plan(cmd, &r, &Overrides::default()).unwrap();
            let o = execute(&p).unwrap();
            let mut names: Vec<String> = o.tables.iter().map(|t| t.file_name(p.format)).collect();
            names.extend(o.files.iter().map(|f| f.0.clone()));
            assert_eq!(names, declared_outputs(&p), "{}", cmd.name());
        }
    }
}
