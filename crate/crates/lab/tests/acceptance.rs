//! Acceptance experiments. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails. Pass criterion ids (`C4`, ...) as
//! arguments to run a subset.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use rcm_core::estimators::{
    convergence_study, domination_check, estimate_chi, estimate_tail, fit_exponential_rate, locate_from_thresholds, ratio_diagnostics,
    reach_thresholds, supercritical_from_thresholds, ConvergenceConfig,
};
use rcm_core::lattice::{build_lattice, LatticeSpec, SiteBond};
use rcm_core::model::{AdjacencySpec, ModelSpec, WeightDistribution};
use rcm_core::oracle::{derivative_covariance, derivative_fd, osss_check, prop27_exact, summary, TinyConfig, TinyInstance};
use rcm_core::osss::{osss_mc, prop27_mc, vertex_profile, RootPolicy};
use rcm_lab::fixtures;

struct Outcome {
    pass: bool,
    detail: String,
    info: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Outcome { pass, detail, info: Vec::new() }
    }
}

fn gilbert(lambda: f64, l: f64) -> ModelSpec {
    ModelSpec::new(AdjacencySpec::gilbert(2, 1.0), WeightDistribution::PointMass, lambda, l).unwrap()
}

fn soft_cubic(lambda: f64, l: f64) -> ModelSpec {
    ModelSpec::new(AdjacencySpec::soft_cubic(2), WeightDistribution::PointMass, lambda, l).unwrap()
}

fn min_reach(weights: WeightDistribution, lambda: f64, l: f64) -> ModelSpec {
    ModelSpec::new(AdjacencySpec::min_reach_cubic(2), weights, lambda, l).unwrap()
}

fn pareto() -> WeightDistribution {
    WeightDistribution::pareto(4.5, Some(10.0))
}

/// 17 × 17 sites: half-width 4 at mesh 1.
fn osss_lattice() -> LatticeSpec {
    build_lattice(&min_reach(WeightDistribution::PointMass, 0.5, 4.0), 4, 1, 1e-6).unwrap()
}

fn tail(k: usize) -> impl FnMut(&TinyConfig<'_>) -> f64 {
    move |c| (c.cluster_size(c.root()) >= k) as u8 as f64
}

const TINY_SEED: u128 = 0xacce;
const MC_SAMPLES: u64 = 100_000;

fn c1() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for i in 0..24 {
        let t = TinyInstance::random(TINY_SEED, i, 20, None);
        for k in [2, 3] {
            let cov = derivative_covariance(&t, tail(k)).unwrap();
            let fd = derivative_fd(&t, tail(k), 1e-4).unwrap();
            if cov.abs() > 1e-9 {
                worst = worst.max(((cov - fd) / cov).abs());
                checked += 1;
            }
        }
    }
    Outcome::new(checked >= 20 && worst <= 1e-6, format!("{checked} instance/k pairs, max relative error {worst:.2e} (limit 1e-6)"))
}

fn c2() -> Outcome {
    let mut exact: f64 = 0.0;
    let mut instances = 0;
    for ghost in [0.05, 0.2] {
        for i in 0..24 {
            let t = TinyInstance::random(TINY_SEED, i, 20, Some(ghost));
            let s = summary(&t, 3, RootPolicy::Explore).unwrap();
            let n = t.vertex_count();
            for v in 0..n {
                exact = exact.max((s.revealment[v] - s.magnetization[v]).abs());
            }
            instances += 1;
        }
    }
    let spec = osss_lattice();
    let mut out = Vec::new();
    let mut mc_pass = true;
    for (gamma, seed) in [(0.05, 21), (0.2, 21)] {
        let p = vertex_profile(&spec, 0.5, gamma, RootPolicy::Explore, MC_SAMPLES, seed);
        let mut bad = 0;
        let mut max_z: f64 = 0.0;
        for d in &p.difference {
            let z = if d.stderr > 0.0 { d.mean.abs() / d.stderr } else if d.mean == 0.0 { 0.0 } else { f64::INFINITY };
            max_z = max_z.max(z);
            if z > 3.0 {
                bad += 1;
            }
        }
        mc_pass &= bad == 0;
        out.push(format!("γ̃={gamma}: {bad}/{} vertices beyond 3σ, max |z| {max_z:.2}", p.difference.len()));
    }
    let pass = exact <= 1e-12 && mc_pass;
    let mut o = Outcome::new(pass, format!("exact max gap {exact:.1e} on {instances} instances; MC {}", out.join("; ")));
    if !mc_pass {
        o.info.push(format!(
            "under an exact identity each vertex exceeds 3σ with probability 0.0027; {} vertex tests expect {:.1} exceedances",
            2 * spec.vertex_count(),
            0.0027 * 2.0 * spec.vertex_count() as f64
        ));
    }
    o
}

fn c3() -> Outcome {
    let shipped = fixtures::read(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/oracle.json")).unwrap();
    let mut worst = f64::INFINITY;
    let mut count = 0;
    for f in &shipped.instances {
        let c = fixtures::check(f, shipped.k, shipped.gamma, shipped.step).unwrap();
        worst = worst.min(c.osss_slack).min(c.prop27_slack);
        count += 1;
    }
    for i in 0..24 {
        let t = TinyInstance::random(TINY_SEED ^ 3, i, 20, Some(0.2));
        for k in [2, 3] {
            worst = worst.min(osss_check(&t, k, RootPolicy::CopyOnly).unwrap().slack);
            worst = worst.min(prop27_exact(&t.with_ghost(None), k, 0.6, RootPolicy::CopyOnly).unwrap().slack);
        }
        count += 1;
    }
    let exact_pass = worst >= -1e-12;
    let spec = osss_lattice();
    let mut mc = Vec::new();
    let mut mc_pass = true;
    for gamma in [0.05, 0.2] {
        let r = osss_mc(&spec, 0.5, gamma, 3, RootPolicy::CopyOnly, MC_SAMPLES, 22);
        mc_pass &= r.holds(4.0, 0.0);
        mc.push(format!("OSSS γ̃={gamma} slack {:.4} ± {:.4}", r.slack, r.slack_stderr));
    }
    let r = prop27_mc(&spec, 0.5, 3, 0.6, RootPolicy::CopyOnly, MC_SAMPLES, 23);
    mc_pass &= r.holds(4.0, 0.0);
    mc.push(format!("bound γ=0.6 slack {:.4} ± {:.4}", r.slack, r.slack_stderr));
    Outcome::new(exact_pass && mc_pass, format!("exact min slack {worst:.3e} over {count} instances; MC {}", mc.join("; ")))
}

fn c4() -> Outcome {
    let m = gilbert(0.2, 20.0);
    let curve = estimate_tail(&m, 0.2, 20.0, 40, MC_SAMPLES, 1).unwrap();
    let mut o = match fit_exponential_rate(&curve, 5, 40) {
        Ok(f) => Outcome::new(f.slope < 0.0 && f.r2 >= 0.98, format!("slope {:.4} ± {:.4}, r² {:.4}", f.slope, f.slope_stderr, f.r2)),
        Err(e) => Outcome::new(false, format!("fit on k ∈ [5, 40] impossible: {e}")),
    };
    let last = curve.ks.iter().zip(&curve.theta).filter(|(_, e)| e.mean > 0.0).map(|(k, _)| *k).max().unwrap_or(0);
    o.info.push(format!("largest k with θ̂(k) > 0 is {last}; θ̂(5) = {:.3e}", curve.at(5).unwrap().mean));
    let mut hi = last;
    while hi > 6 {
        let e = curve.at(hi).unwrap();
        if e.mean > 0.0 && e.stderr <= 0.25 * e.mean {
            break;
        }
        hi -= 1;
    }
    if let Ok(f) = fit_exponential_rate(&curve, 5, hi) {
        o.info.push(format!("fit on the resolved window [5, {hi}]: slope {:.4} ± {:.4}, r² {:.4}", f.slope, f.slope_stderr, f.r2));
    }
    o
}

/// Shared by the branching and supercritical criteria.
fn critical_estimate() -> (f64, f64) {
    static CACHE: OnceLock<(f64, f64)> = OnceLock::new();
    *CACHE.get_or_init(scan_critical)
}

fn scan_critical() -> (f64, f64) {
    let g = gilbert(1.0, 32.0);
    let grid: Vec<f64> = (0..=40).map(|i| std::f64::consts::FRAC_1_PI + 0.05 * i as f64).collect();
    let th = reach_thresholds(&g, &[4.0, 8.0, 16.0, 32.0], *grid.last().unwrap(), 10_000, 2).unwrap();
    let e = locate_from_thresholds(&th, &grid, 1000).unwrap();
    (e.lambda_hat, e.stderr)
}

fn c5() -> Outcome {
    let (lambda_hat, se) = critical_estimate();
    let lower = std::f64::consts::FRAC_1_PI - 3.0 * se;
    let chi = estimate_chi(&gilbert(0.2, 20.0), 0.2, 20.0, MC_SAMPLES, 3, 1_000_000).unwrap();
    let bound = 1.0 / (1.0 - 0.2 * std::f64::consts::PI);
    let limit = bound + 3.0 * chi.estimate.stderr;
    let pass = lambda_hat >= lower && chi.estimate.mean <= limit && !chi.divergent;
    Outcome::new(
        pass,
        format!(
            "λ̂ = {lambda_hat:.4} ± {se:.4} ≥ {lower:.4}; χ̂(0.2) = {:.4} ± {:.4} ≤ {limit:.4}",
            chi.estimate.mean, chi.estimate.stderr
        ),
    )
}

fn c6() -> Outcome {
    let (lambda_hat, _) = critical_estimate();
    let g = gilbert(1.0, 40.0);
    let th = reach_thresholds(&g, &[10.0, 20.0, 40.0], 1.5 * lambda_hat, 10_000, 11).unwrap();
    let f = supercritical_from_thresholds(&th, lambda_hat, 7).unwrap();
    let reach: Vec<String> = f.half_widths.iter().zip(&f.reach_above).map(|(l, e)| format!("L={l}: {:.4}", e.mean)).collect();
    let pass = f.reach_above.iter().all(|e| e.mean >= 0.5) && f.fit.slope > 0.0;
    let mut o = Outcome::new(
        pass,
        format!("reach at 1.5λ̂ = {:.4}: {}; slope on [λ̂, 1.3λ̂] {:.4} ± {:.4}", 1.5 * lambda_hat, reach.join(", "), f.fit.slope, f.fit.slope_stderr),
    );
    let res: Vec<String> = f.lambdas.iter().zip(&f.fit.residuals).map(|(l, r)| format!("{l:.3}:{r:+.4}")).collect();
    o.info.push(format!("r² {:.4}, residuals {}", f.fit.r_squared, res.join(" ")));
    o
}

fn converge(meshes: Vec<u32>, samples: u64, influence_samples: u64) -> Vec<rcm_core::estimators::ConvergenceRow> {
    let cfg = ConvergenceConfig {
        half_width: 3,
        meshes,
        k: 3,
        gamma: 0.1,
        samples,
        influence_samples,
        russo_samples: 0,
        truncation_tol: 1e-6,
    };
    convergence_study(&soft_cubic(0.5, 3.0), 0.5, &cfg, 7).unwrap()
}

fn c7() -> Outcome {
    let rows = converge(vec![0, 1, 2, 3, 4], MC_SAMPLES, 0);
    let mut pass = true;
    for w in rows.windows(2) {
        let (a, b) = (&w[0].difference, &w[1].difference);
        let pooled = 1.96 * (a.stderr * a.stderr + b.stderr * b.stderr).sqrt();
        pass &= b.mean.abs() <= a.mean.abs() + pooled;
    }
    let mismatches: u64 = rows.iter().map(|r| r.distinct_mismatches).sum();
    let distinct: u64 = rows.iter().map(|r| r.distinct_replicas).sum();
    let diffs: Vec<String> = rows.iter().map(|r| format!("{:.5}", r.difference.mean.abs())).collect();
    Outcome::new(pass && mismatches == 0, format!("|Δθ̂| over n=0..4: {}; {mismatches} mismatches in {distinct} distinct-cell replicas", diffs.join(", ")))
}

fn c8() -> Outcome {
    let rows = converge(vec![0, 1, 2, 3], 1000, 2000);
    let vals: Vec<f64> = rows.iter().map(|r| r.edge_influence.unwrap().ratio).collect();
    let decreasing = vals.windows(2).all(|w| w[1] < w[0]);
    let x: Vec<f64> = rows.iter().map(|r| -(2.0 * r.mesh as f64) * std::f64::consts::LN_2).collect();
    let y: Vec<f64> = vals.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let shown: Vec<String> = vals.iter().map(|v| format!("{v:.3e}")).collect();
    Outcome::new(decreasing && slope > 0.0, format!("I over n=0..3: {}; log–log slope against 2^(-nd) {slope:.3}", shown.join(", ")))
}

fn c9() -> Outcome {
    let spec = build_lattice(&min_reach(pareto(), 0.5, 3.0), 3, 1, 1e-6).unwrap();
    let r = ratio_diagnostics(&spec, 0.5, 0.1, &[1.0, 2.0, 4.0, 8.0], 3, 5000, 9).unwrap();
    let mut pass = true;
    let mut rows = Vec::new();
    for x in &r.rows {
        pass &= x.delta_ratio >= 1.0 - 3.0 * x.delta_ratio_stderr;
        pass &= x.pivotal_ratio >= 1.0 - 3.0 * x.pivotal_ratio_stderr;
        rows.push(format!(
            "m={}: δ {:.3}±{:.3}, piv {:.3}±{:.3}",
            x.m, x.delta_ratio, x.delta_ratio_stderr, x.pivotal_ratio, x.pivotal_ratio_stderr
        ));
    }
    let (d, p) = (r.delta_fit.as_ref().unwrap(), r.pivotal_fit.as_ref().unwrap());
    pass &= d.slope >= 0.0 && p.slope >= 0.0;
    let mut o = Outcome::new(pass, format!("{}; slopes δ {:.4} ± {:.4}, piv {:.4} ± {:.4}", rows.join("; "), d.slope, d.slope_stderr, p.slope, p.slope_stderr));
    let fitted: Vec<String> = r.fitted().iter().map(|v| format!("{v:.3}")).collect();
    o.info.push(format!("fitted exp(Ĉ R(m)^d): {}", fitted.join(", ")));
    o
}

fn c10() -> Outcome {
    let eps = -(-4.0f64).exp_m1();
    let r = domination_check(&min_reach(pareto(), 20.0, 3.0), (2.0, 4.0), 1.0, eps, 20.0, 3.0, 2.0, 10_000, 10).unwrap();
    Outcome::new(
        r.samples == 10_000 && r.edge_violations == 0 && r.cluster_violations == 0 && r.edges_checked > 0,
        format!(
            "{} replicas, {} edges checked, {} edge and {} cluster violations; point count z {:.2}",
            r.samples, r.edges_checked, r.edge_violations, r.cluster_violations, r.z
        ),
    )
}

fn rcm(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rcm")).args(args).output().unwrap()
}

fn csv_files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).filter(|p| p.extension().is_some_and(|e| e == "csv")).collect();
    v.sort();
    v
}

fn c11() -> Outcome {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let tmp = tempfile::tempdir().unwrap();
    let mut names: Vec<String> = std::fs::read_dir(&configs)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".toml"))
        .collect();
    names.sort();
    let mut problems = Vec::new();
    let mut compared = 0;
    for name in &names {
        let mut text = std::fs::read_to_string(configs.join(name)).unwrap();
        // keep every experiment but make the expensive ones quick
        text = text.replace("influence_samples = 1000", "influence_samples = 20").replace("russo_samples = 10000", "russo_samples = 50");
        text = text.replace("../crates/lab/fixtures/oracle.json", configs.join("../crates/lab/fixtures/oracle.json").to_str().unwrap());
        text = text.replace("instances = 24", "instances = 3");
        let cfg = tmp.path().join(name);
        std::fs::write(&cfg, text).unwrap();
        let command = match name.as_str() {
            n if n.starts_with("render") => "render",
            "gilbert-tail.toml" | "gilbert-supercritical.toml" | "gilbert-differential.toml" => "fit",
            "gilbert-scan.toml" => "scan",
            "gilbert-chi.toml" => "chi",
            "gilbert-bounds.toml" => "bounds",
            "soft-converge.toml" => "converge",
            "minreach-osss.toml" | "fixtures-verify.toml" => "osss-verify",
            "oracle-fixtures.toml" => "oracle-fixtures",
            "pareto-ratios.toml" => "diagnose-ratios",
            "pareto-dominate.toml" => "dominate",
            other => {
                problems.push(format!("no command for {other}"));
                continue;
            }
        };
        let first = tmp.path().join(format!("{name}.a"));
        let mut args = vec![command, "--config", cfg.to_str().unwrap(), "--out", first.to_str().unwrap()];
        let takes_samples = !matches!(command, "render" | "bounds" | "oracle-fixtures") && name != "fixtures-verify.toml";
        let samples = if name == "gilbert-tail.toml" { "20000" } else { "200" };
        if takes_samples {
            args.extend(["--samples", samples]);
        }
        let o = rcm(&args);
        if !matches!(o.status.code(), Some(0) | Some(2)) {
            problems.push(format!("{name}: exit {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr).trim()));
            continue;
        }
        let second = tmp.path().join(format!("{name}.b"));
        let r = rcm(&["replay", first.join("manifest.json").to_str().unwrap(), "--out", second.to_str().unwrap()]);
        if r.status.code() != o.status.code() {
            problems.push(format!("{name}: replay exit {:?} vs {:?}", r.status.code(), o.status.code()));
            continue;
        }
        let (a, b) = (csv_files(&first), csv_files(&second));
        if a.is_empty() || a.len() != b.len() {
            problems.push(format!("{name}: {} vs {} csv files", a.len(), b.len()));
            continue;
        }
        for (x, y) in a.iter().zip(&b) {
            if std::fs::read(x).unwrap() != std::fs::read(y).unwrap() {
                problems.push(format!("{name}: {} differs", x.file_name().unwrap().to_string_lossy()));
            }
            compared += 1;
        }
    }
    let pass = problems.is_empty() && compared > 0;
    let mut o = Outcome::new(pass, format!("{} configurations, {compared} CSV files byte-identical after replay", names.len()));
    o.info = problems;
    o
}

type Criterion = (&'static str, &'static str, f64, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("C1", "exact Russo identity", 120.0, c1),
        ("C2", "magnetization identity", 300.0, c2),
        ("C3", "OSSS inequality and the γ bound", 600.0, c3),
        ("C4", "subcritical exponential tail", 600.0, c4),
        ("C5", "branching bounds", 900.0, c5),
        ("C6", "supercritical onset", 1200.0, c6),
        ("C7", "discretization convergence", 600.0, c7),
        ("C8", "vanishing edge influence", 600.0, c8),
        ("C9", "min-reach ratio diagnostics", 900.0, c9),
        ("C10", "stochastic domination", 300.0, c10),
        ("C11", "determinism from manifests", f64::INFINITY, c11),
    ];
    let wanted: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, limit, run) in criteria {
        if !wanted.is_empty() && !wanted.iter().any(|w| w == id) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default();
            Outcome::new(false, format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        let pass = outcome.pass && secs < limit;
        if !pass {
            failed += 1;
        }
        let budget = if limit.is_finite() { format!("{secs:.1} s, limit {limit:.0} s") } else { format!("{secs:.1} s") };
        println!("{} {id} {name}: {} ({budget})", if pass { "PASS" } else { "FAIL" }, outcome.detail);
        for line in outcome.info {
            println!("     {id} info: {line}");
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
