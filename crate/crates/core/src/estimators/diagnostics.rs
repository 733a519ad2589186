//! Diagnostics for the structural assumptions, the lattice-to-continuum
//! limit and the supercritical domination coupling.

use alloc::format;
use alloc::vec::Vec;

use super::Estimate;
use crate::continuum::{cluster_of_origin, origin_sweep, sample_ppp, ClusterOptions, PointConfiguration};
use crate::lattice::{
    build_lattice, cluster_avoiding, cluster_size, pivotal_vertices, russo_rhs_mc, LatticeInstance,
    LatticeSpec, Pivotality, SiteBond,
};
use crate::model::ModelSpec;
use crate::osss::{normalized_edge_influence, EdgeInfluence};
use crate::rng::{Domain, Stream};
use crate::stats::{line_fit, CoMoments, LineFit, Moments};
use crate::{Error, Result};

/// Ratios for one weight `m` against weight 1 at the origin site.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioRow {
    pub m: f64,
    /// `R(m)^d`.
    pub reach_volume: f64,
    /// `δ(0̄, m)`.
    pub delta: Estimate,
    pub delta_ratio: f64,
    pub delta_ratio_stderr: f64,
    /// `Σ_ū (1 − p_{(ū,m)}) 1{(ū, m) pivotal}`.
    pub pivotal_sum: Estimate,
    pub pivotal_ratio: f64,
    pub pivotal_ratio_stderr: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioReport {
    pub rows: Vec<RatioRow>,
    /// Least squares of `ln(δ-ratio)` on `R(m)^d`; the slope is `Ĉ`.
    pub delta_fit: Option<LineFit>,
    pub pivotal_fit: Option<LineFit>,
}

impl RatioReport {
    /// Fitted `exp(Ĉ R(m)^d)` for each row from the δ-ratio fit.
    pub fn fitted(&self) -> Vec<f64> {
        let c = self.delta_fit.as_ref().map_or(f64::NAN, |f| f.slope);
        self.rows.iter().map(|r| libm::exp(c * r.reach_volume)).collect()
    }
}

fn log_fit(rows: &[RatioRow], pick: impl Fn(&RatioRow) -> f64) -> Option<LineFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| pick(r) > 0.0 && pick(r).is_finite())
        .map(|r| (r.reach_volume, libm::log(pick(r))))
        .unzip();
    line_fit(&x, &y)
}

/// Revealment and pivotal-sum ratios on a lattice of a min-reach model.
///
/// The revealment of `(0̄, m)` is taken in its conditional form
/// `1 − e^{−γ̃ |C(0̄, m)|}`, which the exploration forest attains exactly.
pub fn ratio_diagnostics(spec: &LatticeSpec, lambda: f64, gamma: f64, weights: &[f64], k: usize, samples: u64, seed: u128) -> Result<RatioReport> {
    let reach = spec
        .model
        .adjacency
        .reach
        .clone()
        .ok_or_else(|| Error::Precondition("adjacency has no reach function".into()))?;
    let mut bins = Vec::with_capacity(weights.len());
    for &m in weights {
        let b = spec
            .model
            .weights
            .bin_of(&spec.bins, m, spec.mesh)
            .ok_or_else(|| Error::Domain(format!("weight {m} has no lattice bin")))?;
        bins.push(b);
    }
    let o = spec.origin_site();
    let d = spec.dimension() as f64;
    let q: Vec<f64> = bins.iter().map(|&b| 1.0 - spec.site_probability(lambda, b)).collect();
    let nb = spec.bins.len();
    let mut delta = alloc::vec![Moments::new(); weights.len()];
    let mut piv_sum = alloc::vec![Moments::new(); weights.len()];
    let mut delta_co = alloc::vec![CoMoments::default(); weights.len()];
    let mut piv_co = alloc::vec![CoMoments::default(); weights.len()];
    let mut per_bin = alloc::vec![0.0; nb];
    for r in 0..samples {
        let inst = LatticeInstance::direct(spec, lambda, seed, r);
        let piv = Pivotality::new(&inst, k);
        per_bin.iter_mut().for_each(|x| *x = 0.0);
        for v in pivotal_vertices(&inst, &piv) {
            per_bin[spec.bin_of(v)] += 1.0;
        }
        let size = |v: u32| cluster_avoiding(&inst, v, None, usize::MAX).len() as f64;
        let base_d = -libm::expm1(-gamma * size(spec.root()));
        let base_p = per_bin[0] * (1.0 - spec.site_probability(lambda, 0));
        for (i, &b) in bins.iter().enumerate() {
            let x = -libm::expm1(-gamma * size(spec.vertex(o, b)));
            let y = per_bin[b] * q[i];
            delta[i].push(x);
            piv_sum[i].push(y);
            delta_co[i].push(base_d, x);
            piv_co[i].push(base_p, y);
        }
    }
    let rows: Vec<RatioRow> = weights
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let (dr, dse) = delta_co[i].ratio();
            let (pr, pse) = piv_co[i].ratio();
            RatioRow {
                m,
                reach_volume: libm::pow(reach.eval(m), d),
                delta: Estimate::from_moments(&delta[i], seed, 0),
                delta_ratio: dr,
                delta_ratio_stderr: dse,
                pivotal_sum: Estimate::from_moments(&piv_sum[i], seed, 0),
                pivotal_ratio: pr,
                pivotal_ratio_stderr: pse,
            }
        })
        .collect();
    let delta_fit = log_fit(&rows, |r| r.delta_ratio);
    let pivotal_fit = log_fit(&rows, |r| r.pivotal_ratio);
    Ok(RatioReport { rows, delta_fit, pivotal_fit })
}

/// Derivative of `P(|C(0̄,1)| ≥ k)` in the intensity, continuum against
/// lattice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RussoCheck {
    /// Pivotal-sum form on the lattice.
    pub lattice: Estimate,
    /// Point-insertion form in the continuum box.
    pub continuum: Estimate,
    pub gap: f64,
    pub gap_stderr: f64,
}

/// `d/dλ P(|C(0̄,1)| ≥ k)` in `[−L, L]^d` as `|box| · P(inserting a uniform
/// marked point creates the event)`.
pub fn margulis_russo(model: &ModelSpec, lambda: f64, half_width: f64, k: usize, samples: u64, seed: u128) -> Result<Estimate> {
    let base = model.with_half_width(half_width);
    base.validate()?;
    let m = base.with_intensity(lambda);
    let vol = m.volume();
    let d = m.dimension();
    let opts = ClusterOptions { cap: Some(k), stop_on_boundary: false };
    let mut acc = Moments::new();
    let mut x = alloc::vec![0.0; d];
    for r in 0..samples {
        let cfg = sample_ppp(&m, seed, r).with_origin(1.0)?;
        if cluster_of_origin(&cfg, opts).size >= k {
            acc.push(0.0);
            continue;
        }
        let mut s = Stream::new(seed, r, Domain::Inserted, 0);
        for c in x.iter_mut() {
            *c = -half_width + 2.0 * half_width * s.uniform();
        }
        let w = m.weights.sample(&mut s);
        let aug = cfg.augment(&[(&x, w)])?;
        acc.push(if cluster_of_origin(&aug, opts).size >= k { vol } else { 0.0 });
    }
    Ok(Estimate::from_moments(&acc, seed, 0))
}

/// Settings of a convergence study.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceConfig {
    pub half_width: u32,
    pub meshes: Vec<u32>,
    pub k: usize,
    pub gamma: f64,
    /// Coupled replicas for the tail comparison.
    pub samples: u64,
    /// Replicas for the edge-influence sum (0 skips it).
    pub influence_samples: u64,
    /// Replicas for each derivative (0 skips them).
    pub russo_samples: u64,
    pub truncation_tol: f64,
}

/// One mesh of a convergence study.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub mesh: u32,
    /// `θ̂^{L,n}(k)` from cells of the shared configuration.
    pub theta_lattice: Estimate,
    /// `θ̂^L(k)` from the same configurations restricted to `[−L, L]^d`.
    pub theta_continuum: Estimate,
    /// Per-replica `1{lattice} − 1{continuum}`.
    pub difference: Estimate,
    /// Replicas whose points all occupy distinct cells.
    pub distinct_replicas: u64,
    /// Among those, replicas where the lattice root cluster and the
    /// continuum origin cluster on the same points differ in size.
    pub distinct_mismatches: u64,
    pub edge_influence: Option<EdgeInfluence>,
    pub russo: Option<RussoCheck>,
}

/// Coupled lattice approximations of one continuum configuration per
/// replica, sampled on the coarsest cylinder `[−L − 1/2, L + 1/2]^d`.
pub fn convergence_study(model: &ModelSpec, lambda: f64, cfg: &ConvergenceConfig, seed: u128) -> Result<Vec<ConvergenceRow>> {
    let l = cfg.half_width as f64;
    if cfg.half_width == 0 || cfg.meshes.is_empty() {
        return Err(Error::Domain("need a positive half-width and at least one mesh".into()));
    }
    let base = model.with_half_width(l);
    base.validate()?;
    let base = base.with_intensity(lambda);
    let specs: Vec<LatticeSpec> =
        cfg.meshes.iter().map(|&n| build_lattice(&base.with_intensity(lambda.max(f64::MIN_POSITIVE)), cfg.half_width, n, cfg.truncation_tol)).collect::<Result<_>>()?;
    let outer = base.with_half_width(l + 0.5);
    let k = cfg.k;
    let nm = specs.len();
    let mut lat = alloc::vec![Moments::new(); nm];
    let mut diff = alloc::vec![Moments::new(); nm];
    let mut cont = Moments::new();
    let mut distinct = alloc::vec![0u64; nm];
    let mut mismatch = alloc::vec![0u64; nm];
    let opts = ClusterOptions { cap: Some(k), stop_on_boundary: false };
    for r in 0..cfg.samples {
        let pts = sample_ppp(&outer, seed, r).with_origin(1.0)?;
        let c_hit = cluster_of_origin(&pts.restrict_box(l), opts).size >= k;
        cont.push(c_hit as u8 as f64);
        for (i, spec) in specs.iter().enumerate() {
            let inst = LatticeInstance::from_points(spec, lambda, &pts);
            let l_hit = cluster_avoiding(&inst, inst.root(), None, k).len() >= k;
            lat[i].push(l_hit as u8 as f64);
            diff[i].push(l_hit as u8 as f64 - c_hit as u8 as f64);
            let coupling = inst.coupling().expect("coupled instance");
            if coupling.distinct {
                distinct[i] += 1;
                let full = cluster_of_origin(&coupling.points, ClusterOptions::default()).size;
                if full != cluster_size(&inst, inst.root()) {
                    mismatch[i] += 1;
                }
            }
        }
    }
    let mut rows = Vec::with_capacity(nm);
    for (i, spec) in specs.iter().enumerate() {
        let edge_influence =
            (cfg.influence_samples > 0).then(|| normalized_edge_influence(spec, lambda, cfg.gamma, k, cfg.influence_samples, seed));
        let russo = if cfg.russo_samples > 0 {
            let lattice = russo_rhs_mc(spec, lambda, k, cfg.russo_samples, seed);
            let continuum = margulis_russo(model, lambda, l, k, cfg.russo_samples, seed)?;
            Some(RussoCheck {
                lattice,
                continuum,
                gap: lattice.mean - continuum.mean,
                gap_stderr: libm::hypot(lattice.stderr, continuum.stderr),
            })
        } else {
            None
        };
        rows.push(ConvergenceRow {
            mesh: spec.mesh,
            theta_lattice: Estimate::from_moments(&lat[i], seed, 0),
            theta_continuum: Estimate::from_moments(&cont, seed, 0),
            difference: Estimate::from_moments(&diff[i], seed, 0),
            distinct_replicas: distinct[i],
            distinct_mismatches: mismatch[i],
            edge_influence,
            russo,
        });
    }
    Ok(rows)
}

/// Outcome of the coupled domination check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DominationReport {
    pub samples: u64,
    pub epsilon: f64,
    pub r2: f64,
    /// Edges of the finite-range model seen over all replicas.
    pub edges_checked: u64,
    /// Finite-range edges missing from the restricted model.
    pub edge_violations: u64,
    /// Replicas whose finite-range origin cluster is not contained in the
    /// restricted origin cluster.
    pub cluster_violations: u64,
    /// Mean number of restricted Poisson points per replica.
    pub mean_points: f64,
    /// `λ π(B) |box|`.
    pub expected_points: f64,
    /// Poisson z-score of the total point count.
    pub z: f64,
}

/// Couple the model restricted to weights in `B = [lo, hi]` with the
/// unweighted model `g(r) = ε 1{0 < r ≤ r₂}` on the same points and edge
/// variates, and count violations of edge and cluster containment.
#[allow(clippy::too_many_arguments)]
pub fn domination_check(
    model: &ModelSpec,
    b: (f64, f64),
    r2: f64,
    epsilon: f64,
    lambda: f64,
    half_width: f64,
    origin_weight: f64,
    samples: u64,
    seed: u128,
) -> Result<DominationReport> {
    let adj = &model.adjacency;
    if adj.reach.is_none() {
        return Err(Error::Precondition("adjacency has no reach function".into()));
    }
    let (lo, hi) = b;
    if !(1.0 <= lo && lo <= hi) || !(r2 > 0.0) || !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Domain(format!("need 1 <= lo <= hi, r2 > 0 and epsilon in [0, 1]; got B = [{lo}, {hi}], r2 = {r2}, epsilon = {epsilon}")));
    }
    if !(lo..=hi).contains(&origin_weight) {
        return Err(Error::Domain(format!("origin weight {origin_weight} outside B")));
    }
    const NR: usize = 64;
    const NW: usize = 17;
    let mut worst = (f64::INFINITY, 0.0, 0.0, 0.0);
    for i in 1..=NR {
        let r = r2 * i as f64 / NR as f64;
        for ia in 0..NW {
            let a = lo + (hi - lo) * ia as f64 / (NW - 1) as f64;
            for ib in ia..NW {
                let bb = lo + (hi - lo) * ib as f64 / (NW - 1) as f64;
                let v = adj.phi(r, a, bb);
                if v < worst.0 {
                    worst = (v, r, a, bb);
                }
            }
        }
    }
    if worst.0 < epsilon {
        let (v, r, a, bb) = worst;
        return Err(Error::Precondition(format!("phi({r}; {a}, {bb}) = {v} < epsilon = {epsilon}")));
    }
    let base = model.with_half_width(half_width);
    base.validate()?;
    let m = base.with_intensity(lambda);
    let expected = lambda * m.weights.mass(lo, hi) * m.volume();
    let g_edge = |c: &PointConfiguration, i: usize, j: usize| {
        let d = c.distance(i, j);
        d > 0.0 && d <= r2 && c.edge_variate(i, j) < epsilon
    };
    let mut report = DominationReport {
        samples,
        epsilon,
        r2,
        edges_checked: 0,
        edge_violations: 0,
        cluster_violations: 0,
        mean_points: 0.0,
        expected_points: expected,
        z: 0.0,
    };
    let mut total = 0u64;
    for r in 0..samples {
        let c = sample_ppp(&m, seed, r).restrict_weight_range(lo, hi).with_origin(origin_weight)?;
        total += c.poisson_count() as u64;
        let n = c.len();
        let mut adj_g: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
        for i in 0..n {
            for j in i + 1..n {
                if g_edge(&c, i, j) {
                    report.edges_checked += 1;
                    if !c.edge(i, j) {
                        report.edge_violations += 1;
                    }
                    adj_g[i].push(j);
                    adj_g[j].push(i);
                }
            }
        }
        let o = c.origin().expect("origin added");
        let mut seen = alloc::vec![false; n];
        let mut stack = alloc::vec![o];
        seen[o] = true;
        let mut members = Vec::new();
        while let Some(x) = stack.pop() {
            members.push(x);
            for &y in &adj_g[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        let big = cluster_of_origin(&c, ClusterOptions::default()).members;
        if members.iter().any(|x| big.binary_search(x).is_err()) {
            report.cluster_violations += 1;
        }
    }
    let s = samples.max(1) as f64;
    report.mean_points = total as f64 / s;
    let mu = expected * s;
    report.z = if mu > 0.0 { (total as f64 - mu) / libm::sqrt(mu) } else { 0.0 };
    Ok(report)
}

/// One intensity of the differential-inequality diagnostic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DifferentialRow {
    pub lambda: f64,
    pub theta: Estimate,
    pub chi: Estimate,
    /// `(k / χ̂ − 1) θ̂(k)`.
    pub lhs: f64,
    /// Central difference of `θ̂(k)` with half-step `step`.
    pub derivative: f64,
    /// `lhs / derivative`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DifferentialReport {
    pub k: usize,
    pub rows: Vec<DifferentialRow>,
    /// Smallest constant `c` with `lhs ≤ c · derivative` on every row with a
    /// positive derivative.
    pub constant: f64,
}

/// Compare `(k / χ̂_λ − 1) θ̂_λ(k)` with `dθ̂_λ(k)/dλ` on a grid, all from
/// one intensity sweep per replica.
pub fn differential_diagnostic(
    model: &ModelSpec,
    lambdas: &[f64],
    half_width: f64,
    k: usize,
    step: f64,
    samples: u64,
    seed: u128,
) -> Result<DifferentialReport> {
    if lambdas.is_empty() || !(step > 0.0) || lambdas.iter().any(|&l| l - step < 0.0) {
        return Err(Error::Domain("need intensities at least one step above zero".into()));
    }
    let top = lambdas.iter().fold(0.0f64, |a, &b| a.max(b)) + step;
    let base = model.with_half_width(half_width);
    base.validate()?;
    let m = base.with_intensity(top);
    let nl = lambdas.len();
    let mut theta = alloc::vec![0u64; nl];
    let mut band = alloc::vec![0u64; nl];
    let mut chi = alloc::vec![Moments::new(); nl];
    for r in 0..samples {
        let sw = origin_sweep(&sample_ppp(&m, seed, r).with_origin(1.0)?);
        let t = sw.size_threshold(k as u32);
        for (i, &l) in lambdas.iter().enumerate() {
            theta[i] += (t <= l) as u64;
            band[i] += (t > l - step && t <= l + step) as u64;
            chi[i].push(sw.size_at(l) as f64);
        }
    }
    let mut rows = Vec::with_capacity(nl);
    let mut constant = 0.0f64;
    for (i, &l) in lambdas.iter().enumerate() {
        let th = Estimate::proportion(theta[i], samples, seed);
        let x = Estimate::from_moments(&chi[i], seed, 0);
        let lhs = (k as f64 / x.mean - 1.0) * th.mean;
        let derivative = band[i] as f64 / (samples as f64 * 2.0 * step);
        let ratio = lhs / derivative;
        if derivative > 0.0 {
            constant = constant.max(ratio);
        }
        rows.push(DifferentialRow { lambda: l, theta: th, chi: x, lhs, derivative, ratio });
    }
    Ok(DifferentialReport { k, rows, constant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AdjacencySpec, WeightDistribution};

    fn fig2(l: f64) -> ModelSpec {
        ModelSpec::new(AdjacencySpec::min_reach_cubic(2), WeightDistribution::pareto(4.5, Some(10.0)), 0.5, l).unwrap()
    }

    #[test]
    fn unit_weight_ratios_are_one() {
        let spec = build_lattice(&fig2(2.0), 2, 0, 1e-6).unwrap();
        let rep = ratio_diagnostics(&spec, 0.5, 0.1, &[1.0, 2.0], 2, 300, 3).unwrap();
        assert_eq!(rep.rows[0].delta_ratio, 1.0);
        assert!(rep.rows[0].delta_ratio_stderr < 1e-12);
        assert!(rep.rows[1].delta_ratio >= 1.0);
    }

    #[test]
    fn ratio_diagnostics_needs_reach() {
        let m = ModelSpec::new(AdjacencySpec::gilbert(2, 1.0), WeightDistribution::PointMass, 0.5, 2.0).unwrap();
        let spec = build_lattice(&m, 2, 0, 1e-6).unwrap();
        assert!(matches!(ratio_diagnostics(&spec, 0.5, 0.1, &[1.0], 2, 10, 1), Err(Error::Precondition(_))));
    }

    #[test]
    fn domination_with_zero_epsilon_is_trivial() {
        let r = domination_check(&fig2(3.0), (2.0, 4.0), 1.0, 0.0, 5.0, 3.0, 2.0, 200, 1).unwrap();
        assert_eq!(r.edges_checked, 0);
        assert_eq!(r.cluster_violations, 0);
    }

    #[test]
    fn domination_rejects_too_large_epsilon() {
        let e = domination_check(&fig2(3.0), (2.0, 4.0), 1.0, 0.99, 5.0, 3.0, 2.0, 10, 1).unwrap_err();
        let Error::Precondition(msg) = e else { panic!("{e:?}") };
        assert!(msg.contains("phi(1; 2, 2)"), "{msg}");
    }

    #[test]
    fn domination_holds() {
        let eps = -libm::expm1(-4.0);
        let r = domination_check(&fig2(3.0), (2.0, 4.0), 1.0, eps, 20.0, 3.0, 2.0, 500, 2).unwrap();
        assert!(r.edges_checked > 0);
        assert_eq!((r.edge_violations, r.cluster_violations), (0, 0));
        assert!(r.z.abs() < 4.0, "{}", r.z);
    }

    #[test]
    fn russo_at_zero_intensity() {
        // k = 2 at λ = 0: the inserted point must land within distance 1
        let m = ModelSpec::new(AdjacencySpec::gilbert(2, 1.0), WeightDistribution::PointMass, 1.0, 3.0).unwrap();
        let e = margulis_russo(&m, 0.0, 3.0, 2, 20_000, 5).unwrap();
        assert!((e.mean - core::f64::consts::PI).abs() < 4.0 * e.stderr, "{e:?}");
    }

    #[test]
    fn fine_meshes_reproduce_the_continuum() {
        let m = ModelSpec::new(AdjacencySpec::soft_cubic(2), WeightDistribution::PointMass, 0.5, 2.0).unwrap();
        let cfg = ConvergenceConfig {
            half_width: 2,
            meshes: alloc::vec![0, 3],
            k: 3,
            gamma: 0.1,
            samples: 300,
            influence_samples: 0,
            russo_samples: 0,
            truncation_tol: 1e-6,
        };
        let rows = convergence_study(&m, 0.5, &cfg, 4).unwrap();
        assert!(rows[1].distinct_replicas > rows[0].distinct_replicas);
        assert!(rows.iter().all(|r| r.distinct_mismatches == 0));
    }

    #[test]
    fn differential_rows() {
        let m = ModelSpec::new(AdjacencySpec::gilbert(2, 1.0), WeightDistribution::PointMass, 1.0, 5.0).unwrap();
        let rep = differential_diagnostic(&m, &[0.3, 0.5, 0.7], 5.0, 4, 0.05, 2000, 6).unwrap();
        assert!(rep.rows.windows(2).all(|w| w[0].theta.mean <= w[1].theta.mean));
        assert!(rep.constant > 0.0);
    }
}
