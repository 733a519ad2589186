//! Ghost-field exploration of the lattice, revealments, influences and both
//! sides of the covariance inequalities they enter.
//!
//! Products `δ_s · Inf_s` are estimated without bias from paired independent
//! replicas: the forest runs on replica `r` and influences are read off an
//! independent configuration at replica `r | PAIRED`.

mod forest;

use alloc::vec::Vec;

pub use forest::{run_forest, Coordinate, ExplorationTrace, GhostField, RootPolicy, TreeLog};
pub use crate::oracle::{osss_check, osss_check_with, prop27_exact};

use crate::estimators::Estimate;
use crate::lattice::{all_cluster_sizes, cluster_avoiding, LatticeInstance, LatticeSpec, Pivotality, SiteBond, Toggled};
use crate::stats::Moments;

/// Replica offset of the independent copy used for influences.
pub const PAIRED: u64 = 1 << 63;

/// One row of a revealment/influence table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoordinateRow {
    pub coordinate: Coordinate,
    pub delta: f64,
    pub influence: f64,
}

/// Both sides of an inequality `lhs ≤ rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    /// Standard error of `slack` (zero when exact).
    pub slack_stderr: f64,
    pub samples: u64,
    pub table: Vec<CoordinateRow>,
}

impl InequalityReport {
    /// Whether the slack is at least `−sigmas · stderr − tol`.
    pub fn holds(&self, sigmas: f64, tol: f64) -> bool {
        self.slack >= -sigmas * self.slack_stderr - tol
    }

    /// `Σ δ_s Inf_s` over the table.
    pub fn table_sum(&self) -> f64 {
        let mut s = crate::stats::Sum::default();
        for r in &self.table {
            s.add(r.delta * r.influence);
        }
        s.value()
    }
}

/// Per-vertex revealment, magnetization and their per-replica difference.
#[derive(Clone, Debug)]
pub struct VertexProfile {
    pub revealment: Vec<Estimate>,
    pub magnetization: Vec<Estimate>,
    /// `1{v revealed} − (1 − e^{−γ̃|C(v)|})`, same replicas.
    pub difference: Vec<Estimate>,
}

fn ghost_for(spec: &LatticeSpec, gamma: f64, seed: u128, replica: u64) -> GhostField {
    GhostField::sample(spec.vertex_count(), gamma, seed, replica)
}

/// Revealment and magnetization of every vertex from shared replicas.
pub fn vertex_profile(spec: &LatticeSpec, lambda: f64, gamma: f64, policy: RootPolicy, samples: u64, seed: u128) -> VertexProfile {
    let n = spec.vertex_count();
    let mut rev = alloc::vec![Moments::new(); n];
    let mut mag = alloc::vec![Moments::new(); n];
    let mut diff = alloc::vec![Moments::new(); n];
    let mut hit = alloc::vec![false; n];
    for r in 0..samples {
        let inst = LatticeInstance::direct(spec, lambda, seed, r);
        let ghost = ghost_for(spec, gamma, seed, r);
        let trace = run_forest(&inst, &ghost, spec.root(), policy);
        hit.iter_mut().for_each(|h| *h = false);
        for v in trace.revealed_vertices() {
            hit[v as usize] = true;
        }
        let sizes = all_cluster_sizes(&inst);
        for v in 0..n {
            let x = hit[v] as u8 as f64;
            let m = -libm::expm1(-gamma * sizes[v] as f64);
            rev[v].push(x);
            mag[v].push(m);
            diff[v].push(x - m);
        }
    }
    let est = |m: Vec<Moments>| m.iter().map(|m| Estimate::from_moments(m, seed, 0)).collect();
    VertexProfile { revealment: est(rev), magnetization: est(mag), difference: est(diff) }
}

/// Monte Carlo revealment `δ_s` of one coordinate.
pub fn revealment(spec: &LatticeSpec, lambda: f64, gamma: f64, s: Coordinate, policy: RootPolicy, samples: u64, seed: u128) -> Estimate {
    let mut m = Moments::new();
    for r in 0..samples {
        let inst = LatticeInstance::direct(spec, lambda, seed, r);
        let ghost = ghost_for(spec, gamma, seed, r);
        m.push(run_forest(&inst, &ghost, spec.root(), policy).is_revealed(s) as u8 as f64);
    }
    Estimate::from_moments(&m, seed, 0)
}

/// `E[1 − e^{−γ̃|C(u)|}]`.
pub fn magnetization(spec: &LatticeSpec, lambda: f64, gamma: f64, u: u32, samples: u64, seed: u128) -> Estimate {
    let mut m = Moments::new();
    for r in 0..samples {
        let inst = LatticeInstance::direct(spec, lambda, seed, r);
        let c = cluster_avoiding(&inst, u, None, usize::MAX).len();
        m.push(-libm::expm1(-gamma * c as f64));
    }
    Estimate::from_moments(&m, seed, 0)
}

/// Whether toggling edge `{a, b}` changes `{|C(root)| ≥ k}`.
pub fn edge_pivotal<G: SiteBond + ?Sized>(g: &G, piv: &Pivotality, a: u32, b: u32, k: usize) -> bool {
    let open = g.edge_open(a, b);
    if piv.event() != open {
        return false;
    }
    let t = Toggled::edge(g, a, b, !open);
    let size = cluster_avoiding(&t, g.root(), None, k).len();
    (size >= k) != piv.event()
}

/// Influence of coordinate `s` on `f = 1{|C(root)| ≥ k}`: the resample of
/// `s` is integrated out, leaving `2 p (1 − p) 1{s pivotal}` per replica.
pub fn influence(spec: &LatticeSpec, lambda: f64, s: Coordinate, k: usize, samples: u64, seed: u128) -> Estimate {
    let mut m = Moments::new();
    for r in 0..samples {
        let inst = LatticeInstance::direct(spec, lambda, seed, r);
        let piv = Pivotality::new(&inst, k);
        m.push(coordinate_influence(&inst, &piv, s, k));
    }
    Estimate::from_moments(&m, seed, 0)
}

/// Conditional influence of `s` given all other coordinates.
pub fn coordinate_influence(inst: &LatticeInstance<'_>, piv: &Pivotality, s: Coordinate, k: usize) -> f64 {
    let spec = inst.spec;
    match s {
        Coordinate::Copy(_) => 0.0,
        Coordinate::Vertex(v) => {
            let p = spec.site_probability(inst.lambda, spec.bin_of(v));
            if piv.is_pivotal(inst, v) { 2.0 * p * (1.0 - p) } else { 0.0 }
        }
        Coordinate::Edge(a, b) => {
            let q = spec.edge_probability(a, b);
            if q > 0.0 && q < 1.0 && edge_pivotal(inst, piv, a, b, k) { 2.0 * q * (1.0 - q) } else { 0.0 }
        }
    }
}

/// Per-replica pieces shared by the Monte Carlo inequality checks.
struct PairedSample {
    size: usize,
    f: bool,
    g: bool,
    f_paired: bool,
    g_paired: bool,
    vertex_sum: f64,
    edge_sum: f64,
}

fn paired_sample(
    spec: &LatticeSpec,
    lambda: f64,
    gamma: f64,
    k: usize,
    policy: RootPolicy,
    seed: u128,
    r: u64,
    vertex_rows: Option<(&mut [Moments], &mut [Moments])>,
) -> PairedSample {
    let root = spec.root();
    let inst = LatticeInstance::direct(spec, lambda, seed, r);
    let ghost = ghost_for(spec, gamma, seed, r);
    let trace = run_forest(&inst, &ghost, root, policy);
    let size = cluster_avoiding(&inst, root, None, usize::MAX).len();
    let other = LatticeInstance::direct(spec, lambda, seed, r | PAIRED);
    let other_ghost = ghost_for(spec, gamma, seed, r | PAIRED);
    let piv = Pivotality::new(&other, k);
    let g_paired = run_forest(&other, &other_ghost, root, policy).g;
    let mut vertex_sum = 0.0;
    let revealed = trace.revealed_vertices();
    for &v in &revealed {
        vertex_sum += coordinate_influence(&other, &piv, Coordinate::Vertex(v), k);
    }
    if let Some((d, inf)) = vertex_rows {
        let mut j = 0;
        for v in 0..spec.vertex_count() as u32 {
            let hit = j < revealed.len() && revealed[j] == v;
            if hit {
                j += 1;
            }
            d[v as usize].push(hit as u8 as f64);
            inf[v as usize].push(coordinate_influence(&other, &piv, Coordinate::Vertex(v), k));
        }
    }
    let mut edge_sum = 0.0;
    for (a, b) in trace.revealed_edges() {
        edge_sum += coordinate_influence(&other, &piv, Coordinate::Edge(a, b), k);
    }
    PairedSample { size, f: size >= k, g: trace.g, f_paired: piv.event(), g_paired, vertex_sum, edge_sum }
}

fn vertex_table(d: &[Moments], inf: &[Moments]) -> Vec<CoordinateRow> {
    d.iter()
        .zip(inf)
        .enumerate()
        .map(|(v, (d, i))| CoordinateRow { coordinate: Coordinate::Vertex(v as u32), delta: d.mean(), influence: i.mean() })
        .collect()
}

/// Monte Carlo edge-influence sum `Σ_e δ_{γ̃}(e) Inf_e(1{|C(root)| ≥ k})`.
pub fn edge_influence_sum(spec: &LatticeSpec, lambda: f64, gamma: f64, k: usize, samples: u64, seed: u128) -> Estimate {
    let mut m = Moments::new();
    for r in 0..samples {
        m.push(paired_sample(spec, lambda, gamma, k, RootPolicy::CopyOnly, seed, r, None).edge_sum);
    }
    Estimate::from_moments(&m, seed, 0)
}

/// Edge-influence sum normalised by the root magnetization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeInfluence {
    /// `Σ_e δ_{γ̃}(e) Inf_e`.
    pub sum: Estimate,
    /// `E[1 − e^{−γ̃ |C(root)|}]`.
    pub root_magnetization: Estimate,
    pub ratio: f64,
    pub ratio_stderr: f64,
}

/// Edges whose toggle changes `{|C(root)| ≥ k}`, with their conditional
/// influence `2 q (1 − q)`. Only pairs of open vertices or the root qualify.
pub fn pivotal_edges(inst: &LatticeInstance<'_>, piv: &Pivotality, k: usize) -> Vec<((u32, u32), f64)> {
    let spec = inst.spec;
    let root = spec.root();
    let mut active: Vec<u32> = inst.open_vertices().to_vec();
    if let Err(i) = active.binary_search(&root) {
        active.insert(i, root);
    }
    let mut out = Vec::new();
    for (i, &a) in active.iter().enumerate() {
        for &b in &active[i + 1..] {
            let q = spec.edge_probability(a, b);
            if q > 0.0 && q < 1.0 && edge_pivotal(inst, piv, a, b, k) {
                out.push(((a, b), 2.0 * q * (1.0 - q)));
            }
        }
    }
    out
}

/// `Σ_e δ_{γ̃}(e) Inf_e / δ_{γ̃}(root)`, with the root revealment taken in its
/// magnetization form.
///
/// The product of expectations is estimated by the U-statistic over ordered
/// pairs of distinct replicas `(i, j)`: the forest of replica `i` against the
/// pivotal edges of replica `j`. Standard errors use the first-order
/// projection of the U-statistic.
pub fn normalized_edge_influence(spec: &LatticeSpec, lambda: f64, gamma: f64, k: usize, samples: u64, seed: u128) -> EdgeInfluence {
    let root = spec.root();
    let b = samples as usize;
    let mut weights = Vec::with_capacity(b);
    let mut mag = Vec::with_capacity(b);
    for r in 0..samples {
        let inst = LatticeInstance::direct(spec, lambda, seed, r);
        let piv = Pivotality::new(&inst, k);
        weights.push(pivotal_edges(&inst, &piv, k));
        mag.push(-libm::expm1(-gamma * piv.root_size() as f64));
    }
    let total: f64 = weights.iter().flat_map(|w| w.iter().map(|e| e.1)).sum();
    let mut rows = alloc::vec![0.0; b];
    let mut cols = alloc::vec![0.0; b];
    for i in 0..b {
        let inst = LatticeInstance::direct(spec, lambda, seed, i as u64);
        let revealed = run_forest(&inst, &ghost_for(spec, gamma, seed, i as u64), root, RootPolicy::CopyOnly).revealed_edges();
        if revealed.is_empty() || total == 0.0 {
            continue;
        }
        for (j, w) in weights.iter().enumerate() {
            if j == i {
                continue;
            }
            let mut x = 0.0;
            for &(e, inf) in w {
                if revealed.binary_search(&e).is_ok() {
                    x += inf;
                }
            }
            rows[i] += x;
            cols[j] += x;
        }
    }
    let pairs = (b.saturating_sub(1)) as f64;
    let (mut a, mut m, mut lin) = (Moments::new(), Moments::new(), Moments::new());
    for i in 0..b {
        rows[i] /= pairs;
        cols[i] /= pairs;
        a.push(rows[i]);
        m.push(mag[i]);
    }
    let u = a.mean();
    let mean_mag = m.mean();
    let ratio = u / mean_mag;
    let mut proj = Moments::new();
    for i in 0..b {
        proj.push(rows[i] + cols[i]);
        lin.push(rows[i] + cols[i] - ratio * mag[i]);
    }
    let n = b as f64;
    let sum = Estimate { mean: u, stderr: libm::sqrt(proj.variance() / n), samples, seed, first_replica: 0 };
    EdgeInfluence {
        sum,
        root_magnetization: Estimate::from_moments(&m, seed, 0),
        ratio,
        ratio_stderr: libm::sqrt(lin.variance() / n) / mean_mag,
    }
}

/// Monte Carlo check of `|Cov(f, g)| ≤ ½ Σ_s δ_s Inf_s(f)` with
/// `f = 1{|C(root)| ≥ k}` and the forest computing `g`.
pub fn osss_mc(spec: &LatticeSpec, lambda: f64, gamma: f64, k: usize, policy: RootPolicy, samples: u64, seed: u128) -> InequalityReport {
    let n = spec.vertex_count();
    let (mut d, mut inf) = (alloc::vec![Moments::new(); n], alloc::vec![Moments::new(); n]);
    let (mut lhs, mut rhs, mut slack) = (Moments::new(), Moments::new(), Moments::new());
    let mut sign = Moments::new();
    let mut rows = Vec::with_capacity(samples as usize);
    for r in 0..samples {
        let s = paired_sample(spec, lambda, gamma, k, policy, seed, r, Some((&mut d, &mut inf)));
        // f g − f g′ and its mirror f′ g′ − f′ g average to Cov(f, g)
        let cov = 0.5 * ((s.f & s.g) as u8 as f64 - (s.f & s.g_paired) as u8 as f64 + (s.f_paired & s.g_paired) as u8 as f64
            - (s.f_paired & s.g) as u8 as f64);
        let right = 0.5 * (s.vertex_sum + s.edge_sum);
        sign.push(cov);
        rows.push((cov, right));
    }
    let positive = sign.mean() >= 0.0;
    for (cov, right) in rows {
        let c = if positive { cov } else { -cov };
        lhs.push(c);
        rhs.push(right);
        slack.push(right - c);
    }
    InequalityReport {
        lhs: lhs.mean(),
        rhs: rhs.mean(),
        slack: slack.mean(),
        slack_stderr: slack.stderr(),
        samples,
        table: vertex_table(&d, &inf),
    }
}

/// Monte Carlo check of
/// `(1 − e^{−γ} − E[1 − e^{−γ|C|/k}]) P(|C| ≥ k) − Σ_e δ_e Inf_e ≤ Σ_u δ_u Inf_u`
/// with ghost intensity `γ̃ = γ / k`.
pub fn prop27_mc(spec: &LatticeSpec, lambda: f64, k: usize, gamma: f64, policy: RootPolicy, samples: u64, seed: u128) -> InequalityReport {
    let n = spec.vertex_count();
    let gt = gamma / k as f64;
    let (mut d, mut inf) = (alloc::vec![Moments::new(); n], alloc::vec![Moments::new(); n]);
    let (mut lhs, mut rhs, mut slack) = (Moments::new(), Moments::new(), Moments::new());
    let base = -libm::expm1(-gamma);
    for r in 0..samples {
        let s = paired_sample(spec, lambda, gt, k, policy, seed, r, Some((&mut d, &mut inf)));
        let mag = -libm::expm1(-gt * s.size as f64);
        let left = (base - mag) * s.f_paired as u8 as f64 - s.edge_sum;
        lhs.push(left);
        rhs.push(s.vertex_sum);
        slack.push(s.vertex_sum - left);
    }
    InequalityReport {
        lhs: lhs.mean(),
        rhs: rhs.mean(),
        slack: slack.mean(),
        slack_stderr: slack.stderr(),
        samples,
        table: vertex_table(&d, &inf),
    }
}
