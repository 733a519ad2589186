//! Exact expectations on tiny site-bond instances by full enumeration of the
//! product measure.
//!
//! Coordinates are laid out as vertices, then random edges (`0 < q < 1`),
//! then copies when a ghost intensity is set. Configuration `x` has
//! coordinate `i` open iff bit `i` of `x` is set.

use alloc::format;
use alloc::vec::Vec;

use crate::lattice::{cluster_avoiding, LatticeSpec, SiteBond};
use crate::osss::{run_forest, Coordinate, CoordinateRow, GhostField, InequalityReport, RootPolicy};
use crate::rng::{Domain, Stream};
use crate::stats::Sum;
use crate::{Error, Result};

/// Largest number of enumerated coordinates.
pub const MAX_COORDINATES: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TinyEdge {
    pub a: u32,
    pub b: u32,
    pub q: f64,
}

/// A finite site-bond instance with site probabilities `1 − e^{−λ w_v}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TinyInstance {
    /// Rates `w_v = 2^{−nd} Π(m_v, n)`.
    pub rates: Vec<f64>,
    pub edges: Vec<TinyEdge>,
    pub root: u32,
    pub lambda: f64,
    /// Ghost intensity `γ̃`; copies are coordinates when set.
    pub ghost: Option<f64>,
}

impl TinyInstance {
    pub fn new(rates: Vec<f64>, edges: Vec<TinyEdge>, root: u32, lambda: f64, ghost: Option<f64>) -> Result<Self> {
        let t = TinyInstance { rates, edges, root, lambda, ghost };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.rates.len();
        if n == 0 || self.root as usize >= n {
            return Err(Error::Domain(format!("root {} outside {n} vertices", self.root)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Domain(format!("intensity {}", self.lambda)));
        }
        if self.rates.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
            return Err(Error::Domain("site rates must be finite and non-negative".into()));
        }
        if let Some(g) = self.ghost {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::Domain(format!("ghost intensity {g}")));
            }
        }
        let mut seen = Vec::new();
        for e in &self.edges {
            if e.a == e.b || e.a as usize >= n || e.b as usize >= n || !(0.0..=1.0).contains(&e.q) {
                return Err(Error::Domain(format!("edge ({}, {}) with q = {}", e.a, e.b, e.q)));
            }
            let k = (e.a.min(e.b), e.a.max(e.b));
            if seen.contains(&k) {
                return Err(Error::Domain(format!("duplicate edge {k:?}")));
            }
            seen.push(k);
        }
        let c = self.coordinate_count();
        if c > MAX_COORDINATES {
            return Err(Error::TooLarge(format!("{c} coordinates (cap {MAX_COORDINATES})")));
        }
        Ok(())
    }

    /// Two vertices of rate 1 joined with probability `q`, rooted at 0.
    pub fn two_site(lambda: f64, q: f64) -> Self {
        TinyInstance { rates: alloc::vec![1.0, 1.0], edges: alloc::vec![TinyEdge { a: 0, b: 1, q }], root: 0, lambda, ghost: None }
    }

    /// A path `0 − 1 − … − (n−1)` of rate-1 vertices, rooted at 0.
    pub fn path(n: usize, lambda: f64, q: f64) -> Self {
        let edges = (1..n as u32).map(|i| TinyEdge { a: i - 1, b: i, q }).collect();
        TinyInstance { rates: alloc::vec![1.0; n], edges, root: 0, lambda, ghost: None }
    }

    /// A random instance with at most `max_coordinates` coordinates (copies
    /// included when `ghost` is set).
    pub fn random(seed: u128, index: u64, max_coordinates: usize, ghost: Option<f64>) -> Self {
        let mut s = Stream::new(seed, index, Domain::Estimator, 0x7e57);
        let copies = ghost.is_some() as usize;
        loop {
            let n = 2 + s.below(4) as usize;
            let rates: Vec<f64> = (0..n).map(|_| 0.1 + 1.9 * s.uniform()).collect();
            let mut edges = Vec::new();
            for a in 0..n as u32 {
                for b in a + 1..n as u32 {
                    let u = s.uniform();
                    if u < 0.1 {
                        edges.push(TinyEdge { a, b, q: 1.0 });
                    } else if u < 0.8 {
                        edges.push(TinyEdge { a, b, q: 0.05 + 0.9 * s.uniform() });
                    }
                }
            }
            let t = TinyInstance { rates, edges, root: s.below(n as u64) as u32, lambda: 0.2 + 1.8 * s.uniform(), ghost };
            if t.coordinate_count() <= max_coordinates.min(MAX_COORDINATES) && n * (1 + copies) <= max_coordinates {
                return t;
            }
        }
    }

    /// The whole lattice as a tiny instance, when small enough.
    pub fn from_lattice(spec: &LatticeSpec, lambda: f64, ghost: Option<f64>) -> Result<Self> {
        let n = spec.vertex_count() as u32;
        if n as usize > MAX_COORDINATES {
            return Err(Error::TooLarge(format!("{n} vertices")));
        }
        let rates = (0..n).map(|v| spec.cell_volume() * spec.bin_mass[spec.bin_of(v)]).collect();
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                let q = spec.edge_probability(a, b);
                if q > 0.0 {
                    edges.push(TinyEdge { a, b, q });
                }
            }
        }
        TinyInstance::new(rates, edges, spec.root(), lambda, ghost)
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        TinyInstance { lambda, ..self.clone() }
    }

    pub fn with_ghost(&self, ghost: Option<f64>) -> Self {
        TinyInstance { ghost, ..self.clone() }
    }

    pub fn vertex_count(&self) -> usize {
        self.rates.len()
    }

    pub fn site_probability(&self, v: u32) -> f64 {
        -libm::expm1(-self.lambda * self.rates[v as usize])
    }

    fn random_edges(&self) -> impl Iterator<Item = &TinyEdge> {
        self.edges.iter().filter(|e| e.q > 0.0 && e.q < 1.0)
    }

    pub fn coordinate_count(&self) -> usize {
        let n = self.vertex_count();
        n + self.random_edges().count() + if self.ghost.is_some() { n } else { 0 }
    }

    /// Coordinates in bit order.
    pub fn coordinates(&self) -> Vec<Coordinate> {
        let n = self.vertex_count() as u32;
        let mut out: Vec<Coordinate> = (0..n).map(Coordinate::Vertex).collect();
        out.extend(self.random_edges().map(|e| Coordinate::edge(e.a, e.b)));
        if self.ghost.is_some() {
            out.extend((0..n).map(Coordinate::Copy));
        }
        out
    }

    /// Open probability of each coordinate, in bit order.
    pub fn probabilities(&self) -> Vec<f64> {
        let n = self.vertex_count() as u32;
        let mut out: Vec<f64> = (0..n).map(|v| self.site_probability(v)).collect();
        out.extend(self.random_edges().map(|e| e.q));
        if let Some(g) = self.ghost {
            out.extend((0..n).map(|_| -libm::expm1(-g)));
        }
        out
    }
}

/// Edge lookup shared by all configurations of an instance.
#[derive(Clone, Debug)]
pub struct Layout {
    n: usize,
    root: u32,
    /// `−1` absent, `−2` always open, otherwise the coordinate bit.
    edge: Vec<i32>,
    neighbours: Vec<Vec<u32>>,
    copy_base: Option<usize>,
    gamma: f64,
}

impl Layout {
    pub fn new(t: &TinyInstance) -> Self {
        let n = t.vertex_count();
        let mut edge = alloc::vec![-1i32; n * n];
        let mut neighbours = alloc::vec![Vec::new(); n];
        let mut bit = n as i32;
        for e in &t.edges {
            let (a, b) = (e.a as usize, e.b as usize);
            let code = if e.q >= 1.0 {
                -2
            } else if e.q <= 0.0 {
                continue;
            } else {
                bit += 1;
                bit - 1
            };
            edge[a * n + b] = code;
            edge[b * n + a] = code;
            neighbours[a].push(e.b);
            neighbours[b].push(e.a);
        }
        neighbours.iter_mut().for_each(|v| v.sort_unstable());
        let copy_base = t.ghost.map(|_| bit as usize);
        Layout { n, root: t.root, edge, neighbours, copy_base, gamma: t.ghost.unwrap_or(0.0) }
    }

    /// The configuration with bit pattern `x`.
    pub fn config(&self, x: u32) -> TinyConfig<'_> {
        let open = (0..self.n as u32).filter(|&v| x >> v & 1 == 1).collect();
        TinyConfig { layout: self, bits: x, open }
    }
}

/// One configuration of a tiny instance.
#[derive(Clone, Debug)]
pub struct TinyConfig<'a> {
    layout: &'a Layout,
    pub bits: u32,
    open: Vec<u32>,
}

impl TinyConfig<'_> {
    /// Green vertices given by the copy bits.
    pub fn ghost(&self) -> GhostField {
        let l = self.layout;
        let green = match l.copy_base {
            Some(c) => (0..l.n as u32).filter(|&v| self.bits >> (c + v as usize) & 1 == 1).collect(),
            None => Vec::new(),
        };
        GhostField::new(l.gamma, green)
    }

    pub fn cluster_size(&self, v: u32) -> usize {
        cluster_avoiding(self, v, None, usize::MAX).len()
    }
}

impl SiteBond for TinyConfig<'_> {
    fn vertex_count(&self) -> usize {
        self.layout.n
    }
    fn root(&self) -> u32 {
        self.layout.root
    }
    fn is_open(&self, v: u32) -> bool {
        self.bits >> v & 1 == 1
    }
    fn open_vertices(&self) -> &[u32] {
        &self.open
    }
    fn edge_open(&self, a: u32, b: u32) -> bool {
        if a == b {
            return false;
        }
        match self.layout.edge[a as usize * self.layout.n + b as usize] {
            -1 => false,
            -2 => true,
            i => self.bits >> i & 1 == 1,
        }
    }
    fn candidates(&self, v: u32, out: &mut Vec<u32>) {
        out.clear();
        out.extend_from_slice(&self.layout.neighbours[v as usize]);
    }
    fn edge_is_random(&self, a: u32, b: u32) -> bool {
        self.layout.edge[a as usize * self.layout.n + b as usize] >= 0
    }
    fn edge_possible(&self, a: u32, b: u32) -> bool {
        self.layout.edge[a as usize * self.layout.n + b as usize] != -1
    }
}

/// Probability of every configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactDistribution {
    pub coordinates: Vec<Coordinate>,
    pub marginals: Vec<f64>,
    pub probs: Vec<f64>,
}

impl ExactDistribution {
    pub fn total(&self) -> f64 {
        let mut s = Sum::default();
        self.probs.iter().for_each(|&p| s.add(p));
        s.value()
    }
}

/// Enumerate the product measure of `t`.
pub fn enumerate(t: &TinyInstance) -> Result<ExactDistribution> {
    t.validate()?;
    let marginals = t.probabilities();
    let mut probs = Vec::with_capacity(1 << marginals.len());
    probs.push(1.0);
    for &p in &marginals {
        let len = probs.len();
        for i in 0..len {
            let x = probs[i];
            probs[i] = x * (1.0 - p);
            probs.push(x * p);
        }
    }
    Ok(ExactDistribution { coordinates: t.coordinates(), marginals, probs })
}

/// `E[F]` under the instance's product measure.
pub fn expectation<F: FnMut(&TinyConfig<'_>) -> f64>(t: &TinyInstance, mut f: F) -> Result<f64> {
    let d = enumerate(t)?;
    let layout = Layout::new(t);
    let mut s = Sum::default();
    for (x, &p) in d.probs.iter().enumerate() {
        if p != 0.0 {
            s.add(p * f(&layout.config(x as u32)));
        }
    }
    Ok(s.value())
}

/// `θ(k) = P(|C(root)| ≥ k)`.
pub fn theta(t: &TinyInstance, k: usize) -> Result<f64> {
    expectation(t, |c| (cluster_avoiding(c, c.root(), None, k).len() >= k) as u8 as f64)
}

/// `E[1 − e^{−γ̃ |C(u)|}]`.
pub fn magnetization(t: &TinyInstance, gamma: f64, u: u32) -> Result<f64> {
    expectation(&t.with_ghost(None), |c| -libm::expm1(-gamma * c.cluster_size(u) as f64))
}

/// `Cov(F, G)`.
pub fn covariance<F, G>(t: &TinyInstance, mut f: F, mut g: G) -> Result<f64>
where
    F: FnMut(&TinyConfig<'_>) -> f64,
    G: FnMut(&TinyConfig<'_>) -> f64,
{
    let (mut ef, mut eg, mut efg) = (Sum::default(), Sum::default(), Sum::default());
    let d = enumerate(t)?;
    let layout = Layout::new(t);
    for (x, &p) in d.probs.iter().enumerate() {
        let c = layout.config(x as u32);
        let (a, b) = (f(&c), g(&c));
        ef.add(p * a);
        eg.add(p * b);
        efg.add(p * a * b);
    }
    Ok(efg.value() - ef.value() * eg.value())
}

/// `Inf_s(F) = P(F(ω) ≠ F(ω̃))` with `ω̃` resampling bit `s` only.
pub fn influence<F: FnMut(&TinyConfig<'_>) -> bool>(t: &TinyInstance, s: usize, f: F) -> Result<f64> {
    Ok(influences(t, f)?[s])
}

/// Influence of every coordinate on a Boolean function.
pub fn influences<F: FnMut(&TinyConfig<'_>) -> bool>(t: &TinyInstance, mut f: F) -> Result<Vec<f64>> {
    let d = enumerate(t)?;
    let layout = Layout::new(t);
    let values: Vec<bool> = (0..d.probs.len() as u32).map(|x| f(&layout.config(x))).collect();
    let mut out = Vec::with_capacity(d.marginals.len());
    for (s, &q) in d.marginals.iter().enumerate() {
        let mut acc = Sum::default();
        for (x, &p) in d.probs.iter().enumerate() {
            if values[x] != values[x ^ (1 << s)] {
                let flip = if x >> s & 1 == 1 { 1.0 - q } else { q };
                acc.add(p * flip);
            }
        }
        out.push(acc.value());
    }
    Ok(out)
}

/// Revealment of every coordinate by the forest computing
/// `1{some green vertex in C(root)}`. Requires a ghost intensity.
pub fn revealments(t: &TinyInstance, policy: RootPolicy) -> Result<Vec<f64>> {
    if t.ghost.is_none() {
        return Err(Error::Precondition("revealments need a ghost intensity".into()));
    }
    let d = enumerate(t)?;
    let layout = Layout::new(t);
    let mut acc = alloc::vec![Sum::default(); d.coordinates.len()];
    for (x, &p) in d.probs.iter().enumerate() {
        let c = layout.config(x as u32);
        let trace = run_forest(&c, &c.ghost(), t.root, policy);
        for (i, &s) in d.coordinates.iter().enumerate() {
            if trace.is_revealed(s) {
                acc[i].add(p);
            }
        }
    }
    Ok(acc.iter().map(Sum::value).collect())
}

/// Whether the forest value equals `1{some green vertex in C(root)}` on every
/// configuration.
pub fn forest_is_correct(t: &TinyInstance, policy: RootPolicy) -> Result<bool> {
    let d = enumerate(t)?;
    let layout = Layout::new(t);
    for x in 0..d.probs.len() as u32 {
        let c = layout.config(x);
        let gh = c.ghost();
        let direct = cluster_avoiding(&c, t.root, None, usize::MAX).iter().any(|&u| gh.is_green(u));
        if run_forest(&c, &gh, t.root, policy).g != direct {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Central difference `(E_{λ+h}[F] − E_{λ−h}[F]) / 2h`.
pub fn derivative_fd<F: FnMut(&TinyConfig<'_>) -> f64>(t: &TinyInstance, mut f: F, step: f64) -> Result<f64> {
    if !(1e-6..=1e-3).contains(&step) {
        return Err(Error::Domain(format!("step {step} outside [1e-6, 1e-3]")));
    }
    if t.lambda < step {
        return Err(Error::Domain(format!("intensity {} below the step", t.lambda)));
    }
    let up = expectation(&t.with_lambda(t.lambda + step), &mut f)?;
    let down = expectation(&t.with_lambda(t.lambda - step), &mut f)?;
    Ok((up - down) / (2.0 * step))
}

/// Covariance form of the derivative: `Σ_v (w_v / p_v) Cov(F, 1{v open})`.
pub fn derivative_covariance<F: FnMut(&TinyConfig<'_>) -> f64>(t: &TinyInstance, mut f: F) -> Result<f64> {
    let t = t.with_ghost(None);
    let d = enumerate(&t)?;
    let layout = Layout::new(&t);
    let n = t.vertex_count();
    let mut ef = Sum::default();
    let mut efi = alloc::vec![Sum::default(); n];
    for (x, &p) in d.probs.iter().enumerate() {
        let v = p * f(&layout.config(x as u32));
        ef.add(v);
        for (i, a) in efi.iter_mut().enumerate() {
            if x >> i & 1 == 1 {
                a.add(v);
            }
        }
    }
    let mut out = Sum::default();
    for (i, a) in efi.iter().enumerate() {
        let p = d.marginals[i];
        if p > 0.0 {
            out.add(t.rates[i] / p * (a.value() - ef.value() * p));
        }
    }
    Ok(out.value())
}

/// Pivotal form of the derivative:
/// `Σ_v w_v (1 − p_v) (E[F | v open] − E[F | v closed])`.
pub fn derivative_pivotal<F: FnMut(&TinyConfig<'_>) -> f64>(t: &TinyInstance, mut f: F) -> Result<f64> {
    let t = t.with_ghost(None);
    let d = enumerate(&t)?;
    let layout = Layout::new(&t);
    let values: Vec<f64> = (0..d.probs.len() as u32).map(|x| f(&layout.config(x))).collect();
    let mut out = Sum::default();
    for i in 0..t.vertex_count() {
        let mut diff = Sum::default();
        for (x, &pr) in d.probs.iter().enumerate() {
            if x >> i & 1 == 0 {
                // P(others) = pr / (1 − p)
                diff.add(pr * (values[x | 1 << i] - values[x]));
            }
        }
        out.add(t.rates[i] * diff.value());
    }
    Ok(out.value())
}

/// Exact quantities of the ghost-field forest for `f = 1{|C(root)| ≥ k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactSummary {
    pub coordinates: Vec<Coordinate>,
    pub theta: f64,
    pub g_mean: f64,
    pub cov_fg: f64,
    pub revealment: Vec<f64>,
    pub influence: Vec<f64>,
    /// `E[1 − e^{−γ̃|C(v)|}]` per vertex.
    pub magnetization: Vec<f64>,
    /// `E[1 − e^{−γ̃|C(v) ∖ {root}|}]` per vertex.
    pub magnetization_off_root: Vec<f64>,
}

/// One enumeration pass computing θ, `Cov(f, g)`, revealments, influences
/// and magnetizations.
pub fn summary(t: &TinyInstance, k: usize, policy: RootPolicy) -> Result<ExactSummary> {
    summary_with(t, |c| cluster_avoiding(c, c.root(), None, k).len() >= k, policy)
}

/// [`summary`] for an arbitrary Boolean `f` of the vertex and edge states.
pub fn summary_with<F: FnMut(&TinyConfig<'_>) -> bool>(t: &TinyInstance, mut fun: F, policy: RootPolicy) -> Result<ExactSummary> {
    let gamma = t.ghost.ok_or_else(|| Error::Precondition("summary needs a ghost intensity".into()))?;
    let d = enumerate(t)?;
    let layout = Layout::new(t);
    let n = t.vertex_count();
    let m = d.coordinates.len();
    let mut fvals = Vec::with_capacity(d.probs.len());
    let (mut th, mut gm, mut fg) = (Sum::default(), Sum::default(), Sum::default());
    let mut rev = alloc::vec![Sum::default(); m];
    let mut mag = alloc::vec![Sum::default(); n];
    let mut mag_off = alloc::vec![Sum::default(); n];
    for (x, &p) in d.probs.iter().enumerate() {
        let c = layout.config(x as u32);
        let f = fun(&c);
        fvals.push(f);
        let trace = run_forest(&c, &c.ghost(), t.root, policy);
        th.add(p * f as u8 as f64);
        gm.add(p * trace.g as u8 as f64);
        fg.add(p * (f && trace.g) as u8 as f64);
        for (i, &s) in d.coordinates.iter().enumerate() {
            if trace.is_revealed(s) {
                rev[i].add(p);
            }
        }
        // magnetizations depend on vertex and edge bits only
        if layout.copy_base.is_none_or(|b| x >> b == 0) {
            let q = p / copies_closed_probability(&d, n);
            for v in 0..n as u32 {
                let cl = cluster_avoiding(&c, v, None, usize::MAX);
                let off = cl.len() - (v != t.root && cl.contains(&t.root)) as usize - (v == t.root) as usize;
                mag[v as usize].add(q * -libm::expm1(-gamma * cl.len() as f64));
                mag_off[v as usize].add(q * -libm::expm1(-gamma * off as f64));
            }
        }
    }
    let mut inf = Vec::with_capacity(m);
    for (s, &q) in d.marginals.iter().enumerate() {
        let mut acc = Sum::default();
        for (x, &p) in d.probs.iter().enumerate() {
            if fvals[x] != fvals[x ^ (1 << s)] {
                acc.add(p * if x >> s & 1 == 1 { 1.0 - q } else { q });
            }
        }
        inf.push(acc.value());
    }
    let theta = th.value();
    let g_mean = gm.value();
    Ok(ExactSummary {
        coordinates: d.coordinates,
        theta,
        g_mean,
        cov_fg: fg.value() - theta * g_mean,
        revealment: rev.iter().map(Sum::value).collect(),
        influence: inf,
        magnetization: mag.iter().map(Sum::value).collect(),
        magnetization_off_root: mag_off.iter().map(Sum::value).collect(),
    })
}

/// Exact `|Cov(f, g)| ≤ ½ Σ_s δ_s Inf_s(f)` for `f = 1{|C(root)| ≥ k}`.
pub fn osss_check(t: &TinyInstance, k: usize, policy: RootPolicy) -> Result<InequalityReport> {
    Ok(osss_report(&summary(t, k, policy)?))
}

/// [`osss_check`] for an arbitrary Boolean `f`.
pub fn osss_check_with<F: FnMut(&TinyConfig<'_>) -> bool>(t: &TinyInstance, f: F, policy: RootPolicy) -> Result<InequalityReport> {
    Ok(osss_report(&summary_with(t, f, policy)?))
}

fn rows(s: &ExactSummary) -> Vec<CoordinateRow> {
    s.coordinates
        .iter()
        .zip(s.revealment.iter().zip(&s.influence))
        .map(|(&coordinate, (&delta, &influence))| CoordinateRow { coordinate, delta, influence })
        .collect()
}

fn osss_report(s: &ExactSummary) -> InequalityReport {
    let table = rows(s);
    let mut rhs = Sum::default();
    table.iter().for_each(|r| rhs.add(0.5 * r.delta * r.influence));
    let lhs = libm::fabs(s.cov_fg);
    let rhs = rhs.value();
    InequalityReport { lhs, rhs, slack: rhs - lhs, slack_stderr: 0.0, samples: 0, table }
}

/// Exact sides of
/// `(1 − e^{−γ} − E[1 − e^{−γ|C|/k}]) P(|C| ≥ k) − Σ_e δ_e Inf_e ≤ Σ_u δ_u Inf_u`
/// with ghost intensity `γ / k`.
pub fn prop27_exact(t: &TinyInstance, k: usize, gamma: f64, policy: RootPolicy) -> Result<InequalityReport> {
    if !(gamma > 0.0) || k == 0 {
        return Err(Error::Domain(format!("γ = {gamma}, k = {k}")));
    }
    let s = summary(&t.with_ghost(Some(gamma / k as f64)), k, policy)?;
    let table = rows(&s);
    let (mut vs, mut es) = (Sum::default(), Sum::default());
    for r in &table {
        match r.coordinate {
            Coordinate::Vertex(_) => vs.add(r.delta * r.influence),
            Coordinate::Edge(..) => es.add(r.delta * r.influence),
            Coordinate::Copy(_) => {}
        }
    }
    let lhs = (-libm::expm1(-gamma) - s.magnetization[t.root as usize]) * s.theta - es.value();
    let rhs = vs.value();
    Ok(InequalityReport { lhs, rhs, slack: rhs - lhs, slack_stderr: 0.0, samples: 0, table })
}

fn copies_closed_probability(d: &ExactDistribution, n: usize) -> f64 {
    d.marginals[d.marginals.len() - n..].iter().map(|&h| 1.0 - h).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, cluster_size};
    use crate::model::{AdjacencySpec, ModelSpec, WeightDistribution};

    const E1: f64 = 0.632_120_558_828_557_7;

    #[test]
    fn single_and_pair_tables() {
        let t = TinyInstance::new(alloc::vec![-libm::log(0.7)], Vec::new(), 0, 1.0, None).unwrap();
        let d = enumerate(&t).unwrap();
        assert!((d.probs[0] - 0.7).abs() < 1e-15 && (d.probs[1] - 0.3).abs() < 1e-15);
        let r = libm::log(2.0);
        let t = TinyInstance::new(alloc::vec![r, r], Vec::new(), 0, 1.0, None).unwrap();
        assert!(enumerate(&t).unwrap().probs.iter().all(|&p| (p - 0.25).abs() < 1e-15));
    }

    #[test]
    fn two_site_values() {
        let t = TinyInstance::two_site(1.0, 0.5);
        let d = enumerate(&t).unwrap();
        assert!((d.total() - 1.0).abs() < 1e-15);
        assert!((d.probs[0b111] - E1 * E1 * 0.5).abs() < 1e-15);
        assert!((theta(&t, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!((theta(&t, 2).unwrap() - E1 * 0.5).abs() < 1e-15);
        let f = |c: &TinyConfig<'_>| (c.cluster_size(0) >= 2) as u8 as f64;
        let fd = derivative_fd(&t, f, 1e-4).unwrap();
        let cov = derivative_covariance(&t, f).unwrap();
        let piv = derivative_pivotal(&t, f).unwrap();
        let exact = libm::exp(-1.0) * 0.5;
        assert!((cov - exact).abs() < 1e-14 && (piv - exact).abs() < 1e-14);
        assert!((fd - exact).abs() < 1e-8);
        assert_eq!(derivative_covariance(&t, |_| 1.0).unwrap(), 0.0);
    }

    #[test]
    fn two_site_magnetization_and_influence() {
        let t = TinyInstance::two_site(1.0, 0.5);
        let m = magnetization(&t, 0.1, 0).unwrap();
        let pq = E1 * 0.5;
        let closed = 1.0 - libm::exp(-0.1) * (1.0 - pq) - libm::exp(-0.2) * pq;
        assert!((m - closed).abs() < 1e-15);
        let inf = influence(&t, 1, |c| c.cluster_size(0) >= 2).unwrap();
        assert!((inf - 2.0 * E1 * (1.0 - E1) * 0.5).abs() < 1e-15);
        assert_eq!(influence(&t, 0, |c| c.cluster_size(0) >= 2).unwrap(), 0.0);
    }

    #[test]
    fn magnetization_identity_exact() {
        for i in 0..12 {
            let t = TinyInstance::random(11, i, 16, Some(0.3));
            let s = summary(&t, 2, RootPolicy::Explore).unwrap();
            for v in 0..t.vertex_count() {
                assert!((s.revealment[v] - s.magnetization[v]).abs() < 1e-12, "instance {i} v {v}");
            }
            let s = summary(&t, 2, RootPolicy::CopyOnly).unwrap();
            for v in 0..t.vertex_count() {
                assert!((s.revealment[v] - s.magnetization_off_root[v]).abs() < 1e-12, "instance {i} v {v}");
            }
            assert!(forest_is_correct(&t, RootPolicy::CopyOnly).unwrap());
            assert!(forest_is_correct(&t, RootPolicy::Explore).unwrap());
        }
    }

    #[test]
    fn copy_influences_vanish_and_copies_always_revealed() {
        let t = TinyInstance::path(3, 1.0, 0.5).with_ghost(Some(0.5));
        let s = summary(&t, 2, RootPolicy::CopyOnly).unwrap();
        for (i, c) in s.coordinates.iter().enumerate() {
            if let Coordinate::Copy(_) = c {
                assert_eq!(s.influence[i], 0.0);
                assert!((s.revealment[i] - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn from_lattice_matches_lattice_clusters() {
        let m = ModelSpec::new(AdjacencySpec::gilbert(1, 0.6), WeightDistribution::PointMass, 1.0, 1.0).unwrap();
        let s = build_lattice(&m, 1, 1, 1e-6).unwrap();
        let t = TinyInstance::from_lattice(&s, 1.0, None).unwrap();
        assert_eq!(t.vertex_count(), 5);
        // neighbours at distance 0.5 are joined surely, so clusters are runs
        let layout = Layout::new(&t);
        let c = layout.config(0b01110);
        assert_eq!(cluster_size(&c, s.root()), 3);
    }

    #[test]
    fn osss_and_prop27_exact() {
        let t = TinyInstance::two_site(1.0, 0.5).with_ghost(Some(0.5));
        let r = osss_check(&t, 2, RootPolicy::CopyOnly).unwrap();
        assert!(r.slack >= -1e-12, "{r:?}");
        let c = osss_check_with(&t, |_| true, RootPolicy::CopyOnly).unwrap();
        assert_eq!(c.lhs, 0.0);
        assert!(c.slack >= 0.0);
        let p = TinyInstance::path(3, 1.0, 0.5).with_ghost(Some(0.5));
        let r = osss_check(&p, 2, RootPolicy::CopyOnly).unwrap();
        assert!(r.slack >= -1e-12);
        assert!((2.0 * r.rhs - r.table_sum()).abs() < 1e-12);
        for policy in [RootPolicy::CopyOnly, RootPolicy::Explore] {
            let r = prop27_exact(&TinyInstance::two_site(1.0, 0.5), 2, 1.0, policy).unwrap();
            assert!(r.slack >= -1e-12, "{r:?}");
            for i in 0..10 {
                let t = TinyInstance::random(5, i, 18, None);
                for k in 1..4 {
                    assert!(prop27_exact(&t, k, 1.0, policy).unwrap().slack >= -1e-12);
                    assert!(osss_check(&t.with_ghost(Some(0.4)), k, policy).unwrap().slack >= -1e-12);
                }
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        let t = TinyInstance::path(13, 1.0, 0.5);
        assert!(matches!(enumerate(&t), Err(Error::TooLarge(_))));
    }
}
