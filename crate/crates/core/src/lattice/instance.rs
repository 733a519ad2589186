use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{LatticeSpec, SiteBond};
use crate::continuum::{sample_ppp, PointConfiguration};
use crate::rng::{Domain, Stream, StreamKey};

/// Cells of the coupled construction: a vertex is open iff its cell holds a
/// point, and two open vertices are joined iff some point of one is joined to
/// some point of the other.
#[derive(Clone, Debug)]
pub struct CellCoupling {
    /// Points inside the cylinder with weight below the truncation level,
    /// plus the origin.
    pub points: PointConfiguration,
    /// Vertex of each point.
    pub vertex_of_point: Vec<u32>,
    members: BTreeMap<u32, Vec<usize>>,
    /// Whether every point (the origin included) sits in its own cell.
    pub distinct: bool,
}

/// One realisation of the lattice.
#[derive(Clone, Debug)]
pub struct LatticeInstance<'a> {
    pub spec: &'a LatticeSpec,
    pub lambda: f64,
    open: Vec<u32>,
    bits: Vec<u64>,
    edge_key: StreamKey,
    coupling: Option<CellCoupling>,
}

/// Sample independent Bernoulli sites, or (when `coupled`) derive the
/// states from a Poisson configuration on the cylinder.
pub fn sample_instance(spec: &LatticeSpec, lambda: f64, seed: u128, replica: u64, coupled: bool) -> LatticeInstance<'_> {
    if coupled {
        let m = spec.model.with_intensity(lambda).with_half_width(spec.cylinder_half_width());
        let cfg = sample_ppp(&m, seed, replica).with_origin(1.0).expect("origin fits in the box");
        LatticeInstance::from_points(spec, lambda, &cfg)
    } else {
        LatticeInstance::direct(spec, lambda, seed, replica)
    }
}

impl<'a> LatticeInstance<'a> {
    fn with_open(spec: &'a LatticeSpec, lambda: f64, mut open: Vec<u32>, edge_key: StreamKey) -> Self {
        open.sort_unstable();
        open.dedup();
        let mut bits = alloc::vec![0u64; spec.vertex_count().div_ceil(64)];
        for &v in &open {
            bits[v as usize / 64] |= 1 << (v % 64);
        }
        LatticeInstance { spec, lambda, open, bits, edge_key, coupling: None }
    }

    /// Independent sites, drawn bin by bin with geometric skips.
    pub fn direct(spec: &'a LatticeSpec, lambda: f64, seed: u128, replica: u64) -> Self {
        let mut open = Vec::new();
        for b in 0..spec.bins.len() {
            let p = spec.site_probability(lambda, b);
            if p <= 0.0 {
                continue;
            }
            let mut s = Stream::new(seed, replica, Domain::Sites, b as u32);
            let mut site: u64 = 0;
            loop {
                let g = s.geometric(p);
                site = match site.checked_add(g) {
                    Some(x) => x,
                    None => break,
                };
                if site >= spec.sites as u64 {
                    break;
                }
                open.push(spec.vertex(site as usize, b));
                site += 1;
            }
        }
        Self::with_open(spec, lambda, open, StreamKey::new(seed, replica, Domain::Edges, 1))
    }

    /// Coupled states from a configuration that carries an origin. Points
    /// outside the cylinder or with weight at or above the truncation level
    /// are ignored.
    pub fn from_points(spec: &'a LatticeSpec, lambda: f64, cfg: &PointConfiguration) -> Self {
        let pts = cfg.restrict_box(spec.cylinder_half_width()).restrict_weight(spec.truncation);
        let mut vertex_of_point = Vec::with_capacity(pts.len());
        let mut members: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        let mut distinct = true;
        for i in 0..pts.len() {
            let site = spec.cell_of_position(pts.position(i)).expect("point inside the cylinder");
            let w = pts.weight(i);
            let bin = spec.model.weights.bin_of(&spec.bins, w, spec.mesh).expect("weight below truncation");
            let v = spec.vertex(site, bin);
            vertex_of_point.push(v);
            let e = members.entry(v).or_default();
            distinct &= e.is_empty();
            e.push(i);
        }
        let open: Vec<u32> = members.keys().copied().collect();
        let key = StreamKey::new(cfg.seed(), cfg.replica(), Domain::Edges, 1);
        let mut inst = Self::with_open(spec, lambda, open, key);
        inst.coupling = Some(CellCoupling { points: pts, vertex_of_point, members, distinct });
        inst
    }

    pub fn coupling(&self) -> Option<&CellCoupling> {
        self.coupling.as_ref()
    }

    pub fn open_count(&self) -> usize {
        self.open.len()
    }
}

impl SiteBond for LatticeInstance<'_> {
    fn vertex_count(&self) -> usize {
        self.spec.vertex_count()
    }

    fn root(&self) -> u32 {
        self.spec.root()
    }

    #[inline]
    fn is_open(&self, v: u32) -> bool {
        self.bits[v as usize / 64] >> (v % 64) & 1 == 1
    }

    fn open_vertices(&self) -> &[u32] {
        &self.open
    }

    fn edge_open(&self, a: u32, b: u32) -> bool {
        if a == b {
            return false;
        }
        if let Some(c) = &self.coupling {
            let (Some(pa), Some(pb)) = (c.members.get(&a), c.members.get(&b)) else {
                return false;
            };
            return pa.iter().any(|&i| pb.iter().any(|&j| c.points.edge(i, j)));
        }
        let p = self.spec.edge_probability(a, b);
        if p <= 0.0 {
            false
        } else if p >= 1.0 {
            true
        } else {
            self.edge_key.pair_uniform(a as u64, b as u64) < p
        }
    }

    fn candidates(&self, v: u32, out: &mut Vec<u32>) {
        out.clear();
        let spec = self.spec;
        let top = *spec.bins.last().unwrap();
        let Some(range) = spec.model.adjacency.range(spec.weight_of(v), top) else {
            out.extend((0..spec.vertex_count() as u32).filter(|&w| w != v));
            return;
        };
        let d = spec.dimension();
        let reach = libm::floor(range / spec.spacing() + 1e-9) as usize;
        let mut dig = [0usize; 8];
        spec.site_digits(spec.site_of(v), &mut dig);
        let mut lo = [0usize; 8];
        let mut hi = [0usize; 8];
        for k in 0..d {
            lo[k] = dig[k].saturating_sub(reach);
            hi[k] = (dig[k] + reach).min(spec.side - 1);
        }
        let nb = spec.bins.len();
        let mut cur = lo;
        loop {
            let site = spec.site_from_digits(&cur[..d]);
            for b in 0..nb {
                let w = spec.vertex(site, b);
                if w != v {
                    out.push(w);
                }
            }
            let mut k = d;
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                if cur[k] < hi[k] {
                    cur[k] += 1;
                    break;
                }
                cur[k] = lo[k];
            }
        }
    }

    fn edge_is_random(&self, a: u32, b: u32) -> bool {
        if self.coupling.is_some() {
            return true;
        }
        let p = self.spec.edge_probability(a, b);
        p > 0.0 && p < 1.0
    }

    fn edge_possible(&self, a: u32, b: u32) -> bool {
        self.coupling.is_some() || self.spec.edge_probability(a, b) > 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, cluster_size};
    use crate::model::{AdjacencySpec, ModelSpec, WeightDistribution};
    use crate::stats::Moments;

    #[test]
    fn zero_intensity_has_no_open_sites() {
        let m = ModelSpec::new(AdjacencySpec::gilbert(2, 1.0), WeightDistribution::PointMass, 1.0, 2.0).unwrap();
        let s = build_lattice(&m, 2, 1, 1e-6).unwrap();
        let i = sample_instance(&s, 0.0, 1, 0, false);
        assert_eq!(i.open_count(), 0);
        assert_eq!(cluster_size(&i, s.root()), 1);
    }

    #[test]
    fn site_marginals() {
        let m = ModelSpec::new(AdjacencySpec::gilbert(2, 1.0), WeightDistribution::PointMass, 1.0, 2.0).unwrap();
        let s = build_lattice(&m, 2, 1, 1e-6).unwrap();
        let p = s.site_probability(1.0, 0);
        let mut direct = Moments::new();
        let mut coupled = Moments::new();
        let probe = s.vertex(3, 0);
        for r in 0..20_000 {
            direct.push(sample_instance(&s, 1.0, 3, r, false).is_open(probe) as u8 as f64);
            coupled.push(sample_instance(&s, 1.0, 3, r, true).is_open(probe) as u8 as f64);
        }
        let se = libm::sqrt(p * (1.0 - p) / 20_000.0);
        assert!((direct.mean() - p).abs() < 4.0 * se, "{} vs {p}", direct.mean());
        assert!((coupled.mean() - p).abs() < 4.0 * se, "{} vs {p}", coupled.mean());
    }

    #[test]
    fn candidates_cover_all_possible_edges() {
        let m = ModelSpec::new(AdjacencySpec::min_reach_cubic(2), WeightDistribution::pareto(4.5, Some(3.0)), 1.0, 2.0).unwrap();
        let s = build_lattice(&m, 2, 1, 1e-6).unwrap();
        let i = sample_instance(&s, 1.0, 3, 0, false);
        let mut c = Vec::new();
        for v in (0..s.vertex_count() as u32).step_by(7) {
            i.candidates(v, &mut c);
            for w in 0..s.vertex_count() as u32 {
                if w != v && s.edge_probability(v, w) > 0.0 {
                    assert!(c.binary_search(&w).is_ok(), "{v} {w}");
                }
            }
        }
    }
}
