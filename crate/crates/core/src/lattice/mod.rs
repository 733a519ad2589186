//! Finite lattice approximation: sites `2^{-n} Z^d ∩ [-L, L]^d`, weight bins
//! and Bernoulli site/edge states.
//!
//! Vertex ids are `site · bins + bin` with sites in row-major order; edges are
//! ordered lexicographically by `(min id, max id)`.

mod graph;
mod instance;
mod russo;

use alloc::format;
use alloc::vec::Vec;

pub use graph::{all_cluster_sizes, cluster_avoiding, cluster_members, cluster_size, pivotal_vertices, Pivotality, SiteBond, Toggled};
#[cfg(test)]
pub(crate) use graph::tests as tests_support;
pub use instance::{sample_instance, CellCoupling, LatticeInstance};
pub use russo::{pivotal_probability, russo_rhs_mc, site_weight};

use crate::model::ModelSpec;
use crate::{Error, Result};

/// Geometry and law of one lattice approximation.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeSpec {
    pub model: ModelSpec,
    pub half_width: u32,
    pub mesh: u32,
    /// Sites per axis, `2^{n+1} L + 1`.
    pub side: usize,
    pub sites: usize,
    /// Bin representatives below the truncation level.
    pub bins: Vec<f64>,
    /// `Π(m, n)` for each bin.
    pub bin_mass: Vec<f64>,
    /// Weight truncation level (`∞` when nothing is dropped).
    pub truncation: f64,
    /// `exp(−λ 2^{−nd} |U| π[H, ∞))` at the model intensity.
    pub residual: f64,
}

/// Build the lattice of half-width `L` and mesh `2^{−n}`, choosing the
/// smallest admissible truncation level `H`.
pub fn build_lattice(model: &ModelSpec, half_width: u32, mesh: u32, truncation_tol: f64) -> Result<LatticeSpec> {
    model.validate()?;
    if !(truncation_tol > 0.0 && truncation_tol <= 0.01) {
        return Err(Error::Domain(format!("truncation tolerance {truncation_tol} outside (0, 0.01]")));
    }
    let d = model.dimension();
    if d > 8 || mesh > 20 {
        return Err(Error::TooLarge(format!("dimension {d} or mesh {mesh} too large")));
    }
    let side = (1usize << (mesh + 1)) * half_width as usize + 1;
    let sites = side
        .checked_pow(d as u32)
        .filter(|&s| s < (1 << 31))
        .ok_or_else(|| Error::TooLarge(format!("{side}^{d} sites")))?;
    let cell = libm::ldexp(1.0, -((mesh as i32) * d as i32));
    let scale = model.intensity * cell * sites as f64;
    let budget = -libm::log1p(-truncation_tol);
    let w = &model.weights;
    let fits = |h: f64| scale * w.tail(h) <= budget;
    let truncation = if w.is_discrete() {
        let atoms = w.atoms();
        // smallest atom H with mass of atoms ≥ H within budget
        let mut h = f64::INFINITY;
        for &(m, _) in atoms.iter().rev() {
            if m > 1.0 && fits(m) {
                h = m;
            } else {
                break;
            }
        }
        h
    } else {
        let step = libm::ldexp(1.0, -(mesh as i32));
        let top = w.support_max();
        {
            let at = |l: u64| 1.0 + l as f64 * step;
            let mut hi = 1u64;
            while !fits(at(hi)) {
                if hi > 1 << 52 {
                    return Err(Error::Truncation("weight tail does not decay fast enough".into()));
                }
                hi *= 2;
            }
            let mut lo = hi / 2;
            while lo + 1 < hi {
                let mid = (lo + hi) / 2;
                if fits(at(mid)) { hi = mid } else { lo = mid }
            }
            let h = at(hi.max(1));
            if top.is_some_and(|t| h >= t) { f64::INFINITY } else { h }
        }
    };
    let bins = w.bins(mesh, truncation);
    if bins.len() * sites >= (1usize << 32) {
        return Err(Error::TooLarge(format!("{} vertices", bins.len() * sites)));
    }
    let bin_mass: Vec<f64> = bins.iter().map(|&m| w.bin_mass(m, mesh)).collect();
    let residual = if truncation.is_finite() { libm::exp(-scale * w.tail(truncation)) } else { 1.0 };
    Ok(LatticeSpec {
        model: model.clone(),
        half_width,
        mesh,
        side,
        sites,
        bins,
        bin_mass,
        truncation,
        residual,
    })
}

impl LatticeSpec {
    pub fn dimension(&self) -> usize {
        self.model.dimension()
    }

    pub fn vertex_count(&self) -> usize {
        self.sites * self.bins.len()
    }

    /// Cell volume `2^{−nd}`.
    pub fn cell_volume(&self) -> f64 {
        libm::ldexp(1.0, -((self.mesh as i32) * self.dimension() as i32))
    }

    pub fn spacing(&self) -> f64 {
        libm::ldexp(1.0, -(self.mesh as i32))
    }

    /// `p_λ(ū, m) = 1 − exp(−λ 2^{−nd} Π(m, n))` for bin `b`.
    pub fn site_probability(&self, lambda: f64, bin: usize) -> f64 {
        -libm::expm1(-lambda * self.cell_volume() * self.bin_mass[bin])
    }

    pub fn vertex(&self, site: usize, bin: usize) -> u32 {
        (site * self.bins.len() + bin) as u32
    }

    pub fn site_of(&self, v: u32) -> usize {
        v as usize / self.bins.len()
    }

    pub fn bin_of(&self, v: u32) -> usize {
        v as usize % self.bins.len()
    }

    pub fn weight_of(&self, v: u32) -> f64 {
        self.bins[self.bin_of(v)]
    }

    /// Integer coordinates of a site, `0..side` per axis.
    pub fn site_digits(&self, site: usize, out: &mut [usize]) {
        let d = self.dimension();
        let mut s = site;
        for k in (0..d).rev() {
            out[k] = s % self.side;
            s /= self.side;
        }
    }

    pub fn site_from_digits(&self, digits: &[usize]) -> usize {
        digits.iter().fold(0, |acc, &x| acc * self.side + x)
    }

    /// Position `ū` of a site.
    pub fn site_position(&self, site: usize, out: &mut [f64]) {
        let mut dig = [0usize; 8];
        self.site_digits(site, &mut dig);
        let h = self.spacing();
        for k in 0..self.dimension() {
            out[k] = -(self.half_width as f64) + dig[k] as f64 * h;
        }
    }

    pub fn site_distance(&self, a: usize, b: usize) -> f64 {
        let d = self.dimension();
        let (mut da, mut db) = ([0usize; 8], [0usize; 8]);
        self.site_digits(a, &mut da);
        self.site_digits(b, &mut db);
        let mut s = 0.0;
        for k in 0..d {
            let t = da[k] as f64 - db[k] as f64;
            s += t * t;
        }
        libm::sqrt(s) * self.spacing()
    }

    pub fn origin_site(&self) -> usize {
        let c = (self.side - 1) / 2;
        let digits = [c; 8];
        self.site_from_digits(&digits[..self.dimension()])
    }

    /// The root `(0̄, 1)`.
    pub fn root(&self) -> u32 {
        self.vertex(self.origin_site(), 0)
    }

    /// Edge probability `φ(|ū − v̄|; m_u, m_v)`.
    pub fn edge_probability(&self, u: u32, v: u32) -> f64 {
        let r = self.site_distance(self.site_of(u), self.site_of(v));
        self.model.adjacency.phi(r, self.weight_of(u), self.weight_of(v))
    }

    /// Site index of the half-open cell containing `x`, if inside the cylinder.
    pub fn cell_of_position(&self, x: &[f64]) -> Option<usize> {
        let h = self.spacing();
        let lo = -(self.half_width as f64) - 0.5 * h;
        let mut site = 0usize;
        for &c in x {
            let k = libm::floor((c - lo) / h);
            if k < 0.0 || k >= self.side as f64 {
                return None;
            }
            site = site * self.side + k as usize;
        }
        Some(site)
    }

    /// Half-width of the cylinder covered by the cells, `L + 2^{−n−1}`.
    pub fn cylinder_half_width(&self) -> f64 {
        self.half_width as f64 + 0.5 * self.spacing()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AdjacencySpec, WeightDistribution};

    fn model(w: WeightDistribution, lambda: f64, l: f64) -> ModelSpec {
        ModelSpec::new(AdjacencySpec::min_reach_cubic(2), w, lambda, l).unwrap()
    }

    #[test]
    fn sizes_and_root() {
        let s = build_lattice(&model(WeightDistribution::PointMass, 1.0, 1.0), 1, 0, 1e-6).unwrap();
        assert_eq!(s.sites, 9);
        assert_eq!(s.bins, alloc::vec![1.0]);
        assert_eq!(s.residual, 1.0);
        let mut p = [0.0; 2];
        s.site_position(s.origin_site(), &mut p);
        assert_eq!(p, [0.0, 0.0]);
        let s = build_lattice(&model(WeightDistribution::PointMass, 1.0, 2.0), 2, 2, 1e-6).unwrap();
        assert_eq!(s.side, 17);
        s.site_position(s.origin_site(), &mut p);
        assert_eq!(p, [0.0, 0.0]);
    }

    #[test]
    fn pareto_truncation_is_minimal() {
        let m = model(WeightDistribution::pareto(4.5, None), 1.0, 5.0);
        let s = build_lattice(&m, 5, 3, 1e-6).unwrap();
        let scale = 1.0 / 64.0 * s.sites as f64;
        let budget = -libm::log1p(-1e-6);
        // closed form: π[H,∞) = H^{-4.5} ≤ budget/scale
        let h_star = libm::pow(budget / scale, -1.0 / 4.5);
        assert!(s.truncation >= h_star && s.truncation - 0.125 < h_star, "{} vs {h_star}", s.truncation);
        assert!(s.residual >= 1.0 - 1e-6);
        assert_eq!(s.bins.len(), ((s.truncation - 1.0) * 8.0).round() as usize);
    }

    #[test]
    fn cells_are_half_open() {
        let s = build_lattice(&model(WeightDistribution::PointMass, 1.0, 1.0), 1, 1, 1e-6).unwrap();
        // cylinder is [-1.25, 1.25); sites at -1, -0.5, ..., 1
        assert_eq!(s.cell_of_position(&[-1.25, -1.25]), Some(0));
        assert_eq!(s.cell_of_position(&[1.25, 0.0]), None);
        assert_eq!(s.cell_of_position(&[0.0, 0.0]), Some(s.origin_site()));
        assert_eq!(s.cell_of_position(&[-0.25, 0.2499]), Some(s.origin_site()));
    }

    #[test]
    fn masses_sum_to_one_without_truncation() {
        let m = model(WeightDistribution::pareto(4.5, Some(10.0)), 0.5, 3.0);
        let s = build_lattice(&m, 3, 1, 1e-6).unwrap();
        assert!(s.truncation.is_infinite());
        assert!((s.bin_mass.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(s.bins.contains(&8.0) && s.bins.contains(&4.0));
    }
}
