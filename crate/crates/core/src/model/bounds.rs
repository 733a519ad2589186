//! Neighbourhood integrals, the branching-process bounds and the exponential
//! moment check.

use alloc::format;
use alloc::vec::Vec;

use super::adjacency::{AdjacencySpec, Reach};
use super::quadrature::{integrate, integrate_pieces, Quad};
use super::weights::WeightDistribution;
use crate::{Error, Result};

/// Surface area of the unit sphere in `R^d`: `2 π^{d/2} / Γ(d/2)`.
pub fn sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * libm::pow(core::f64::consts::PI, h) / libm::tgamma(h)
}

/// Tolerances for the radial integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureParams {
    /// Absolute tolerance of the whole integral.
    pub tolerance: f64,
    /// Tolerance for the geometric tail bound beyond the last shell.
    pub tail_tolerance: f64,
    /// Maximum number of dyadic shells for infinite-range adjacencies.
    pub max_shells: u32,
}

impl Default for QuadratureParams {
    fn default() -> Self {
        QuadratureParams { tolerance: 1e-8, tail_tolerance: 1e-10, max_shells: 200 }
    }
}

/// `ι(r; a) = ∫ φ(r; a, b) π(db)`.
pub fn connection_profile(adj: &AdjacencySpec, weights: &WeightDistribution, r: f64, a: f64) -> f64 {
    if !adj.is_weighted() {
        return adj.phi(r, a, 1.0);
    }
    match weights {
        WeightDistribution::PointMass => adj.phi(r, a, 1.0),
        WeightDistribution::Discrete(atoms) => atoms.iter().map(|&(m, q)| q * adj.phi(r, a, m)).sum(),
        WeightDistribution::Pareto { .. } => {
            // Integrate in the quantile variable so the domain is [0, 1].
            let mut cuts = alloc::vec![0.0];
            if let Some(reach) = &adj.reach {
                if let Some(b) = reach.inverse(r) {
                    if b > 1.0 && b < a {
                        cuts.push(weights.cdf(b));
                    }
                }
            }
            cuts.push(1.0);
            integrate_pieces(|v| adj.phi(r, a, weights.quantile(v.min(1.0 - 1e-16))), &cuts, 1e-12).value
        }
    }
}

/// `∫_0^∞ ι(r; a) r^{d−1} dr`.
pub fn neighborhood_integral(
    adj: &AdjacencySpec,
    weights: &WeightDistribution,
    a: f64,
    params: &QuadratureParams,
) -> Result<Quad> {
    if !(a >= 1.0) {
        return Err(Error::Domain(format!("weight {a} below 1")));
    }
    let d = adj.dimension as i32;
    let integrand = |r: f64| connection_profile(adj, weights, r, a) * libm::pow(r, (d - 1) as f64);
    let b_top = weights.support_max().unwrap_or(f64::INFINITY);
    if let Some(range) = adj.range(a, b_top) {
        let mut cuts = alloc::vec![0.0, range];
        if let Some(reach) = &adj.reach {
            cuts.push(reach.eval(1.0));
            for (m, _) in weights.atoms() {
                cuts.push(reach.eval(m.min(a)));
            }
        }
        if let super::adjacency::Form::Gilbert { radius } = adj.form {
            cuts.push(radius);
        }
        cuts.retain(|&c| c >= 0.0 && c <= range);
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        cuts.dedup();
        return Ok(integrate_pieces(integrand, &cuts, params.tolerance));
    }
    // Infinite range: unit ball, then dyadic shells with a geometric tail bound.
    let mut total = integrate(integrand, 0.0, 1.0, params.tolerance * 0.5);
    let mut prev = f64::NAN;
    let mut rising = 0;
    for k in 0..params.max_shells {
        let lo = libm::ldexp(1.0, k as i32);
        let shell = integrate(integrand, lo, 2.0 * lo, params.tolerance * 0.25);
        total.value += shell.value;
        total.error += shell.error;
        if !total.value.is_finite() {
            break;
        }
        if prev.is_finite() && prev > 0.0 {
            let ratio = shell.value / prev;
            if ratio >= 1.0 {
                rising += 1;
            } else {
                rising = 0;
                let tail = shell.value * ratio / (1.0 - ratio);
                if ratio < 0.95 && tail < params.tail_tolerance {
                    total.error += tail;
                    return Ok(total);
                }
            }
            if rising >= 8 {
                break;
            }
        } else if shell.value == 0.0 && k > 0 {
            return Ok(total);
        }
        prev = shell.value;
    }
    Err(Error::Divergent(format!("radial integral at a={a} does not settle (partial {:.6e})", total.value)))
}

/// Infimum and (grid) supremum of the neighbourhood integral over weights.
#[derive(Clone, Debug, PartialEq)]
pub struct NbBounds {
    pub i_inf: f64,
    pub i_sup: f64,
    /// Weight at which the supremum was attained on the grid.
    pub sup_at: f64,
    /// True when the supremum is certified on a finite weight grid only.
    pub grid_only: bool,
    pub divergent: bool,
    pub ok: bool,
}

/// Default weight grid: log-spaced from 1 to the effective top of the support.
pub fn default_weight_grid(weights: &WeightDistribution, points: usize) -> Vec<f64> {
    if let WeightDistribution::Discrete(atoms) = weights {
        let mut g: Vec<f64> = atoms.iter().map(|a| a.0).collect();
        if g[0] != 1.0 {
            g.insert(0, 1.0);
        }
        return g;
    }
    let top = weights.support_max().unwrap_or_else(|| weights.quantile(1.0 - 1e-9));
    if top <= 1.0 {
        return alloc::vec![1.0];
    }
    let n = points.max(2);
    let mut g: Vec<f64> = (0..n).map(|i| libm::exp(libm::log(top) * i as f64 / (n - 1) as f64)).collect();
    g[0] = 1.0;
    g[n - 1] = top;
    g
}

pub fn nb_bounds(
    adj: &AdjacencySpec,
    weights: &WeightDistribution,
    grid: &[f64],
    params: &QuadratureParams,
) -> NbBounds {
    let fail = NbBounds { i_inf: f64::NAN, i_sup: f64::INFINITY, sup_at: 1.0, grid_only: true, divergent: true, ok: false };
    let i_inf = match neighborhood_integral(adj, weights, 1.0, params) {
        Ok(q) => q.value,
        Err(_) => return fail,
    };
    if !adj.is_weighted() {
        let ok = i_inf > 0.0 && i_inf.is_finite();
        return NbBounds { i_inf, i_sup: i_inf, sup_at: 1.0, grid_only: false, divergent: false, ok };
    }
    let mut i_sup = i_inf;
    let mut sup_at = 1.0;
    for &a in grid {
        match neighborhood_integral(adj, weights, a, params) {
            Ok(q) => {
                if q.value > i_sup {
                    i_sup = q.value;
                    sup_at = a;
                }
            }
            Err(_) => return NbBounds { i_inf, ..fail },
        }
    }
    // A bounded support makes its top the true supremum by monotonicity in a.
    let grid_only = match weights.support_max() {
        Some(top) => !grid.iter().any(|&a| a >= top),
        None => true,
    };
    let ok = i_inf > 0.0 && i_inf <= i_sup && i_sup.is_finite();
    NbBounds { i_inf, i_sup, sup_at, grid_only, divergent: false, ok }
}

/// Branching-process bounds on the subcritical regime.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GwBounds {
    pub lambda_t_lower: f64,
    pub chi_upper: f64,
}

pub fn gw_bounds(dimension: usize, i_sup: f64, intensity: f64) -> GwBounds {
    let sd = sphere_area(dimension);
    let lambda_t_lower = 1.0 / (sd * i_sup);
    let x = intensity * sd * i_sup;
    let chi_upper = if x < 1.0 { 1.0 / (1.0 - x) } else { f64::INFINITY };
    GwBounds { lambda_t_lower, chi_upper }
}

/// Outcome of the exponential-moment check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmcVerdict {
    Finite,
    Infinite,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmcReport {
    pub verdict: EmcVerdict,
    /// `∫_1^{cutoff} exp(C R(m)^{d+ε}) π(dm)`.
    pub partial_sum: f64,
    /// Log-ratios of consecutive dyadic blocks in the far tail.
    pub tail_log_ratios: Vec<f64>,
}

impl EmcReport {
    pub fn finite(&self) -> bool {
        self.verdict == EmcVerdict::Finite
    }
}

/// Checks `∫ exp(C R(m)^{d+ε}) π(dm) < ∞`.
///
/// Bounded supports are finite outright. For the untruncated Pareto law the
/// integral over dyadic blocks `[2^j, 2^{j+1}]` is compared in log space for
/// `j` up to `max(log2 cutoff, 1024)`: if the last 64 block log-ratios are all
/// below `−10⁻³` the series is geometric and finite, if they are all
/// non-negative the terms do not vanish and it is infinite, otherwise the
/// test is inconclusive.
pub fn emc_check(
    reach: &Reach,
    weights: &WeightDistribution,
    dimension: usize,
    c: f64,
    eps: f64,
    cutoff: f64,
) -> EmcReport {
    let p = dimension as f64 + eps;
    let g = |m: f64| libm::exp(c * libm::pow(reach.eval(m), p));
    match weights {
        WeightDistribution::PointMass | WeightDistribution::Discrete(_) => {
            let s = weights.atoms().iter().filter(|a| a.0 <= cutoff).map(|&(m, q)| q * g(m)).sum();
            return EmcReport { verdict: EmcVerdict::Finite, partial_sum: s, tail_log_ratios: Vec::new() };
        }
        WeightDistribution::Pareto { shape, truncation } => {
            let top = truncation.map_or(cutoff, |t| t.min(cutoff));
            // ∫ g(m) f(m) dm in the variable x = ln m.
            let partial = integrate(
                |x| {
                    let m = libm::exp(x);
                    g(m) * weights.density(m) * m
                },
                0.0,
                libm::log(top.max(1.0)),
                1e-10,
            )
            .value;
            if truncation.is_some() {
                return EmcReport { verdict: EmcVerdict::Finite, partial_sum: partial, tail_log_ratios: Vec::new() };
            }
            let log_integrand = |x: f64| {
                // log of g(m) f(m) m at m = e^x
                c * libm::pow(reach.eval(libm::exp(x)), p) + libm::log(*shape) - shape * x
            };
            let log_block = |j: u32| {
                // log-sum-exp of a 16-point rule on [j ln2, (j+1) ln2]
                let lo = j as f64 * core::f64::consts::LN_2;
                let h = core::f64::consts::LN_2 / 16.0;
                let vals: Vec<f64> = (0..16).map(|i| log_integrand(lo + (i as f64 + 0.5) * h)).collect();
                let mx = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if !mx.is_finite() {
                    return mx;
                }
                mx + libm::log(vals.iter().map(|v| libm::exp(v - mx)).sum::<f64>() * h)
            };
            let jc = libm::log2(cutoff.max(2.0)) as u32;
            let jmax = jc.max(1024);
            let mut ratios = Vec::new();
            let mut prev = log_block(jmax - 64);
            for j in (jmax - 63)..=jmax {
                let cur = log_block(j);
                let r = if cur == f64::INFINITY { f64::INFINITY } else { cur - prev };
                ratios.push(r);
                prev = cur;
            }
            let verdict = if ratios.iter().all(|&r| r < -1e-3) {
                EmcVerdict::Finite
            } else if ratios.iter().all(|&r| r >= 0.0 || r.is_nan()) {
                EmcVerdict::Infinite
            } else {
                EmcVerdict::Inconclusive
            };
            EmcReport { verdict, partial_sum: partial, tail_log_ratios: ratios }
        }
    }
}
