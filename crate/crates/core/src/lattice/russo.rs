//! Monte Carlo forms of the derivative of `θ^{L,n}_λ(k)` in the intensity.

use super::graph::{pivotal_vertices, Pivotality};
use super::instance::LatticeInstance;
use super::LatticeSpec;
use crate::estimators::Estimate;
use crate::stats::Moments;

/// `2^{−nd} Π(m, n)`: the derivative of `−ln(1 − p_λ)` in `λ`.
pub fn site_weight(spec: &LatticeSpec, v: u32) -> f64 {
    spec.cell_volume() * spec.bin_mass[spec.bin_of(v)]
}

/// Pivotal form of the derivative:
/// `E[Σ_v 2^{−nd} Π(m_v, n) (1 − p_v) 1{v pivotal}]`.
///
/// Pivotality of `v` does not depend on the state of `v`, so each replica
/// contributes an unbiased sample of the covariance sum.
pub fn russo_rhs_mc(spec: &LatticeSpec, lambda: f64, k: usize, samples: u64, seed: u128) -> Estimate {
    let mut m = Moments::new();
    for r in 0..samples {
        let inst = LatticeInstance::direct(spec, lambda, seed, r);
        let piv = Pivotality::new(&inst, k);
        let mut x = 0.0;
        for v in pivotal_vertices(&inst, &piv) {
            let p = spec.site_probability(lambda, spec.bin_of(v));
            x += site_weight(spec, v) * (1.0 - p);
        }
        m.push(x);
    }
    Estimate::from_moments(&m, seed, 0)
}

/// `P(v closed and pivotal for {|C(root)| ≥ k})`, estimated as
/// `(1 − p_v) P(v pivotal)` from the same replicas.
pub fn pivotal_probability(spec: &LatticeSpec, lambda: f64, v: u32, k: usize, samples: u64, seed: u128) -> Estimate {
    let q = 1.0 - spec.site_probability(lambda, spec.bin_of(v));
    let mut m = Moments::new();
    for r in 0..samples {
        let inst = LatticeInstance::direct(spec, lambda, seed, r);
        let piv = Pivotality::new(&inst, k);
        m.push(if piv.is_pivotal(&inst, v) { q } else { 0.0 });
    }
    Estimate::from_moments(&m, seed, 0)
}
