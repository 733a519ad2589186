//! Monte Carlo estimators and the experiment drivers built on them.
//!
//! Replica `r` of every experiment draws its configuration from the stream
//! address `(seed, r)`, so any estimate can be recomputed from its seed and
//! replica range alone.

mod critical;
mod diagnostics;

use alloc::format;
use alloc::vec::Vec;

pub use critical::{
    crossing, fit_exponential_rate, fit_log_linear, locate_critical, locate_from_thresholds, reach_thresholds, slope_bootstrap, supercritical_fit, supercritical_from_thresholds,
    CriticalEstimate, ExpFit, ReachThresholds, SupercriticalFit,
};
pub use diagnostics::{
    convergence_study, differential_diagnostic, domination_check, margulis_russo, ratio_diagnostics, ConvergenceConfig,
    ConvergenceRow, DifferentialReport, DifferentialRow, DominationReport, RatioReport, RatioRow, RussoCheck,
};

use crate::continuum::{cluster_of_origin, sample_ppp, ClusterOptions};
use crate::lattice::{cluster_avoiding, sample_instance, LatticeSpec, SiteBond};
use crate::model::ModelSpec;
use crate::stats::Moments;
use crate::{Error, Result};

/// A Monte Carlo mean with its standard error and provenance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u128,
    /// Index of the first replica used.
    pub first_replica: u64,
}

impl Estimate {
    pub fn from_moments(m: &Moments, seed: u128, first_replica: u64) -> Self {
        Estimate { mean: m.mean(), stderr: m.stderr(), samples: m.count(), seed, first_replica }
    }

    /// Binomial proportion `hits / samples`.
    pub fn proportion(hits: u64, samples: u64, seed: u128) -> Self {
        let p = if samples == 0 { 0.0 } else { hits as f64 / samples as f64 };
        let se = if samples < 2 { f64::INFINITY } else { libm::sqrt(p * (1.0 - p) / (samples - 1) as f64) };
        Estimate { mean: p, stderr: se, samples, seed, first_replica: 0 }
    }

    /// Half-width of the normal 95% interval.
    pub fn ci95(&self) -> f64 {
        1.959_963_984_540_054 * self.stderr
    }

    /// Relative standard error.
    pub fn relative_stderr(&self) -> f64 {
        self.stderr / libm::fabs(self.mean)
    }
}

/// Where a tail curve was measured.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CurveSource {
    Continuum,
    Lattice { mesh: u32 },
}

/// `θ̂(k) = P̂(|C(0̄, 1)| ≥ k)` for `k = 1..=k_max`, all from the same replicas.
#[derive(Clone, Debug, PartialEq)]
pub struct TailCurve {
    pub ks: Vec<usize>,
    pub theta: Vec<Estimate>,
    pub lambda: f64,
    pub half_width: f64,
    pub source: CurveSource,
}

impl TailCurve {
    pub fn from_sizes(sizes: &[usize], k_max: usize, lambda: f64, half_width: f64, source: CurveSource, seed: u128) -> Self {
        let mut hits = alloc::vec![0u64; k_max + 1];
        for &s in sizes {
            hits[s.min(k_max)] += 1;
        }
        // cumulate from the top: hits[k] = #{size ≥ k}
        for k in (1..k_max).rev() {
            hits[k] += hits[k + 1];
        }
        let n = sizes.len() as u64;
        TailCurve {
            ks: (1..=k_max).collect(),
            theta: (1..=k_max).map(|k| Estimate::proportion(hits[k], n, seed)).collect(),
            lambda,
            half_width,
            source,
        }
    }

    pub fn at(&self, k: usize) -> Option<&Estimate> {
        self.ks.iter().position(|&x| x == k).map(|i| &self.theta[i])
    }
}

fn continuum_model(model: &ModelSpec, lambda: f64, half_width: f64) -> Result<ModelSpec> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("intensity {lambda}")));
    }
    let m = model.with_half_width(half_width);
    m.validate()?;
    Ok(m.with_intensity(lambda))
}

/// Origin cluster sizes (capped at `cap`) of `samples` replicas.
pub fn origin_sizes(model: &ModelSpec, lambda: f64, half_width: f64, cap: usize, samples: u64, seed: u128) -> Result<Vec<usize>> {
    let m = continuum_model(model, lambda, half_width)?;
    let opts = ClusterOptions { cap: Some(cap), stop_on_boundary: false };
    let mut out = Vec::with_capacity(samples as usize);
    for r in 0..samples {
        let cfg = sample_ppp(&m, seed, r).with_origin(1.0)?;
        out.push(cluster_of_origin(&cfg, opts).size.min(cap));
    }
    Ok(out)
}

/// Tail curve of the continuum origin cluster in `[−L, L]^d`.
pub fn estimate_tail(model: &ModelSpec, lambda: f64, half_width: f64, k_max: usize, samples: u64, seed: u128) -> Result<TailCurve> {
    let sizes = origin_sizes(model, lambda, half_width, k_max, samples, seed)?;
    Ok(TailCurve::from_sizes(&sizes, k_max, lambda, half_width, CurveSource::Continuum, seed))
}

/// Tail curve of the lattice root cluster.
pub fn estimate_tail_lattice(spec: &LatticeSpec, lambda: f64, k_max: usize, samples: u64, seed: u128, coupled: bool) -> TailCurve {
    let mut sizes = Vec::with_capacity(samples as usize);
    for r in 0..samples {
        let inst = sample_instance(spec, lambda, seed, r, coupled);
        sizes.push(cluster_avoiding(&inst, inst.root(), None, k_max).len());
    }
    TailCurve::from_sizes(&sizes, k_max, lambda, spec.half_width as f64, CurveSource::Lattice { mesh: spec.mesh }, seed)
}

/// Mean origin cluster size with the fraction of replicas hitting the cap.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiEstimate {
    pub estimate: Estimate,
    pub cap_hits: u64,
    pub cap_fraction: f64,
    /// More than 10% of replicas hit the cap: the intensity is likely near
    /// or above criticality and the mean is unreliable.
    pub divergent: bool,
}

impl ChiEstimate {
    /// From origin cluster sizes already capped at `size_cap`.
    pub fn from_sizes(sizes: &[usize], size_cap: usize, seed: u128) -> Self {
        let mut m = Moments::new();
        let mut hits = 0;
        for &s in sizes {
            m.push(s as f64);
            hits += (s >= size_cap) as u64;
        }
        let cap_fraction = hits as f64 / sizes.len().max(1) as f64;
        ChiEstimate { estimate: Estimate::from_moments(&m, seed, 0), cap_hits: hits, cap_fraction, divergent: cap_fraction > 0.1 }
    }
}

pub fn estimate_chi(model: &ModelSpec, lambda: f64, half_width: f64, samples: u64, seed: u128, size_cap: usize) -> Result<ChiEstimate> {
    let sizes = origin_sizes(model, lambda, half_width, size_cap, samples, seed)?;
    Ok(ChiEstimate::from_sizes(&sizes, size_cap, seed))
}

/// `P̂(origin cluster touches the boundary of [−L, L]^d)` for each `L`.
pub fn estimate_percolation(model: &ModelSpec, lambda: f64, half_widths: &[f64], samples: u64, seed: u128) -> Result<Vec<Estimate>> {
    if half_widths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("box half-widths must be increasing".into()));
    }
    let opts = ClusterOptions { cap: None, stop_on_boundary: true };
    let mut out = Vec::new();
    for &l in half_widths {
        let m = continuum_model(model, lambda, l)?;
        let mut hits = 0;
        for r in 0..samples {
            let cfg = sample_ppp(&m, seed, r).with_origin(1.0)?;
            hits += cluster_of_origin(&cfg, opts).touches_boundary as u64;
        }
        out.push(Estimate::proportion(hits, samples, seed));
    }
    Ok(out)
}
