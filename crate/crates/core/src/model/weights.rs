//! Weight (mark) distributions on `[1, ∞)`.

use alloc::format;
use alloc::vec::Vec;

use crate::rng::Stream;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum WeightDistribution {
    /// Every vertex has weight 1.
    PointMass,
    /// Density `α m^{−α−1}` on `[1, ∞)`, optionally conditioned on `m ≤ truncation`.
    Pareto { shape: f64, truncation: Option<f64> },
    /// Atoms `(m_i, q_i)` sorted by weight.
    Discrete(Vec<(f64, f64)>),
}

impl WeightDistribution {
    pub fn pareto(shape: f64, truncation: Option<f64>) -> Self {
        WeightDistribution::Pareto { shape, truncation }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            WeightDistribution::PointMass => Ok(()),
            WeightDistribution::Pareto { shape, truncation } => {
                if !(*shape > 0.0) {
                    return Err(Error::InvalidModel("pareto shape must be positive".into()));
                }
                if let Some(t) = truncation {
                    if !(*t > 1.0) {
                        return Err(Error::InvalidModel("pareto truncation must exceed 1".into()));
                    }
                }
                Ok(())
            }
            WeightDistribution::Discrete(atoms) => {
                if atoms.is_empty() {
                    return Err(Error::InvalidModel("discrete distribution has no atoms".into()));
                }
                let mut total = 0.0;
                for (i, &(m, q)) in atoms.iter().enumerate() {
                    if !(m >= 1.0) || !(q >= 0.0) {
                        return Err(Error::InvalidModel(format!("atom ({m}, {q}) outside [1,∞) x [0,1]")));
                    }
                    if i > 0 {
                        let (pm, pq) = atoms[i - 1];
                        if !(m > pm) {
                            return Err(Error::InvalidModel("atoms must be strictly increasing".into()));
                        }
                        if q > pq + 1e-15 {
                            return Err(Error::InvalidModel("atom probabilities must be non-increasing".into()));
                        }
                    }
                    total += q;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidModel(format!("atom probabilities sum to {total}")));
                }
                Ok(())
            }
        }
    }

    /// Largest point of the support, if bounded.
    pub fn support_max(&self) -> Option<f64> {
        match self {
            WeightDistribution::PointMass => Some(1.0),
            WeightDistribution::Pareto { truncation, .. } => *truncation,
            WeightDistribution::Discrete(atoms) => atoms.last().map(|a| a.0),
        }
    }

    pub fn is_discrete(&self) -> bool {
        !matches!(self, WeightDistribution::Pareto { .. })
    }

    /// Atoms of a discrete law (the point mass is the single atom 1).
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        match self {
            WeightDistribution::PointMass => alloc::vec![(1.0, 1.0)],
            WeightDistribution::Discrete(a) => a.clone(),
            WeightDistribution::Pareto { .. } => Vec::new(),
        }
    }

    fn pareto_norm(shape: f64, truncation: Option<f64>) -> f64 {
        truncation.map_or(1.0, |t| -libm::expm1(-shape * libm::log(t)))
    }

    /// `π([1, m])`.
    pub fn cdf(&self, m: f64) -> f64 {
        match self {
            WeightDistribution::PointMass => {
                if m >= 1.0 { 1.0 } else { 0.0 }
            }
            WeightDistribution::Pareto { shape, truncation } => {
                if m < 1.0 {
                    return 0.0;
                }
                if let Some(t) = truncation {
                    if m >= *t {
                        return 1.0;
                    }
                }
                let raw = -libm::expm1(-shape * libm::log(m));
                raw / Self::pareto_norm(*shape, *truncation)
            }
            WeightDistribution::Discrete(atoms) => atoms.iter().filter(|a| a.0 <= m).map(|a| a.1).sum(),
        }
    }

    /// `π([m, ∞))`.
    pub fn tail(&self, m: f64) -> f64 {
        match self {
            WeightDistribution::PointMass => {
                if m <= 1.0 { 1.0 } else { 0.0 }
            }
            WeightDistribution::Pareto { shape, truncation } => {
                if m <= 1.0 {
                    return 1.0;
                }
                match truncation {
                    None => libm::exp(-shape * libm::log(m)),
                    Some(t) if m >= *t => 0.0,
                    Some(t) => {
                        let z = Self::pareto_norm(*shape, Some(*t));
                        (libm::exp(-shape * libm::log(m)) - libm::exp(-shape * libm::log(*t))) / z
                    }
                }
            }
            WeightDistribution::Discrete(atoms) => atoms.iter().filter(|a| a.0 >= m).map(|a| a.1).sum(),
        }
    }

    /// `π([lo, hi])`.
    pub fn mass(&self, lo: f64, hi: f64) -> f64 {
        if hi < lo {
            return 0.0;
        }
        match self {
            WeightDistribution::Pareto { .. } => (self.cdf(hi) - self.cdf(lo)).max(0.0),
            _ => self.atoms().iter().filter(|a| a.0 >= lo && a.0 <= hi).map(|a| a.1).sum(),
        }
    }

    /// Density for the continuous law (zero for discrete ones).
    pub fn density(&self, m: f64) -> f64 {
        match self {
            WeightDistribution::Pareto { shape, truncation } => {
                if m < 1.0 || truncation.is_some_and(|t| m > t) {
                    return 0.0;
                }
                shape * libm::pow(m, -shape - 1.0) / Self::pareto_norm(*shape, *truncation)
            }
            _ => 0.0,
        }
    }

    /// Inverse CDF on `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            WeightDistribution::PointMass => 1.0,
            WeightDistribution::Pareto { shape, truncation } => {
                let c = Self::pareto_norm(*shape, *truncation);
                let m = libm::exp(-libm::log1p(-u * c) / shape);
                match truncation {
                    Some(t) => m.clamp(1.0, *t),
                    None => m.max(1.0),
                }
            }
            WeightDistribution::Discrete(atoms) => {
                let mut acc = 0.0;
                for &(m, q) in atoms {
                    acc += q;
                    if u < acc {
                        return m;
                    }
                }
                atoms.last().unwrap().0
            }
        }
    }

    /// Draw one weight.
    pub fn sample(&self, rng: &mut Stream) -> f64 {
        match self {
            WeightDistribution::PointMass => 1.0,
            _ => self.quantile(rng.uniform()),
        }
    }

    /// `Π(m, n)`: for continuous laws `π([m, m + 2^{−n}])`, for discrete laws
    /// the mass of the atom at `m`.
    pub fn bin_mass(&self, m: f64, n: u32) -> f64 {
        match self {
            WeightDistribution::Pareto { .. } => self.mass(m, m + libm::ldexp(1.0, -(n as i32))),
            _ => self.atoms().iter().filter(|a| a.0 == m).map(|a| a.1).sum(),
        }
    }

    /// The bin representatives `M_n` below `upper` (exclusive for continuous
    /// laws). For discrete laws these are the atoms, with weight 1 inserted
    /// at zero mass if it is not an atom.
    pub fn bins(&self, n: u32, upper: f64) -> Vec<f64> {
        match self {
            WeightDistribution::Pareto { truncation, .. } => {
                let top = truncation.map_or(upper, |t| t.min(upper));
                let step = libm::ldexp(1.0, -(n as i32));
                let mut out = Vec::new();
                let mut l = 0u64;
                loop {
                    let m = 1.0 + l as f64 * step;
                    if m >= top && l > 0 {
                        break;
                    }
                    out.push(m);
                    l += 1;
                }
                out
            }
            _ => {
                let mut out: Vec<f64> = self.atoms().iter().map(|a| a.0).filter(|&m| m < upper).collect();
                if out.first() != Some(&1.0) {
                    out.insert(0, 1.0);
                }
                out
            }
        }
    }

    /// Index of the bin in `bins` containing weight `m`.
    pub fn bin_of(&self, bins: &[f64], m: f64, n: u32) -> Option<usize> {
        match self {
            WeightDistribution::Pareto { .. } => {
                let l = libm::floor((m - 1.0) * libm::ldexp(1.0, n as i32)) as usize;
                if l < bins.len() { Some(l) } else { None }
            }
            _ => bins.iter().position(|&b| b == m),
        }
    }
}
