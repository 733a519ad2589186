//! Model description: adjacency, weights, intensity and observation box.

pub mod adjacency;
pub mod bounds;
pub mod quadrature;
pub mod weights;

use alloc::format;
use alloc::vec::Vec;

pub use adjacency::{AdjacencySpec, Form, Reach, Table};
pub use bounds::{
    connection_profile, default_weight_grid, emc_check, gw_bounds, nb_bounds, neighborhood_integral,
    sphere_area, EmcReport, EmcVerdict, GwBounds, NbBounds, QuadratureParams,
};
pub use weights::WeightDistribution;

use crate::{Error, Result};

/// A weighted random connection model observed in `[-L, L]^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub adjacency: AdjacencySpec,
    pub weights: WeightDistribution,
    pub intensity: f64,
    pub half_width: f64,
}

impl ModelSpec {
    pub fn new(adjacency: AdjacencySpec, weights: WeightDistribution, intensity: f64, half_width: f64) -> Result<Self> {
        let m = ModelSpec { adjacency, weights, intensity, half_width };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        self.adjacency.validate()?;
        self.weights.validate()?;
        if !(self.intensity > 0.0) || !self.intensity.is_finite() {
            return Err(Error::InvalidModel(format!("intensity {} must be positive", self.intensity)));
        }
        if !(self.half_width > 0.0) || !self.half_width.is_finite() {
            return Err(Error::InvalidModel(format!("box half-width {} must be positive", self.half_width)));
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.adjacency.dimension
    }

    pub fn with_intensity(&self, intensity: f64) -> Self {
        ModelSpec { intensity, ..self.clone() }
    }

    pub fn with_half_width(&self, half_width: f64) -> Self {
        ModelSpec { half_width, ..self.clone() }
    }

    /// Volume of the observation box.
    pub fn volume(&self) -> f64 {
        libm::pow(2.0 * self.half_width, self.dimension() as f64)
    }
}

/// Which structural property a grid point violates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AssumptionKind {
    /// Value outside `[0, 1]` or asymmetric in the weights.
    Range,
    /// Increasing in the distance.
    MonotoneDistance,
    /// Decreasing in a weight.
    MonotoneWeight,
    /// Positive beyond the reach or zero inside `R(1)`.
    Reach,
}

/// A violating grid point: `earlier` is the smaller grid value of the
/// compared coordinate, `later` the larger one.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub kind: AssumptionKind,
    pub r: f64,
    pub a: f64,
    pub b: f64,
    pub earlier: f64,
    pub later: f64,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct AssumptionReport {
    pub a1_ok: bool,
    pub a2_ok: bool,
    pub a3_ok: bool,
    pub reach_ok: bool,
    pub violations: Vec<Violation>,
}

impl AssumptionReport {
    pub fn ok(&self) -> bool {
        self.a1_ok && self.a2_ok && self.a3_ok && self.reach_ok
    }
}

/// Sorted evaluation grids for [`check_assumptions`].
#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionGrid {
    pub radii: Vec<f64>,
    pub weights: Vec<f64>,
}

impl AssumptionGrid {
    pub fn uniform(r_max: f64, nr: usize, a_max: f64, na: usize) -> Self {
        let radii = (0..nr).map(|i| r_max * (i + 1) as f64 / nr as f64).collect();
        let weights = if na <= 1 {
            alloc::vec![1.0]
        } else {
            (0..na).map(|i| 1.0 + (a_max - 1.0) * i as f64 / (na - 1) as f64).collect()
        };
        AssumptionGrid { radii, weights }
    }
}

const SLACK: f64 = 1e-12;

/// Scan a grid for violations of the structural assumptions. Isotropy holds by
/// construction since `φ` is a function of the distance only.
pub fn check_assumptions(adj: &AdjacencySpec, grid: &AssumptionGrid) -> AssumptionReport {
    let mut rep = AssumptionReport { a1_ok: true, a2_ok: true, a3_ok: true, reach_ok: true, violations: Vec::new() };
    let (rs, ws) = (&grid.radii, &grid.weights);
    let push = |rep: &mut AssumptionReport, v: Violation| {
        match v.kind {
            AssumptionKind::Range => rep.a1_ok = false,
            AssumptionKind::MonotoneDistance => rep.a2_ok = false,
            AssumptionKind::MonotoneWeight => rep.a3_ok = false,
            AssumptionKind::Reach => rep.reach_ok = false,
        }
        rep.violations.push(v);
    };
    for &a in ws {
        for &b in ws {
            // values and symmetry, then monotonicity in r via a running minimum
            let mut lowest: Option<(f64, f64)> = None;
            for &r in rs {
                let v = adj.phi(r, a, b);
                if !(0.0..=1.0).contains(&v) || v != adj.phi(r, b, a) {
                    push(&mut rep, Violation { kind: AssumptionKind::Range, r, a, b, earlier: v, later: adj.phi(r, b, a) });
                }
                if let Some((r0, v0)) = lowest {
                    if v0 < v - SLACK {
                        push(&mut rep, Violation { kind: AssumptionKind::MonotoneDistance, r, a, b, earlier: r0, later: r });
                    }
                }
                if lowest.is_none_or(|(_, v0)| v < v0) {
                    lowest = Some((r, v));
                }
            }
        }
    }
    for &r in rs {
        for &b in ws {
            let mut highest: Option<(f64, f64)> = None;
            for &a in ws {
                let v = adj.phi(r, a, b);
                if let Some((a0, v0)) = highest {
                    if v < v0 - SLACK {
                        push(&mut rep, Violation { kind: AssumptionKind::MonotoneWeight, r, a, b, earlier: a0, later: a });
                    }
                }
                if highest.is_none_or(|(_, v0)| v > v0) {
                    highest = Some((a, v));
                }
            }
        }
    }
    if let Some(reach) = &adj.reach {
        let r1 = reach.eval(1.0);
        for &r in rs {
            if r < r1 && adj.phi(r, 1.0, 1.0) <= 0.0 {
                push(&mut rep, Violation { kind: AssumptionKind::Reach, r, a: 1.0, b: 1.0, earlier: r1, later: 0.0 });
            }
            for &a in ws {
                for &b in ws {
                    let lim = reach.eval(a.min(b));
                    let v = adj.phi(r, a, b);
                    if r > lim && v != 0.0 {
                        push(&mut rep, Violation { kind: AssumptionKind::Reach, r, a, b, earlier: lim, later: v });
                    }
                }
            }
        }
    }
    rep
}
