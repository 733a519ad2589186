//! Adjacency functions `φ(r; a, b)` and reach functions `R(m)`.

use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Non-decreasing reach function `R: [1,∞) → (0,∞)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Reach {
    /// `R(m) = m`.
    Identity,
    /// `R(m) = scale · m`.
    Linear { scale: f64 },
    /// `R(m) = scale · ln(1 + m)`.
    Log1p { scale: f64 },
    /// `R(m) = scale · m^exponent`.
    Power { scale: f64, exponent: f64 },
    /// `R(m) = value`.
    Constant { value: f64 },
}

impl Reach {
    #[inline]
    pub fn eval(&self, m: f64) -> f64 {
        match *self {
            Reach::Identity => m,
            Reach::Linear { scale } => scale * m,
            Reach::Log1p { scale } => scale * libm::log1p(m),
            Reach::Power { scale, exponent } => scale * libm::pow(m, exponent),
            Reach::Constant { value } => value,
        }
    }

    /// Smallest weight `m ≥ 1` with `R(m) ≥ r`, if the reach ever gets there.
    pub fn inverse(&self, r: f64) -> Option<f64> {
        let m = match *self {
            Reach::Identity => r,
            Reach::Linear { scale } => r / scale,
            Reach::Log1p { scale } => libm::expm1(r / scale),
            Reach::Power { scale, exponent } => {
                if exponent <= 0.0 {
                    return if self.eval(1.0) >= r { Some(1.0) } else { None };
                }
                libm::pow(r / scale, 1.0 / exponent)
            }
            Reach::Constant { value } => {
                return if value >= r { Some(1.0) } else { None };
            }
        };
        if m.is_finite() { Some(m.max(1.0)) } else { None }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Reach::Identity => true,
            Reach::Linear { scale } | Reach::Log1p { scale } => scale > 0.0,
            Reach::Power { scale, exponent } => scale > 0.0 && exponent >= 0.0,
            Reach::Constant { value } => value > 0.0,
        };
        if ok { Ok(()) } else { Err(Error::InvalidModel(format!("reach {self:?} is not positive and non-decreasing"))) }
    }
}

/// Multilinear table on `(r, a, b)`. Values beyond the last radius are zero
/// and weights outside the weight grid are clamped. The table is read at
/// `(min(a,b), max(a,b))`, which makes it symmetric by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub radii: Vec<f64>,
    pub weights: Vec<f64>,
    /// Row-major `[r][a][b]`.
    pub values: Vec<f64>,
}

impl Table {
    fn validate(&self) -> Result<()> {
        let (nr, nw) = (self.radii.len(), self.weights.len());
        if nr < 2 || nw < 1 || self.values.len() != nr * nw * nw {
            return Err(Error::InvalidModel(format!(
                "table needs at least two radii and {}x{}x{} values",
                nr, nw, nw
            )));
        }
        let sorted = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if !sorted(&self.radii) || !sorted(&self.weights) || self.radii[0] < 0.0 {
            return Err(Error::InvalidModel("table grids must be strictly increasing".into()));
        }
        if self.values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidModel("table values must lie in [0,1]".into()));
        }
        Ok(())
    }

    fn locate(grid: &[f64], x: f64) -> (usize, f64) {
        if x <= grid[0] || grid.len() == 1 {
            return (0, 0.0);
        }
        let last = grid.len() - 1;
        if x >= grid[last] {
            return (last - 1, 1.0);
        }
        let i = grid.partition_point(|&g| g <= x) - 1;
        (i, (x - grid[i]) / (grid[i + 1] - grid[i]))
    }

    fn eval(&self, r: f64, a: f64, b: f64) -> f64 {
        let rmax = *self.radii.last().unwrap();
        if r > rmax {
            return 0.0;
        }
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let nw = self.weights.len();
        let (ir, tr) = Self::locate(&self.radii, r);
        let (ia, ta) = Self::locate(&self.weights, lo);
        let (ib, tb) = Self::locate(&self.weights, hi);
        let at = |i: usize, j: usize, k: usize| -> f64 {
            let j = j.min(nw - 1);
            let k = k.min(nw - 1);
            self.values[(i * nw + j) * nw + k]
        };
        let mut v = 0.0;
        for (di, wi) in [(0, 1.0 - tr), (1, tr)] {
            for (dj, wj) in [(0, 1.0 - ta), (1, ta)] {
                for (dk, wk) in [(0, 1.0 - tb), (1, tb)] {
                    let w = wi * wj * wk;
                    if w != 0.0 {
                        v += w * at(ir + di, ia + dj, ib + dk);
                    }
                }
            }
        }
        v
    }
}

/// The shape of `φ` before any reach cut-off is applied.
#[derive(Clone, Debug)]
pub enum Form {
    /// `1{r ≤ radius}`.
    Gilbert { radius: f64 },
    /// `1 − exp(−w / r^exponent)` with `w = a·b` when `weighted`, else `w = 1`.
    SoftPower { exponent: f64, weighted: bool },
    /// `φ ≡ value`; mostly useful for degenerate tests.
    Constant { value: f64 },
    Tabulated(Table),
    /// Arbitrary function; the caller is responsible for its properties.
    Custom { f: fn(f64, f64, f64) -> f64, weighted: bool, range: Option<f64> },
}

impl PartialEq for Form {
    fn eq(&self, other: &Self) -> bool {
        use Form::*;
        match (self, other) {
            (Gilbert { radius: a }, Gilbert { radius: b }) => a == b,
            (SoftPower { exponent: a, weighted: x }, SoftPower { exponent: b, weighted: y }) => a == b && x == y,
            (Constant { value: a }, Constant { value: b }) => a == b,
            (Tabulated(a), Tabulated(b)) => a == b,
            (Custom { f, weighted: x, range: r }, Custom { f: g, weighted: y, range: s }) => {
                *f as usize == *g as usize && x == y && r == s
            }
            _ => false,
        }
    }
}

/// A full adjacency description: dimension, form and optional reach.
///
/// With a reach present, `φ(r; a, b) = 1{r ≤ R(min(a,b))} · form(r; a, b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdjacencySpec {
    pub dimension: usize,
    pub form: Form,
    pub reach: Option<Reach>,
}

impl AdjacencySpec {
    pub fn new(dimension: usize, form: Form, reach: Option<Reach>) -> Result<Self> {
        let s = AdjacencySpec { dimension, form, reach };
        s.validate()?;
        Ok(s)
    }

    /// Gilbert disc model `1{r ≤ radius}`.
    pub fn gilbert(dimension: usize, radius: f64) -> Self {
        AdjacencySpec { dimension, form: Form::Gilbert { radius }, reach: None }
    }

    /// Unweighted `1 − exp(−r^{−3})`.
    pub fn soft_cubic(dimension: usize) -> Self {
        AdjacencySpec { dimension, form: Form::SoftPower { exponent: 3.0, weighted: false }, reach: None }
    }

    /// `1{r ≤ min(a,b)} (1 − exp(−ab/r³))`.
    pub fn min_reach_cubic(dimension: usize) -> Self {
        AdjacencySpec {
            dimension,
            form: Form::SoftPower { exponent: 3.0, weighted: true },
            reach: Some(Reach::Identity),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension < 1 {
            return Err(Error::InvalidModel("dimension must be at least 1".into()));
        }
        match &self.form {
            Form::Gilbert { radius } if !(*radius > 0.0) => {
                return Err(Error::InvalidModel("gilbert radius must be positive".into()))
            }
            Form::SoftPower { exponent, .. } if !(*exponent > 0.0) => {
                return Err(Error::InvalidModel("soft-power exponent must be positive".into()))
            }
            Form::Constant { value } if !(0.0..=1.0).contains(value) => {
                return Err(Error::InvalidModel("constant adjacency must lie in [0,1]".into()))
            }
            Form::Tabulated(t) => t.validate()?,
            _ => {}
        }
        if let Some(r) = &self.reach {
            r.validate()?;
        }
        Ok(())
    }

    /// Whether `φ` depends on the weights at all.
    pub fn is_weighted(&self) -> bool {
        self.reach.is_some()
            || match &self.form {
                Form::Gilbert { .. } | Form::Constant { .. } => false,
                Form::SoftPower { weighted, .. } => *weighted,
                Form::Tabulated(t) => t.weights.len() > 1,
                Form::Custom { weighted, .. } => *weighted,
            }
    }

    /// Checked evaluation of `φ(r; a, b)`.
    pub fn eval(&self, r: f64, a: f64, b: f64) -> Result<f64> {
        if !(r >= 0.0) || !(a >= 1.0) || !(b >= 1.0) {
            return Err(Error::Domain(format!("need r >= 0 and a, b >= 1, got r={r}, a={a}, b={b}")));
        }
        Ok(self.phi(r, a, b))
    }

    /// Unchecked evaluation used on hot paths.
    #[inline]
    pub fn phi(&self, r: f64, a: f64, b: f64) -> f64 {
        if let Some(reach) = &self.reach {
            if r > reach.eval(a.min(b)) {
                return 0.0;
            }
        }
        self.form_value(r, a, b)
    }

    #[inline]
    fn form_value(&self, r: f64, a: f64, b: f64) -> f64 {
        match &self.form {
            Form::Gilbert { radius } => {
                if r <= *radius { 1.0 } else { 0.0 }
            }
            Form::SoftPower { exponent, weighted } => {
                let w = if *weighted { a * b } else { 1.0 };
                if r == 0.0 {
                    return 1.0;
                }
                let x = if *exponent == 3.0 { r * r * r } else { libm::pow(r, *exponent) };
                -libm::expm1(-w / x)
            }
            Form::Constant { value } => *value,
            Form::Tabulated(t) => t.eval(r, a, b),
            Form::Custom { f, .. } => {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                f(r, lo, hi)
            }
        }
    }

    /// An upper bound on the distance at which `φ(·; a, b)` can be positive,
    /// or `None` for infinite range.
    pub fn range(&self, a: f64, b: f64) -> Option<f64> {
        let form = match &self.form {
            Form::Gilbert { radius } => Some(*radius),
            Form::Tabulated(t) => t.radii.last().copied(),
            Form::Constant { value } if *value == 0.0 => Some(0.0),
            Form::Custom { range, .. } => *range,
            _ => None,
        };
        let reach = self.reach.as_ref().map(|r| r.eval(a.min(b)));
        match (form, reach) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        }
    }

    /// Distance used for the "touches the boundary" test: `R(1)` for reach
    /// models, otherwise the radius at which `φ(r; 1, 1)` first drops to 1/2.
    pub fn boundary_margin(&self) -> f64 {
        if let Some(r) = &self.reach {
            return r.eval(1.0);
        }
        if let Form::Gilbert { radius } = self.form {
            return radius;
        }
        if self.phi(0.0, 1.0, 1.0) < 0.5 {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut guard = 0;
        while self.phi(hi, 1.0, 1.0) >= 0.5 && guard < 200 {
            lo = hi;
            hi *= 2.0;
            guard += 1;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.phi(mid, 1.0, 1.0) >= 0.5 { lo = mid } else { hi = mid }
        }
        lo
    }
}
