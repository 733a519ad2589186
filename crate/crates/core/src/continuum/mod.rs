//! Marked Poisson configurations in a box and their random graphs.
//!
//! Points are generated as arrivals on the intensity axis: spacings are
//! `Exp(vol)` so the points with arrival time at most `λ` form a Poisson
//! process of intensity `λ`. Restricting to a smaller intensity keeps a prefix
//! of the ids, which couples all intensities monotonically.

mod cells;
mod cluster;

use alloc::format;
use alloc::vec::Vec;
use core::cell::OnceCell;

pub use cells::CellList;
pub use cluster::{all_clusters, cluster_of, cluster_of_origin, origin_sweep, origin_touch_threshold, ClusterOptions, ClusterResult, OriginSweep};

use crate::model::{AdjacencySpec, ModelSpec};
use crate::rng::{Domain, Stream, StreamKey};
use crate::{Error, Result};

/// Key bit marking inserted (non-Poisson) points.
pub const AUGMENTED_KEY: u64 = 1 << 63;

/// Borrowed view of one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarkedPoint<'a> {
    pub id: usize,
    pub position: &'a [f64],
    pub weight: f64,
    pub augmented: bool,
}

/// Poisson points followed by augmented points, with a lazy edge oracle.
#[derive(Clone, Debug)]
pub struct PointConfiguration {
    dimension: usize,
    half_width: f64,
    seed: u128,
    replica: u64,
    adjacency: AdjacencySpec,
    coords: Vec<f64>,
    weights: Vec<f64>,
    keys: Vec<u64>,
    arrivals: Vec<f64>,
    poisson: usize,
    origin: Option<usize>,
    edge_key: StreamKey,
    cells: OnceCell<CellList>,
}

/// Sample the Poisson points of `model` for one replica.
pub fn sample_ppp(model: &ModelSpec, seed: u128, replica: u64) -> PointConfiguration {
    let d = model.dimension();
    let l = model.half_width;
    let vol = model.volume();
    let mut s = Stream::new(seed, replica, Domain::Points, 0);
    let mut cfg = PointConfiguration::empty(&model.adjacency, l, seed, replica);
    let mut t = 0.0;
    if model.intensity > 0.0 {
        loop {
            t += s.exponential() / vol;
            if t > model.intensity {
                break;
            }
            for _ in 0..d {
                cfg.coords.push(-l + 2.0 * l * s.uniform());
            }
            cfg.weights.push(model.weights.sample(&mut s));
            cfg.keys.push(cfg.arrivals.len() as u64);
            cfg.arrivals.push(t);
        }
    }
    cfg.poisson = cfg.weights.len();
    cfg
}

impl PointConfiguration {
    /// A configuration without points.
    pub fn empty(adjacency: &AdjacencySpec, half_width: f64, seed: u128, replica: u64) -> Self {
        PointConfiguration {
            dimension: adjacency.dimension,
            half_width,
            seed,
            replica,
            adjacency: adjacency.clone(),
            coords: Vec::new(),
            weights: Vec::new(),
            keys: Vec::new(),
            arrivals: Vec::new(),
            poisson: 0,
            origin: None,
            edge_key: StreamKey::new(seed, replica, Domain::Edges, 0),
            cells: OnceCell::new(),
        }
    }

    /// Total number of points, augmented ones included.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Number of Poisson points.
    pub fn poisson_count(&self) -> usize {
        self.poisson
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn seed(&self) -> u128 {
        self.seed
    }

    pub fn replica(&self) -> u64 {
        self.replica
    }

    pub fn adjacency(&self) -> &AdjacencySpec {
        &self.adjacency
    }

    /// Id of the point registered as the origin, if any.
    pub fn origin(&self) -> Option<usize> {
        self.origin
    }

    pub fn point(&self, id: usize) -> MarkedPoint<'_> {
        MarkedPoint { id, position: self.position(id), weight: self.weights[id], augmented: id >= self.poisson }
    }

    #[inline]
    pub fn position(&self, id: usize) -> &[f64] {
        &self.coords[id * self.dimension..(id + 1) * self.dimension]
    }

    #[inline]
    pub fn weight(&self, id: usize) -> f64 {
        self.weights[id]
    }

    /// Stable key used by the edge oracle.
    pub fn key(&self, id: usize) -> u64 {
        self.keys[id]
    }

    /// Arrival time on the intensity axis (zero for augmented points).
    pub fn arrival(&self, id: usize) -> f64 {
        if id < self.poisson { self.arrivals[id] } else { 0.0 }
    }

    /// Insert fixed points. New ids are appended; existing edge variates are
    /// untouched because variates are keyed by stable point keys.
    pub fn augment(&self, points: &[(&[f64], f64)]) -> Result<Self> {
        let mut out = self.clone();
        out.cells = OnceCell::new();
        for &(pos, w) in points {
            if pos.len() != self.dimension {
                return Err(Error::Domain(format!("position has {} coordinates, expected {}", pos.len(), self.dimension)));
            }
            if !(w >= 1.0) {
                return Err(Error::Domain(format!("weight {w} below 1")));
            }
            if pos.iter().any(|x| x.abs() > self.half_width) {
                return Err(Error::Domain("augmented point outside the box".into()));
            }
            if (0..out.len()).any(|i| out.weights[i] == w && out.position(i) == pos) {
                return Err(Error::Domain("duplicate augmented point".into()));
            }
            let ordinal = (out.len() - out.poisson) as u64;
            out.coords.extend_from_slice(pos);
            out.weights.push(w);
            out.keys.push(AUGMENTED_KEY | ordinal);
        }
        Ok(out)
    }

    /// Add the origin `(0̄, weight)` and register it.
    pub fn with_origin(&self, weight: f64) -> Result<Self> {
        let zero = alloc::vec![0.0; self.dimension];
        let mut out = self.augment(&[(&zero, weight)])?;
        out.origin = Some(out.len() - 1);
        Ok(out)
    }

    /// Keep the Poisson points with arrival at most `intensity` (a prefix)
    /// together with every augmented point.
    pub fn restrict_intensity(&self, intensity: f64) -> Self {
        let keep = self.arrivals.partition_point(|&t| t <= intensity);
        self.filter(|i| i >= self.poisson || i < keep)
    }

    /// Keep points inside `[-h, h)^d` (augmented points are always kept).
    pub fn restrict_box(&self, h: f64) -> Self {
        let mut out = self.filter(|i| i >= self.poisson || self.position(i).iter().all(|&x| x >= -h && x < h));
        out.half_width = h;
        out
    }

    /// Keep points of weight below `limit` (augmented points are always kept).
    pub fn restrict_weight(&self, limit: f64) -> Self {
        self.filter(|i| i >= self.poisson || self.weights[i] < limit)
    }

    /// Keep Poisson points with weight in `[lo, hi]` (augmented points are
    /// always kept).
    pub fn restrict_weight_range(&self, lo: f64, hi: f64) -> Self {
        self.filter(|i| i >= self.poisson || (self.weights[i] >= lo && self.weights[i] <= hi))
    }

    fn filter<F: Fn(usize) -> bool>(&self, keep: F) -> Self {
        let mut out = PointConfiguration::empty(&self.adjacency, self.half_width, self.seed, self.replica);
        for i in 0..self.len() {
            if !keep(i) {
                continue;
            }
            if Some(i) == self.origin {
                out.origin = Some(out.len());
            }
            out.coords.extend_from_slice(self.position(i));
            out.weights.push(self.weights[i]);
            out.keys.push(self.keys[i]);
            if i < self.poisson {
                out.arrivals.push(self.arrivals[i]);
                out.poisson += 1;
            }
        }
        out
    }

    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.position(i), self.position(j));
        let mut s = 0.0;
        for k in 0..self.dimension {
            let t = a[k] - b[k];
            s += t * t;
        }
        libm::sqrt(s)
    }

    /// The edge variate `u_{ij}` of the unordered pair.
    #[inline]
    pub fn edge_variate(&self, i: usize, j: usize) -> f64 {
        self.edge_key.pair_uniform(self.keys[i], self.keys[j])
    }

    /// Whether `i` and `j` are joined: `u_{ij} < φ(|x_i − x_j|; a_i, a_j)`.
    #[inline]
    pub fn edge(&self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        let p = self.adjacency.phi(self.distance(i, j), self.weights[i], self.weights[j]);
        if p <= 0.0 {
            false
        } else if p >= 1.0 {
            true
        } else {
            self.edge_variate(i, j) < p
        }
    }

    /// Same as [`edge`](Self::edge) under a different adjacency function,
    /// sharing the edge variates.
    pub fn edge_under(&self, adj: &AdjacencySpec, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        let p = adj.phi(self.distance(i, j), self.weights[i], self.weights[j]);
        p > 0.0 && (p >= 1.0 || self.edge_variate(i, j) < p)
    }

    fn cell_list(&self) -> Option<&CellList> {
        let base = self.adjacency.range(1.0, 1.0)?;
        Some(self.cells.get_or_init(|| CellList::build(self, base)))
    }

    /// Ids that may be adjacent to `id` (a superset of the true neighbours).
    pub fn for_each_candidate<F: FnMut(usize)>(&self, id: usize, mut f: F) {
        let max_w = f64::INFINITY;
        match (self.cell_list(), self.adjacency.range(self.weights[id], max_w)) {
            (Some(cl), Some(r)) => cl.for_each_near(self, self.position(id), r, |j| {
                if j != id {
                    f(j)
                }
            }),
            _ => {
                for j in 0..self.len() {
                    if j != id {
                        f(j)
                    }
                }
            }
        }
    }

    /// Sorted ids adjacent to `id`.
    pub fn neighbors(&self, id: usize) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_candidate(id, |j| {
            if self.edge(id, j) {
                out.push(j)
            }
        });
        out.sort_unstable();
        out
    }

    /// Largest coordinate magnitude of a point, used for boundary tests.
    pub fn sup_norm(&self, id: usize) -> f64 {
        self.position(id).iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}
