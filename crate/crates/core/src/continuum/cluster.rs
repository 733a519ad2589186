use alloc::collections::VecDeque;
use alloc::vec::Vec;

use super::PointConfiguration;
use crate::dsu::UnionFind;

/// Connected component of one point.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterResult {
    /// Sorted member ids, the start point included.
    pub members: Vec<usize>,
    pub size: usize,
    pub touches_boundary: bool,
    /// Number of points first reached at each BFS depth (depth 0 is the start).
    pub generations: Vec<usize>,
    /// True if exploration stopped early because of a cap or a boundary stop.
    pub truncated: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ClusterOptions {
    /// Stop once this many members are found.
    pub cap: Option<usize>,
    /// Stop as soon as a member touches the boundary.
    pub stop_on_boundary: bool,
}

fn touches(cfg: &PointConfiguration, margin: f64, id: usize) -> bool {
    cfg.sup_norm(id) >= cfg.half_width() - margin - 1e-9
}

/// Breadth-first search from `start` over the lazy edges.
pub fn cluster_of(cfg: &PointConfiguration, start: usize, opts: ClusterOptions) -> ClusterResult {
    let margin = cfg.adjacency().boundary_margin();
    let mut seen = alloc::vec![false; cfg.len()];
    let mut members = alloc::vec![start];
    let mut generations = alloc::vec![1];
    let mut touch = touches(cfg, margin, start);
    let mut truncated = false;
    seen[start] = true;
    let mut queue = VecDeque::new();
    queue.push_back((start, 0usize));
    'bfs: while let Some((x, depth)) = queue.pop_front() {
        if opts.stop_on_boundary && touch {
            truncated = true;
            break;
        }
        let mut found = Vec::new();
        cfg.for_each_candidate(x, |j| {
            if !seen[j] && cfg.edge(x, j) {
                found.push(j);
            }
        });
        found.sort_unstable();
        for j in found {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            members.push(j);
            if generations.len() <= depth + 1 {
                generations.push(0);
            }
            generations[depth + 1] += 1;
            touch |= touches(cfg, margin, j);
            queue.push_back((j, depth + 1));
            if opts.cap.is_some_and(|c| members.len() >= c) {
                truncated = true;
                break 'bfs;
            }
        }
    }
    members.sort_unstable();
    ClusterResult { size: members.len(), members, touches_boundary: touch, generations, truncated }
}

/// Cluster of the registered origin; panics if none was added.
pub fn cluster_of_origin(cfg: &PointConfiguration, opts: ClusterOptions) -> ClusterResult {
    let o = cfg.origin().expect("configuration has no origin; call with_origin first");
    cluster_of(cfg, o, opts)
}

/// Partition of all points into clusters, ordered by smallest member.
pub fn all_clusters(cfg: &PointConfiguration) -> Vec<ClusterResult> {
    let n = cfg.len();
    let margin = cfg.adjacency().boundary_margin();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        cfg.for_each_candidate(i, |j| {
            if j > i && cfg.edge(i, j) {
                uf.union(i, j);
            }
        });
    }
    let mut slot = alloc::vec![usize::MAX; n];
    let mut out: Vec<ClusterResult> = Vec::new();
    for i in 0..n {
        let r = uf.find(i);
        if slot[r] == usize::MAX {
            slot[r] = out.len();
            out.push(ClusterResult {
                members: Vec::new(),
                size: 0,
                touches_boundary: false,
                generations: Vec::new(),
                truncated: false,
            });
        }
        let c = &mut out[slot[r]];
        c.members.push(i);
        c.size += 1;
        c.touches_boundary |= touches(cfg, margin, i);
    }
    out
}

/// Origin cluster as a function of the intensity, from one pass that adds
/// Poisson points in arrival order.
#[derive(Clone, Debug, PartialEq)]
pub struct OriginSweep {
    /// Arrival time of each Poisson point.
    pub arrivals: Vec<f64>,
    /// Origin cluster size after adding each point.
    pub sizes: Vec<u32>,
    /// Whether the origin cluster touches the boundary after each point.
    pub touching: Vec<bool>,
    /// Values before any Poisson point is present.
    pub initial_size: u32,
    pub initial_touch: bool,
}

impl OriginSweep {
    fn index(&self, intensity: f64) -> Option<usize> {
        let k = self.arrivals.partition_point(|&t| t <= intensity);
        if k == 0 { None } else { Some(k - 1) }
    }

    pub fn size_at(&self, intensity: f64) -> u32 {
        self.index(intensity).map_or(self.initial_size, |i| self.sizes[i])
    }

    pub fn touches_at(&self, intensity: f64) -> bool {
        self.index(intensity).map_or(self.initial_touch, |i| self.touching[i])
    }

    /// Smallest intensity at which the cluster touches the boundary (`∞` if
    /// it never does up to the sampled intensity).
    pub fn touch_threshold(&self) -> f64 {
        if self.initial_touch {
            return 0.0;
        }
        self.touching.iter().position(|&t| t).map_or(f64::INFINITY, |i| self.arrivals[i])
    }

    /// Smallest intensity at which the cluster has at least `k` points.
    pub fn size_threshold(&self, k: u32) -> f64 {
        if self.initial_size >= k {
            return 0.0;
        }
        self.sizes.iter().position(|&s| s >= k).map_or(f64::INFINITY, |i| self.arrivals[i])
    }
}

pub fn origin_sweep(cfg: &PointConfiguration) -> OriginSweep {
    sweep(cfg, false)
}

/// Smallest intensity at which the origin cluster touches the boundary,
/// stopping the sweep as soon as it does.
pub fn origin_touch_threshold(cfg: &PointConfiguration) -> f64 {
    sweep(cfg, true).touch_threshold()
}

fn sweep(cfg: &PointConfiguration, stop_on_touch: bool) -> OriginSweep {
    let o = cfg.origin().expect("configuration has no origin; call with_origin first");
    let n = cfg.len();
    let p = cfg.poisson_count();
    let margin = cfg.adjacency().boundary_margin();
    let mut uf = UnionFind::new(n);
    let mut touch: Vec<bool> = (0..n).map(|i| touches(cfg, margin, i)).collect();
    let join = |uf: &mut UnionFind, touch: &mut Vec<bool>, a: usize, b: usize| {
        let (ra, rb) = (uf.find(a), uf.find(b));
        if ra != rb {
            let t = touch[ra] | touch[rb];
            let r = uf.union(ra, rb);
            touch[r] = t;
        }
    };
    for i in p..n {
        cfg.for_each_candidate(i, |j| {
            if j > i && cfg.edge(i, j) {
                join(&mut uf, &mut touch, i, j);
            }
        });
    }
    let initial_size = uf.set_size(o) as u32;
    let initial_touch = touch[uf.find(o)];
    let mut sizes = Vec::with_capacity(p);
    let mut touching = Vec::with_capacity(p);
    let mut arrivals = Vec::with_capacity(p);
    for i in 0..p {
        let mut adj = Vec::new();
        cfg.for_each_candidate(i, |j| {
            if (j < i || j >= p) && cfg.edge(i, j) {
                adj.push(j);
            }
        });
        for j in adj {
            join(&mut uf, &mut touch, i, j);
        }
        let r = uf.find(o);
        sizes.push(uf.set_size(r) as u32);
        touching.push(touch[r]);
        arrivals.push(cfg.arrival(i));
        if stop_on_touch && touch[r] {
            break;
        }
    }
    OriginSweep { arrivals, sizes, touching, initial_size, initial_touch }
}
