//! The ghost-field exploration forest.
//!
//! Every vertex `u` owns a tree that first queries its copy `ũ`. A green
//! vertex then queries `u` itself and, if open, explores its open cluster:
//! the minimal unrevealed edge with an endpoint among the revealed open
//! vertices and none among the revealed closed ones is queried next, and an
//! open edge is immediately followed by its unrevealed endpoint.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::lattice::SiteBond;
use crate::rng::{Domain, Stream};

/// A coordinate of the augmented product space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Coordinate {
    Copy(u32),
    Vertex(u32),
    /// Stored with the smaller endpoint first.
    Edge(u32, u32),
}

impl Coordinate {
    pub fn edge(a: u32, b: u32) -> Self {
        Coordinate::Edge(a.min(b), a.max(b))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Coordinate::Copy(_) => "copy",
            Coordinate::Vertex(_) => "vertex",
            Coordinate::Edge(..) => "edge",
        }
    }
}

/// How the tree of the target vertex behaves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RootPolicy {
    /// Reveal only the copy of the target and halt.
    CopyOnly,
    /// Explore from the target like from any other vertex.
    Explore,
}

/// Open copies, each independently with probability `1 − e^{−γ̃}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GhostField {
    pub gamma: f64,
    green: Vec<u32>,
}

impl GhostField {
    pub fn new(gamma: f64, mut green: Vec<u32>) -> Self {
        green.sort_unstable();
        green.dedup();
        GhostField { gamma, green }
    }

    /// Sample copies of `n` vertices.
    pub fn sample(n: usize, gamma: f64, seed: u128, replica: u64) -> Self {
        let h = -libm::expm1(-gamma);
        let mut green = Vec::new();
        let mut s = Stream::new(seed, replica, Domain::Copies, 0);
        let mut v: u64 = 0;
        loop {
            let Some(x) = v.checked_add(s.geometric(h)) else { break };
            if x >= n as u64 {
                break;
            }
            green.push(x as u32);
            v = x + 1;
        }
        GhostField { gamma, green }
    }

    pub fn open_probability(&self) -> f64 {
        -libm::expm1(-self.gamma)
    }

    pub fn is_green(&self, v: u32) -> bool {
        self.green.binary_search(&v).is_ok()
    }

    pub fn green(&self) -> &[u32] {
        &self.green
    }
}

/// Log of one tree: queried coordinates in order and the revealed sets.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TreeLog {
    pub root: u32,
    pub queries: Vec<Coordinate>,
    pub open_vertices: Vec<u32>,
    pub closed_vertices: Vec<u32>,
    pub open_edges: Vec<(u32, u32)>,
    pub closed_edges: Vec<(u32, u32)>,
}

/// Result of one forest run. Trees of non-green vertices query only their
/// copy and are not stored.
#[derive(Clone, Debug, PartialEq)]
pub struct ExplorationTrace {
    pub g: bool,
    pub target: u32,
    pub vertex_count: usize,
    pub trees: Vec<TreeLog>,
}

impl ExplorationTrace {
    /// Vertices queried by some tree, sorted.
    pub fn revealed_vertices(&self) -> Vec<u32> {
        let mut out: Vec<u32> = self
            .trees
            .iter()
            .flat_map(|t| t.open_vertices.iter().chain(&t.closed_vertices).copied())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Edges queried by some tree, sorted.
    pub fn revealed_edges(&self) -> Vec<(u32, u32)> {
        let mut out: Vec<(u32, u32)> =
            self.trees.iter().flat_map(|t| t.open_edges.iter().chain(&t.closed_edges).copied()).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn is_revealed(&self, c: Coordinate) -> bool {
        match c {
            Coordinate::Copy(v) => (v as usize) < self.vertex_count,
            _ => self.trees.iter().any(|t| t.queries.contains(&c)),
        }
    }
}

/// Run every tree of the forest for `g = 1{some green vertex in C(target)}`.
pub fn run_forest<G: SiteBond + ?Sized>(
    graph: &G,
    ghost: &GhostField,
    target: u32,
    policy: RootPolicy,
) -> ExplorationTrace {
    let mut trees = Vec::new();
    let mut g = ghost.is_green(target);
    let mut cand = Vec::new();
    for &u in ghost.green() {
        if u == target && policy == RootPolicy::CopyOnly {
            continue;
        }
        let log = explore(graph, u, &mut cand);
        g |= log.open_vertices.binary_search(&target).is_ok() || log.closed_vertices.binary_search(&target).is_ok();
        trees.push(log);
    }
    ExplorationTrace { g, target, vertex_count: graph.vertex_count(), trees }
}

/// Tree of a green vertex `u`, from the query of `u` onwards.
fn explore<G: SiteBond + ?Sized>(graph: &G, u: u32, cand: &mut Vec<u32>) -> TreeLog {
    let mut log = TreeLog { root: u, queries: alloc::vec![Coordinate::Copy(u), Coordinate::Vertex(u)], ..Default::default() };
    if !graph.is_open(u) {
        log.closed_vertices.push(u);
        return log;
    }
    let mut open = BTreeSet::from([u]);
    let mut closed = BTreeSet::new();
    let mut revealed = BTreeSet::new();
    let mut frontier = BTreeSet::new();
    let push_frontier = |x: u32, frontier: &mut BTreeSet<(u32, u32)>, closed: &BTreeSet<u32>, revealed: &BTreeSet<(u32, u32)>, cand: &mut Vec<u32>| {
        graph.candidates(x, cand);
        for &w in cand.iter() {
            let e = (x.min(w), x.max(w));
            if graph.edge_possible(x, w) && !closed.contains(&w) && !revealed.contains(&e) {
                frontier.insert(e);
            }
        }
    };
    push_frontier(u, &mut frontier, &closed, &revealed, cand);
    while let Some(e) = frontier.pop_first() {
        if revealed.contains(&e) || closed.contains(&e.0) || closed.contains(&e.1) {
            continue;
        }
        revealed.insert(e);
        log.queries.push(Coordinate::Edge(e.0, e.1));
        if !graph.edge_open(e.0, e.1) {
            log.closed_edges.push(e);
            continue;
        }
        log.open_edges.push(e);
        let other = if open.contains(&e.0) { e.1 } else { e.0 };
        if open.contains(&other) {
            continue;
        }
        log.queries.push(Coordinate::Vertex(other));
        if graph.is_open(other) {
            open.insert(other);
            push_frontier(other, &mut frontier, &closed, &revealed, cand);
        } else {
            closed.insert(other);
        }
    }
    log.open_vertices = open.into_iter().collect();
    log.closed_vertices = closed.into_iter().collect();
    log
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::cluster_members;
    use crate::lattice::tests_support::Explicit;

    fn toy() -> Explicit {
        // 0 - 1 - 2 open path, 3 closed hanging off 2, 4 open isolated
        Explicit { n: 5, root: 0, open: alloc::vec![0, 1, 2, 4], edges: alloc::vec![(0, 1), (1, 2), (2, 3)] }
    }

    #[test]
    fn no_green_reveals_copies_only() {
        let g = toy();
        let t = run_forest(&g, &GhostField::new(0.1, Vec::new()), 0, RootPolicy::CopyOnly);
        assert!(!t.g);
        assert!(t.trees.is_empty());
        assert!(t.revealed_vertices().is_empty());
        assert!(t.is_revealed(Coordinate::Copy(3)));
    }

    #[test]
    fn isolated_green_vertex_reveals_its_edges() {
        let g = toy();
        let t = run_forest(&g, &GhostField::new(0.1, alloc::vec![4]), 0, RootPolicy::CopyOnly);
        assert!(!t.g);
        let tr = &t.trees[0];
        assert_eq!(tr.queries[..2], [Coordinate::Copy(4), Coordinate::Vertex(4)]);
        assert_eq!(tr.open_vertices, alloc::vec![4]);
        assert_eq!(tr.closed_edges, alloc::vec![(0, 4), (1, 4), (2, 4), (3, 4)]);
        assert!(tr.open_edges.is_empty());
    }

    #[test]
    fn green_vertex_explores_cluster_and_closed_neighbour() {
        let g = toy();
        let t = run_forest(&g, &GhostField::new(0.1, alloc::vec![2]), 0, RootPolicy::CopyOnly);
        assert!(t.g);
        let tr = &t.trees[0];
        assert_eq!(tr.open_vertices, cluster_members(&g, 2));
        assert_eq!(tr.closed_vertices, alloc::vec![3]);
        // every edge query has an endpoint revealed open and none revealed closed
        let (mut open, mut closed) = (BTreeSet::new(), BTreeSet::new());
        for (i, q) in tr.queries.iter().enumerate() {
            match *q {
                Coordinate::Vertex(x) if g.is_open(x) => open.insert(x),
                Coordinate::Vertex(x) => closed.insert(x),
                Coordinate::Edge(a, b) => {
                    assert!(open.contains(&a) || open.contains(&b), "query {i}");
                    assert!(!closed.contains(&a) && !closed.contains(&b), "query {i}");
                    true
                }
                Coordinate::Copy(_) => true,
            };
        }
        // case 1: a vertex is only ever queried right after an open edge to it
        for (i, q) in tr.queries.iter().enumerate().skip(2) {
            if let Coordinate::Vertex(x) = *q {
                let Coordinate::Edge(a, b) = tr.queries[i - 1] else { panic!("vertex query not after an edge") };
                assert!(tr.open_edges.contains(&(a, b)) && (a == x || b == x));
            }
        }
        let mut seen = BTreeSet::new();
        assert!(tr.queries.iter().all(|q| seen.insert(*q)));
    }

    #[test]
    fn root_policy() {
        let g = toy();
        let gh = GhostField::new(0.1, alloc::vec![0]);
        let a = run_forest(&g, &gh, 0, RootPolicy::CopyOnly);
        assert!(a.g && a.trees.is_empty());
        let b = run_forest(&g, &gh, 0, RootPolicy::Explore);
        assert!(b.g);
        assert_eq!(b.revealed_vertices(), alloc::vec![0, 1, 2, 3]);
    }

    #[test]
    fn ghost_sampling_rate() {
        let n = 200_000;
        let gh = GhostField::sample(n, 0.2, 9, 0);
        let h = gh.open_probability();
        let se = libm::sqrt(h * (1.0 - h) / n as f64);
        assert!((gh.green().len() as f64 / n as f64 - h).abs() < 4.0 * se);
    }
}
