//! Site-bond configurations on a finite vertex set and their clusters.
//!
//! The cluster of a vertex `v` is `v` itself together with every open vertex
//! joined to it by a path of open vertices and open edges; `v` need not be
//! open.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

/// A realised site-bond configuration.
pub trait SiteBond {
    fn vertex_count(&self) -> usize;
    fn root(&self) -> u32;
    fn is_open(&self, v: u32) -> bool;
    /// Sorted list of open vertices.
    fn open_vertices(&self) -> &[u32];
    fn edge_open(&self, a: u32, b: u32) -> bool;
    /// Vertices whose edge with `v` may be open, sorted, without `v`.
    fn candidates(&self, v: u32, out: &mut Vec<u32>) {
        out.clear();
        out.extend((0..self.vertex_count() as u32).filter(|&w| w != v));
    }
    /// Whether the state of edge `{a, b}` is random (not forced to 0 or 1).
    fn edge_is_random(&self, _a: u32, _b: u32) -> bool {
        true
    }
    /// Whether edge `{a, b}` can be open at all.
    fn edge_possible(&self, _a: u32, _b: u32) -> bool {
        true
    }
}

/// Cluster of `start`: BFS over open vertices and open edges.
pub fn cluster_members<G: SiteBond + ?Sized>(g: &G, start: u32) -> Vec<u32> {
    cluster_avoiding(g, start, None, usize::MAX)
}

/// Cluster size of `start`, with `blocked` treated as closed, stopping once
/// `cap` members are found.
pub fn cluster_avoiding<G: SiteBond + ?Sized>(g: &G, start: u32, blocked: Option<u32>, cap: usize) -> Vec<u32> {
    let open = g.open_vertices();
    let mut seen = alloc::vec![false; open.len()];
    let mut members = alloc::vec![start];
    if let Ok(i) = open.binary_search(&start) {
        seen[i] = true;
    }
    if let Some(b) = blocked {
        if let Ok(i) = open.binary_search(&b) {
            seen[i] = true;
        }
    }
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        if members.len() >= cap {
            break;
        }
        for (i, &w) in open.iter().enumerate() {
            if !seen[i] && g.edge_open(x, w) {
                seen[i] = true;
                members.push(w);
                queue.push_back(w);
            }
        }
    }
    members.sort_unstable();
    members
}

pub fn cluster_size<G: SiteBond + ?Sized>(g: &G, start: u32) -> usize {
    cluster_members(g, start).len()
}

/// Pivotality of every vertex for `{|C(root)| ≥ k}`.
///
/// Open vertices are pivotal when closing them breaks the event; closed
/// vertices when opening them creates it. The root never is, since the event
/// ignores its state.
pub struct Pivotality {
    pub root_cluster: Vec<u32>,
    /// Component label for each open vertex (index into `open_vertices`) and
    /// for the root (last slot).
    labels: Vec<u32>,
    sizes: Vec<u32>,
    k: usize,
}

impl Pivotality {
    pub fn new<G: SiteBond + ?Sized>(g: &G, k: usize) -> Self {
        let open = g.open_vertices();
        let root = g.root();
        let n = open.len();
        let root_slot = open.binary_search(&root).unwrap_or(n);
        let total = if root_slot == n { n + 1 } else { n };
        let vertex_at = |i: usize| if i < n { open[i] } else { root };
        let mut labels = alloc::vec![u32::MAX; total];
        let mut sizes = Vec::new();
        let mut root_cluster = Vec::new();
        let mut queue = VecDeque::new();
        let order: Vec<usize> = core::iter::once(root_slot).chain((0..total).filter(|&i| i != root_slot)).collect();
        for s in order {
            if labels[s] != u32::MAX {
                continue;
            }
            let lab = sizes.len() as u32;
            labels[s] = lab;
            let mut size = 1u32;
            queue.push_back(s);
            while let Some(x) = queue.pop_front() {
                let vx = vertex_at(x);
                if lab == 0 {
                    root_cluster.push(vx);
                }
                for y in 0..total {
                    if labels[y] == u32::MAX && g.edge_open(vx, vertex_at(y)) {
                        labels[y] = lab;
                        size += 1;
                        queue.push_back(y);
                    }
                }
            }
            sizes.push(size);
        }
        root_cluster.sort_unstable();
        let mut lab_open = alloc::vec![0u32; n];
        lab_open.copy_from_slice(&labels[..n]);
        if root_slot == n {
            lab_open.push(labels[n]);
        }
        Pivotality { root_cluster, labels: lab_open, sizes, k }
    }

    pub fn root_size(&self) -> usize {
        self.sizes[0] as usize
    }

    pub fn event(&self) -> bool {
        self.root_size() >= self.k
    }

    /// Whether vertex `w` is pivotal.
    pub fn is_pivotal<G: SiteBond + ?Sized>(&self, g: &G, w: u32) -> bool {
        let root = g.root();
        if w == root {
            return false;
        }
        if g.is_open(w) {
            if !self.event() || self.root_cluster.binary_search(&w).is_err() {
                return false;
            }
            cluster_avoiding(g, root, Some(w), self.k).len() < self.k
        } else {
            if self.event() {
                return false;
            }
            let open = g.open_vertices();
            let mut touched: Vec<u32> = Vec::new();
            let mut joins_root = false;
            if g.edge_open(w, root) {
                joins_root = true;
            }
            for (i, &v) in open.iter().enumerate() {
                if v == root || !g.edge_open(w, v) {
                    continue;
                }
                let lab = self.labels[i];
                if lab == 0 {
                    joins_root = true;
                } else if !touched.contains(&lab) {
                    touched.push(lab);
                }
            }
            if !joins_root {
                return false;
            }
            let total = self.root_size() + 1 + touched.iter().map(|&l| self.sizes[l as usize] as usize).sum::<usize>();
            total >= self.k
        }
    }
}

/// Every pivotal vertex, sorted.
pub fn pivotal_vertices<G: SiteBond + ?Sized>(g: &G, piv: &Pivotality) -> Vec<u32> {
    let root = g.root();
    let mut out = Vec::new();
    if piv.event() {
        for &w in &piv.root_cluster {
            if w != root && piv.is_pivotal(g, w) {
                out.push(w);
            }
        }
        return out;
    }
    // Only closed vertices that can reach the root cluster in one step.
    let mut cand = Vec::new();
    let mut pool = Vec::new();
    for &c in &piv.root_cluster {
        g.candidates(c, &mut cand);
        pool.extend(cand.iter().copied().filter(|&w| w != root && !g.is_open(w)));
    }
    pool.sort_unstable();
    pool.dedup();
    for w in pool {
        if piv.is_pivotal(g, w) {
            out.push(w);
        }
    }
    out
}

/// `|C(v)|` for every vertex `v`.
pub fn all_cluster_sizes<G: SiteBond + ?Sized>(g: &G) -> Vec<u32> {
    let open = g.open_vertices();
    let mut dsu = crate::dsu::UnionFind::new(open.len());
    let mut cand = Vec::new();
    for (i, &a) in open.iter().enumerate() {
        g.candidates(a, &mut cand);
        for &b in &cand {
            if b > a {
                if let Ok(j) = open.binary_search(&b) {
                    if g.edge_open(a, b) {
                        dsu.union(i, j);
                    }
                }
            }
        }
    }
    let mut out = alloc::vec![1u32; g.vertex_count()];
    for (i, &a) in open.iter().enumerate() {
        out[a as usize] = dsu.set_size(i) as u32;
    }
    let mut seen: Vec<usize> = Vec::new();
    for v in 0..g.vertex_count() as u32 {
        if g.is_open(v) {
            continue;
        }
        seen.clear();
        for (j, &b) in open.iter().enumerate() {
            if g.edge_open(v, b) {
                let r = dsu.find(j);
                if !seen.contains(&r) {
                    seen.push(r);
                    out[v as usize] += dsu.set_size(j) as u32;
                }
            }
        }
    }
    out
}

/// A configuration with one vertex or one edge forced to a state.
pub struct Toggled<'g, G: SiteBond + ?Sized> {
    pub base: &'g G,
    vertex: Option<(u32, bool)>,
    edge: Option<((u32, u32), bool)>,
    open: Vec<u32>,
}

impl<'g, G: SiteBond + ?Sized> Toggled<'g, G> {
    pub fn vertex(base: &'g G, v: u32, state: bool) -> Self {
        let mut open: Vec<u32> = base.open_vertices().to_vec();
        match (open.binary_search(&v), state) {
            (Err(i), true) => open.insert(i, v),
            (Ok(i), false) => {
                open.remove(i);
            }
            _ => {}
        }
        Toggled { base, vertex: Some((v, state)), edge: None, open }
    }

    pub fn edge(base: &'g G, a: u32, b: u32, state: bool) -> Self {
        let key = if a < b { (a, b) } else { (b, a) };
        Toggled { base, vertex: None, edge: Some((key, state)), open: base.open_vertices().to_vec() }
    }
}

impl<G: SiteBond + ?Sized> SiteBond for Toggled<'_, G> {
    fn vertex_count(&self) -> usize {
        self.base.vertex_count()
    }
    fn root(&self) -> u32 {
        self.base.root()
    }
    fn is_open(&self, v: u32) -> bool {
        match self.vertex {
            Some((x, s)) if x == v => s,
            _ => self.base.is_open(v),
        }
    }
    fn open_vertices(&self) -> &[u32] {
        &self.open
    }
    fn edge_open(&self, a: u32, b: u32) -> bool {
        let key = if a < b { (a, b) } else { (b, a) };
        match self.edge {
            Some((e, s)) if e == key => s,
            _ => self.base.edge_open(a, b),
        }
    }
    fn candidates(&self, v: u32, out: &mut Vec<u32>) {
        self.base.candidates(v, out)
    }
    fn edge_is_random(&self, a: u32, b: u32) -> bool {
        self.base.edge_is_random(a, b)
    }
    fn edge_possible(&self, a: u32, b: u32) -> bool {
        match self.edge {
            Some((e, true)) if e == (a.min(b), a.max(b)) => true,
            _ => self.base.edge_possible(a, b),
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Explicit small configuration for tests.
    pub struct Explicit {
        pub n: usize,
        pub root: u32,
        pub open: Vec<u32>,
        pub edges: Vec<(u32, u32)>,
    }

    impl SiteBond for Explicit {
        fn vertex_count(&self) -> usize {
            self.n
        }
        fn root(&self) -> u32 {
            self.root
        }
        fn is_open(&self, v: u32) -> bool {
            self.open.binary_search(&v).is_ok()
        }
        fn open_vertices(&self) -> &[u32] {
            &self.open
        }
        fn edge_open(&self, a: u32, b: u32) -> bool {
            let k = if a < b { (a, b) } else { (b, a) };
            self.edges.contains(&k)
        }
    }

    #[test]
    fn closed_root_still_connects() {
        // 0 (root, closed) - 1 - 2 ; 3 isolated; 4 closed between 2 and 3
        let g = Explicit { n: 5, root: 0, open: alloc::vec![1, 2, 3], edges: alloc::vec![(0, 1), (1, 2), (2, 4), (3, 4)] };
        assert_eq!(cluster_members(&g, 0), alloc::vec![0, 1, 2]);
        let p = Pivotality::new(&g, 4);
        assert_eq!(p.root_size(), 3);
        assert!(p.is_pivotal(&g, 4));
        assert!(!p.is_pivotal(&g, 3));
        let p = Pivotality::new(&g, 3);
        assert!(p.is_pivotal(&g, 1) && p.is_pivotal(&g, 2));
        assert!(!p.is_pivotal(&g, 0));
    }

    #[test]
    fn pivotality_matches_toggling() {
        let g = Explicit {
            n: 7,
            root: 0,
            open: alloc::vec![0, 2, 3, 5, 6],
            edges: alloc::vec![(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (4, 5), (5, 6), (1, 6)],
        };
        for k in 1..=7 {
            let p = Pivotality::new(&g, k);
            for w in 0..7u32 {
                let up = cluster_size(&Toggled::vertex(&g, w, true), 0) >= k;
                let down = cluster_size(&Toggled::vertex(&g, w, false), 0) >= k;
                assert_eq!(p.is_pivotal(&g, w), up != down, "k={k} w={w}");
            }
            let all: Vec<u32> = (0..7).filter(|&w| p.is_pivotal(&g, w)).collect();
            assert_eq!(pivotal_vertices(&g, &p), all);
        }
        let sizes = all_cluster_sizes(&g);
        for v in 0..7u32 {
            assert_eq!(sizes[v as usize] as usize, cluster_size(&g, v), "v={v}");
        }
    }
}
