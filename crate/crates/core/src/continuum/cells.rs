use alloc::vec::Vec;

use super::PointConfiguration;

/// Uniform bucket grid over the box in compressed-row layout.
#[derive(Clone, Debug)]
pub struct CellList {
    per_axis: usize,
    width: f64,
    origin: f64,
    start: Vec<u32>,
    items: Vec<u32>,
}

impl CellList {
    /// Buckets of side at least `base` (at most 256 per axis).
    pub fn build(cfg: &PointConfiguration, base: f64) -> Self {
        let d = cfg.dimension();
        let l = cfg.half_width();
        let side = 2.0 * l;
        let cap = match d {
            1 => 1 << 20,
            2 => 1024,
            3 => 96,
            _ => 16,
        };
        let per_axis = if base > 0.0 { ((side / base) as usize).clamp(1, cap) } else { cap };
        let width = side / per_axis as f64;
        let total = per_axis.pow(d as u32);
        let mut counts = alloc::vec![0u32; total + 1];
        let mut which = Vec::with_capacity(cfg.len());
        let mut cl = CellList { per_axis, width, origin: -l, start: Vec::new(), items: Vec::new() };
        for i in 0..cfg.len() {
            let c = cl.cell_index(cfg.position(i));
            which.push(c);
            counts[c + 1] += 1;
        }
        for c in 0..total {
            counts[c + 1] += counts[c];
        }
        let mut fill = counts.clone();
        let mut items = alloc::vec![0u32; cfg.len()];
        for (i, &c) in which.iter().enumerate() {
            items[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        cl.start = counts;
        cl.items = items;
        cl
    }

    fn axis(&self, x: f64) -> usize {
        let k = libm::floor((x - self.origin) / self.width);
        if k < 0.0 { 0 } else { (k as usize).min(self.per_axis - 1) }
    }

    fn cell_index(&self, p: &[f64]) -> usize {
        p.iter().fold(0, |acc, &x| acc * self.per_axis + self.axis(x))
    }

    /// Visit every point stored in buckets that intersect the ball of radius
    /// `r` around `p`.
    pub fn for_each_near<F: FnMut(usize)>(&self, cfg: &PointConfiguration, p: &[f64], r: f64, mut f: F) {
        let d = cfg.dimension();
        let mut lo = [0usize; 8];
        let mut hi = [0usize; 8];
        if d > 8 {
            for j in 0..cfg.len() {
                f(j);
            }
            return;
        }
        for k in 0..d {
            lo[k] = self.axis(p[k] - r);
            hi[k] = self.axis(p[k] + r);
        }
        let mut cur = lo;
        loop {
            let c = cur[..d].iter().fold(0, |acc, &x| acc * self.per_axis + x);
            for &j in &self.items[self.start[c] as usize..self.start[c + 1] as usize] {
                f(j as usize);
            }
            // odometer over the bucket block
            let mut k = d;
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                if cur[k] < hi[k] {
                    cur[k] += 1;
                    break;
                }
                cur[k] = lo[k];
            }
        }
    }
}
