//! SVG drawing of a planar realisation: edges first, then nodes coloured by
//! cluster, everything clipped to the observation box.

use std::fmt::Write;

use rcm_core::continuum::{all_clusters, ClusterResult, PointConfiguration};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderOptions {
    /// Canvas side in pixels.
    pub size: f64,
    /// Scale node radii linearly with the weight.
    pub radius_by_weight: bool,
    /// Radius of a weight-one node in model units.
    pub base_radius: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { size: 800.0, radius_by_weight: false, base_radius: 0.08 }
    }
}

const PALETTE: [&str; 10] =
    ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"];
const SINGLETON: &str = "#b0b0b0";

/// Clusters by decreasing size (ties by smallest member) and the index of
/// each point's cluster in that order.
pub fn cluster_labels(cfg: &PointConfiguration) -> (Vec<usize>, Vec<ClusterResult>) {
    let mut clusters = all_clusters(cfg);
    clusters.sort_by(|a, b| b.size.cmp(&a.size).then(a.members[0].cmp(&b.members[0])));
    let mut label = vec![0; cfg.len()];
    for (i, c) in clusters.iter().enumerate() {
        for &m in &c.members {
            label[m] = i;
        }
    }
    (label, clusters)
}

/// All edges `(i, j)` with `i < j`.
pub fn edges(cfg: &PointConfiguration) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..cfg.len() {
        for j in cfg.neighbors(i) {
            if i < j {
                out.push((i, j));
            }
        }
    }
    out.sort_unstable();
    out
}

pub fn render_svg(cfg: &PointConfiguration, opts: &RenderOptions) -> String {
    let l = cfg.half_width();
    let s = opts.size;
    let scale = s / (2.0 * l);
    let px = |p: &[f64]| ((p[0] + l) * scale, (l - p[1]) * scale);
    let (label, clusters) = cluster_labels(cfg);
    let colour = |i: usize| {
        let c = label[i];
        if clusters[c].size == 1 { SINGLETON } else { PALETTE[c % PALETTE.len()] }
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{s}" height="{s}" viewBox="0 0 {s} {s}">"#
    );
    let _ = writeln!(out, r#"<defs><clipPath id="box"><rect x="0" y="0" width="{s}" height="{s}"/></clipPath></defs>"#);
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{s}" height="{s}" fill="white" stroke="black"/>"#);
    let _ = writeln!(out, r#"<g clip-path="url(#box)">"#);
    let _ = writeln!(out, r#"<g id="edges" stroke-width="1" stroke-opacity="0.7">"#);
    for (i, j) in edges(cfg) {
        let (x1, y1) = px(cfg.position(i));
        let (x2, y2) = px(cfg.position(j));
        let _ = writeln!(out, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{}"/>"#, colour(i));
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r#"<g id="nodes" stroke="black" stroke-width="0.5">"#);
    for i in 0..cfg.len() {
        let (x, y) = px(cfg.position(i));
        let w = if opts.radius_by_weight { cfg.weight(i) } else { 1.0 };
        let r = opts.base_radius * w * scale;
        let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r:.2}" fill="{}"/>"#, colour(i));
    }
    let _ = writeln!(out, "</g>\n</g>\n</svg>");
    out
}
