//! Exact values on tiny instances, cached as JSON for regression tests and
//! for `osss-verify`.

use std::path::Path;

use rcm_core::oracle::{
    derivative_covariance, derivative_fd, derivative_pivotal, osss_check, prop27_exact, summary, theta, TinyConfig, TinyEdge,
    TinyInstance,
};
use rcm_core::lattice::SiteBond;
use rcm_core::osss::RootPolicy;
use serde::{Deserialize, Serialize};

use crate::error::LabError;

pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixtureFile {
    pub version: u32,
    pub seed: String,
    pub k: usize,
    /// `γ` of the Prop-2.7-type bound (ghost intensity `γ / k`).
    pub gamma: f64,
    /// Central finite-difference step.
    pub step: f64,
    pub instances: Vec<Fixture>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub rates: Vec<f64>,
    /// `[a, b, q]` triples.
    pub edges: Vec<(u32, u32, f64)>,
    pub root: u32,
    pub lambda: f64,
    /// Ghost intensity of the OSSS forest.
    pub ghost: f64,
    pub theta: f64,
    pub derivative_covariance: f64,
    pub derivative_pivotal: f64,
    pub derivative_fd: f64,
    /// `E[1 − e^{−γ̃|C(v)|}]` per vertex.
    pub magnetization: Vec<f64>,
    /// Vertex revealments of the forest that explores from the root.
    pub revealment_explore: Vec<f64>,
    pub osss_lhs: f64,
    pub osss_rhs: f64,
    pub prop27_lhs: f64,
    pub prop27_rhs: f64,
}

impl Fixture {
    pub fn instance(&self) -> rcm_core::Result<TinyInstance> {
        let edges = self.edges.iter().map(|&(a, b, q)| TinyEdge { a, b, q }).collect();
        TinyInstance::new(self.rates.clone(), edges, self.root, self.lambda, Some(self.ghost))
    }
}

fn tail_event(k: usize) -> impl FnMut(&TinyConfig<'_>) -> f64 {
    move |c| (c.cluster_size(c.root()) >= k) as u8 as f64
}

/// Compute every cached quantity of one instance.
pub fn compute(name: &str, t: &TinyInstance, k: usize, gamma: f64, step: f64) -> rcm_core::Result<Fixture> {
    let ghost = t.ghost.ok_or_else(|| rcm_core::Error::Precondition("fixture instances need a ghost intensity".into()))?;
    let plain = t.with_ghost(None);
    let explore = summary(t, k, RootPolicy::Explore)?;
    let n = t.vertex_count();
    let osss = osss_check(t, k, RootPolicy::CopyOnly)?;
    let p27 = prop27_exact(&plain, k, gamma, RootPolicy::CopyOnly)?;
    Ok(Fixture {
        name: name.into(),
        rates: t.rates.clone(),
        edges: t.edges.iter().map(|e| (e.a, e.b, e.q)).collect(),
        root: t.root,
        lambda: t.lambda,
        ghost,
        theta: theta(&plain, k)?,
        derivative_covariance: derivative_covariance(&plain, tail_event(k))?,
        derivative_pivotal: derivative_pivotal(&plain, tail_event(k))?,
        derivative_fd: derivative_fd(&plain, tail_event(k), step)?,
        magnetization: explore.magnetization.clone(),
        revealment_explore: explore.revealment[..n].to_vec(),
        osss_lhs: osss.lhs,
        osss_rhs: osss.rhs,
        prop27_lhs: p27.lhs,
        prop27_rhs: p27.rhs,
    })
}

/// `count` random instances plus two hand-built ones.
pub fn generate(seed: u128, count: u64, max_coordinates: usize, k: usize, gamma: f64, step: f64) -> rcm_core::Result<FixtureFile> {
    let ghost = 0.3;
    let mut instances = vec![
        compute("two-site", &TinyInstance::two_site(1.0, 0.5).with_ghost(Some(ghost)), k, gamma, step)?,
        compute("path-4", &TinyInstance::path(4, 1.5, 0.7).with_ghost(Some(ghost)), k, gamma, step)?,
    ];
    for i in 0..count {
        let t = TinyInstance::random(seed, i, max_coordinates, Some(ghost));
        instances.push(compute(&format!("random-{i}"), &t, k, gamma, step)?);
    }
    Ok(FixtureFile { version: VERSION, seed: seed.to_string(), k, gamma, step, instances })
}

pub fn read(path: &Path) -> Result<FixtureFile, LabError> {
    let text = std::fs::read_to_string(path)?;
    let f: FixtureFile = serde_json::from_str(&text).map_err(|e| LabError::Config(vec![format!("{}: {e}", path.display())]))?;
    if f.version != VERSION {
        return Err(LabError::Config(vec![format!("{}: fixture version {} (expected {VERSION})", path.display(), f.version)]));
    }
    Ok(f)
}

pub fn write(path: &Path, f: &FixtureFile) -> Result<(), LabError> {
    let mut s = serde_json::to_string_pretty(f)?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

/// Outcome of re-deriving one fixture.
#[derive(Clone, Debug, PartialEq)]
pub struct FixtureCheck {
    pub name: String,
    /// Largest absolute difference between cached and recomputed values.
    pub drift: f64,
    pub osss_slack: f64,
    pub prop27_slack: f64,
    /// Largest `|revealment − magnetization|` over vertices.
    pub magnetization_gap: f64,
    /// `|covariance form − finite difference| / |covariance form|`.
    pub russo_relative: f64,
}

pub fn check(f: &Fixture, k: usize, gamma: f64, step: f64) -> rcm_core::Result<FixtureCheck> {
    let t = f.instance()?;
    let r = compute(&f.name, &t, k, gamma, step)?;
    let pairs = [
        (f.theta, r.theta),
        (f.derivative_covariance, r.derivative_covariance),
        (f.derivative_pivotal, r.derivative_pivotal),
        (f.derivative_fd, r.derivative_fd),
        (f.osss_lhs, r.osss_lhs),
        (f.osss_rhs, r.osss_rhs),
        (f.prop27_lhs, r.prop27_lhs),
        (f.prop27_rhs, r.prop27_rhs),
    ];
    let mut drift = pairs.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    for (a, b) in f.magnetization.iter().zip(&r.magnetization).chain(f.revealment_explore.iter().zip(&r.revealment_explore)) {
        drift = drift.max((a - b).abs());
    }
    let magnetization_gap = r.magnetization.iter().zip(&r.revealment_explore).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let russo_relative = if r.derivative_covariance == 0.0 {
        r.derivative_fd.abs()
    } else {
        ((r.derivative_covariance - r.derivative_fd) / r.derivative_covariance).abs()
    };
    Ok(FixtureCheck {
        name: f.name.clone(),
        drift,
        osss_slack: r.osss_rhs - r.osss_lhs,
        prop27_slack: r.prop27_rhs - r.prop27_lhs,
        magnetization_gap,
        russo_relative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_fixtures_check_clean() {
        let f = generate(3, 3, 16, 2, 1.0, 1e-4).unwrap();
        assert_eq!(f.instances.len(), 5);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("o.json");
        write(&p, &f).unwrap();
        let back = read(&p).unwrap();
        assert_eq!(back, f);
        for x in &back.instances {
            let c = check(x, f.k, f.gamma, f.step).unwrap();
            assert_eq!(c.drift, 0.0);
            assert!(c.osss_slack >= -1e-12 && c.prop27_slack >= -1e-12);
            assert!(c.magnetization_gap < 1e-12);
            assert!(c.russo_relative < 1e-6, "{c:?}");
        }
    }
}
