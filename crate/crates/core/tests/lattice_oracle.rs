use rcm_core::estimators::estimate_tail_lattice;
use rcm_core::lattice::build_lattice;
use rcm_core::model::{AdjacencySpec, ModelSpec, WeightDistribution};
use rcm_core::oracle::{theta, TinyInstance};

/// 3 × 3 lattice of the unit-weight min-reach cubic model: 9 sites and 12
/// bonds, small enough to enumerate.
fn setup(lambda: f64) -> (rcm_core::lattice::LatticeSpec, TinyInstance) {
    let m = ModelSpec::new(AdjacencySpec::min_reach_cubic(2), WeightDistribution::PointMass, lambda, 1.0).unwrap();
    let spec = build_lattice(&m, 1, 0, 1e-6).unwrap();
    let t = TinyInstance::from_lattice(&spec, lambda, None).unwrap();
    (spec, t)
}

#[test]
fn monte_carlo_tail_converges_to_enumeration() {
    let lambda = 1.2;
    let (spec, t) = setup(lambda);
    assert_eq!(t.vertex_count(), 9);
    let exact: Vec<f64> = (1..=6).map(|k| theta(&t, k).unwrap()).collect();
    assert_eq!(exact[0], 1.0);
    let mut worst = Vec::new();
    for (i, n) in [10_000u64, 100_000, 1_000_000].into_iter().enumerate() {
        let c = estimate_tail_lattice(&spec, lambda, 6, n, 40 + i as u128, false);
        let mut w: f64 = 0.0;
        for (k, e) in exact.iter().enumerate() {
            let est = c.at(k + 1).unwrap();
            let sd = (e * (1.0 - e) / n as f64).sqrt();
            assert!((est.mean - e).abs() <= 4.5 * sd + 1e-12, "n = {n}, k = {}: {} vs {e}", k + 1, est.mean);
            w = w.max((est.mean - e).abs());
        }
        worst.push(w);
    }
    assert!(worst[2] < 0.003, "{worst:?}");
}

#[test]
fn empty_at_zero_intensity() {
    let (spec, t) = setup(1.0);
    let t = t.with_lambda(0.0);
    assert_eq!(theta(&t, 2).unwrap(), 0.0);
    let c = estimate_tail_lattice(&spec, 0.0, 3, 1000, 1, false);
    assert_eq!(c.at(2).unwrap().mean, 0.0);
    assert_eq!(c.at(1).unwrap().mean, 1.0);
}
