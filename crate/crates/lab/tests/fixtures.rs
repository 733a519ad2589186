use std::path::Path;

use rcm_core::lattice::SiteBond;
use rcm_core::oracle::{derivative_covariance, derivative_fd, theta};
use rcm_lab::fixtures;

fn shipped() -> fixtures::FixtureFile {
    fixtures::read(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/oracle.json")).unwrap()
}

#[test]
fn shipped_fixtures_are_current() {
    let f = shipped();
    assert!(f.instances.len() >= 20);
    for x in &f.instances {
        let c = fixtures::check(x, f.k, f.gamma, f.step).unwrap();
        assert_eq!(c.drift, 0.0, "{} drifted", x.name);
    }
}

#[test]
fn exact_inequalities_hold_on_fixtures() {
    let f = shipped();
    for x in &f.instances {
        assert!(x.osss_rhs - x.osss_lhs >= -1e-12, "{}", x.name);
        assert!(x.prop27_rhs - x.prop27_lhs >= -1e-12, "{}", x.name);
        for (m, r) in x.magnetization.iter().zip(&x.revealment_explore) {
            assert!((m - r).abs() <= 1e-12, "{}", x.name);
        }
        assert!((0.0..=1.0).contains(&x.theta));
    }
}

#[test]
fn derivative_forms_agree_on_fixtures() {
    let f = shipped();
    for x in &f.instances {
        let scale = x.derivative_covariance.abs().max(1e-300);
        assert!((x.derivative_covariance - x.derivative_pivotal).abs() <= 1e-10 * scale.max(1.0), "{}", x.name);
        assert!((x.derivative_covariance - x.derivative_fd).abs() <= 1e-6 * scale.max(1e-3), "{}", x.name);
    }
}

#[test]
fn fixture_round_trips_through_instance() {
    let f = shipped();
    let x = &f.instances[1];
    let t = x.instance().unwrap().with_ghost(None);
    let k = f.k;
    let tail = move |c: &rcm_core::oracle::TinyConfig<'_>| (c.cluster_size(c.root()) >= k) as u8 as f64;
    assert_eq!(theta(&t, k).unwrap(), x.theta);
    assert_eq!(derivative_covariance(&t, tail).unwrap(), x.derivative_covariance);
    assert_eq!(derivative_fd(&t, tail, f.step).unwrap(), x.derivative_fd);
}
