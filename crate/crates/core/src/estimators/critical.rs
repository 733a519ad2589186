//! Critical-intensity location, exponential-rate fits and the supercritical
//! shape check.
//!
//! Boundary reach is monotone in the intensity on every replica, so one sweep
//! per replica gives the smallest intensity at which the origin cluster
//! touches the boundary, and every reach curve on a grid is read off these
//! thresholds.

use alloc::format;
use alloc::vec::Vec;

use super::{Estimate, TailCurve};
use crate::continuum::{origin_touch_threshold, sample_ppp};
use crate::model::ModelSpec;
use crate::rng::{Domain, Stream};
use crate::stats::{line_fit, quantile_sorted, weighted_line_fit, LineFit, Moments};
use crate::{Error, Result};

/// Per-replica boundary-touch thresholds for each box half-width.
#[derive(Clone, Debug, PartialEq)]
pub struct ReachThresholds {
    pub half_widths: Vec<f64>,
    /// `thresholds[i][r]`: smallest intensity at which the origin cluster of
    /// replica `r` reaches the boundary of box `i` (`∞` above `lambda_max`).
    pub thresholds: Vec<Vec<f64>>,
    pub lambda_max: f64,
    pub seed: u128,
}

pub fn reach_thresholds(model: &ModelSpec, half_widths: &[f64], lambda_max: f64, samples: u64, seed: u128) -> Result<ReachThresholds> {
    if half_widths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("box half-widths must be increasing".into()));
    }
    if !(lambda_max >= 0.0 && lambda_max.is_finite()) {
        return Err(Error::Domain(format!("intensity {lambda_max}")));
    }
    let mut thresholds = Vec::with_capacity(half_widths.len());
    for &l in half_widths {
        let m = model.with_half_width(l);
        m.validate()?;
        let m = m.with_intensity(lambda_max);
        let mut t = Vec::with_capacity(samples as usize);
        for r in 0..samples {
            t.push(origin_touch_threshold(&sample_ppp(&m, seed, r).with_origin(1.0)?));
        }
        thresholds.push(t);
    }
    Ok(ReachThresholds { half_widths: half_widths.to_vec(), thresholds, lambda_max, seed })
}

impl ReachThresholds {
    pub fn samples(&self) -> usize {
        self.thresholds.first().map_or(0, Vec::len)
    }

    /// Reach probability of box `i` at `lambda`.
    pub fn probability(&self, i: usize, lambda: f64) -> Estimate {
        let t = &self.thresholds[i];
        let hits = t.iter().filter(|&&x| x <= lambda).count() as u64;
        Estimate::proportion(hits, t.len() as u64, self.seed)
    }

    /// Reach curves `P[i][j]` on `grid` using the replicas in `index`.
    fn curves(&self, grid: &[f64], index: Option<&[usize]>) -> Vec<Vec<f64>> {
        self.thresholds
            .iter()
            .map(|t| {
                let mut s: Vec<f64> = match index {
                    Some(ix) => ix.iter().map(|&r| t[r]).collect(),
                    None => t.clone(),
                };
                s.sort_unstable_by(f64::total_cmp);
                let n = s.len() as f64;
                grid.iter().map(|&l| s.partition_point(|&x| x <= l) as f64 / n).collect()
            })
            .collect()
    }
}

/// Crossing of successive reach-ratio curves.
///
/// With reach curves `P_i` on a common grid, `R_i = P_{i+1} / P_i` and
/// `D_j = R_{j+1} − R_j`. Below criticality the ratios fall with the box size
/// (`D_j < 0`), above it they rise towards one (`D_j > 0`). For each `j` the
/// sign change is located by minimising the prefix sums of `D_j`, skipping
/// grid points where a ratio is undefined, and interpolated linearly; the
/// result is the mean over `j`. `None` if no `D_j` changes sign.
pub fn crossing(grid: &[f64], curves: &[Vec<f64>]) -> Option<f64> {
    if curves.len() < 3 {
        return None;
    }
    let ratio = |i: usize, g: usize| {
        let (a, b) = (curves[i][g], curves[i + 1][g]);
        if a > 0.0 { b / a } else { f64::NAN }
    };
    let mut found = Vec::new();
    for j in 0..curves.len() - 2 {
        let pts: Vec<(f64, f64)> = (0..grid.len())
            .map(|g| (grid[g], ratio(j + 1, g) - ratio(j, g)))
            .filter(|p| p.1.is_finite())
            .collect();
        let (mut best, mut arg, mut acc) = (0.0, None, 0.0);
        for (i, p) in pts.iter().enumerate() {
            acc += p.1;
            if acc < best {
                best = acc;
                arg = Some(i);
            }
        }
        let Some(i) = arg else { continue };
        let Some(&(x1, d1)) = pts.get(i + 1) else { continue };
        let (x0, d0) = pts[i];
        found.push(if d1 > d0 { x0 - d0 * (x1 - x0) / (d1 - d0) } else { x0 });
    }
    if found.is_empty() { None } else { Some(found.iter().sum::<f64>() / found.len() as f64) }
}

/// Critical-intensity estimate with its bootstrap spread.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticalEstimate {
    pub lambda_hat: f64,
    /// Percentile 95% bootstrap interval.
    pub ci: (f64, f64),
    /// Bootstrap standard deviation.
    pub stderr: f64,
    pub resamples: usize,
    /// Resamples without a crossing.
    pub bootstrap_failures: usize,
    pub grid: Vec<f64>,
    pub half_widths: Vec<f64>,
    /// Reach probabilities `curves[i][j]` of box `i` at `grid[j]`.
    pub curves: Vec<Vec<f64>>,
    pub samples: usize,
    pub seed: u128,
}

/// Locate the transition from the crossing of reach-ratio curves over at
/// least three box sizes, with a joint bootstrap over replicas.
pub fn locate_critical(model: &ModelSpec, grid: &[f64], half_widths: &[f64], samples: u64, seed: u128) -> Result<CriticalEstimate> {
    if grid.len() < 2 || grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] < 0.0 {
        return Err(Error::Domain("intensity grid must be increasing and non-negative".into()));
    }
    if half_widths.len() < 3 {
        return Err(Error::Domain("at least three box sizes are needed".into()));
    }
    if samples < 2 {
        return Err(Error::Domain("at least two replicas are needed".into()));
    }
    let th = reach_thresholds(model, half_widths, *grid.last().unwrap(), samples, seed)?;
    locate_from_thresholds(&th, grid, 1000)
}

/// [`locate_critical`] on precomputed thresholds with `resamples` bootstrap draws.
pub fn locate_from_thresholds(th: &ReachThresholds, grid: &[f64], resamples: usize) -> Result<CriticalEstimate> {
    let curves = th.curves(grid, None);
    let lambda_hat = crossing(grid, &curves).ok_or_else(|| {
        Error::Bracket(format!("reach ratios do not change sign on [{}, {}]", grid[0], grid[grid.len() - 1]))
    })?;
    let n = th.samples();
    let mut s = Stream::new(th.seed, 0, Domain::Estimator, 0);
    let mut boot = Vec::with_capacity(resamples);
    let mut failures = 0;
    let mut index = alloc::vec![0usize; n];
    for _ in 0..resamples {
        for x in index.iter_mut() {
            *x = s.below(n as u64) as usize;
        }
        match crossing(grid, &th.curves(grid, Some(&index))) {
            Some(x) => boot.push(x),
            None => failures += 1,
        }
    }
    boot.sort_unstable_by(f64::total_cmp);
    let mut m = Moments::new();
    for &x in &boot {
        m.push(x);
    }
    let ci = (quantile_sorted(&boot, 0.025), quantile_sorted(&boot, 0.975));
    let stderr = if m.count() >= 2 { libm::sqrt(m.variance()) } else { f64::INFINITY };
    Ok(CriticalEstimate {
        lambda_hat,
        ci,
        stderr,
        resamples,
        bootstrap_failures: failures,
        grid: grid.to_vec(),
        half_widths: th.half_widths.clone(),
        curves,
        samples: n,
        seed: th.seed,
    })
}

/// Weighted fit of `log θ̂(k) = intercept + slope · k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpFit {
    pub ks: Vec<usize>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub slope_stderr: f64,
    pub residuals: Vec<f64>,
}

/// Fit over the window `k_lo..=k_hi`, each point weighted by
/// `θ̂² / stderr²` (the inverse variance of `log θ̂`).
pub fn fit_exponential_rate(curve: &TailCurve, k_lo: usize, k_hi: usize) -> Result<ExpFit> {
    let (ks, est): (Vec<usize>, Vec<Estimate>) =
        curve.ks.iter().zip(&curve.theta).filter(|(k, _)| (k_lo..=k_hi).contains(*k)).map(|(k, e)| (*k, *e)).unzip();
    fit_log_linear(&ks, &est)
}

pub fn fit_log_linear(ks: &[usize], est: &[Estimate]) -> Result<ExpFit> {
    if ks.len() < 2 {
        return Err(Error::InsufficientData("window holds fewer than two points".into()));
    }
    for (k, e) in ks.iter().zip(est) {
        if !(e.mean > 0.0) {
            return Err(Error::InsufficientData(format!("estimate is zero at k = {k}; increase samples or shrink the window")));
        }
        if !(e.relative_stderr() < 0.25) {
            return Err(Error::InsufficientData(format!(
                "relative standard error {:.3} at k = {k} exceeds 0.25; increase samples or shrink the window",
                e.relative_stderr()
            )));
        }
    }
    let x: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
    let y: Vec<f64> = est.iter().map(|e| libm::log(e.mean)).collect();
    let w: Vec<f64> = est
        .iter()
        .map(|e| if e.stderr > 0.0 { (e.mean / e.stderr) * (e.mean / e.stderr) } else { 1.0 })
        .collect();
    // exact inputs carry no error; fall back to equal weights
    let w = if est.iter().any(|e| e.stderr <= 0.0) { alloc::vec![1.0; w.len()] } else { w };
    let fit = weighted_line_fit(&x, &y, &w).ok_or_else(|| Error::InsufficientData("degenerate window".into()))?;
    Ok(ExpFit {
        ks: ks.to_vec(),
        slope: fit.slope,
        intercept: fit.intercept,
        r2: fit.r_squared,
        slope_stderr: fit.slope_stderr,
        residuals: fit.residuals,
    })
}

/// Percentile 95% bootstrap interval of the fitted slope from per-replica
/// cluster sizes. Resamples whose window fails the fit preconditions are
/// skipped; their number is returned alongside.
pub fn slope_bootstrap(sizes: &[usize], k_lo: usize, k_hi: usize, resamples: usize, seed: u128) -> ((f64, f64), usize) {
    let n = sizes.len();
    let mut s = Stream::new(seed, 1, Domain::Estimator, 0);
    let mut slopes = Vec::with_capacity(resamples);
    let mut failures = 0;
    let mut pick = alloc::vec![0usize; n];
    for _ in 0..resamples {
        for x in pick.iter_mut() {
            *x = sizes[s.below(n as u64) as usize];
        }
        let c = TailCurve::from_sizes(&pick, k_hi, 0.0, 0.0, super::CurveSource::Continuum, seed);
        match fit_exponential_rate(&c, k_lo, k_hi) {
            Ok(f) => slopes.push(f.slope),
            Err(_) => failures += 1,
        }
    }
    slopes.sort_unstable_by(f64::total_cmp);
    ((quantile_sorted(&slopes, 0.025), quantile_sorted(&slopes, 0.975)), failures)
}

/// Supercritical shape check around an estimated critical point.
#[derive(Clone, Debug, PartialEq)]
pub struct SupercriticalFit {
    pub lambda_hat: f64,
    pub half_widths: Vec<f64>,
    /// Reach probability at `1.5 λ̂` for each box.
    pub reach_above: Vec<Estimate>,
    /// Intensities in `[λ̂, 1.3 λ̂]`.
    pub lambdas: Vec<f64>,
    /// Reach probability of the largest box at each intensity.
    pub theta: Vec<Estimate>,
    /// Least-squares line through `theta` against `lambdas`.
    pub fit: LineFit,
}

pub fn supercritical_fit(
    model: &ModelSpec,
    lambda_hat: f64,
    half_widths: &[f64],
    points: usize,
    samples: u64,
    seed: u128,
) -> Result<SupercriticalFit> {
    if !(lambda_hat > 0.0) || points < 3 || half_widths.is_empty() {
        return Err(Error::Domain("need a positive critical estimate, three intensities and a box".into()));
    }
    let th = reach_thresholds(model, half_widths, 1.5 * lambda_hat, samples, seed)?;
    supercritical_from_thresholds(&th, lambda_hat, points)
}

/// [`supercritical_fit`] on thresholds computed up to at least `1.5 λ̂`.
pub fn supercritical_from_thresholds(th: &ReachThresholds, lambda_hat: f64, points: usize) -> Result<SupercriticalFit> {
    let top = 1.5 * lambda_hat;
    if !(lambda_hat > 0.0) || points < 3 || th.half_widths.is_empty() || th.lambda_max < top {
        return Err(Error::Domain("need a positive critical estimate, three intensities and thresholds up to 1.5 λ̂".into()));
    }
    let half_widths = &th.half_widths;
    let reach_above = (0..half_widths.len()).map(|i| th.probability(i, top)).collect();
    let last = half_widths.len() - 1;
    let lambdas: Vec<f64> = (0..points).map(|j| lambda_hat * (1.0 + 0.3 * j as f64 / (points - 1) as f64)).collect();
    let theta: Vec<Estimate> = lambdas.iter().map(|&l| th.probability(last, l)).collect();
    let y: Vec<f64> = theta.iter().map(|e| e.mean).collect();
    let fit = line_fit(&lambdas, &y).ok_or_else(|| Error::InsufficientData("degenerate intensity grid".into()))?;
    Ok(SupercriticalFit { lambda_hat, half_widths: half_widths.to_vec(), reach_above, lambdas, theta, fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::CurveSource;
    use crate::model::{AdjacencySpec, Form, WeightDistribution};

    fn exact_curve(rate: f64, k_max: usize) -> TailCurve {
        let theta = (1..=k_max)
            .map(|k| {
                let m = libm::exp(-rate * k as f64);
                Estimate { mean: m, stderr: 0.01 * m, samples: 100, seed: 0, first_replica: 0 }
            })
            .collect();
        TailCurve { ks: (1..=k_max).collect(), theta, lambda: 0.0, half_width: 0.0, source: CurveSource::Continuum }
    }

    #[test]
    fn exact_exponential_fit() {
        let f = fit_exponential_rate(&exact_curve(0.3, 50), 5, 40).unwrap();
        assert!((f.slope + 0.3).abs() < 1e-9);
        assert!((f.r2 - 1.0).abs() < 1e-9);
        assert_eq!(f.ks.len(), 36);
    }

    #[test]
    fn zeros_in_window_are_rejected() {
        let mut c = exact_curve(0.3, 10);
        c.theta[7].mean = 0.0;
        assert!(matches!(fit_exponential_rate(&c, 2, 9), Err(Error::InsufficientData(_))));
        let mut c = exact_curve(0.3, 10);
        c.theta[4].stderr = 0.5 * c.theta[4].mean;
        assert!(matches!(fit_exponential_rate(&c, 2, 9), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn crossing_of_synthetic_curves() {
        // reach decays like e^{−(1 − λ) L} below λ = 1 and settles from above
        // to 1/2 beyond it
        let grid: Vec<f64> = (0..21).map(|i| 0.5 + 0.05 * i as f64).collect();
        let ls = [4.0, 8.0, 16.0];
        let curves: Vec<Vec<f64>> = ls
            .iter()
            .map(|&l| grid.iter().map(|&x: &f64| (0.5 + 0.5 / l) * libm::exp(-(1.0 - x).max(0.0) * l)).collect())
            .collect();
        let c = crossing(&grid, &curves).unwrap();
        assert!((0.95..=1.05).contains(&c), "{c}");
        assert!(crossing(&grid, &curves[..2]).is_none());
    }

    #[test]
    fn no_edges_means_no_bracket() {
        let m = ModelSpec::new(AdjacencySpec::new(2, Form::Constant { value: 0.0 }, None).unwrap(), WeightDistribution::PointMass, 1.0, 2.0)
            .unwrap();
        let r = locate_critical(&m, &[0.5, 1.0, 2.0], &[2.0, 4.0, 8.0], 50, 1);
        assert!(matches!(r, Err(Error::Bracket(_))));
    }

    #[test]
    fn thresholds_reproduce_direct_reach() {
        let m = ModelSpec::new(AdjacencySpec::gilbert(2, 1.0), WeightDistribution::PointMass, 1.0, 4.0).unwrap();
        let th = reach_thresholds(&m, &[3.0, 5.0], 2.0, 300, 8).unwrap();
        let direct = super::super::estimate_percolation(&m, 1.4, &[3.0, 5.0], 300, 8).unwrap();
        // arrivals below 1.4 are a prefix of the sample at 2.0
        for i in 0..2 {
            assert_eq!(th.probability(i, 1.4).mean, direct[i].mean);
        }
    }
}
