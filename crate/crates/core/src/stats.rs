//! Small numeric helpers: running moments and least squares.

use alloc::vec::Vec;

/// Running mean and variance (Welford).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            return f64::INFINITY;
        }
        libm::sqrt(self.variance() / self.n as f64)
    }
}

/// Compensated (Neumaier) sum.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Sum {
    s: f64,
    c: f64,
}

impl Sum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.s + x;
        if libm::fabs(self.s) >= libm::fabs(x) {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    pub fn value(&self) -> f64 {
        self.s + self.c
    }
}

/// Running covariance of two series.
#[derive(Clone, Copy, Debug, Default)]
pub struct CoMoments {
    n: u64,
    mx: f64,
    my: f64,
    cxy: f64,
    cxx: f64,
    cyy: f64,
}

impl CoMoments {
    pub fn push(&mut self, x: f64, y: f64) {
        self.n += 1;
        let n = self.n as f64;
        let dx = x - self.mx;
        self.mx += dx / n;
        let dy = y - self.my;
        self.my += dy / n;
        self.cxy += dx * (y - self.my);
        self.cxx += dx * (x - self.mx);
        self.cyy += dy * (y - self.my);
    }

    pub fn count(&self) -> u64 {
        self.n
    }
    pub fn mean_x(&self) -> f64 {
        self.mx
    }
    pub fn mean_y(&self) -> f64 {
        self.my
    }
    pub fn var_x(&self) -> f64 {
        if self.n < 2 { 0.0 } else { self.cxx / (self.n - 1) as f64 }
    }
    pub fn var_y(&self) -> f64 {
        if self.n < 2 { 0.0 } else { self.cyy / (self.n - 1) as f64 }
    }
    pub fn cov(&self) -> f64 {
        if self.n < 2 { 0.0 } else { self.cxy / (self.n - 1) as f64 }
    }

    /// Ratio of means `E[y]/E[x]` with a delta-method standard error.
    pub fn ratio(&self) -> (f64, f64) {
        let r = self.my / self.mx;
        let n = self.n as f64;
        let v = (self.var_y() - 2.0 * r * self.cov() + r * r * self.var_x()) / (self.mx * self.mx * n);
        (r, libm::sqrt(v.max(0.0)))
    }
}

/// Result of a (weighted) straight-line fit `y = a + b x`.
#[derive(Clone, Debug, PartialEq)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
}

/// Weighted least squares. Weights must be positive; at least two distinct
/// abscissae are required.
pub fn weighted_line_fit(x: &[f64], y: &[f64], w: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n || w.len() != n {
        return None;
    }
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
        syy += w[i] * (y[i] - my) * (y[i] - my);
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = (0..n).map(|i| y[i] - intercept - slope * x[i]).collect();
    let sse: f64 = (0..n).map(|i| w[i] * residuals[i] * residuals[i]).sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    // With inverse-variance weights the slope variance is 1/sxx; scale by the
    // reduced chi-square when there are spare degrees of freedom.
    let scale = if n > 2 { (sse / (n - 2) as f64).max(1.0) } else { 1.0 };
    let slope_stderr = libm::sqrt(scale / sxx);
    Some(LineFit { intercept, slope, slope_stderr, r_squared, residuals })
}

/// Ordinary least squares.
pub fn line_fit(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let w = alloc::vec![1.0; x.len()];
    let mut fit = weighted_line_fit(x, y, &w)?;
    let n = x.len();
    if n > 2 {
        let sse: f64 = fit.residuals.iter().map(|r| r * r).sum();
        let mx = x.iter().sum::<f64>() / n as f64;
        let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
        fit.slope_stderr = libm::sqrt(sse / (n - 2) as f64 / sxx);
    }
    Some(fit)
}

/// Empirical quantile with linear interpolation on sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let t = pos - lo as f64;
    sorted[lo] * (1.0 - t) + sorted[hi] * t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_match_two_pass() {
        let xs = [1.0, 4.0, 2.5, -3.0, 7.25];
        let mut m = Moments::new();
        xs.iter().for_each(|&x| m.push(x));
        let mean = xs.iter().sum::<f64>() / 5.0;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 4.0;
        assert!((m.mean() - mean).abs() < 1e-14);
        assert!((m.variance() - var).abs() < 1e-12);
    }

    #[test]
    fn exact_line_recovered() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let f = line_fit(&x, &y).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ratio_of_constants() {
        let mut c = CoMoments::default();
        for i in 0..10 {
            c.push(2.0 + (i % 2) as f64, 2.0 * (2.0 + (i % 2) as f64));
        }
        let (r, se) = c.ratio();
        assert!((r - 2.0).abs() < 1e-12);
        assert!(se < 1e-9);
    }
}
