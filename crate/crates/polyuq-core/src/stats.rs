//! Small statistics helpers: least-squares line fits for convergence-rate
//! measurement and running mean/variance accumulation.

use alloc::vec::Vec;

use crate::math;

/// Result of a least-squares straight-line fit `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination of the fit.
    pub r_squared: f64,
}

/// Least-squares fit of `y` against `x`.
pub fn fit_line(x: &[f64], y: &[f64]) -> LineFit {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "need at least two points to fit a line");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..x.len() {
        let dx = x[i] - mx;
        let dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res = syy - slope * sxy;
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    LineFit {
        slope,
        intercept,
        r_squared,
    }
}

/// Fits `log(y) = intercept + slope * log(x)`; the slope is the observed
/// algebraic convergence order when `x` is a mesh size and `y` an error.
pub fn fit_loglog(x: &[f64], y: &[f64]) -> LineFit {
    let lx: Vec<f64> = x.iter().map(|&v| math::ln(v)).collect();
    let ly: Vec<f64> = y.iter().map(|&v| math::ln(v)).collect();
    fit_line(&lx, &ly)
}

/// Sample mean and unbiased sample variance of a slice.
pub fn mean_variance(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss = samples.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>();
    (mean, ss / (n as f64 - 1.0))
}

/// Interpolates `log(y)` at `log(x0)` on the polyline through the given
/// `(x, y)` points (sorted by `x`), clamping outside the range. Used to read
/// one cost-accuracy curve at a cost reached by another.
pub fn loglog_interpolate(x: &[f64], y: &[f64], x0: f64) -> f64 {
    assert_eq!(x.len(), y.len());
    assert!(!x.is_empty());
    let lx0 = math::ln(x0);
    if lx0 <= math::ln(x[0]) {
        return y[0];
    }
    if lx0 >= math::ln(x[x.len() - 1]) {
        return y[y.len() - 1];
    }
    for i in 0..x.len() - 1 {
        let a = math::ln(x[i]);
        let b = math::ln(x[i + 1]);
        if lx0 >= a && lx0 <= b {
            let t = (lx0 - a) / (b - a);
            let ly = (1.0 - t) * math::ln(y[i]) + t * math::ln(y[i + 1]);
            return math::exp(ly);
        }
    }
    y[y.len() - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_slope() {
        // y = 3 x^2  =>  log y = log 3 + 2 log x
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|&v: &f64| 3.0 * v * v).collect();
        let fit = fit_loglog(&x, &y);
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn variance_of_constant_sample_is_zero() {
        let (m, v) = mean_variance(&[2.0, 2.0, 2.0]);
        assert_eq!(m, 2.0);
        assert_eq!(v, 0.0);
    }

    #[test]
    fn loglog_interpolation_reads_power_law() {
        let x = [1.0, 4.0, 16.0];
        let y = [8.0, 2.0, 0.5]; // y = 8 / x at the nodes
        let v = loglog_interpolate(&x, &y, 8.0);
        assert!((v - 1.0).abs() < 1e-12);
    }
}
