//! Small descriptive-statistics helpers shared by every module.
//!
//! Quantiles use one convention throughout the crate: the `i`-th order
//! statistic (1-based) sits at probability `(i - 0.5) / n`, and values in
//! between are linearly interpolated. Probabilities outside
//! `[0.5/n, 1 - 0.5/n]` clamp to the sample extremes.

/// Returns a sorted copy of `v`. NaNs sort last.
pub fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Quantile of an already sorted slice.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "quantile of empty sample");
    // 1-based fractional position h such that p = (h - 0.5) / n
    let h = (p * n as f64 + 0.5).clamp(1.0, n as f64);
    let lo = h.floor();
    let frac = h - lo;
    let i = lo as usize - 1;
    if frac == 0.0 || i + 1 >= n { sorted[i] } else { sorted[i] + frac * (sorted[i + 1] - sorted[i]) }
}

pub fn quantile(v: &[f64], p: f64) -> f64 {
    quantile_sorted(&sorted(v), p)
}

pub fn median(v: &[f64]) -> f64 {
    quantile(v, 0.5)
}

/// Interquartile range `Q(0.75) - Q(0.25)`.
pub fn iqr(v: &[f64]) -> f64 {
    let s = sorted(v);
    quantile_sorted(&s, 0.75) - quantile_sorted(&s, 0.25)
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Unbiased sample variance (denominator `n - 1`).
pub fn variance(v: &[f64]) -> f64 {
    let n = v.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}

pub fn std_dev(v: &[f64]) -> f64 {
    variance(v).sqrt()
}

/// Ordinary least-squares slope of `y` against `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mx = mean(x);
    let my = mean(y);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}
