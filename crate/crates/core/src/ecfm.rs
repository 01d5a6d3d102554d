//! Robust normalization and the empirical cumulative fourth moment (ECFM).
//!
//! `C(k) = (1/k) * sum_{i<=k} (x_i - mean)^4`, where `mean` is the mean of the
//! whole series. For finite fourth moments the trace settles to a plateau;
//! otherwise single large observations make it jump and then decay.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Center {
    #[default]
    Median,
    Mean,
}

/// How a series is standardized before the ECFM is taken.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizeConfig {
    pub center: Center,
    pub q_lo: f64,
    pub q_hi: f64,
}

impl Default for NormalizeConfig {
    fn default() -> Self {
        Self { center: Center::Median, q_lo: 0.1, q_hi: 0.9 }
    }
}

impl NormalizeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.q_lo && self.q_lo < self.q_hi && self.q_hi <= 1.0) {
            return Err(Error::config(format!(
                "quantile levels must satisfy 0 <= q_lo < q_hi <= 1, got ({}, {})",
                self.q_lo, self.q_hi
            )));
        }
        Ok(())
    }
}

/// Standard deviation of the values lying between the `q_lo` and `q_hi`
/// empirical quantiles (inclusive).
pub fn cond_std(v: &[f64], q_lo: f64, q_hi: f64) -> Result<f64> {
    if !(q_lo < q_hi) {
        return Err(Error::domain(format!("q_lo ({q_lo}) must be below q_hi ({q_hi})")));
    }
    if v.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "conditional std needs at least 10 values, got {}",
            v.len()
        )));
    }
    let s = stats::sorted(v);
    let lo = stats::quantile_sorted(&s, q_lo);
    let hi = stats::quantile_sorted(&s, q_hi);
    let kept: Vec<f64> = s.iter().copied().filter(|x| (lo..=hi).contains(x)).collect();
    if kept.len() < 2 {
        return Err(Error::degenerate(format!(
            "only {} values between quantiles {q_lo} and {q_hi}",
            kept.len()
        )));
    }
    let sd = stats::std_dev(&kept);
    if !(sd > 0.0) || !sd.is_finite() {
        return Err(Error::degenerate("conditional standard deviation is zero"));
    }
    Ok(sd)
}

/// `(v - center(v)) / cond_std(v)`.
pub fn normalize(v: &[f64], cfg: &NormalizeConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let scale = cond_std(v, cfg.q_lo, cfg.q_hi)?;
    let c = match cfg.center {
        Center::Median => stats::median(v),
        Center::Mean => stats::mean(v),
    };
    Ok(v.iter().map(|x| (x - c) / scale).collect())
}

/// ECFM values `C(1..=n)` and their first differences.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EcfmTrace {
    pub values: Vec<f64>,
    /// `increments[j] = values[j + 1] - values[j]`.
    pub increments: Vec<f64>,
    pub source_freq_hz: Option<f64>,
}

impl EcfmTrace {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn with_freq(mut self, f_hz: f64) -> Self {
        self.source_freq_hz = Some(f_hz);
        self
    }

    /// Wraps precomputed values, deriving the increments.
    pub fn from_values(values: Vec<f64>) -> Self {
        let increments = values.windows(2).map(|w| w[1] - w[0]).collect();
        Self { values, increments, source_freq_hz: None }
    }
}

pub fn ecfm(v: &[f64]) -> Result<EcfmTrace> {
    if v.len() < 2 {
        return Err(Error::InsufficientData(format!("ECFM needs at least 2 values, got {}", v.len())));
    }
    let m = stats::mean(v);
    let mut acc = 0.0;
    let values = v
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let d = (x - m) * (x - m);
            acc += d * d;
            acc / (i + 1) as f64
        })
        .collect();
    Ok(EcfmTrace::from_values(values))
}
