//! Jump detection on ECFM increments, segmentation and slope fitting.
//!
//! Indices here are 0-based positions in [`EcfmTrace::values`]: a jump at `k`
//! means the step from `values[k - 1]` to `values[k]` is a peak, and it opens
//! a new segment starting at `k`.

use std::ops::Range;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::ecfm::EcfmTrace;
use crate::error::{Error, Result};
use crate::stats;

/// What to do when no segment reaches the minimum length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Fallback {
    #[default]
    LongestSegment,
    WholeTrace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentationConfig {
    /// Multiplier on the robust increment scale `IQR / 1.349`.
    pub jump_factor: f64,
    /// Minimum segment length as a fraction of the trace length.
    pub min_segment_frac: f64,
    pub fallback: Fallback,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self { jump_factor: 10.0, min_segment_frac: 0.10, fallback: Fallback::LongestSegment }
    }
}

impl SegmentationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.jump_factor > 0.0 && self.jump_factor.is_finite()) {
            return Err(Error::config(format!("jump factor must be positive, got {}", self.jump_factor)));
        }
        if !(self.min_segment_frac > 0.0 && self.min_segment_frac < 1.0) {
            return Err(Error::config(format!(
                "minimum segment fraction must lie in (0, 1), got {}",
                self.min_segment_frac
            )));
        }
        Ok(())
    }
}

/// Positions where the ECFM increment exceeds
/// `median(max(d, 0)) + jump_factor * IQR(d) / 1.349`.
///
/// Traces with fewer than 10 increments have too little information to
/// estimate the threshold and yield no jumps.
pub fn detect_jumps(trace: &EcfmTrace, cfg: &SegmentationConfig) -> Vec<usize> {
    let d = &trace.increments;
    if d.len() < 10 {
        return Vec::new();
    }
    let positive: Vec<f64> = d.iter().map(|v| v.max(0.0)).collect();
    let threshold = stats::median(&positive) + cfg.jump_factor * stats::iqr(d) / 1.349;
    d.iter().enumerate().filter(|(_, v)| **v > threshold).map(|(j, _)| j + 1).collect()
}

/// Splits `0..n` at the given ascending jump positions.
pub fn segments_between_jumps(jumps: &[usize], n: usize) -> Vec<Range<usize>> {
    let mut out = Vec::with_capacity(jumps.len() + 1);
    let mut start = 0;
    for &j in jumps {
        let j = j.min(n);
        if j > start {
            out.push(start..j);
            start = j;
        }
    }
    if n > start {
        out.push(start..n);
    }
    out
}

/// The last segment at least `min_segment_frac * n` long, or the fallback
/// choice (second field `true`) when there is none.
pub fn last_long_segment(
    segments: &[Range<usize>],
    n: usize,
    cfg: &SegmentationConfig,
) -> (Range<usize>, bool) {
    let min_len = cfg.min_segment_frac * n as f64;
    if let Some(s) = segments.iter().rev().find(|s| s.len() as f64 >= min_len) {
        return (s.clone(), false);
    }
    let fallback = match cfg.fallback {
        Fallback::WholeTrace => 0..n,
        Fallback::LongestSegment => segments.iter().max_by_key(|s| s.len()).cloned().unwrap_or(0..n),
    };
    (fallback, true)
}

/// Least-squares slope of the trace against its sample index over `range`.
pub fn fit_slope(trace: &EcfmTrace, range: Range<usize>) -> Result<f64> {
    if range.len() < 3 || range.end > trace.len() {
        return Err(Error::InsufficientSegment { len: range.len().min(trace.len()) });
    }
    let k: Vec<f64> = range.clone().map(|i| (i + 1) as f64).collect();
    Ok(stats::ols_slope(&k, &trace.values[range]))
}

/// Outcome of the segment-and-fit procedure on one trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceSlope {
    pub slope: f64,
    pub segment: Range<usize>,
    pub used_fallback: bool,
    pub n_jumps: usize,
}

/// Jump detection, segmentation, last-long-segment choice and slope fit.
pub fn trace_slope(trace: &EcfmTrace, cfg: &SegmentationConfig) -> Result<TraceSlope> {
    let jumps = detect_jumps(trace, cfg);
    let segments = segments_between_jumps(&jumps, trace.len());
    let (segment, used_fallback) = last_long_segment(&segments, trace.len(), cfg);
    let slope = fit_slope(trace, segment.clone())?;
    Ok(TraceSlope { slope, segment, used_fallback, n_jumps: jumps.len() })
}

/// Per-frequency slopes over a band.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SlopeProfile {
    pub freqs_hz: Vec<f64>,
    /// ECFM units per frame.
    pub slopes: Vec<f64>,
    /// Whether the bin's segment came from the fallback rule.
    pub fallback: Vec<bool>,
    /// Bins whose sub-signal could not be normalized or fitted.
    pub skipped_hz: Vec<f64>,
    pub band: (f64, f64),
}

impl SlopeProfile {
    fn abs_slopes(&self) -> Vec<f64> {
        self.slopes.iter().map(|a| a.abs()).collect()
    }

    /// Median of `|a_f|`; NaN for an empty profile.
    pub fn median_abs(&self) -> f64 {
        if self.slopes.is_empty() { f64::NAN } else { stats::median(&self.abs_slopes()) }
    }

    /// Interquartile range of `|a_f|`; NaN for an empty profile.
    pub fn iqr_abs(&self) -> f64 {
        if self.slopes.is_empty() { f64::NAN } else { stats::iqr(&self.abs_slopes()) }
    }

    pub fn n_fallback(&self) -> usize {
        self.fallback.iter().filter(|f| **f).count()
    }
}

impl Serialize for SlopeProfile {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("SlopeProfile", 7)?;
        st.serialize_field("band_hz", &[self.band.0, self.band.1])?;
        st.serialize_field("n_bins", &self.slopes.len())?;
        st.serialize_field("n_fallback", &self.n_fallback())?;
        st.serialize_field("n_skipped", &self.skipped_hz.len())?;
        st.serialize_field("median_abs_slope", &self.median_abs())?;
        st.serialize_field("iqr_abs_slope", &self.iqr_abs())?;
        st.serialize_field("skipped_hz", &self.skipped_hz)?;
        st.end()
    }
}
