//! Finite / infinite variance decisions in the time and time-frequency
//! domains and the resulting noise category.
//!
//! | category | time domain | spectrogram | spectrogram cells fit generalized chi2 |
//! |----------|-------------|-------------|----------------------------------------|
//! | 1        | finite      | finite      | yes                                    |
//! | 2        | finite      | finite      | no                                     |
//! | 3        | finite      | infinite    | -                                      |
//! | 4        | infinite    | -           | -                                      |
//!
//! Decision thresholds come from a Gaussian white-noise null: the same
//! pipeline is run on `null_replicates` simulated Gaussian signals of the
//! analysed length and the `threshold_level` quantile of the statistic is
//! used as the cutoff. The same simulations provide the null distribution of
//! the per-bin KS statistic, which keeps the dependence between overlapping
//! frames that an i.i.d. bootstrap would ignore.

use std::fmt;
use std::ops::Range;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::distributions::{DistributionSpec, Family};
use crate::ecfm::{NormalizeConfig, ecfm, normalize};
use crate::error::{Error, Result};
use crate::gof;
use crate::rng;
use crate::segment::{SegmentationConfig, SlopeProfile, TraceSlope, trace_slope};
use crate::stats;
use crate::tfr::{Spectrogram, SpectrogramConfig, spectrogram};

/// Fewest bins a band may contain.
pub const MIN_BAND_BINS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub spectrogram: SpectrogramConfig,
    /// Analysed band in Hz; `None` means the upper half of the frequency axis.
    pub band: Option<(f64, f64)>,
    pub normalize: NormalizeConfig,
    pub segmentation: SegmentationConfig,
    /// Gaussian-null simulations used for thresholds and KS p-values.
    pub null_replicates: usize,
    /// Null quantile used as the slope threshold.
    pub threshold_level: f64,
    /// Significance level of the generalized chi2 check.
    pub chi2_alpha: f64,
}

impl AnalysisConfig {
    pub fn new(spectrogram: SpectrogramConfig) -> Self {
        Self {
            spectrogram,
            band: None,
            normalize: NormalizeConfig::default(),
            segmentation: SegmentationConfig::default(),
            null_replicates: 200,
            threshold_level: 0.99,
            chi2_alpha: 0.05,
        }
    }

    pub fn band_hz(&self) -> (f64, f64) {
        self.band.unwrap_or_else(|| {
            let nyq = self.spectrogram.nyquist();
            (nyq / 2.0, nyq)
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.spectrogram.validate()?;
        self.normalize.validate()?;
        self.segmentation.validate()?;
        let (lo, hi) = self.band_hz();
        let nyq = self.spectrogram.nyquist();
        if !(0.0 <= lo && lo < hi && hi <= nyq) {
            return Err(Error::config(format!(
                "band {lo}:{hi} Hz must satisfy 0 <= lo < hi <= Nyquist ({nyq} Hz)"
            )));
        }
        if self.null_replicates < 20 {
            return Err(Error::config(format!(
                "need at least 20 null replicates, got {}",
                self.null_replicates
            )));
        }
        if !(self.threshold_level > 0.0 && self.threshold_level < 1.0) {
            return Err(Error::config(format!(
                "threshold level must lie in (0, 1), got {}",
                self.threshold_level
            )));
        }
        if !(self.chi2_alpha > 0.0 && self.chi2_alpha < 1.0) {
            return Err(Error::config(format!("chi2 alpha must lie in (0, 1), got {}", self.chi2_alpha)));
        }
        Ok(())
    }
}

fn band_bins(spec: &Spectrogram, band: (f64, f64)) -> Result<Range<usize>> {
    let bins = spec.bins_in_band(band.0, band.1);
    if bins.len() < MIN_BAND_BINS {
        return Err(Error::config(format!(
            "band {}:{} Hz covers {} bins, need at least {MIN_BAND_BINS}",
            band.0,
            band.1,
            bins.len()
        )));
    }
    Ok(bins)
}

fn skippable(e: &Error) -> bool {
    matches!(e, Error::DegenerateSample(_) | Error::InsufficientData(_) | Error::InsufficientSegment { .. })
}

/// Normalize, ECFM, segment and fit one series.
pub fn series_slope(v: &[f64], norm: &NormalizeConfig, seg: &SegmentationConfig) -> Result<TraceSlope> {
    let z = normalize(v, norm)?;
    trace_slope(&ecfm(&z)?, seg)
}

/// ECFM slope for every bin of `spec` inside `band`.
pub fn slope_profile(
    spec: &Spectrogram,
    band: (f64, f64),
    norm: &NormalizeConfig,
    seg: &SegmentationConfig,
) -> Result<SlopeProfile> {
    let bins = band_bins(spec, band)?;
    let fits: Vec<(f64, Result<TraceSlope>)> =
        bins.into_par_iter().map(|b| (spec.freqs_hz[b], series_slope(&spec.column(b), norm, seg))).collect();

    let mut profile = SlopeProfile { band, ..Default::default() };
    for (f, fit) in fits {
        match fit {
            Ok(t) => {
                profile.freqs_hz.push(f);
                profile.slopes.push(t.slope);
                profile.fallback.push(t.used_fallback);
            }
            Err(e) if skippable(&e) => profile.skipped_hz.push(f),
            Err(e) => return Err(e),
        }
    }
    if profile.slopes.is_empty() {
        return Err(Error::degenerate("every sub-signal in the band is degenerate"));
    }
    Ok(profile)
}

/// Statistics of the pipeline on simulated Gaussian white noise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullCalibration {
    pub n_samples: usize,
    pub seed: u64,
    pub level: f64,
    /// Median `|a_f|` over the band for each replicate.
    pub tfd_medians: Vec<f64>,
    /// Time-domain `|a|` for each replicate.
    pub td_slopes: Vec<f64>,
    pub band_bins: Range<usize>,
    /// `ks_null[j][r]`: KS statistic of band bin `j` against its own
    /// generalized chi2 fit in replicate `r` (NaN if the fit failed).
    #[serde(skip)]
    pub ks_null: Vec<Vec<f64>>,
}

impl NullCalibration {
    pub fn replicates(&self) -> usize {
        self.tfd_medians.len()
    }

    pub fn tfd_threshold(&self) -> f64 {
        stats::quantile(&self.tfd_medians, self.level)
    }

    pub fn td_threshold(&self) -> f64 {
        stats::quantile(&self.td_slopes, self.level)
    }

    /// Monte Carlo p-value of a KS statistic observed at band bin `j`.
    pub fn ks_pvalue(&self, j: usize, statistic: f64) -> f64 {
        let null: Vec<f64> = self.ks_null[j].iter().copied().filter(|v| v.is_finite()).collect();
        gof::mc_pvalue(statistic, &null)
    }
}

struct NullReplicate {
    tfd_median: f64,
    td_slope: f64,
    ks: Vec<f64>,
}

fn gaussian_noise(n: usize, seed: u64, task: u64) -> Vec<f64> {
    let mut rng = rng::for_task(seed, task);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Runs the pipeline on `cfg.null_replicates` Gaussian signals of length `n`.
pub fn calibrate(n: usize, cfg: &AnalysisConfig, seed: u64) -> Result<NullCalibration> {
    cfg.validate()?;
    if cfg.spectrogram.n_frames(n) < 10 {
        return Err(Error::InsufficientData(format!(
            "a signal of {n} samples gives {} frames, need at least 10",
            cfg.spectrogram.n_frames(n)
        )));
    }
    let band = cfg.band_hz();
    let reps: Vec<NullReplicate> = (0..cfg.null_replicates as u64)
        .into_par_iter()
        .map(|r| {
            let x = gaussian_noise(n, seed, r);
            let spec = spectrogram(&x, &cfg.spectrogram)?;
            let profile = slope_profile(&spec, band, &cfg.normalize, &cfg.segmentation)?;
            let td = series_slope(&x, &cfg.normalize, &cfg.segmentation)?;
            let ks = band_bins(&spec, band)?
                .map(|b| {
                    gof::ks_against_fit(&spec.column(b), Family::GenChi2).map(|(k, _)| k).unwrap_or(f64::NAN)
                })
                .collect();
            Ok(NullReplicate { tfd_median: profile.median_abs(), td_slope: td.slope.abs(), ks })
        })
        .collect::<Result<_>>()?;

    let probe = spectrogram(&vec![0.0; n], &cfg.spectrogram)?;
    let bins = band_bins(&probe, band)?;
    let mut ks_null = vec![Vec::with_capacity(reps.len()); bins.len()];
    for rep in &reps {
        for (j, k) in rep.ks.iter().enumerate() {
            ks_null[j].push(*k);
        }
    }
    Ok(NullCalibration {
        n_samples: n,
        seed,
        level: cfg.threshold_level,
        tfd_medians: reps.iter().map(|r| r.tfd_median).collect(),
        td_slopes: reps.iter().map(|r| r.td_slope).collect(),
        band_bins: bins,
        ks_null,
    })
}

/// Gaussian-null quantile of the band median `|a_f|` for signals of length `n`.
pub fn calibrate_threshold(n: usize, cfg: &AnalysisConfig, replicates: usize, seed: u64) -> Result<f64> {
    if replicates < 20 {
        return Err(Error::config(format!("need at least 20 replicates, got {replicates}")));
    }
    let cfg = AnalysisConfig { null_replicates: replicates, ..*cfg };
    Ok(calibrate(n, &cfg, seed)?.tfd_threshold())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TdVerdict {
    pub abs_slope: f64,
    pub threshold: f64,
    pub used_fallback: bool,
    pub n_jumps: usize,
    pub finite: bool,
}

/// Time-domain check: the raw signal's ECFM slope against the null threshold.
pub fn td_verdict(signal: &[f64], cfg: &AnalysisConfig, threshold: f64) -> Result<TdVerdict> {
    if signal.len() < 1000 {
        return Err(Error::InsufficientData(format!(
            "time-domain check needs at least 1000 samples, got {}",
            signal.len()
        )));
    }
    let t = series_slope(signal, &cfg.normalize, &cfg.segmentation)?;
    let abs_slope = t.slope.abs();
    Ok(TdVerdict {
        abs_slope,
        threshold,
        used_fallback: t.used_fallback,
        n_jumps: t.n_jumps,
        finite: abs_slope <= threshold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Deserialize)]
pub enum Category {
    Cat1,
    Cat2,
    Cat3,
    Cat4,
}

impl Category {
    pub fn number(self) -> u8 {
        match self {
            Category::Cat1 => 1,
            Category::Cat2 => 2,
            Category::Cat3 => 3,
            Category::Cat4 => 4,
        }
    }

    pub const ALL: [Category; 4] = [Category::Cat1, Category::Cat2, Category::Cat3, Category::Cat4];
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl Serialize for Category {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub category: Category,
    /// Set for the combination "infinite in time, finite in the spectrogram",
    /// which has no row of its own and is reported as category 4.
    pub inconsistent: bool,
}

pub fn classify(td_finite: bool, tfd_finite: bool, chi2_pass: bool) -> Classification {
    let category = match (td_finite, tfd_finite, chi2_pass) {
        (true, true, true) => Category::Cat1,
        (true, true, false) => Category::Cat2,
        (true, false, _) => Category::Cat3,
        (false, _, _) => Category::Cat4,
    };
    Classification { category, inconsistent: !td_finite && tfd_finite }
}

/// Category implied by a noise law's parameters (ground truth for simulations).
pub fn expected_category(spec: &DistributionSpec) -> Option<Category> {
    let by_tail = |k: f64| {
        if k > 4.0 {
            Category::Cat2
        } else if k > 2.0 {
            Category::Cat3
        } else {
            Category::Cat4
        }
    };
    match *spec {
        DistributionSpec::AlphaStable { alpha, .. } => {
            Some(if alpha == 2.0 { Category::Cat1 } else { Category::Cat4 })
        }
        DistributionSpec::SymPareto { gamma, .. } => Some(by_tail(gamma)),
        DistributionSpec::TLocScale { nu, .. } => Some(by_tail(nu)),
        DistributionSpec::GenChi2 { .. } => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinGof {
    pub freq_hz: f64,
    pub statistic: f64,
    pub p_value: f64,
    pub fitted: DistributionSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsSummary {
    pub bins: Vec<BinGof>,
    pub skipped_hz: Vec<f64>,
    pub median_p_value: f64,
    pub fraction_below_alpha: f64,
    pub alpha: f64,
    pub null_replicates: usize,
}

/// KS test of every band sub-signal against its own generalized chi2 fit.
pub fn subsignal_gof(spec: &Spectrogram, null: &NullCalibration, alpha: f64) -> Result<KsSummary> {
    if null.band_bins.end > spec.n_bins() {
        return Err(Error::config("null calibration does not match the spectrogram geometry"));
    }
    let results: Vec<(f64, Result<(f64, DistributionSpec)>)> = null
        .band_bins
        .clone()
        .into_par_iter()
        .map(|b| (spec.freqs_hz[b], gof::ks_against_fit(&spec.column(b), Family::GenChi2)))
        .collect();
    let mut bins = Vec::new();
    let mut skipped_hz = Vec::new();
    for (j, (freq_hz, r)) in results.into_iter().enumerate() {
        match r {
            Ok((statistic, fitted)) => {
                bins.push(BinGof { freq_hz, statistic, p_value: null.ks_pvalue(j, statistic), fitted })
            }
            Err(e) if skippable(&e) || matches!(e, Error::ParameterDomain(_)) => skipped_hz.push(freq_hz),
            Err(e) => return Err(e),
        }
    }
    if bins.is_empty() {
        return Err(Error::degenerate("no sub-signal in the band could be fitted"));
    }
    let p: Vec<f64> = bins.iter().map(|b| b.p_value).collect();
    Ok(KsSummary {
        median_p_value: stats::median(&p),
        fraction_below_alpha: p.iter().filter(|v| **v < alpha).count() as f64 / p.len() as f64,
        bins,
        skipped_hz,
        alpha,
        null_replicates: null.replicates(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub profile: SlopeProfile,
    pub tfd_threshold: f64,
    pub td: TdVerdict,
    pub ks: KsSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceVerdict {
    pub td_finite: bool,
    pub tfd_finite: bool,
    pub chi2_pass: bool,
    pub category: Category,
    pub inconsistent: bool,
    pub evidence: Evidence,
}

/// The full decision for one signal, against a precomputed null.
pub fn analyze_signal(
    signal: &[f64],
    cfg: &AnalysisConfig,
    null: &NullCalibration,
) -> Result<(VarianceVerdict, Spectrogram)> {
    cfg.validate()?;
    if null.n_samples != signal.len() {
        return Err(Error::config(format!(
            "null calibrated for {} samples, signal has {}",
            null.n_samples,
            signal.len()
        )));
    }
    let spec = spectrogram(signal, &cfg.spectrogram).map_err(|e| e.in_stage("spectrogram"))?;
    let profile = slope_profile(&spec, cfg.band_hz(), &cfg.normalize, &cfg.segmentation)
        .map_err(|e| e.in_stage("slope profile"))?;
    let tfd_threshold = null.tfd_threshold();
    let tfd_finite = profile.median_abs() <= tfd_threshold;
    let td = td_verdict(signal, cfg, null.td_threshold()).map_err(|e| e.in_stage("time-domain check"))?;
    let ks = subsignal_gof(&spec, null, cfg.chi2_alpha).map_err(|e| e.in_stage("goodness of fit"))?;
    let chi2_pass = ks.median_p_value > cfg.chi2_alpha;
    let c = classify(td.finite, tfd_finite, chi2_pass);
    let verdict = VarianceVerdict {
        td_finite: td.finite,
        tfd_finite,
        chi2_pass,
        category: c.category,
        inconsistent: c.inconsistent,
        evidence: Evidence { profile, tfd_threshold, td, ks },
    };
    Ok((verdict, spec))
}

/// Calibrates a null for `signal.len()` and analyses the signal against it.
pub fn analyze(signal: &[f64], cfg: &AnalysisConfig, seed: u64) -> Result<VarianceVerdict> {
    let null = calibrate(signal.len(), cfg, seed).map_err(|e| e.in_stage("null calibration"))?;
    Ok(analyze_signal(signal, cfg, &null)?.0)
}
