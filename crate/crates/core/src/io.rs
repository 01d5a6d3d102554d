//! Signal files, configuration files and report output.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::distributions::{self, DistributionSpec};
use crate::ecfm::Center;
use crate::error::{Error, Result};
use crate::gof;
use crate::segment::Fallback;
use crate::tfr::{Spectrogram, SpectrogramConfig};
use crate::verdict::{AnalysisConfig, Category, TdVerdict, VarianceVerdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalFormat {
    /// One value per line.
    CsvColumn,
    Wav,
}

impl SignalFormat {
    /// `.wav` (any case) is WAV, everything else a CSV column.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("wav") => SignalFormat::Wav,
            _ => SignalFormat::CsvColumn,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub samples: Vec<f64>,
    pub sample_rate_hz: f64,
    pub source: String,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io { path: path.display().to_string(), msg: e.to_string() }
}

/// Loads a signal. `csv_rate_hz` is the sample rate of CSV input; WAV files
/// carry their own.
pub fn load_signal(path: &Path, format: SignalFormat, csv_rate_hz: f64) -> Result<Signal> {
    let samples = match format {
        SignalFormat::CsvColumn => {
            if !(csv_rate_hz > 0.0 && csv_rate_hz.is_finite()) {
                return Err(Error::config(format!("sample rate must be positive, got {csv_rate_hz}")));
            }
            let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            parse_column(&text, &path.display().to_string())?
        }
        SignalFormat::Wav => return load_wav(path),
    };
    Ok(Signal { samples, sample_rate_hz: csv_rate_hz, source: path.display().to_string() })
}

/// Parses one finite number per line; blank lines are ignored.
pub fn parse_column(text: &str, source: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let parse = |msg: String| Error::Parse { path: source.to_string(), line: i + 1, msg };
        let v: f64 = t.parse().map_err(|_| parse(format!("not a number: {t:?}")))?;
        if !v.is_finite() {
            return Err(parse(format!("non-finite value {t:?}")));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::InsufficientData(format!("{source} contains no samples")));
    }
    Ok(out)
}

fn load_wav(path: &Path) -> Result<Signal> {
    let mut reader = hound::WavReader::open(path).map_err(|e| io_err(path, e))?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    let decoded: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| io_err(path, e))?,
        (hound::SampleFormat::Int, bits @ (16 | 24 | 32)) => {
            let scale = (1u64 << (bits - 1)) as f64;
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| io_err(path, e))?
        }
        (fmt, bits) => {
            return Err(Error::Io {
                path: path.display().to_string(),
                msg: format!("unsupported WAV encoding: {bits}-bit {fmt:?}"),
            });
        }
    };
    let samples: Vec<f64> = decoded.into_iter().step_by(channels.max(1)).collect();
    if samples.is_empty() {
        return Err(Error::InsufficientData(format!("{} contains no samples", path.display())));
    }
    if let Some(k) = samples.iter().position(|v| !v.is_finite()) {
        return Err(Error::Io {
            path: path.display().to_string(),
            msg: format!("non-finite sample at frame {k}"),
        });
    }
    Ok(Signal { samples, sample_rate_hz: spec.sample_rate as f64, source: path.display().to_string() })
}

/// Analysis settings assembled from defaults, a configuration file and
/// command-line flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub analysis: AnalysisConfig,
    pub seed: u64,
    pub bootstrap: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            analysis: AnalysisConfig::new(SpectrogramConfig::short_window(
                crate::sim::DEFAULT_SAMPLE_RATE_HZ,
            )),
            seed: 0,
            bootstrap: gof::DEFAULT_BOOTSTRAP,
        }
    }
}

/// Keys accepted in configuration files and their meaning.
pub const CONFIG_KEYS: &[(&str, &str)] = &[
    ("sample_rate", "sample rate of CSV input in Hz"),
    ("window", "window length in samples"),
    ("kaiser_beta", "Kaiser window shape"),
    ("overlap", "samples shared by consecutive frames"),
    ("nfft", "FFT length"),
    ("band", "analysed band in Hz as lo:hi"),
    ("q_lo", "lower quantile of the conditional standard deviation"),
    ("q_hi", "upper quantile of the conditional standard deviation"),
    ("center", "median or mean"),
    ("jump_factor", "jump threshold multiplier"),
    ("min_segment_frac", "minimum segment length as a fraction of the trace"),
    ("fallback", "longest_segment or whole_trace"),
    ("null_replicates", "Gaussian-null simulations"),
    ("threshold_level", "null quantile used as slope threshold"),
    ("chi2_alpha", "significance level of the chi2 check"),
    ("bootstrap", "bootstrap replicates of the gof command"),
    ("seed", "random seed"),
];

/// `key = value` pairs in file order. `#` starts a comment; blank lines are
/// ignored; later assignments override earlier ones.
pub fn parse_config(text: &str, source: &str) -> Result<BTreeMap<String, (usize, String)>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { path: source.to_string(), line: i + 1, msg };
        let (k, v) =
            line.split_once('=').ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
        let (k, v) = (k.trim(), v.trim());
        if !CONFIG_KEYS.iter().any(|(name, _)| *name == k) {
            return Err(err(format!("unknown key {k:?}")));
        }
        if v.is_empty() {
            return Err(err(format!("empty value for {k:?}")));
        }
        out.insert(k.to_string(), (i + 1, v.to_string()));
    }
    Ok(out)
}

fn value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::config(format!("invalid value for {key}: {v:?}")))
}

/// `lo:hi` in Hz.
pub fn parse_band(v: &str) -> Result<(f64, f64)> {
    let (lo, hi) =
        v.split_once(':').ok_or_else(|| Error::config(format!("band must be lo:hi, got {v:?}")))?;
    Ok((value("band", lo.trim())?, value("band", hi.trim())?))
}

impl Settings {
    /// Applies one assignment.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let a = &mut self.analysis;
        match key {
            "sample_rate" => a.spectrogram.sample_rate_hz = value(key, v)?,
            "window" => a.spectrogram.window_len = value(key, v)?,
            "kaiser_beta" => a.spectrogram.kaiser_beta = value(key, v)?,
            "overlap" => a.spectrogram.overlap = value(key, v)?,
            "nfft" => a.spectrogram.nfft = value(key, v)?,
            "band" => a.band = Some(parse_band(v)?),
            "q_lo" => a.normalize.q_lo = value(key, v)?,
            "q_hi" => a.normalize.q_hi = value(key, v)?,
            "center" => {
                a.normalize.center = match v {
                    "median" => Center::Median,
                    "mean" => Center::Mean,
                    _ => return Err(Error::config(format!("center must be median or mean, got {v:?}"))),
                }
            }
            "jump_factor" => a.segmentation.jump_factor = value(key, v)?,
            "min_segment_frac" => a.segmentation.min_segment_frac = value(key, v)?,
            "fallback" => {
                a.segmentation.fallback = match v {
                    "longest_segment" => Fallback::LongestSegment,
                    "whole_trace" => Fallback::WholeTrace,
                    _ => {
                        return Err(Error::config(format!(
                            "fallback must be longest_segment or whole_trace, got {v:?}"
                        )));
                    }
                }
            }
            "null_replicates" => a.null_replicates = value(key, v)?,
            "threshold_level" => a.threshold_level = value(key, v)?,
            "chi2_alpha" => a.chi2_alpha = value(key, v)?,
            "bootstrap" => self.bootstrap = value(key, v)?,
            "seed" => self.seed = value(key, v)?,
            _ => return Err(Error::config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let src = path.display().to_string();
        for (k, (line, v)) in parse_config(&text, &src)? {
            let msg = |e: Error| Error::Parse { path: src.clone(), line, msg: e.to_string() };
            self.set(&k, &v).map_err(msg)?;
        }
        Ok(())
    }

    /// Defaults, then the file's assignments, then `overrides` in order.
    /// The result is not validated: the sample rate of WAV input is only
    /// known after loading.
    pub fn resolve(file: Option<&Path>, overrides: &[(&str, String)]) -> Result<Self> {
        let mut s = Settings::default();
        if let Some(path) = file {
            s.apply_file(path).map_err(|e| e.in_stage("configuration"))?;
        }
        for (k, v) in overrides {
            s.set(k, v)?;
        }
        Ok(s)
    }
}

pub const REPORT_SCHEMA: &str = "tailprobe.report";
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputSummary {
    pub source: String,
    pub n_samples: usize,
    pub sample_rate_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeSummary {
    pub band_hz: (f64, f64),
    pub n_bins: usize,
    pub n_fallback: usize,
    pub skipped_hz: Vec<f64>,
    pub median_abs_slope: f64,
    pub iqr_abs_slope: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Chi2Summary {
    pub median_p_value: f64,
    pub fraction_below_alpha: f64,
    pub alpha: f64,
    pub n_bins: usize,
    pub null_replicates: usize,
    pub tail_plot_freq_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub schema: &'static str,
    pub schema_version: u32,
    pub seed: u64,
    pub input: InputSummary,
    pub config: AnalysisConfig,
    pub category: Category,
    pub td_finite: bool,
    pub tfd_finite: bool,
    pub chi2_pass: bool,
    pub warnings: Vec<String>,
    pub slopes: SlopeSummary,
    pub time_domain: TdVerdict,
    pub chi2: Chi2Summary,
    pub side_files: Vec<String>,
}

impl AnalysisReport {
    pub fn new(signal: &Signal, settings: &Settings, v: &VarianceVerdict, tail_freq_hz: f64) -> Self {
        let e = &v.evidence;
        let mut warnings = Vec::new();
        if v.inconsistent {
            warnings.push(
                "variance infinite in the time domain but finite in the spectrogram; reported as category 4"
                    .to_string(),
            );
        }
        if e.profile.n_fallback() > 0 {
            warnings.push(format!(
                "{} of {} bins had no long segment and used the fallback rule",
                e.profile.n_fallback(),
                e.profile.slopes.len()
            ));
        }
        Self {
            schema: REPORT_SCHEMA,
            schema_version: REPORT_SCHEMA_VERSION,
            seed: settings.seed,
            input: InputSummary {
                source: signal.source.clone(),
                n_samples: signal.samples.len(),
                sample_rate_hz: signal.sample_rate_hz,
            },
            config: settings.analysis,
            category: v.category,
            td_finite: v.td_finite,
            tfd_finite: v.tfd_finite,
            chi2_pass: v.chi2_pass,
            warnings,
            slopes: SlopeSummary {
                band_hz: e.profile.band,
                n_bins: e.profile.slopes.len(),
                n_fallback: e.profile.n_fallback(),
                skipped_hz: e.profile.skipped_hz.clone(),
                median_abs_slope: e.profile.median_abs(),
                iqr_abs_slope: e.profile.iqr_abs(),
                threshold: e.tfd_threshold,
            },
            time_domain: e.td,
            chi2: Chi2Summary {
                median_p_value: e.ks.median_p_value,
                fraction_below_alpha: e.ks.fraction_below_alpha,
                alpha: e.ks.alpha,
                n_bins: e.ks.bins.len(),
                null_replicates: e.ks.null_replicates,
                tail_plot_freq_hz: tail_freq_hz,
            },
            side_files: Vec::new(),
        }
    }

    /// Structural checks run before every write.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Report(msg));
        if self.schema != REPORT_SCHEMA || self.schema_version != REPORT_SCHEMA_VERSION {
            return bad(format!("unknown schema {}/{}", self.schema, self.schema_version));
        }
        let expected = crate::verdict::classify(self.td_finite, self.tfd_finite, self.chi2_pass).category;
        if expected != self.category {
            return bad(format!("category {} contradicts the verdict flags", self.category));
        }
        let s = &self.slopes;
        if s.n_bins == 0 || !(s.median_abs_slope.is_finite() && s.threshold.is_finite()) {
            return bad("slope summary is empty or non-finite".into());
        }
        if (s.median_abs_slope <= s.threshold) != self.tfd_finite {
            return bad("spectrogram verdict contradicts its threshold".into());
        }
        if (self.time_domain.abs_slope <= self.time_domain.threshold) != self.td_finite {
            return bad("time-domain verdict contradicts its threshold".into());
        }
        let c = &self.chi2;
        if !(c.median_p_value > 0.0 && c.median_p_value <= 1.0)
            || !(0.0..=1.0).contains(&c.fraction_below_alpha)
        {
            return bad("chi2 summary outside [0, 1]".into());
        }
        if (c.median_p_value > c.alpha) != self.chi2_pass {
            return bad("chi2 verdict contradicts its p-value".into());
        }
        if self.input.n_samples == 0 {
            return bad("empty input".into());
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        self.validate()?;
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Report(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }
}

/// Per-bin slopes joined with the bin's KS result.
pub fn slopes_csv(v: &VarianceVerdict) -> String {
    let p = &v.evidence.profile;
    let mut out = String::from("freq_hz,slope,abs_slope,fallback,ks_statistic,p_value,theta,beta\n");
    for (i, f) in p.freqs_hz.iter().enumerate() {
        let gof = v.evidence.ks.bins.iter().find(|b| b.freq_hz == *f);
        let (ks, pv, th, be) = match gof {
            Some(b) => {
                let (th, be) = b.fitted.params();
                (
                    format!("{:e}", b.statistic),
                    format!("{:e}", b.p_value),
                    format!("{th:e}"),
                    format!("{be:e}"),
                )
            }
            None => Default::default(),
        };
        out.push_str(&format!(
            "{},{:e},{:e},{},{ks},{pv},{th},{be}\n",
            f,
            p.slopes[i],
            p.slopes[i].abs(),
            p.fallback[i]
        ));
    }
    out
}

/// Empirical and fitted generalized chi2 tails of one sub-signal, with
/// log10 columns for log-log plots.
pub fn tail_csv(sub: &[f64], fitted: &DistributionSpec) -> Result<String> {
    let mut out =
        String::from("x,empirical_tail,fitted_tail,log10_x,log10_empirical_tail,log10_fitted_tail\n");
    for p in gof::log_tail_points(sub) {
        let fitted_tail = distributions::tail(fitted, p.x)?.prob;
        out.push_str(&format!(
            "{:e},{:e},{:e},{:e},{:e},{:e}\n",
            p.x,
            p.tail,
            fitted_tail,
            p.x.log10(),
            p.tail.log10(),
            fitted_tail.log10()
        ));
    }
    Ok(out)
}

/// Wide layout: one row per frame, one column per bin.
pub fn spectrogram_csv(s: &Spectrogram) -> String {
    let mut out = String::from("time_s");
    for f in &s.freqs_hz {
        out.push_str(&format!(",{f}"));
    }
    out.push('\n');
    for (i, t) in s.times_s.iter().enumerate() {
        out.push_str(&t.to_string());
        for v in s.values.row(i) {
            out.push_str(&format!(",{v:e}"));
        }
        out.push('\n');
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_column() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        fs::write(&p, "1.0\n2.0\n3.0\n").unwrap();
        let s = load_signal(&p, SignalFormat::CsvColumn, 1000.0).unwrap();
        assert_eq!(s.samples, vec![1.0, 2.0, 3.0]);
        assert_eq!(s.sample_rate_hz, 1000.0);
    }

    #[test]
    fn csv_errors_name_the_line() {
        let e = parse_column("1.0\n2.0\nnan\n", "f.csv").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        assert!(e.to_string().starts_with("f.csv:3:"));
        let e = parse_column("1\n\n-inf\n", "f.csv").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
        let e = parse_column("1\nabc\n", "f.csv").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        assert!(matches!(parse_column("\n\n", "f.csv"), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn wav_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sine.wav");
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: 25_000,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut w = hound::WavWriter::create(&p, spec).unwrap();
        let ints: Vec<i16> = (0..2500).map(|i| ((i as f64 * 0.1).sin() * 32767.0).round() as i16).collect();
        for v in &ints {
            w.write_sample(*v).unwrap();
        }
        w.finalize().unwrap();
        let s = load_signal(&p, SignalFormat::from_path(&p), 1.0).unwrap();
        assert_eq!(s.sample_rate_hz, 25_000.0);
        assert_eq!(s.samples.len(), 2500);
        for (a, b) in s.samples.iter().zip(&ints) {
            assert_eq!(*a, *b as f64 / 32768.0);
            assert!((-1.0..1.0).contains(a));
        }
    }

    #[test]
    fn wav_stereo_keeps_first_channel() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("st.wav");
        let spec = hound::WavSpec {
            channels: 2,
            sample_rate: 8000,
            bits_per_sample: 32,
            sample_format: hound::SampleFormat::Float,
        };
        let mut w = hound::WavWriter::create(&p, spec).unwrap();
        for i in 0..10 {
            w.write_sample(i as f32).unwrap();
            w.write_sample(-1.0f32).unwrap();
        }
        w.finalize().unwrap();
        let s = load_signal(&p, SignalFormat::Wav, 1.0).unwrap();
        assert_eq!(s.samples, (0..10).map(f64::from).collect::<Vec<_>>());
    }

    #[test]
    fn config_grammar() {
        let text = "# spectrogram\nwindow = 400\nband = 4500:9000  # Hz\n\nseed=7\n";
        let kv = parse_config(text, "c.cfg").unwrap();
        assert_eq!(kv["window"], (2, "400".to_string()));
        assert_eq!(kv["band"].1, "4500:9000");
        let e = parse_config("window 400\n", "c.cfg").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
        let e = parse_config("\nwindw = 4\n", "c.cfg").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn precedence_is_flag_over_file_over_default() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.cfg");
        fs::write(&p, "seed = 3\njump_factor = 7\nnull_replicates = 50\n").unwrap();
        let s = Settings::resolve(Some(&p), &[("seed", "9".into())]).unwrap();
        assert_eq!(s.seed, 9);
        assert_eq!(s.analysis.segmentation.jump_factor, 7.0);
        assert_eq!(s.analysis.null_replicates, 50);
        assert_eq!(s.analysis.spectrogram.window_len, 500);

        fs::write(&p, "jump_factor = x\n").unwrap();
        let e = Settings::resolve(Some(&p), &[]).unwrap_err();
        assert!(matches!(e.root(), Error::Parse { line: 1, .. }));
        assert_eq!(e.exit_code(), 2);
        let s = Settings::resolve(None, &[("band", "4500:20000".into())]).unwrap();
        let e = s.analysis.validate().unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
