//! Seeded simulation study over a set of noise laws: per-replicate slope
//! summaries, time-domain verdicts and end-to-end categories.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{self, DistributionSpec};
use crate::error::{Error, Result};
use crate::rng;
use crate::stats;
use crate::tfr::{SpectrogramConfig, spectrogram};
use crate::verdict::{
    AnalysisConfig, Category, NullCalibration, calibrate, classify, expected_category, slope_profile,
    subsignal_gof, td_verdict,
};

pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 25_000.0;
/// Below this many replicates a study's summaries are flagged.
pub const LOW_CONFIDENCE_REPLICATES: usize = 20;
const BAND_RESAMPLES: usize = 1000;

/// The nine laws of the reference study: finite, intermediate and infinite
/// variance members of each family.
pub fn default_scenarios() -> Vec<DistributionSpec> {
    [
        "stable:2:1",
        "stable:1.9:1",
        "stable:1.5:1",
        "pareto:6:1",
        "pareto:3:1",
        "pareto:1.5:1",
        "t:6:1",
        "t:3:1",
        "t:1.5:1",
    ]
    .iter()
    .map(|s| s.parse().expect("valid built-in scenario"))
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyConfig {
    pub scenarios: Vec<DistributionSpec>,
    pub n: usize,
    pub replicates: usize,
    pub analysis: AnalysisConfig,
    pub seed: u64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            scenarios: default_scenarios(),
            n: 10_000,
            replicates: 50,
            analysis: AnalysisConfig::new(SpectrogramConfig::short_window(DEFAULT_SAMPLE_RATE_HZ)),
            seed: 0,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() {
            return Err(Error::config("study needs at least one scenario"));
        }
        if self.replicates < 2 {
            return Err(Error::config(format!("study needs at least 2 replicates, got {}", self.replicates)));
        }
        for s in &self.scenarios {
            s.validate()?;
        }
        self.analysis.validate()
    }

    /// Seed of replicate `r` of scenario `i`.
    pub fn replicate_seed(&self, i: usize, r: usize) -> u64 {
        self.seed.wrapping_add(i as u64 * 1_000_000).wrapping_add(r as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateResult {
    pub scenario: String,
    pub replicate: usize,
    pub median_abs_slope: f64,
    pub iqr_abs_slope: f64,
    pub td_finite: bool,
    pub tfd_finite: bool,
    pub chi2_pass: bool,
    pub category: Category,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioSummary {
    pub scenario: String,
    pub spec: DistributionSpec,
    pub expected_category: Option<Category>,
    /// Median over replicates of the per-replicate median `|a_f|`.
    pub median_of_medians: f64,
    /// Median over replicates of the per-replicate IQR of `|a_f|`.
    pub median_of_iqrs: f64,
    pub log10_median: f64,
    pub log10_iqr: f64,
    /// Bootstrap 95% interval of `log10_median` over replicates.
    pub log10_median_band: (f64, f64),
    pub log10_iqr_band: (f64, f64),
    pub td_infinite_rate: f64,
    pub tfd_infinite_rate: f64,
    pub chi2_fail_rate: f64,
    /// Fraction of replicates whose category matches the expected one.
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    pub low_confidence: bool,
    pub tfd_threshold: f64,
    pub td_threshold: f64,
    pub null_replicates: usize,
    pub scenarios: Vec<ScenarioSummary>,
    #[serde(skip)]
    pub results: Vec<ReplicateResult>,
}

impl StudyReport {
    pub fn scenario(&self, label: &str) -> Option<&ScenarioSummary> {
        self.scenarios.iter().find(|s| s.scenario == label)
    }

    pub fn results_for(&self, label: &str) -> Vec<&ReplicateResult> {
        self.results.iter().filter(|r| r.scenario == label).collect()
    }
}

/// Calibrates the Gaussian null and runs every scenario against it.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyReport> {
    cfg.validate()?;
    let null = calibrate(cfg.n, &cfg.analysis, cfg.seed).map_err(|e| e.in_stage("null calibration"))?;
    run_study_with_null(cfg, &null)
}

pub fn run_study_with_null(cfg: &StudyConfig, null: &NullCalibration) -> Result<StudyReport> {
    cfg.validate()?;
    if null.n_samples != cfg.n {
        return Err(Error::config(format!(
            "null calibrated for {} samples, study uses {}",
            null.n_samples, cfg.n
        )));
    }
    let tasks: Vec<(usize, usize)> =
        (0..cfg.scenarios.len()).flat_map(|i| (0..cfg.replicates).map(move |r| (i, r))).collect();
    let results: Vec<ReplicateResult> =
        tasks.into_par_iter().map(|(i, r)| run_replicate(cfg, null, i, r)).collect::<Result<_>>()?;

    let scenarios = cfg
        .scenarios
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            let label = spec.label();
            let rows: Vec<&ReplicateResult> = results.iter().filter(|r| r.scenario == label).collect();
            summarize(spec, &rows, cfg.seed, i as u64)
        })
        .collect();

    Ok(StudyReport {
        n: cfg.n,
        replicates: cfg.replicates,
        seed: cfg.seed,
        low_confidence: cfg.replicates < LOW_CONFIDENCE_REPLICATES,
        tfd_threshold: null.tfd_threshold(),
        td_threshold: null.td_threshold(),
        null_replicates: null.replicates(),
        scenarios,
        results,
    })
}

fn run_replicate(cfg: &StudyConfig, null: &NullCalibration, i: usize, r: usize) -> Result<ReplicateResult> {
    let spec = &cfg.scenarios[i];
    let a = &cfg.analysis;
    let x = distributions::sample(spec, cfg.n, cfg.replicate_seed(i, r))?;
    let sg = spectrogram(&x, &a.spectrogram)?;
    let profile = slope_profile(&sg, a.band_hz(), &a.normalize, &a.segmentation)?;
    let tfd_finite = profile.median_abs() <= null.tfd_threshold();
    let td = td_verdict(&x, a, null.td_threshold())?;
    let ks = subsignal_gof(&sg, null, a.chi2_alpha)?;
    let chi2_pass = ks.median_p_value > a.chi2_alpha;
    Ok(ReplicateResult {
        scenario: spec.label(),
        replicate: r,
        median_abs_slope: profile.median_abs(),
        iqr_abs_slope: profile.iqr_abs(),
        td_finite: td.finite,
        tfd_finite,
        chi2_pass,
        category: classify(td.finite, tfd_finite, chi2_pass).category,
    })
}

fn rate(rows: &[&ReplicateResult], pred: impl Fn(&ReplicateResult) -> bool) -> f64 {
    rows.iter().filter(|r| pred(r)).count() as f64 / rows.len() as f64
}

/// 2.5% and 97.5% quantiles of `log10(median(resample))`.
fn bootstrap_band(values: &[f64], seed: u64, task: u64) -> (f64, f64) {
    let mut rng = rng::for_task(seed ^ 0x5EED_BA4D, task);
    let n = values.len();
    let stats: Vec<f64> = (0..BAND_RESAMPLES)
        .map(|_| {
            let draw: Vec<f64> = (0..n).map(|_| values[rng.random_range(0..n)]).collect();
            stats::median(&draw).log10()
        })
        .collect();
    (stats::quantile(&stats, 0.025), stats::quantile(&stats, 0.975))
}

fn summarize(spec: &DistributionSpec, rows: &[&ReplicateResult], seed: u64, i: u64) -> ScenarioSummary {
    let medians: Vec<f64> = rows.iter().map(|r| r.median_abs_slope).collect();
    let iqrs: Vec<f64> = rows.iter().map(|r| r.iqr_abs_slope).collect();
    let expected = expected_category(spec);
    let median_of_medians = stats::median(&medians);
    let median_of_iqrs = stats::median(&iqrs);
    ScenarioSummary {
        scenario: spec.label(),
        spec: *spec,
        expected_category: expected,
        median_of_medians,
        median_of_iqrs,
        log10_median: median_of_medians.log10(),
        log10_iqr: median_of_iqrs.log10(),
        log10_median_band: bootstrap_band(&medians, seed, 2 * i),
        log10_iqr_band: bootstrap_band(&iqrs, seed, 2 * i + 1),
        td_infinite_rate: rate(rows, |r| !r.td_finite),
        tfd_infinite_rate: rate(rows, |r| !r.tfd_finite),
        chi2_fail_rate: rate(rows, |r| !r.chi2_pass),
        accuracy: expected.map(|c| rate(rows, |r| r.category == c)),
    }
}

/// Fraction of replicate-level bootstrap resamples in which, for every chain
/// of scenario labels, both the median-of-medians and the median-of-IQRs
/// increase strictly along the chain.
pub fn ordering_support(report: &StudyReport, chains: &[Vec<String>], resamples: usize, seed: u64) -> f64 {
    let mut rng = rng::from_seed(seed);
    let columns: Vec<Vec<(Vec<f64>, Vec<f64>)>> = chains
        .iter()
        .map(|chain| {
            chain
                .iter()
                .map(|label| {
                    let rows = report.results_for(label);
                    (
                        rows.iter().map(|r| r.median_abs_slope).collect(),
                        rows.iter().map(|r| r.iqr_abs_slope).collect(),
                    )
                })
                .collect()
        })
        .collect();
    let mut held = 0;
    for _ in 0..resamples {
        let mut ok = true;
        for chain in &columns {
            let mut prev: Option<(f64, f64)> = None;
            for (med, iqr) in chain {
                let n = med.len();
                let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                let m = stats::median(&idx.iter().map(|&k| med[k]).collect::<Vec<_>>());
                let q = stats::median(&idx.iter().map(|&k| iqr[k]).collect::<Vec<_>>());
                if let Some((pm, pq)) = prev {
                    ok &= pm < m && pq < q;
                }
                prev = Some((m, q));
            }
        }
        held += usize::from(ok);
    }
    held as f64 / resamples as f64
}

/// Whether the aggregate medians and IQRs increase strictly along `chain`.
pub fn ordered(report: &StudyReport, chain: &[String]) -> bool {
    let s: Option<Vec<&ScenarioSummary>> = chain.iter().map(|l| report.scenario(l)).collect();
    let Some(s) = s else { return false };
    s.windows(2)
        .all(|w| w[0].median_of_medians < w[1].median_of_medians && w[0].median_of_iqrs < w[1].median_of_iqrs)
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io { path: path.display().to_string(), msg: e.to_string() }
}

pub fn slopes_csv(report: &StudyReport) -> String {
    let mut out = String::from("scenario,replicate,median_abs_slope,iqr_abs_slope,td_verdict,category\n");
    for r in &report.results {
        let td = if r.td_finite { "finite" } else { "infinite" };
        out.push_str(&format!(
            "{},{},{:e},{:e},{},{}\n",
            r.scenario, r.replicate, r.median_abs_slope, r.iqr_abs_slope, td, r.category
        ));
    }
    out
}

/// Writes `study_slopes.csv` and `study_summary.json` into `dir`.
pub fn write_outputs(report: &StudyReport, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let csv = dir.join("study_slopes.csv");
    fs::write(&csv, slopes_csv(report)).map_err(|e| io_err(&csv, e))?;
    let json = dir.join("study_summary.json");
    let mut f = fs::File::create(&json).map_err(|e| io_err(&json, e))?;
    serde_json::to_writer_pretty(&mut f, report).map_err(|e| io_err(&json, e))?;
    f.write_all(b"\n").map_err(|e| io_err(&json, e))?;
    Ok((csv, json))
}
