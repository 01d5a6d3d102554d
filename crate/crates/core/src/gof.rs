//! Empirical distribution functions, the Kolmogorov-Smirnov statistic and
//! Monte Carlo p-values for fitted laws.

use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{self, DistributionSpec, Family};
use crate::error::{Error, Result};
use crate::rng;
use crate::stats;

/// `(1/n) #{x_j <= x}`.
pub fn ecdf(sample: &[f64], x: f64) -> f64 {
    assert!(!sample.is_empty(), "ECDF of an empty sample");
    sample.iter().filter(|v| **v <= x).count() as f64 / sample.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailPoint {
    pub x: f64,
    /// `1 - F_n(x)`.
    pub tail: f64,
}

/// Empirical tail at each distinct sample value, in increasing order.
/// The largest value always has tail 0.
pub fn empirical_tail(sample: &[f64]) -> Vec<TailPoint> {
    let s = stats::sorted(sample);
    let n = s.len() as f64;
    let mut out: Vec<TailPoint> = Vec::new();
    for (i, &x) in s.iter().enumerate() {
        let tail = (s.len() - i - 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.x == x => last.tail = tail,
            _ => out.push(TailPoint { x, tail }),
        }
    }
    out
}

/// The subset of [`empirical_tail`] that can be drawn on log-log axes.
pub fn log_tail_points(sample: &[f64]) -> Vec<TailPoint> {
    empirical_tail(sample).into_iter().filter(|p| p.x > 0.0 && p.tail > 0.0).collect()
}

/// `sup_x |F(x) - F_n(x)|`, evaluated exactly at the sample jump points.
pub fn ks_stat(sample: &[f64], spec: &DistributionSpec) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::InsufficientData("KS statistic of an empty sample".into()));
    }
    if !distributions::has_cdf(spec) {
        return Err(Error::Unsupported(format!("no computable CDF for {spec}")));
    }
    let s = stats::sorted(sample);
    ks_sorted(&s, spec)
}

fn ks_sorted(sorted: &[f64], spec: &DistributionSpec) -> Result<f64> {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = distributions::cdf(spec, x)?;
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

/// Fits `family` to `sample`. Only the generalized chi-squared law has a
/// fitting routine.
pub fn fit(family: Family, sample: &[f64]) -> Result<DistributionSpec> {
    match family {
        Family::GenChi2 => distributions::fit_gen_chi2(sample),
        other => Err(Error::Unsupported(format!("no fitting routine for the {} family", other.keyword()))),
    }
}

/// KS statistic of `sample` against its own fit.
pub fn ks_against_fit(sample: &[f64], family: Family) -> Result<(f64, DistributionSpec)> {
    let fitted = fit(family, sample)?;
    Ok((ks_stat(sample, &fitted)?, fitted))
}

/// Monte Carlo p-value `(1 + #{null >= observed}) / (len + 1)`.
pub fn mc_pvalue(observed: f64, null: &[f64]) -> f64 {
    let exceed = null.iter().filter(|v| **v >= observed).count();
    (1 + exceed) as f64 / (null.len() + 1) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub replicates: usize,
    pub fitted: DistributionSpec,
}

/// How bootstrap replicates are compared with their generating law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BootstrapMode {
    /// Re-estimate parameters on every replicate (the correct choice when the
    /// observed statistic uses estimated parameters).
    #[default]
    Refit,
    /// Compare each replicate with the original fit. Kept for testing only:
    /// it produces a miscalibrated null distribution.
    FixedFit,
}

pub const DEFAULT_BOOTSTRAP: usize = 200;

/// Parametric-bootstrap KS test of `sample` against a fitted `family`.
pub fn ks_pvalue_mc(sample: &[f64], family: Family, replicates: usize, seed: u64) -> Result<KsResult> {
    ks_pvalue_mc_with(sample, family, replicates, seed, BootstrapMode::Refit)
}

pub fn ks_pvalue_mc_with(
    sample: &[f64],
    family: Family,
    replicates: usize,
    seed: u64,
    mode: BootstrapMode,
) -> Result<KsResult> {
    if replicates < 99 {
        return Err(Error::config(format!("bootstrap needs at least 99 replicates, got {replicates}")));
    }
    let (statistic, fitted) = ks_against_fit(sample, family)?;
    let n = sample.len();
    let null: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng::for_task(seed, b as u64);
            let draw = distributions::sample_with(&fitted, n, &mut rng)?;
            match mode {
                BootstrapMode::Refit => match ks_against_fit(&draw, family) {
                    Ok((ks, _)) => Ok(ks),
                    // a replicate too degenerate to refit is as far from the law as it gets
                    Err(Error::DegenerateSample(_)) => Ok(1.0),
                    Err(e) => Err(e),
                },
                BootstrapMode::FixedFit => ks_stat(&draw, &fitted),
            }
        })
        .collect::<Result<_>>()?;
    Ok(KsResult { statistic, p_value: mc_pvalue(statistic, &null), replicates, fitted })
}
