//! Noise families and the generalized chi-squared law of spectrogram cells.
//!
//! Three symmetric heavy-tailed families model the raw background noise:
//!
//! - symmetric alpha-stable `S(alpha, sigma)` with characteristic function
//!   `exp(-sigma^alpha |x|^alpha)`,
//! - symmetric Pareto `P(gamma, lambda)` with density
//!   `gamma lambda^gamma / (2 (|x| + lambda)^(gamma + 1))`,
//! - t location-scale `T(nu, delta)`.
//!
//! The generalized chi-squared law `GenChi2(theta, beta)` is a gamma law with
//! shape `theta / 2` and scale `2 beta`; it is the distribution of spectrogram
//! cells when the input is Gaussian.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::{ChiSquared, Distribution, Exp1, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma, gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::rng::{self, Rng};
use crate::stats;

/// A fully parameterized member of one of the supported families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistributionSpec {
    /// Symmetric alpha-stable, `0 < alpha <= 2`, scale `sigma`.
    AlphaStable { alpha: f64, sigma: f64 },
    /// Symmetric (double) Pareto, tail index `gamma`, scale `lambda`.
    SymPareto { gamma: f64, lambda: f64 },
    /// Student t with `nu` degrees of freedom scaled by `delta`.
    TLocScale { nu: f64, delta: f64 },
    /// Generalized chi-squared with `theta` degrees of freedom, scale `beta`.
    GenChi2 { theta: f64, beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    AlphaStable,
    SymPareto,
    TLocScale,
    GenChi2,
}

impl Family {
    pub fn keyword(self) -> &'static str {
        match self {
            Family::AlphaStable => "stable",
            Family::SymPareto => "pareto",
            Family::TLocScale => "t",
            Family::GenChi2 => "genchi2",
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "stable" | "alpha-stable" | "alphastable" | "s" => Ok(Family::AlphaStable),
            "pareto" | "sympareto" | "p" => Ok(Family::SymPareto),
            "t" | "student" | "tlocscale" => Ok(Family::TLocScale),
            "genchi2" | "chi2" | "gen-chi2" => Ok(Family::GenChi2),
            other => Err(Error::config(format!("unknown distribution family '{other}'"))),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be a positive finite number, got {v}")))
    }
}

impl DistributionSpec {
    pub fn alpha_stable(alpha: f64, sigma: f64) -> Result<Self> {
        Self::AlphaStable { alpha, sigma }.validated()
    }

    pub fn sym_pareto(gamma: f64, lambda: f64) -> Result<Self> {
        Self::SymPareto { gamma, lambda }.validated()
    }

    pub fn t_loc_scale(nu: f64, delta: f64) -> Result<Self> {
        Self::TLocScale { nu, delta }.validated()
    }

    pub fn gen_chi2(theta: f64, beta: f64) -> Result<Self> {
        Self::GenChi2 { theta, beta }.validated()
    }

    /// Builds a spec from a family and its (shape, scale) pair.
    pub fn from_parts(family: Family, shape: f64, scale: f64) -> Result<Self> {
        match family {
            Family::AlphaStable => Self::alpha_stable(shape, scale),
            Family::SymPareto => Self::sym_pareto(shape, scale),
            Family::TLocScale => Self::t_loc_scale(shape, scale),
            Family::GenChi2 => Self::gen_chi2(shape, scale),
        }
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::AlphaStable { alpha, sigma } => {
                if !(alpha > 0.0 && alpha <= 2.0) {
                    return Err(Error::domain(format!("alpha must lie in (0, 2], got {alpha}")));
                }
                positive("sigma", sigma)
            }
            Self::SymPareto { gamma, lambda } => {
                positive("gamma", gamma)?;
                positive("lambda", lambda)
            }
            Self::TLocScale { nu, delta } => {
                positive("nu", nu)?;
                positive("delta", delta)
            }
            Self::GenChi2 { theta, beta } => {
                positive("theta", theta)?;
                positive("beta", beta)
            }
        }
    }

    pub fn family(&self) -> Family {
        match self {
            Self::AlphaStable { .. } => Family::AlphaStable,
            Self::SymPareto { .. } => Family::SymPareto,
            Self::TLocScale { .. } => Family::TLocScale,
            Self::GenChi2 { .. } => Family::GenChi2,
        }
    }

    /// (shape, scale) in the family's own symbols.
    pub fn params(&self) -> (f64, f64) {
        match *self {
            Self::AlphaStable { alpha, sigma } => (alpha, sigma),
            Self::SymPareto { gamma, lambda } => (gamma, lambda),
            Self::TLocScale { nu, delta } => (nu, delta),
            Self::GenChi2 { theta, beta } => (theta, beta),
        }
    }

    pub fn variance_is_finite(&self) -> bool {
        match *self {
            Self::AlphaStable { alpha, .. } => alpha == 2.0,
            Self::SymPareto { gamma, .. } => gamma > 2.0,
            Self::TLocScale { nu, .. } => nu > 2.0,
            Self::GenChi2 { .. } => true,
        }
    }

    /// Short label such as `stable:1.5:1`, the same grammar `FromStr` accepts.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.params();
        write!(f, "{}:{}:{}", self.family().keyword(), a, b)
    }
}

impl FromStr for DistributionSpec {
    type Err = Error;

    /// Parses `family:shape:scale`, e.g. `stable:1.5:1` or `pareto:6:1`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::config(format!("scenario '{s}' must look like family:shape:scale")));
        }
        let family: Family = parts[0].parse()?;
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::config(format!("'{t}' in scenario '{s}' is not a number")))
        };
        Self::from_parts(family, num(parts[1])?, num(parts[2])?).map_err(|e| Error::config(e.to_string()))
    }
}

/// Draws `n` i.i.d. variates from `spec`.
pub fn sample(spec: &DistributionSpec, n: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = rng::from_seed(seed);
    sample_with(spec, n, &mut rng)
}

pub fn sample_with(spec: &DistributionSpec, n: usize, rng: &mut Rng) -> Result<Vec<f64>> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::domain("sample size must be at least 1"));
    }
    let out = match *spec {
        DistributionSpec::AlphaStable { alpha, sigma } => {
            (0..n).map(|_| sigma * cms_standard(alpha, rng)).collect()
        }
        DistributionSpec::SymPareto { gamma, lambda } => (0..n)
            .map(|_| {
                // 1 - U lies in (0, 1], keeping the power finite.
                let u: f64 = 1.0 - rng.random::<f64>();
                let mag = lambda * (u.powf(-1.0 / gamma) - 1.0);
                if rng.random::<bool>() { mag } else { -mag }
            })
            .collect(),
        DistributionSpec::TLocScale { nu, delta } => {
            let chi = ChiSquared::new(nu).map_err(|e| Error::domain(e.to_string()))?;
            (0..n)
                .map(|_| {
                    let z: f64 = rng.sample(StandardNormal);
                    let v = chi.sample(rng);
                    delta * z / (v / nu).sqrt()
                })
                .collect()
        }
        DistributionSpec::GenChi2 { theta, beta } => {
            let g = Gamma::new(theta / 2.0, 2.0 * beta).map_err(|e| Error::domain(e.to_string()))?;
            (0..n).map(|_| g.sample(rng)).collect()
        }
    };
    Ok(out)
}

/// Chambers-Mallows-Stuck variate of the standard symmetric stable law
/// (characteristic function `exp(-|x|^alpha)`).
fn cms_standard(alpha: f64, rng: &mut Rng) -> f64 {
    let u = PI * (rng.random::<f64>() - 0.5);
    let w: f64 = rng.sample(Exp1);
    if alpha == 1.0 {
        return u.tan();
    }
    let a = (alpha * u).sin() / u.cos().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * u).cos() / w).powf((1.0 - alpha) / alpha);
    a * b
}

fn stable_closed_form(alpha: f64) -> bool {
    alpha == 1.0 || alpha == 2.0
}

/// Probability density at `x`.
///
/// Alpha-stable laws only have closed forms at `alpha = 1` (Cauchy) and
/// `alpha = 2` (Gaussian with variance `2 sigma^2`); other indices return
/// [`Error::Unsupported`]. Use [`tail`] for those.
pub fn pdf(spec: &DistributionSpec, x: f64) -> Result<f64> {
    spec.validate()?;
    let v = match *spec {
        DistributionSpec::AlphaStable { alpha, sigma } => {
            if alpha == 2.0 {
                let var = 2.0 * sigma * sigma;
                (-x * x / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
            } else if alpha == 1.0 {
                sigma / (PI * (sigma * sigma + x * x))
            } else {
                return Err(Error::Unsupported(format!(
                    "no closed-form alpha-stable density for alpha = {alpha}"
                )));
            }
        }
        DistributionSpec::SymPareto { gamma, lambda } => {
            gamma * lambda.powf(gamma) / (2.0 * (x.abs() + lambda).powf(gamma + 1.0))
        }
        DistributionSpec::TLocScale { nu, delta } => {
            let log_norm =
                ln_gamma((nu + 1.0) / 2.0) - ln_gamma(nu / 2.0) - 0.5 * (nu * PI).ln() - delta.ln();
            let z = x / delta;
            (log_norm - (nu + 1.0) / 2.0 * (1.0 + z * z / nu).ln()).exp()
        }
        DistributionSpec::GenChi2 { theta, beta } => {
            if x <= 0.0 {
                0.0
            } else {
                let k = theta / 2.0;
                let log_p = (k - 1.0) * x.ln() - x / (2.0 * beta) - k * (2.0 * beta).ln() - ln_gamma(k);
                log_p.exp()
            }
        }
    };
    Ok(v)
}

/// Survival probability `1 - F(x)`, flagged when it is only asymptotic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailProb {
    pub prob: f64,
    /// True when `prob` is the power-law approximation `C sigma^alpha x^-alpha`
    /// rather than an exact value.
    pub asymptotic: bool,
}

/// Right tail `1 - F(x)` for `x >= 0`.
pub fn tail(spec: &DistributionSpec, x: f64) -> Result<TailProb> {
    spec.validate()?;
    if !(x >= 0.0) {
        return Err(Error::domain(format!("tail is evaluated for x >= 0, got {x}")));
    }
    let exact = |prob: f64| Ok(TailProb { prob, asymptotic: false });
    match *spec {
        DistributionSpec::AlphaStable { alpha, sigma } => {
            if alpha == 2.0 {
                exact(0.5 * erfc(x / (2.0 * sigma)))
            } else if alpha == 1.0 {
                exact(0.5 - (x / sigma).atan() / PI)
            } else {
                let c = gamma(alpha) * (FRAC_PI_2 * alpha).sin() / PI;
                let prob = (c * (sigma / x).powf(alpha)).min(0.5);
                Ok(TailProb { prob, asymptotic: true })
            }
        }
        DistributionSpec::SymPareto { gamma, lambda } => exact(0.5 * (lambda / (x + lambda)).powf(gamma)),
        DistributionSpec::TLocScale { nu, delta } => {
            let z = x / delta;
            exact(0.5 * beta_reg(nu / 2.0, 0.5, nu / (nu + z * z)))
        }
        DistributionSpec::GenChi2 { theta, beta } => {
            if x == 0.0 {
                exact(1.0)
            } else {
                exact(gamma_ur(theta / 2.0, x / (2.0 * beta)))
            }
        }
    }
}

/// Cumulative distribution function, for families where it is computable.
pub fn cdf(spec: &DistributionSpec, x: f64) -> Result<f64> {
    spec.validate()?;
    if let DistributionSpec::AlphaStable { alpha, .. } = *spec
        && !stable_closed_form(alpha)
    {
        return Err(Error::Unsupported(format!("no closed-form alpha-stable CDF for alpha = {alpha}")));
    }
    if let DistributionSpec::GenChi2 { theta, beta } = *spec {
        return Ok(if x <= 0.0 { 0.0 } else { gamma_lr(theta / 2.0, x / (2.0 * beta)) });
    }
    // The remaining families are symmetric about zero.
    let t = tail(spec, x.abs())?.prob;
    Ok(if x >= 0.0 { 1.0 - t } else { t })
}

/// Whether [`cdf`] can be evaluated exactly for this spec.
pub fn has_cdf(spec: &DistributionSpec) -> bool {
    match *spec {
        DistributionSpec::AlphaStable { alpha, .. } => stable_closed_form(alpha),
        _ => true,
    }
}

/// Method-of-moments fit of the generalized chi-squared law.
///
/// With mean `m` and variance `v`: `beta = v / (2 m)`, `theta = 2 m^2 / v`.
pub fn fit_gen_chi2(sample: &[f64]) -> Result<DistributionSpec> {
    if sample.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "generalized chi-squared fit needs at least 10 values, got {}",
            sample.len()
        )));
    }
    if let Some(bad) = sample.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::domain(format!(
            "generalized chi-squared fit needs finite nonnegative values, found {bad}"
        )));
    }
    let m = stats::mean(sample);
    let v = stats::variance(sample);
    if !(v > 0.0) || !(m > 0.0) {
        return Err(Error::degenerate("sample has zero variance"));
    }
    DistributionSpec::gen_chi2(2.0 * m * m / v, v / (2.0 * m))
}

/// Gaussian-input STFT moments and the generalized chi-squared parameters
/// they imply for the spectrogram at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianTfrParams {
    /// Variance of the real part of the STFT.
    pub var_real: f64,
    /// Variance of the imaginary part of the STFT.
    pub var_imag: f64,
    /// Covariance of real and imaginary parts.
    pub cov: f64,
    pub theta: f64,
    pub beta: f64,
}

impl GaussianTfrParams {
    pub fn new(var_real: f64, var_imag: f64, cov: f64) -> Result<Self> {
        if !(var_real >= 0.0 && var_imag >= 0.0) || var_real + var_imag <= 0.0 {
            return Err(Error::domain(format!(
                "variances must be nonnegative and not both zero, got ({var_real}, {var_imag})"
            )));
        }
        if !cov.is_finite() || cov.abs() > (var_real * var_imag).sqrt() {
            return Err(Error::domain(format!(
                "|cov| = {} exceeds sqrt(var_real * var_imag) = {}",
                cov.abs(),
                (var_real * var_imag).sqrt()
            )));
        }
        let mut p = Self { var_real, var_imag, cov, theta: f64::NAN, beta: f64::NAN };
        p.gen_chi2_from_gaussian();
        Ok(p)
    }

    /// Recomputes `theta` and `beta` from the moments and returns them.
    ///
    /// `theta = (vr + vi)^2 / (vr^2 + vi^2 + 2 cov^2)`, `beta = (vr + vi) / 2`.
    pub fn gen_chi2_from_gaussian(&mut self) -> (f64, f64) {
        let s = self.var_real + self.var_imag;
        self.theta = s * s
            / (self.var_real * self.var_real + self.var_imag * self.var_imag + 2.0 * self.cov * self.cov);
        self.beta = s / 2.0;
        (self.theta, self.beta)
    }

    pub fn to_spec(&self) -> Result<DistributionSpec> {
        DistributionSpec::gen_chi2(self.theta, self.beta)
    }
}

/// One point of a density / tail curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub x: f64,
    /// `None` where no closed-form density exists.
    pub pdf: Option<f64>,
    pub tail: f64,
    pub tail_asymptotic: bool,
}

/// Density and tail of `spec` on a grid of nonnegative abscissae.
pub fn curve(spec: &DistributionSpec, xs: &[f64]) -> Result<Vec<CurvePoint>> {
    xs.iter()
        .map(|&x| {
            let t = tail(spec, x)?;
            let pdf = match pdf(spec, x) {
                Ok(p) => Some(p),
                Err(Error::Unsupported(_)) => None,
                Err(e) => return Err(e),
            };
            Ok(CurvePoint { x, pdf, tail: t.prob, tail_asymptotic: t.asymptotic })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(DistributionSpec::alpha_stable(2.1, 1.0).is_err());
        assert!(DistributionSpec::alpha_stable(0.0, 1.0).is_err());
        assert!(DistributionSpec::sym_pareto(1.0, 0.0).is_err());
        assert!(DistributionSpec::t_loc_scale(-1.0, 1.0).is_err());
        assert!(DistributionSpec::gen_chi2(2.0, f64::NAN).is_err());
        let bad = DistributionSpec::SymPareto { gamma: -1.0, lambda: 1.0 };
        assert!(matches!(sample(&bad, 10, 1), Err(Error::ParameterDomain(_))));
    }

    #[test]
    fn variance_finiteness_follows_tail_index() {
        let s = |a| DistributionSpec::alpha_stable(a, 1.0).unwrap();
        let p = |g| DistributionSpec::sym_pareto(g, 1.0).unwrap();
        let t = |n| DistributionSpec::t_loc_scale(n, 1.0).unwrap();
        assert!(s(2.0).variance_is_finite());
        assert!(!s(1.9).variance_is_finite());
        assert!(!s(1.5).variance_is_finite());
        for (g, finite) in [(6.0, true), (3.0, true), (2.0, false), (1.5, false)] {
            assert_eq!(p(g).variance_is_finite(), finite);
            assert_eq!(t(g).variance_is_finite(), finite);
        }
        assert!(DistributionSpec::gen_chi2(0.5, 1.0).unwrap().variance_is_finite());
    }

    #[test]
    fn label_round_trips() {
        let spec: DistributionSpec = "stable:1.5:1".parse().unwrap();
        assert_eq!(spec, DistributionSpec::alpha_stable(1.5, 1.0).unwrap());
        assert_eq!(spec.label(), "stable:1.5:1");
        assert!("pareto:6".parse::<DistributionSpec>().is_err());
        assert!("cauchy:1:1".parse::<DistributionSpec>().is_err());
    }

    #[test]
    fn pdf_reference_values() {
        let p = DistributionSpec::sym_pareto(1.5, 1.0).unwrap();
        assert!(close(pdf(&p, 0.0).unwrap(), 0.75, 1e-15));
        let g = DistributionSpec::gen_chi2(2.0, 1.0).unwrap();
        assert!(close(pdf(&g, 0.5).unwrap(), 0.5 * (-0.25f64).exp(), 1e-14));
        assert_eq!(pdf(&g, 0.0).unwrap(), 0.0);
        assert_eq!(pdf(&g, -1.0).unwrap(), 0.0);
        let t = DistributionSpec::t_loc_scale(6.0, 1.0).unwrap();
        // Gamma(3.5) / (sqrt(6 pi) Gamma(3))
        assert!(close(pdf(&t, 0.0).unwrap(), 0.382_732_772_309_871_6, 1e-12));
    }

    #[test]
    fn general_stable_density_is_unsupported() {
        let s = DistributionSpec::alpha_stable(1.5, 1.0).unwrap();
        assert!(matches!(pdf(&s, 0.0), Err(Error::Unsupported(_))));
        assert!(matches!(cdf(&s, 0.0), Err(Error::Unsupported(_))));
        let t = tail(&s, 10.0).unwrap();
        assert!(t.asymptotic);
        // Gamma(1.5) sin(0.75 pi) / pi * 10^-1.5
        assert!(close(t.prob, 0.199_471_140_200_716_35 * 10f64.powf(-1.5), 1e-12));
    }

    #[test]
    fn tail_reference_values() {
        let p = DistributionSpec::sym_pareto(2.0, 1.0).unwrap();
        assert!(close(tail(&p, 1.0).unwrap().prob, 0.125, 1e-15));
        let g = DistributionSpec::gen_chi2(2.0, 1.0).unwrap();
        assert_eq!(tail(&g, 0.0).unwrap().prob, 1.0);
        let t = DistributionSpec::t_loc_scale(3.0, 1.0).unwrap();
        // scipy.integrate.quad of the t(3) density over (10, inf)
        assert!(close(tail(&t, 10.0).unwrap().prob, 0.001_064_199_529_207_075, 1e-9));
        assert!(tail(&t, -1.0).is_err());
        let c = DistributionSpec::alpha_stable(1.0, 2.0).unwrap();
        assert!(close(tail(&c, 2.0).unwrap().prob, 0.25, 1e-15));
    }

    #[test]
    fn gen_chi2_is_a_gamma_law() {
        // shape theta/2, scale 2 beta: mean theta beta, variance 2 theta beta^2
        let spec = DistributionSpec::gen_chi2(3.0, 0.7).unwrap();
        let x = sample(&spec, 200_000, 42).unwrap();
        assert!(close(stats::mean(&x), 2.1, 0.02));
        assert!(close(stats::variance(&x), 2.0 * 3.0 * 0.49, 0.05));
    }

    #[test]
    fn fit_gen_chi2_inverts_moments() {
        // m = 2, v = 4 -> (theta, beta) = (2, 1); build a sample with exactly those moments
        let base: Vec<f64> = (0..20).map(|i| if i % 2 == 0 { -1.0 } else { 1.0 }).collect();
        let sd = (4.0f64 * 19.0 / 20.0).sqrt();
        let x: Vec<f64> = base.iter().map(|b| 2.0 + sd * b).collect();
        let fit = fit_gen_chi2(&x).unwrap();
        let (theta, beta) = fit.params();
        assert!(close(theta, 2.0, 1e-12) && close(beta, 1.0, 1e-12), "{fit:?}");
    }

    #[test]
    fn fit_gen_chi2_recovers_parameters() {
        let spec = DistributionSpec::gen_chi2(2.0, 1.0).unwrap();
        let x = sample(&spec, 100_000, 9).unwrap();
        let (theta, beta) = fit_gen_chi2(&x).unwrap().params();
        assert!((1.9..=2.1).contains(&theta), "theta = {theta}");
        assert!((0.95..=1.05).contains(&beta), "beta = {beta}");
    }

    #[test]
    fn fit_gen_chi2_errors() {
        assert!(matches!(fit_gen_chi2(&[3.0; 20]), Err(Error::DegenerateSample(_))));
        assert!(matches!(fit_gen_chi2(&[1.0; 5]), Err(Error::InsufficientData(_))));
        let mut neg = vec![1.0; 20];
        neg[3] = -1.0;
        assert!(matches!(fit_gen_chi2(&neg), Err(Error::ParameterDomain(_))));
    }

    #[test]
    fn gaussian_tfr_parameters() {
        let p = GaussianTfrParams::new(3.0, 3.0, 0.0).unwrap();
        assert!(close(p.theta, 2.0, 1e-15) && close(p.beta, 3.0, 1e-15));
        let p = GaussianTfrParams::new(1.0, 1.0, 1.0).unwrap();
        assert!(close(p.theta, 1.0, 1e-15) && close(p.beta, 1.0, 1e-15));
        assert!(GaussianTfrParams::new(2.0, 0.0, 0.5).is_err());
        assert!(GaussianTfrParams::new(2.0, 0.0, 0.0).is_ok());
        assert!(GaussianTfrParams::new(1.0, 1.0, 1.000_001).is_err());
    }

    #[test]
    fn samplers_are_seed_deterministic() {
        let spec = DistributionSpec::alpha_stable(1.7, 1.0).unwrap();
        assert_eq!(sample(&spec, 100, 5).unwrap(), sample(&spec, 100, 5).unwrap());
        assert_ne!(sample(&spec, 100, 5).unwrap(), sample(&spec, 100, 6).unwrap());
    }

    #[test]
    fn sampler_second_moments() {
        let n = 100_000;
        let s = sample(&DistributionSpec::alpha_stable(2.0, 1.0).unwrap(), n, 1).unwrap();
        assert!((stats::variance(&s) - 2.0).abs() < 0.1, "stable(2,1) variance");
        let p = sample(&DistributionSpec::sym_pareto(6.0, 1.0).unwrap(), n, 2).unwrap();
        assert!((stats::variance(&p) - 0.1).abs() < 0.01, "pareto(6,1) variance");
        let t = sample(&DistributionSpec::t_loc_scale(6.0, 1.0).unwrap(), n, 3).unwrap();
        assert!((stats::variance(&t) - 1.5).abs() < 0.15, "t(6,1) variance");
    }

    #[test]
    fn curve_marks_missing_density() {
        let s = DistributionSpec::alpha_stable(1.9, 1.0).unwrap();
        let c = curve(&s, &[1.0, 10.0]).unwrap();
        assert!(c.iter().all(|p| p.pdf.is_none() && p.tail_asymptotic));
        let p = DistributionSpec::sym_pareto(3.0, 1.0).unwrap();
        let c = curve(&p, &[0.0, 1.0]).unwrap();
        assert_eq!(c[0].pdf, Some(1.5));
        assert_eq!(c[0].tail, 0.5);
    }
}
