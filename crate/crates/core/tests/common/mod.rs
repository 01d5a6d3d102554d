#![allow(dead_code)]

use std::f64::consts::PI;

/// `I0(x) = (1/pi) * integral_0^pi exp(x cos t) dt`; the trapezoid rule is
/// spectrally accurate for this periodic integrand.
pub fn i0_by_quadrature(x: f64) -> f64 {
    let m = 4000;
    let h = PI / m as f64;
    let mut s = 0.5 * (x.exp() + (-x).exp());
    for j in 1..m {
        s += (x * (j as f64 * h).cos()).exp();
    }
    s * h / PI
}

pub fn kaiser_by_quadrature(len: usize, beta: f64) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    let d = i0_by_quadrature(beta);
    (0..len)
        .map(|m| {
            let r = 2.0 * m as f64 / (len - 1) as f64 - 1.0;
            i0_by_quadrature(beta * (1.0 - r * r).max(0.0).sqrt()) / d
        })
        .collect()
}

/// Squared magnitude of the windowed DFT summed term by term:
/// `out[i][k] = (sum x w cos)^2 + (sum x w sin)^2` over frame `i`.
pub fn brute_spectrogram(x: &[f64], len: usize, beta: f64, overlap: usize, nfft: usize) -> Vec<Vec<f64>> {
    let w = kaiser_by_quadrature(len, beta);
    let hop = len - overlap;
    let frames = if x.len() < len { 0 } else { (x.len() - len) / hop + 1 };
    (0..frames)
        .map(|i| {
            (0..=nfft / 2)
                .map(|k| {
                    let (mut re, mut im) = (0.0, 0.0);
                    for m in 0..len {
                        let phase = 2.0 * PI * (k * m) as f64 / nfft as f64;
                        let v = x[i * hop + m] * w[m];
                        re += v * phase.cos();
                        im -= v * phase.sin();
                    }
                    re * re + im * im
                })
                .collect()
        })
        .collect()
}

/// Asymptotic Kolmogorov p-value of a one-sample KS statistic with fully
/// specified null, using the Stephens small-sample correction.
pub fn kolmogorov_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..200 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        s += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}
