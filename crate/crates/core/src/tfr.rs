//! Short-time Fourier transform and spectrogram.
//!
//! Frame `i` covers samples `[i * hop, i * hop + window_len)` with
//! `hop = window_len - overlap`. Each frame is multiplied by a Kaiser window,
//! zero-padded to `nfft` points and transformed with the kernel
//! `exp(-i 2 pi k m / nfft)`. Only bins `0..=nfft/2` are kept (real input).
//! Trailing samples that do not fill a whole frame are dropped.

use ndarray::Array2;
use rayon::prelude::*;
use rustfft::FftPlanner;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Zeroth-order modified Bessel function of the first kind, by power series.
pub fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        sum += term;
        if term < sum * 1e-17 {
            return sum;
        }
        k += 1.0;
    }
}

/// Symmetric Kaiser window `I0(beta sqrt(1 - (2m/(L-1) - 1)^2)) / I0(beta)`.
pub fn kaiser_window(length: usize, beta: f64) -> Vec<f64> {
    if length == 0 {
        return Vec::new();
    }
    if length == 1 {
        return vec![1.0];
    }
    let denom = bessel_i0(beta);
    let last = (length - 1) as f64;
    let mut w = vec![0.0; length];
    // Evaluate the first half and mirror it so the window is exactly symmetric.
    for m in 0..length.div_ceil(2) {
        let r = 2.0 * m as f64 / last - 1.0;
        let v = bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / denom;
        w[m] = v;
        w[length - 1 - m] = v;
    }
    w
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrogramConfig {
    pub window_len: usize,
    pub kaiser_beta: f64,
    pub overlap: usize,
    pub nfft: usize,
    pub sample_rate_hz: f64,
}

impl SpectrogramConfig {
    pub fn new(
        window_len: usize,
        kaiser_beta: f64,
        overlap: usize,
        nfft: usize,
        sample_rate_hz: f64,
    ) -> Result<Self> {
        let cfg = Self { window_len, kaiser_beta, overlap, nfft, sample_rate_hz };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `kaiser(500, 5)`, overlap 474, 512-point FFT.
    pub fn short_window(sample_rate_hz: f64) -> Self {
        Self { window_len: 500, kaiser_beta: 5.0, overlap: 474, nfft: 512, sample_rate_hz }
    }

    /// `kaiser(2000, 5)`, overlap 1896, 2048-point FFT.
    pub fn long_window(sample_rate_hz: f64) -> Self {
        Self { window_len: 2000, kaiser_beta: 5.0, overlap: 1896, nfft: 2048, sample_rate_hz }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_len == 0 || self.overlap >= self.window_len || self.window_len > self.nfft {
            return Err(Error::config(format!(
                "need 0 <= overlap < window_len <= nfft, got overlap {}, window {}, nfft {}",
                self.overlap, self.window_len, self.nfft
            )));
        }
        if !(self.kaiser_beta >= 0.0 && self.kaiser_beta.is_finite()) {
            return Err(Error::config(format!("kaiser beta must be >= 0, got {}", self.kaiser_beta)));
        }
        if !(self.sample_rate_hz > 0.0 && self.sample_rate_hz.is_finite()) {
            return Err(Error::config(format!("sample rate must be positive, got {}", self.sample_rate_hz)));
        }
        Ok(())
    }

    pub fn hop(&self) -> usize {
        self.window_len - self.overlap
    }

    pub fn n_bins(&self) -> usize {
        self.nfft / 2 + 1
    }

    /// Number of whole frames that fit in a signal of length `n`.
    pub fn n_frames(&self, n: usize) -> usize {
        if n < self.window_len { 0 } else { (n - self.window_len) / self.hop() + 1 }
    }

    pub fn bin_freq(&self, k: usize) -> f64 {
        k as f64 * self.sample_rate_hz / self.nfft as f64
    }

    pub fn nyquist(&self) -> f64 {
        self.sample_rate_hz / 2.0
    }
}

/// Squared STFT magnitudes, indexed `(frame, bin)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub values: Array2<f64>,
    pub freqs_hz: Vec<f64>,
    /// Frame centres in seconds.
    pub times_s: Vec<f64>,
    pub config: SpectrogramConfig,
}

/// One frequency bin's time series.
#[derive(Debug, Clone, PartialEq)]
pub struct SubSignal {
    pub values: Vec<f64>,
    pub bin: usize,
    pub freq_hz: f64,
}

impl Spectrogram {
    pub fn n_frames(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_bins(&self) -> usize {
        self.values.ncols()
    }

    pub fn column(&self, bin: usize) -> Vec<f64> {
        self.values.column(bin).to_vec()
    }

    /// Bins whose centre frequency lies in `[lo, hi]`.
    pub fn bins_in_band(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let start = self.freqs_hz.partition_point(|&f| f < lo);
        let end = self.freqs_hz.partition_point(|&f| f <= hi);
        start..end.max(start)
    }

    /// Column of the bin nearest to `f_hz`.
    pub fn sub_signal(&self, f_hz: f64) -> Result<SubSignal> {
        let nyq = self.config.nyquist();
        if !(0.0..=nyq).contains(&f_hz) {
            return Err(Error::domain(format!("frequency {f_hz} Hz is outside [0, {nyq}] Hz")));
        }
        let step = self.config.sample_rate_hz / self.config.nfft as f64;
        let bin = ((f_hz / step).round() as usize).min(self.n_bins() - 1);
        Ok(SubSignal { values: self.column(bin), bin, freq_hz: self.freqs_hz[bin] })
    }
}

fn check_length(signal: &[f64], cfg: &SpectrogramConfig) -> Result<()> {
    cfg.validate()?;
    if signal.len() < cfg.window_len {
        return Err(Error::InsufficientData(format!(
            "signal has {} samples, one window needs {}",
            signal.len(),
            cfg.window_len
        )));
    }
    Ok(())
}

/// Complex STFT, shape `(frames, nfft/2 + 1)`.
pub fn stft(signal: &[f64], cfg: &SpectrogramConfig) -> Result<Array2<Complex64>> {
    check_length(signal, cfg)?;
    let window = kaiser_window(cfg.window_len, cfg.kaiser_beta);
    let frames = cfg.n_frames(signal.len());
    let bins = cfg.n_bins();
    let hop = cfg.hop();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(cfg.nfft);

    let rows: Vec<Vec<Complex64>> = (0..frames)
        .into_par_iter()
        .map(|i| {
            let start = i * hop;
            let mut buf = vec![Complex64::new(0.0, 0.0); cfg.nfft];
            for (b, (x, w)) in buf.iter_mut().zip(signal[start..start + cfg.window_len].iter().zip(&window)) {
                b.re = x * w;
            }
            fft.process(&mut buf);
            buf.truncate(bins);
            buf
        })
        .collect();

    let mut out = Array2::zeros((frames, bins));
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            out[[i, j]] = v;
        }
    }
    Ok(out)
}

pub fn spectrogram(signal: &[f64], cfg: &SpectrogramConfig) -> Result<Spectrogram> {
    let st = stft(signal, cfg)?;
    let values = st.mapv(|z| z.re * z.re + z.im * z.im);
    let freqs_hz = (0..cfg.n_bins()).map(|k| cfg.bin_freq(k)).collect();
    let half = cfg.window_len as f64 / 2.0;
    let times_s = (0..values.nrows()).map(|i| ((i * cfg.hop()) as f64 + half) / cfg.sample_rate_hz).collect();
    Ok(Spectrogram { values, freqs_hz, times_s, config: *cfg })
}
