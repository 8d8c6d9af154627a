//! FFT power-spectrum utilities.
//!
//! Everything here runs in `f64` regardless of the caller's working scalar:
//! spectral sums accumulate thousands of terms, and single precision would
//! leak noticeable error into the 99%-support statistics. Generic callers
//! convert on the way in and out.
//!
//! Power values are relative — normalization constants cancel in every
//! consumer (band fractions and cumulative supports).

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

// ==================== Power spectrum ====================

/// One-sided Hann-windowed power spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    /// Bin frequencies [Hz], from DC to Nyquist inclusive.
    pub freq_hz: Vec<f64>,
    /// Relative power per bin; interior bins carry the doubled two-sided
    /// power.
    pub power: Vec<f64>,
}

impl PowerSpectrum {
    /// Sum of all bin powers.
    pub fn total_power(&self) -> f64 {
        self.power.iter().sum()
    }
}

/// Computes the one-sided Hann-windowed power spectrum of a uniformly
/// sampled signal.
pub fn power_spectrum(samples: &[f64], dt: f64) -> Result<PowerSpectrum> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::domain("power_spectrum requires dt > 0"));
    }
    if samples.len() < 2 {
        return Err(Error::domain("power_spectrum requires at least 2 samples"));
    }
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite { quantity: "spectrum input sample" });
    }
    let n = samples.len();
    let mut buf: Vec<Complex64> = samples
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            let w = 0.5 * (1.0 - (2.0 * std::f64::consts::PI * j as f64 / (n as f64 - 1.0)).cos());
            Complex64::new(x * w, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let bins = n / 2 + 1;
    let mut freq_hz = Vec::with_capacity(bins);
    let mut power = Vec::with_capacity(bins);
    for (k, value) in buf.iter().take(bins).enumerate() {
        // DC and (for even n) Nyquist have no mirror bin to fold in.
        let fold = if k == 0 || (n % 2 == 0 && k == n / 2) { 1.0 } else { 2.0 };
        freq_hz.push(k as f64 / (n as f64 * dt));
        power.push(fold * value.norm_sqr());
    }
    Ok(PowerSpectrum { freq_hz, power })
}

// ==================== Signal statistics ====================

/// Amplitude and frequency-support summary of a force record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalStats {
    /// Largest absolute sample [N].
    pub f_max: f64,
    /// Upper edge of the spectral support [Hz]: lowest frequency at which
    /// the cumulative power from DC reaches 99% of the total.
    pub w_max_hz: f64,
    /// Lower edge of the spectral support [Hz]: lowest frequency at which
    /// the cumulative power from DC exceeds 1% of the total.
    pub w_min_hz: f64,
}

/// Computes [`SignalStats`] for a force record. All-zero input gives
/// `(0, 0, 0)`.
pub fn signal_stats(samples: &[f64], dt: f64) -> Result<SignalStats> {
    if samples.len() < 16 {
        return Err(Error::domain(format!(
            "signal statistics need at least 16 samples, got {}",
            samples.len()
        )));
    }
    let f_max = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if f_max == 0.0 {
        return Ok(SignalStats { f_max: 0.0, w_max_hz: 0.0, w_min_hz: 0.0 });
    }
    let spec = power_spectrum(samples, dt)?;
    let total = spec.total_power();
    if total <= 0.0 {
        // A nonzero signal the window annihilated (single spike at the very
        // edge); call its support empty rather than invent frequencies.
        return Ok(SignalStats { f_max, w_max_hz: 0.0, w_min_hz: 0.0 });
    }
    let mut w_max_hz = *spec.freq_hz.last().expect("spectrum is nonempty");
    let mut w_min_hz = 0.0;
    let mut cum = 0.0;
    let mut min_found = false;
    for (k, p) in spec.power.iter().enumerate() {
        cum += p;
        if !min_found && cum > 0.01 * total {
            w_min_hz = spec.freq_hz[k];
            min_found = true;
        }
        if cum >= 0.99 * total {
            w_max_hz = spec.freq_hz[k];
            break;
        }
    }
    Ok(SignalStats { f_max, w_max_hz, w_min_hz })
}

// ==================== Band fraction ====================

/// Fraction of total spectral power inside `[lo_hz, hi_hz]`, in `[0, 1]`.
/// An all-zero signal has fraction 0 by convention.
pub fn band_fraction(samples: &[f64], dt: f64, lo_hz: f64, hi_hz: f64) -> Result<f64> {
    if samples.len() < 16 {
        return Err(Error::domain(format!(
            "band fraction needs at least 16 samples, got {}",
            samples.len()
        )));
    }
    if !(lo_hz.is_finite() && hi_hz.is_finite() && lo_hz >= 0.0 && hi_hz > lo_hz) {
        return Err(Error::domain(format!(
            "band fraction needs 0 <= lo < hi, got [{lo_hz}, {hi_hz}] Hz"
        )));
    }
    let spec = power_spectrum(samples, dt)?;
    let total = spec.total_power();
    if total <= 0.0 {
        return Ok(0.0);
    }
    let in_band: f64 = spec
        .freq_hz
        .iter()
        .zip(&spec.power)
        .filter(|(f, _)| **f >= lo_hz && **f <= hi_hz)
        .map(|(_, p)| p)
        .sum();
    Ok(in_band / total)
}

// ==================== Tests ====================
