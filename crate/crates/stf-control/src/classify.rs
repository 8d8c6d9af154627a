//! Offline force-signal classification.
//!
//! A recorded force trace is summarized by its peak amplitude and its
//! spectral support (the band holding 1%–99% of the FFT power), then sorted
//! into contactless / traction / impact by amplitude and frequency
//! thresholds. Classification is analysis tooling only: the controllers
//! never switch parameters based on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};
use crate::spectrum;

pub use crate::spectrum::SignalStats;

// ==================== Bounds and labels ====================

/// Amplitude and frequency thresholds separating the force classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceSetBounds<T = f64> {
    /// Amplitude threshold between traction and impact [N].
    pub f_th: T,
    /// Frequency above which a signal is impact-like [Hz].
    pub eps_plus_hz: T,
    /// Frequency below which a signal is traction-like [Hz].
    pub eps_minus_hz: T,
    /// Amplitudes at or below this are "no contact" [N].
    pub noise_floor: T,
}

impl<T: Scalar> ForceSetBounds<T> {
    /// Bounds with the default noise floor of 1e−9 N.
    pub fn new(f_th: T, eps_plus_hz: T, eps_minus_hz: T) -> Result<Self> {
        let b = ForceSetBounds {
            f_th,
            eps_plus_hz,
            eps_minus_hz,
            noise_floor: lit::<T>(1e-9),
        };
        b.validate()?;
        Ok(b)
    }

    /// All thresholds nonnegative and finite, `eps_minus ≤ eps_plus`.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            (self.f_th, "f_th"),
            (self.eps_plus_hz, "eps_plus_hz"),
            (self.eps_minus_hz, "eps_minus_hz"),
            (self.noise_floor, "noise_floor"),
        ];
        for (value, what) in fields {
            if !value.is_finite() {
                return Err(Error::NonFinite { quantity: "classification bound" });
            }
            if value < T::zero() {
                return Err(Error::domain(format!(
                    "classification bound {what} must be nonnegative, got {value}"
                )));
            }
        }
        if self.eps_minus_hz > self.eps_plus_hz {
            return Err(Error::domain(format!(
                "classification needs eps_minus <= eps_plus, got {} > {}",
                self.eps_minus_hz, self.eps_plus_hz
            )));
        }
        Ok(())
    }
}

/// The four classification outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForceClassLabel {
    /// No force above the noise floor.
    Contactless,
    /// Weak and slow: intentional guidance.
    Traction,
    /// Strong or fast: unintentional contact.
    Impact,
    /// Inside the deliberate gap between the traction and impact envelopes.
    Unclassified,
}

/// Classification result with the statistics that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceClass<T = f64> {
    /// Assigned label.
    pub label: ForceClassLabel,
    /// Observed peak amplitude [N].
    pub f_max: T,
    /// Observed upper edge of the spectral support [Hz].
    pub w_max_hz: T,
}

// ==================== Operations ====================

/// Amplitude and spectral-support statistics of a force record.
///
/// Spectral analysis runs in `f64` (see [`crate::spectrum`]); needs at
/// least 16 samples.
pub fn signal_stats<T: Scalar>(samples: &[T], dt: T) -> Result<SignalStats> {
    let as_f64: Vec<f64> = samples
        .iter()
        .map(|s| s.to_f64().unwrap_or(f64::NAN))
        .collect();
    spectrum::signal_stats(&as_f64, dt.to_f64().unwrap_or(f64::NAN))
}

/// Sorts a force record into one of the four classes.
///
/// Rules, in order: contactless when the peak sits at or below the noise
/// floor; impact when the peak exceeds `f_th` *or* the support reaches above
/// `eps_plus`; traction when the peak stays below `f_th` *and* the support
/// stays below `eps_minus`; otherwise unclassified (the gap is deliberate —
/// signals straddling the envelopes shouldn't pretend to be either).
pub fn classify<T: Scalar>(
    samples: &[T],
    dt: T,
    bounds: &ForceSetBounds<T>,
) -> Result<ForceClass<T>> {
    bounds.validate()?;
    let stats = signal_stats(samples, dt)?;
    let f_max = stats.f_max;
    let w_max = stats.w_max_hz;
    let f_th = bounds.f_th.to_f64().expect("finite by validation");
    let eps_plus = bounds.eps_plus_hz.to_f64().expect("finite by validation");
    let eps_minus = bounds.eps_minus_hz.to_f64().expect("finite by validation");
    let noise = bounds.noise_floor.to_f64().expect("finite by validation");

    let label = if f_max <= noise {
        ForceClassLabel::Contactless
    } else if f_max > f_th || w_max > eps_plus {
        ForceClassLabel::Impact
    } else if f_max < f_th && w_max < eps_minus {
        ForceClassLabel::Traction
    } else {
        ForceClassLabel::Unclassified
    };
    Ok(ForceClass {
        label,
        f_max: lit::<T>(f_max),
        w_max_hz: lit::<T>(w_max),
    })
}

// ==================== Tests ====================
