//! Force input signals for the simulation engine.
//!
//! All generators are pure functions of time, so a simulation samples its
//! input at exact grid instants and two runs of the same config produce
//! identical traces. Times before zero sample to zero force.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A deterministic force signal `f(t)` [N].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputSignal<T = f64> {
    /// Constant force from `t = 0` on.
    Step {
        /// Force level [N].
        amplitude: T,
    },
    /// Two-level profile: `f_low` outside `[t_on, t_off)`, `f_high` inside.
    /// The standard impact fixture: a base traction force with a strong
    /// rectangular pulse riding on it.
    ImpulseProfile {
        /// Base level [N].
        f_low: T,
        /// Pulse level [N].
        f_high: T,
        /// Pulse start [s].
        t_on: T,
        /// Pulse end [s].
        t_off: T,
    },
    /// `A·sin(ωt)`.
    Sine {
        /// Amplitude [N].
        amplitude: T,
        /// Angular frequency [rad/s].
        omega: T,
    },
    /// Zero-order hold over recorded samples; zero outside the record.
    Recorded {
        /// Force samples [N], uniformly spaced.
        samples: Vec<T>,
        /// Sample spacing [s].
        dt: T,
    },
    /// Pointwise sum of the parts.
    Composite {
        /// Summed signals.
        parts: Vec<InputSignal<T>>,
    },
}

impl<T: Scalar> InputSignal<T> {
    /// Checks finiteness and ordering invariants.
    pub fn validate(&self) -> Result<()> {
        match self {
            InputSignal::Step { amplitude } => {
                if !amplitude.is_finite() {
                    return Err(Error::NonFinite { quantity: "step amplitude" });
                }
            }
            InputSignal::ImpulseProfile { f_low, f_high, t_on, t_off } => {
                if ![*f_low, *f_high, *t_on, *t_off].iter().all(|x| x.is_finite()) {
                    return Err(Error::NonFinite { quantity: "impulse profile field" });
                }
                if !(*t_on >= T::zero() && *t_off >= *t_on) {
                    return Err(Error::domain(format!(
                        "impulse profile needs 0 <= t_on <= t_off, got t_on = {t_on}, t_off = {t_off}"
                    )));
                }
            }
            InputSignal::Sine { amplitude, omega } => {
                if !(amplitude.is_finite() && omega.is_finite()) {
                    return Err(Error::NonFinite { quantity: "sine parameter" });
                }
                if !(*omega >= T::zero()) {
                    return Err(Error::domain("sine omega must be nonnegative"));
                }
            }
            InputSignal::Recorded { samples, dt } => {
                if !(dt.is_finite() && *dt > T::zero()) {
                    return Err(Error::domain("recorded signal needs dt > 0"));
                }
                if samples.iter().any(|s| !s.is_finite()) {
                    return Err(Error::NonFinite { quantity: "recorded sample" });
                }
            }
            InputSignal::Composite { parts } => {
                for p in parts {
                    p.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Samples the signal at time `t` [N]. Zero for `t < 0`.
    pub fn sample(&self, t: T) -> T {
        if t < T::zero() {
            return T::zero();
        }
        match self {
            InputSignal::Step { amplitude } => *amplitude,
            InputSignal::ImpulseProfile { f_low, f_high, t_on, t_off } => {
                if t >= *t_on && t < *t_off {
                    *f_high
                } else {
                    *f_low
                }
            }
            InputSignal::Sine { amplitude, omega } => *amplitude * (*omega * t).sin(),
            InputSignal::Recorded { samples, dt } => {
                let idx = (t / *dt).floor();
                match idx.to_usize() {
                    Some(i) if i < samples.len() => samples[i],
                    _ => T::zero(),
                }
            }
            InputSignal::Composite { parts } => parts
                .iter()
                .fold(T::zero(), |acc, p| acc + p.sample(t)),
        }
    }

    /// Convenience constructor for the rectangular impact fixture.
    pub fn impulse_profile(f_low: T, f_high: T, t_on: T, t_off: T) -> Self {
        InputSignal::ImpulseProfile { f_low, f_high, t_on, t_off }
    }
}
