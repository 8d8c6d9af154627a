//! Parameter auto-tuning from interaction requirements.
//!
//! Given the force levels a task must distinguish (gentle traction vs.
//! impact), the output velocities each may produce, a traction-phase
//! bandwidth, and the loop sample time, [`tune`] solves for the power-law
//! controller that meets them:
//!
//! 1. the exponent `n` from the force and velocity ratios,
//! 2. the impact-phase bandwidth the request implies,
//! 3. a feasibility fallback that trims the traction bandwidth when the
//!    sample time cannot support the implied impact bandwidth,
//! 4. the damping `μ` from the (possibly trimmed) traction bandwidth,
//! 5. the output gain `g` that pins the traction operating point exactly.
//!
//! The construction makes two identities exact by algebra, not by
//! approximation: steady output at `f_ease` equals `v_d`, and steady output
//! at `f_interf` equals `v_c`.

use serde::{Deserialize, Serialize};

use crate::controller::SfcParams;
use crate::describing::psi;
use crate::error::{Error, Result};
use crate::scalar::{lit, pow_abs, Scalar};
use crate::stability::max_sample_time;

// ==================== Requirement and result types ====================

/// Interaction requirements the tuned controller must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuningRequirements<T = f64> {
    /// Largest traction (intentional guidance) force [N].
    pub f_ease: T,
    /// Largest impact (unintentional contact) force [N].
    pub f_interf: T,
    /// Desired steady output velocity at `f_ease` [m/s].
    pub v_d: T,
    /// Acceptable steady output velocity at `f_interf` [m/s].
    pub v_c: T,
    /// Requested bandwidth in the traction regime [rad/s].
    pub w_c_ease: T,
    /// Control-loop sample time [s].
    pub dt: T,
    /// Chosen virtual inertia [kg].
    pub m: T,
}

impl<T: Scalar> TuningRequirements<T> {
    /// All fields positive and finite, `v_c ≥ v_d`, `f_interf > f_ease`.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            (self.f_ease, "f_ease"),
            (self.f_interf, "f_interf"),
            (self.v_d, "v_d"),
            (self.v_c, "v_c"),
            (self.w_c_ease, "w_c_ease"),
            (self.dt, "dt"),
            (self.m, "m"),
        ];
        for (value, what) in fields {
            if !value.is_finite() {
                return Err(Error::NonFinite { quantity: "tuning requirement" });
            }
            if !(value > T::zero()) {
                return Err(Error::invalid_params(format!(
                    "tuning requires {what} > 0, got {value}"
                )));
            }
        }
        if !(self.v_c >= self.v_d) {
            return Err(Error::invalid_params(format!(
                "tuning requires v_c >= v_d, got v_c = {} < v_d = {}",
                self.v_c, self.v_d
            )));
        }
        if !(self.f_interf > self.f_ease) {
            return Err(Error::invalid_params(format!(
                "tuning requires f_interf > f_ease, got {} <= {}",
                self.f_interf, self.f_ease
            )));
        }
        Ok(())
    }
}

/// Output of [`tune`]: the controller plus how the bandwidth request fared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TunedParams<T = f64> {
    /// The tuned controller.
    pub params: SfcParams<T>,
    /// Traction bandwidth actually realized [rad/s]; lower than requested
    /// when the feasibility fallback fired.
    pub w_c_ease_effective: T,
    /// Whether the sample time forced a bandwidth reduction.
    pub bandwidth_adjusted: bool,
    /// Implied impact-phase bandwidth [rad/s].
    pub w_c_max: T,
}

/// Post-tuning audit: the three closed-form checks and their inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuningVerification<T = f64> {
    /// Steady output velocity at `f_ease` [m/s].
    pub steady_output_ease: T,
    /// Steady output velocity at `f_interf` [m/s].
    pub steady_output_interf: T,
    /// Sample-time stability bound at `f_interf` [s].
    pub sample_time_bound: T,
    /// `steady_output_ease` equals `v_d` within 1e−9 relative.
    pub traction_ok: bool,
    /// `steady_output_interf ≤ v_c·(1 + 1e−9)`.
    pub impact_ok: bool,
    /// `sample_time_bound > dt`.
    pub sample_time_ok: bool,
    /// All three checks hold.
    pub satisfied: bool,
}

// ==================== Tuning ====================

/// Threshold the implied impact bandwidth must stay under for the sample
/// time to be feasible: `2^{(1+n)/(2n)}/(dt·n)` [rad/s].
fn bandwidth_threshold<T: Scalar>(n: T, dt: T) -> T {
    let two = lit::<T>(2.0);
    two.powf((T::one() + n) / (two * n)) / (dt * n)
}

/// Solves for the controller that meets `req`.
///
/// Errors with infeasible requirements when the force/velocity ratios give
/// an exponent `n ≤ 1`: such a request needs no shear-thickening at all
/// (`n = 1` is plain linear damping) or asks velocity to grow *faster* than
/// force, which a passive damping law cannot do.
pub fn tune<T: Scalar>(req: &TuningRequirements<T>) -> Result<TunedParams<T>> {
    req.validate()?;
    let one = T::one();
    let two = lit::<T>(2.0);
    let sqrt2 = two.sqrt();

    let force_ratio = req.f_interf / req.f_ease;
    let velocity_ratio = req.v_c / req.v_d;
    let n = force_ratio.ln() / velocity_ratio.ln();
    if !n.is_finite() || n <= one {
        return Err(Error::infeasible(format!(
            "force ratio {force_ratio} and velocity ratio {velocity_ratio} give exponent n = {n}; \
             need n > 1 (velocity ratio strictly between 1 and the force ratio)"
        )));
    }

    let shape = (n - one) / n;
    let mut w_c_ease = req.w_c_ease;
    let mut w_c_max = w_c_ease * pow_abs(force_ratio, shape);
    let threshold = bandwidth_threshold(n, req.dt);
    let bandwidth_adjusted = w_c_max > threshold;
    if bandwidth_adjusted {
        // Largest traction bandwidth the sample time supports; the implied
        // impact bandwidth then lands exactly on the threshold.
        w_c_ease = two / (req.dt * n) * pow_abs(req.f_ease / (sqrt2 * req.f_interf), shape);
        w_c_max = w_c_ease * pow_abs(force_ratio, shape);
    }

    let mu = pow_abs(req.m * w_c_ease, n) / psi(n)? * pow_abs(sqrt2 / req.f_ease, n - one);
    let g = req.v_d * pow_abs(mu / req.f_ease, one / n);
    let params = SfcParams::new(req.m, mu, n, g)?;

    Ok(TunedParams { params, w_c_ease_effective: w_c_ease, bandwidth_adjusted, w_c_max })
}

/// Audits a tuning result against its requirements.
///
/// Checks that the traction operating point is met exactly, the impact
/// velocity cap is respected, and the sample time sits strictly inside its
/// stability bound at the impact force.
pub fn verify_tuning<T: Scalar>(
    tp: &TunedParams<T>,
    req: &TuningRequirements<T>,
) -> Result<TuningVerification<T>> {
    req.validate()?;
    tp.params.validate()?;
    let tol = lit::<T>(1e-9);
    let steady_output_ease = tp.params.g * tp.params.steady_internal_velocity(req.f_ease);
    let steady_output_interf = tp.params.g * tp.params.steady_internal_velocity(req.f_interf);
    let sample_time_bound = max_sample_time(&tp.params, req.f_interf)?;

    let traction_ok = ((steady_output_ease - req.v_d) / req.v_d).abs() <= tol;
    let impact_ok = steady_output_interf <= req.v_c * (T::one() + tol);
    let sample_time_ok = sample_time_bound > req.dt;
    Ok(TuningVerification {
        steady_output_ease,
        steady_output_interf,
        sample_time_bound,
        traction_ok,
        impact_ok,
        sample_time_ok,
        satisfied: traction_ok && impact_ok && sample_time_ok,
    })
}

// ==================== Tests ====================
