//! Discretization and coupled-interaction safety checks.
//!
//! Forward-Euler integration of a power-law damper is only conditionally
//! stable: too large a sample time makes the damping term overshoot the
//! sign reversal every step and the velocity rings or explodes. This module
//! provides the closed-form limits — the sample-time bound, the bandwidth a
//! given sample time can support, and the coupled-interaction condition —
//! plus small diagnostic tools: the apparent admittance phase seen through a
//! zero-order hold, a conditioning probe for the power-law term, and a sign-
//! change oscillation detector for simulated acceleration traces.

use serde::{Deserialize, Serialize};

use crate::controller::SfcParams;
use crate::describing::psi;
use crate::error::{Error, Result};
use crate::scalar::{lit, pi, pow_abs, Scalar};

// ==================== Report types ====================

/// Outcome of a single scalar bound check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport<T = f64> {
    /// Whether the checked quantity is inside the bound.
    pub satisfied: bool,
    /// The computed limit, in the units of the checked quantity.
    pub bound_value: T,
    /// Ratio of actual to bound; `satisfied` ⇔ `margin < 1`.
    pub margin: T,
}

impl<T: Scalar> ConstraintReport<T> {
    /// Builds a report from a bound and the actual value, keeping the
    /// `satisfied ⇔ margin < 1` invariant by construction.
    pub fn from_bound(bound_value: T, actual: T) -> Self {
        let margin = actual / bound_value;
        Self { satisfied: margin < T::one(), bound_value, margin }
    }
}

/// Where a sample time sits relative to its stability bound.
///
/// `Marginal` covers ±5% around the bound: close enough that slow ringing
/// with very gradual convergence is expected rather than a clean exponential
/// approach.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DtClass {
    Safe,
    Marginal,
    Violated,
}

/// Overall verdict for a constant-force step run at a given sample time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepVerdict {
    /// Settles onto the steady velocity without a ringing tail.
    Converged,
    /// Sample time within ±5% of the bound; expect slow ringing.
    Marginal,
    /// Bounded but sign-alternating acceleration tail.
    Oscillatory,
    /// Velocity left the basin (exceeded 10× the steady value).
    Divergent,
}

// ==================== Sample-time bound ====================

/// Largest forward-Euler sample time that keeps the velocity update from
/// overshooting the damping equilibrium at force magnitude `f_max` [s]:
///
/// ```text
/// dt_max = 2·m·μ^{−1/n}·n^{−1}·|f_max|^{(1−n)/n}
/// ```
///
/// Force-independent for `n = 1` (the classic `2m/μ` first-order limit);
/// shrinking in both `f_max` and `n` above that. The bound is evaluated at
/// the largest force the controller must survive, since that is where the
/// local damping slope is steepest.
pub fn max_sample_time<T: Scalar>(p: &SfcParams<T>, f_max: T) -> Result<T> {
    p.validate()?;
    if !(f_max > T::zero()) {
        return Err(Error::domain("max_sample_time requires f_max > 0"));
    }
    let inv_n = T::one() / p.n;
    let two = lit::<T>(2.0);
    Ok(two * p.m / (p.n * pow_abs(p.mu, inv_n) * pow_abs(f_max, (p.n - T::one()) * inv_n)))
}

/// Checks a concrete sample time against [`max_sample_time`].
pub fn check_sample_time<T: Scalar>(p: &SfcParams<T>, f_max: T, dt: T) -> Result<ConstraintReport<T>> {
    if !(dt > T::zero()) {
        return Err(Error::domain("check_sample_time requires dt > 0"));
    }
    Ok(ConstraintReport::from_bound(max_sample_time(p, f_max)?, dt))
}

/// Classifies a sample time as safe, marginal (within ±5% of the bound) or
/// violated.
pub fn classify_sample_time<T: Scalar>(p: &SfcParams<T>, f_max: T, dt: T) -> Result<DtClass> {
    let report = check_sample_time(p, f_max, dt)?;
    let band = lit::<T>(0.05);
    Ok(if report.margin < T::one() - band {
        DtClass::Safe
    } else if report.margin <= T::one() + band {
        DtClass::Marginal
    } else {
        DtClass::Violated
    })
}

// ==================== Bandwidth bound ====================

/// Largest describing-function bandwidth a sample time `dt` supports at
/// external force `f_ext`, with the damping sized for `f_max` [rad/s]:
///
/// ```text
/// ω_max = 2^{(n+1)/(2n)}·Ψ(n)^{1/n}/(dt·n) · |f_ext/f_max|^{(n−1)/n}
/// ```
///
/// At `f_ext = f_max` this is the hard ceiling; weaker forces buy less
/// bandwidth because the local damping slope — and with it the reachable
/// crossover — drops with amplitude.
pub fn max_bandwidth<T: Scalar>(p: &SfcParams<T>, dt: T, f_ext: T, f_max: T) -> Result<T> {
    p.validate()?;
    if !(dt > T::zero()) {
        return Err(Error::domain("max_bandwidth requires dt > 0"));
    }
    if !(f_ext > T::zero() && f_ext <= f_max) {
        return Err(Error::domain("max_bandwidth requires 0 < f_ext <= f_max"));
    }
    let one = T::one();
    let two = lit::<T>(2.0);
    let inv_n = one / p.n;
    let lead = two.powf((p.n + one) / (two * p.n)) * pow_abs(psi(p.n)?, inv_n) / (dt * p.n);
    Ok(lead * pow_abs(f_ext / f_max, (p.n - one) * inv_n))
}

// ==================== Coupled-interaction condition ====================

/// Inputs for the coupled-interaction stability condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledCheckInput<T = f64> {
    /// Controller under test.
    pub params: SfcParams<T>,
    /// Worst-case internal velocity amplitude `B` [m/s].
    pub b: T,
    /// Interaction frequency [rad/s].
    pub omega: T,
    /// Sample time [s].
    pub dt: T,
}

impl<T: Scalar> CoupledCheckInput<T> {
    /// All fields must be positive and finite.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        for (value, what) in [(self.b, "B"), (self.omega, "omega"), (self.dt, "dt")] {
            if !value.is_finite() {
                return Err(Error::NonFinite { quantity: "coupled-check input" });
            }
            if !(value > T::zero()) {
                return Err(Error::domain(format!(
                    "coupled check requires {what} > 0, got {value}"
                )));
            }
        }
        Ok(())
    }
}

/// Result of the coupled-interaction stability check.
///
/// The discrete loop is accepted when both `0 < Q < 1` and `0 < ΔT·ω < π`
/// hold, with `Q = μ·B^{n−1}·Ψ(n)·ΔT/m` the one-step damping ratio at
/// amplitude `B`. `margin` is `max(Q, ΔTω/π)`, so `satisfied ⇔ margin < 1`
/// just like [`ConstraintReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledStabilityReport<T = f64> {
    /// One-step damping ratio `Q` [dimensionless].
    pub q: T,
    /// Phase advance per sample `ΔT·ω` [rad].
    pub dt_omega: T,
    /// Both conditions hold.
    pub satisfied: bool,
    /// `max(Q, ΔTω/π)`; `satisfied ⇔ margin < 1`.
    pub margin: T,
}

/// One-step damping ratio `Q = μ·B^{n−1}·Ψ(n)·ΔT/m`.
pub fn coupled_q<T: Scalar>(p: &SfcParams<T>, b: T, dt: T) -> Result<T> {
    p.validate()?;
    if !(b > T::zero() && dt > T::zero()) {
        return Err(Error::domain("coupled_q requires B > 0 and dt > 0"));
    }
    Ok(p.mu * pow_abs(b, p.n - T::one()) * psi(p.n)? * dt / p.m)
}

/// Evaluates the coupled-interaction condition for `inp`.
pub fn coupled_stability_check<T: Scalar>(inp: &CoupledCheckInput<T>) -> Result<CoupledStabilityReport<T>> {
    inp.validate()?;
    let q = coupled_q(&inp.params, inp.b, inp.dt)?;
    let dt_omega = inp.dt * inp.omega;
    let margin = q.max(dt_omega / pi::<T>());
    Ok(CoupledStabilityReport {
        q,
        dt_omega,
        satisfied: margin < T::one(),
        margin,
    })
}

/// Largest steady internal velocity the controller reaches under forces up
/// to `f_max`: `(f_max/μ)^{1/n}` [m/s]. The conservative amplitude to feed
/// the coupled check.
pub fn worst_case_velocity_amplitude<T: Scalar>(p: &SfcParams<T>, f_max: T) -> Result<T> {
    p.validate()?;
    if !(f_max > T::zero()) {
        return Err(Error::domain(
            "worst_case_velocity_amplitude requires f_max > 0",
        ));
    }
    Ok(p.steady_internal_velocity(f_max))
}

// ==================== Apparent admittance phase ====================

/// Phase of the sampled (zero-order-hold) admittance at phase advance
/// `ΔTω` per step, from the raw pair `(Q, ΔTω)` [rad]:
///
/// ```text
/// φ = arctan((Q−1)·sin(ΔTω) / (1 + (Q−1)·cos(ΔTω))) − ΔTω/2
/// ```
///
/// Defined on `Q ∈ (0, 1)`, `ΔTω ∈ (0, π)`, where the denominator stays
/// positive and the total phase lag stays below 90°.
pub fn apparent_phase_raw<T: Scalar>(q: T, dt_omega: T) -> Result<T> {
    if !(q > T::zero() && q < T::one()) {
        return Err(Error::domain(format!(
            "apparent phase requires Q in (0, 1), got {q}"
        )));
    }
    if !(dt_omega > T::zero() && dt_omega < pi::<T>()) {
        return Err(Error::domain(format!(
            "apparent phase requires dt*omega in (0, pi), got {dt_omega}"
        )));
    }
    let qm1 = q - T::one();
    let num = qm1 * dt_omega.sin();
    let den = T::one() + qm1 * dt_omega.cos();
    Ok((num / den).atan() - dt_omega / lit::<T>(2.0))
}

/// Apparent admittance phase for a concrete controller at amplitude `B`,
/// frequency `omega`, and sample time `dt` [rad].
pub fn apparent_admittance_phase<T: Scalar>(p: &SfcParams<T>, b: T, omega: T, dt: T) -> Result<T> {
    if !(omega > T::zero()) {
        return Err(Error::domain("apparent_admittance_phase requires omega > 0"));
    }
    apparent_phase_raw(coupled_q(p, b, dt)?, dt * omega)
}

// ==================== Conditioning probe ====================

/// Acceleration of the virtual dynamics at velocity `v` and at `v + delta`,
/// under the same force [m/s² pair].
///
/// A direct probe of how violently the power-law damping amplifies velocity
/// perturbations: at large `n`, a 10% velocity error can swing the computed
/// acceleration by orders of magnitude — the ill-conditioning that makes
/// high exponents impractical on real hardware.
pub fn euler_sensitivity<T: Scalar>(p: &SfcParams<T>, v: T, delta: T, f_ext: T) -> Result<(T, T)> {
    p.validate()?;
    for value in [v, delta, f_ext] {
        if !value.is_finite() {
            return Err(Error::NonFinite { quantity: "sensitivity input" });
        }
    }
    let a_true = (f_ext - p.damping_force_raw(v)) / p.m;
    let a_perturbed = (f_ext - p.damping_force_raw(v + delta)) / p.m;
    Ok((a_true, a_perturbed))
}

// ==================== Oscillation detector ====================

/// Detects a ringing tail in an acceleration trace.
///
/// Looks at the trailing 25% of `accel` and counts sign changes between
/// consecutive samples, ignoring samples whose magnitude falls below
/// 1e−9 × the whole trace's peak acceleration. The floor is anchored to
/// the full trace, not the tail: a run that has settled onto its fixed
/// point to machine precision leaves a tail of rounding dust (often an
/// exact ±1-ulp two-cycle), and measuring that dust against its own peak
/// would mislabel clean convergence as ringing. A genuine limit cycle
/// swings at a macroscopic fraction of the transient acceleration and
/// clears the trace-wide floor easily. Four or more changes count as
/// oscillation. Traces shorter than ~20 samples never fire — there are
/// too few tail samples to alternate four times.
pub fn oscillation_detected<T: Scalar>(accel: &[T]) -> bool {
    let tail = &accel[accel.len() - accel.len() / 4..];
    let max_abs = accel.iter().fold(T::zero(), |m, a| m.max(a.abs()));
    if !(max_abs > T::zero()) {
        return false;
    }
    let floor = lit::<T>(1e-9) * max_abs;
    let mut changes = 0usize;
    let mut last_sign = 0i8;
    for a in tail {
        if a.abs() <= floor {
            continue;
        }
        let sign = if *a > T::zero() { 1 } else { -1 };
        if last_sign != 0 && sign != last_sign {
            changes += 1;
        }
        last_sign = sign;
    }
    changes >= 4
}

// ==================== Tests ====================
