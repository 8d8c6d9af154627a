//! The three virtual-dynamics controller laws and their discrete stepping.
//!
//! All three controllers share the same admittance structure: a virtual
//! inertia driven by the measured external force and braked by a damping
//! force, with the internal velocity scaled by an output gain before it is
//! handed to the robot's velocity loop.
//!
//! * **SFC** (shear-thickening fluid controller):
//!   `m ẍ + μ|ẋ|^{n−1}ẋ = f_ext`, output `g·ẋ`. The power-law damping
//!   stiffens with rate, like a shear-thickening fluid: compliant under
//!   slow traction, stiff under fast impacts.
//! * **L-AC** (linear admittance controller): `m_a ẍ + μ_a ẋ = f_ext`,
//!   output `g_a·ẋ` — the SFC's `n = 1` degenerate case.
//! * **N-AC** (force-gated nonlinear baseline):
//!   `m_n ẍ + (μ_n + α_n(1 − e^{−f_ext²/σ_n²})) ẋ = f_ext`, output `g_n·ẋ`
//!   — damping grows with the *force*, not the rate, and saturates at
//!   `μ_n + α_n`.
//!
//! No controller carries a stiffness term: there is no equilibrium pose to
//! pull back to, only rate shaping.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, pow_abs, Scalar};

// ==================== Parameter sets ====================

/// Shear-thickening fluid controller parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SfcParams<T = f64> {
    /// Virtual inertia `m` [kg].
    pub m: T,
    /// Apparent viscosity `μ` [N·(s/m)^n].
    pub mu: T,
    /// Power-law exponent `n` (dimensionless, ≥ 1; `n = 1` is the linear
    /// degenerate case).
    pub n: T,
    /// Output gain `g` (dimensionless).
    pub g: T,
}

/// Linear admittance controller parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LacParams<T = f64> {
    /// Virtual inertia `m_a` [kg].
    pub m_a: T,
    /// Virtual damping `μ_a` [N·s/m].
    pub mu_a: T,
    /// Output gain `g_a` (dimensionless).
    pub g_a: T,
}

/// Force-gated nonlinear admittance controller parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NacParams<T = f64> {
    /// Virtual inertia `m_n` [kg].
    pub m_n: T,
    /// Base damping `μ_n` [N·s/m].
    pub mu_n: T,
    /// Additional damping ceiling `α_n` [N·s/m].
    pub alpha_n: T,
    /// Nonlinearity onset force `σ_n` [N].
    pub sigma_n: T,
    /// Output gain `g_n` (dimensionless).
    pub g_n: T,
}

/// Any of the three controller laws.
///
/// Serialized form is internally tagged, e.g.
/// `{"type":"sfc","m":1.0,"mu":393.0,"n":3.0,"g":0.21}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ControllerParams<T = f64> {
    /// Shear-thickening fluid controller.
    Sfc(SfcParams<T>),
    /// Linear admittance controller.
    Lac(LacParams<T>),
    /// Force-gated nonlinear admittance controller.
    Nac(NacParams<T>),
}

// ==================== State & energy ledger ====================

/// State of the virtual dynamics at one time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerState<T = f64> {
    /// Internal velocity `ẋ` [m/s] (pre-gain).
    pub v: T,
    /// Internal acceleration `ẍ` [m/s²].
    pub a: T,
    /// Integrated position `x` [m].
    pub x: T,
    /// Time [s]; nondecreasing across steps.
    pub t: T,
}

impl<T: Scalar> ControllerState<T> {
    /// State at rest at the origin, `t = 0`.
    pub fn at_rest() -> Self {
        ControllerState {
            v: T::zero(),
            a: T::zero(),
            x: T::zero(),
            t: T::zero(),
        }
    }

    /// True when every component is finite.
    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.a.is_finite() && self.x.is_finite() && self.t.is_finite()
    }
}

impl<T: Scalar> Default for ControllerState<T> {
    fn default() -> Self {
        Self::at_rest()
    }
}

/// Running energy account of a simulated trajectory.
///
/// `storage` is the kinetic energy of the virtual inertia, `½ m ẋ²`;
/// `dissipated` accumulates the damping power `∫ d(ẋ)·ẋ dt`; `work_in`
/// accumulates the drive power `∫ ẋ·f_ext dt`. A passive trajectory obeys
/// `storage(T) − storage(0) ≤ work_in(T)` up to the first-order integration
/// tolerance of the trapezoidal accumulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger<T = f64> {
    /// Kinetic storage `½ m ẋ²` [J].
    pub storage: T,
    /// Accumulated dissipation [J]; nonnegative and nondecreasing.
    pub dissipated: T,
    /// Accumulated work done by the external force [J].
    pub work_in: T,
}

impl<T: Scalar> EnergyLedger<T> {
    /// Ledger for a trajectory starting at internal velocity `v0`.
    pub fn opening(params: &ControllerParams<T>, v0: T) -> Self {
        EnergyLedger {
            storage: params.kinetic_storage(v0),
            dissipated: T::zero(),
            work_in: T::zero(),
        }
    }

    /// Advances the account across one step of width `dt`, given the
    /// internal velocity and external force at both ends of the step.
    /// Both integrals use the trapezoidal rule.
    pub fn advance(
        &mut self,
        params: &ControllerParams<T>,
        prev: (T, T),
        now: (T, T),
        dt: T,
    ) {
        let half = lit::<T>(0.5);
        let (v0, f0) = prev;
        let (v1, f1) = now;
        self.work_in = self.work_in + half * dt * (v0 * f0 + v1 * f1);
        let p0 = params.dissipation_power(v0, f0);
        let p1 = params.dissipation_power(v1, f1);
        self.dissipated = self.dissipated + half * dt * (p0 + p1);
        self.storage = params.kinetic_storage(v1);
    }
}

// ==================== SFC operations ====================

impl<T: Scalar> SfcParams<T> {
    /// Validated constructor; see [`SfcParams::validate`].
    pub fn new(m: T, mu: T, n: T, g: T) -> Result<Self> {
        let p = SfcParams { m, mu, n, g };
        p.validate()?;
        Ok(p)
    }

    /// Checks `m > 0`, `μ > 0`, `g > 0`, `n ≥ 1`, all finite.
    pub fn validate(&self) -> Result<()> {
        let fin = self.m.is_finite()
            && self.mu.is_finite()
            && self.n.is_finite()
            && self.g.is_finite();
        if !fin {
            return Err(Error::invalid_params("SFC parameters must be finite"));
        }
        if !(self.m > T::zero() && self.mu > T::zero() && self.g > T::zero()) {
            return Err(Error::invalid_params(
                "SFC requires m > 0, mu > 0, g > 0",
            ));
        }
        if self.n < T::one() {
            return Err(Error::invalid_params("SFC requires n >= 1"));
        }
        Ok(())
    }

    /// Power-law damping force `μ|v|^{n−1}v` [N].
    ///
    /// Odd in `v` and strictly increasing; exactly zero at `v = 0`.
    pub fn nonlinear_damping(&self, v: T) -> Result<T> {
        if !v.is_finite() {
            return Err(Error::NonFinite { quantity: "velocity" });
        }
        Ok(self.damping_force_raw(v))
    }

    #[inline]
    pub(crate) fn damping_force_raw(&self, v: T) -> T {
        self.mu * pow_abs(v, self.n - T::one()) * v
    }

    /// Free-motion phase-plane derivative at `(x1, x2) = (position, velocity)`:
    /// `(ẋ1, ẋ2) = (x2, −(μ/m)|x2|^{n−1}x2)`.
    pub fn phase_derivative(&self, state: (T, T)) -> (T, T) {
        let (_, x2) = state;
        (x2, -(self.damping_force_raw(x2) / self.m))
    }

    /// Spatial velocity ratio `dx2/dx1 = −(μ/m)|x2|^{n−1}` — how sharply a
    /// free trajectory bends toward the equilibrium line. For `|x2| ≥ 1`
    /// its magnitude grows with `n`; for `|x2| ≤ 1` the ordering reverses.
    pub fn spatial_velocity_ratio(&self, x2: T) -> T {
        -(self.mu / self.m) * pow_abs(x2, self.n - T::one())
    }

    /// Instantaneous dissipated power `μ|v|^{n−1}v²` [W]; nonnegative.
    pub fn dissipated_power(&self, v: T) -> T {
        self.damping_force_raw(v) * v
    }

    /// Internal steady velocity under constant force: `(|f|/μ)^{1/n}·sign(f)`.
    pub fn steady_internal_velocity(&self, f_ext: T) -> T {
        pow_abs(f_ext / self.mu, T::one() / self.n) * f_ext.signum()
    }
}

// ==================== N-AC operations ====================

impl<T: Scalar> NacParams<T> {
    /// Validated constructor; see [`NacParams::validate`].
    pub fn new(m_n: T, mu_n: T, alpha_n: T, sigma_n: T, g_n: T) -> Result<Self> {
        let p = NacParams { m_n, mu_n, alpha_n, sigma_n, g_n };
        p.validate()?;
        Ok(p)
    }

    /// Checks that every coefficient is strictly positive and finite.
    pub fn validate(&self) -> Result<()> {
        let fin = self.m_n.is_finite()
            && self.mu_n.is_finite()
            && self.alpha_n.is_finite()
            && self.sigma_n.is_finite()
            && self.g_n.is_finite();
        if !fin {
            return Err(Error::invalid_params("N-AC parameters must be finite"));
        }
        let pos = self.m_n > T::zero()
            && self.mu_n > T::zero()
            && self.alpha_n > T::zero()
            && self.sigma_n > T::zero()
            && self.g_n > T::zero();
        if !pos {
            return Err(Error::invalid_params(
                "N-AC requires all parameters strictly positive",
            ));
        }
        Ok(())
    }

    /// Force-gated damping coefficient `μ_n + α_n(1 − e^{−f²/σ_n²})`
    /// [N·s/m], bounded in `[μ_n, μ_n + α_n)`.
    pub fn damping_coeff(&self, f_ext: T) -> Result<T> {
        if !f_ext.is_finite() {
            return Err(Error::NonFinite { quantity: "external force" });
        }
        Ok(self.damping_coeff_raw(f_ext))
    }

    #[inline]
    pub(crate) fn damping_coeff_raw(&self, f_ext: T) -> T {
        let r = f_ext / self.sigma_n;
        self.mu_n + self.alpha_n * (T::one() - (-(r * r)).exp())
    }
}

// ==================== L-AC operations ====================

impl<T: Scalar> LacParams<T> {
    /// Validated constructor; see [`LacParams::validate`].
    pub fn new(m_a: T, mu_a: T, g_a: T) -> Result<Self> {
        let p = LacParams { m_a, mu_a, g_a };
        p.validate()?;
        Ok(p)
    }

    /// Checks that every coefficient is strictly positive and finite.
    pub fn validate(&self) -> Result<()> {
        let fin = self.m_a.is_finite() && self.mu_a.is_finite() && self.g_a.is_finite();
        if !fin {
            return Err(Error::invalid_params("L-AC parameters must be finite"));
        }
        if !(self.m_a > T::zero() && self.mu_a > T::zero() && self.g_a > T::zero()) {
            return Err(Error::invalid_params(
                "L-AC requires all parameters strictly positive",
            ));
        }
        Ok(())
    }
}

// ==================== Shared controller interface ====================

impl<T: Scalar> ControllerParams<T> {
    /// Validates the wrapped parameter set.
    pub fn validate(&self) -> Result<()> {
        match self {
            ControllerParams::Sfc(p) => p.validate(),
            ControllerParams::Lac(p) => p.validate(),
            ControllerParams::Nac(p) => p.validate(),
        }
    }

    /// Virtual inertia of the law [kg].
    pub fn virtual_inertia(&self) -> T {
        match self {
            ControllerParams::Sfc(p) => p.m,
            ControllerParams::Lac(p) => p.m_a,
            ControllerParams::Nac(p) => p.m_n,
        }
    }

    /// Output gain of the law (dimensionless).
    pub fn output_gain(&self) -> T {
        match self {
            ControllerParams::Sfc(p) => p.g,
            ControllerParams::Lac(p) => p.g_a,
            ControllerParams::Nac(p) => p.g_n,
        }
    }

    /// Damping force [N] at internal velocity `v`, given the force sample
    /// the step is driven by (only the N-AC coefficient depends on it).
    #[inline]
    pub(crate) fn damping_force_raw(&self, v: T, f_ext: T) -> T {
        match self {
            ControllerParams::Sfc(p) => p.damping_force_raw(v),
            ControllerParams::Lac(p) => p.mu_a * v,
            ControllerParams::Nac(p) => p.damping_coeff_raw(f_ext) * v,
        }
    }

    /// One forward-Euler step of width `dt`:
    ///
    /// ```text
    /// a(t) = m⁻¹ (f_ext(t) − d(v(t−1), f_ext(t)))
    /// v(t) = v(t−1) + a(t)·dt
    /// x(t) = x(t−1) + v(t)·dt
    /// ```
    ///
    /// The damping force is evaluated at the *previous* velocity, and (for
    /// N-AC) at the *current* force sample. The commanded robot velocity is
    /// obtained separately via [`ControllerParams::apply_gain`].
    pub fn step_discrete(&self, s: &ControllerState<T>, f_ext: T, dt: T) -> ControllerState<T> {
        let a = (f_ext - self.damping_force_raw(s.v, f_ext)) / self.virtual_inertia();
        let v = s.v + a * dt;
        let x = s.x + v * dt;
        ControllerState { v, a, x, t: s.t + dt }
    }

    /// Output (commanded) velocity `g·v` [m/s].
    pub fn apply_gain(&self, v: T) -> T {
        self.output_gain() * v
    }

    /// Output velocity the law settles at under a constant force [m/s].
    ///
    /// SFC: `g·(|f|/μ)^{1/n}·sign(f)`. L-AC: `g_a·f/μ_a`. N-AC:
    /// `g_n·f/(μ_n + α_n(1 − e^{−f²/σ_n²}))` — closed form, since the
    /// coefficient depends only on the (constant) force.
    pub fn steady_state_velocity(&self, f_ext: T) -> T {
        match self {
            ControllerParams::Sfc(p) => p.g * p.steady_internal_velocity(f_ext),
            ControllerParams::Lac(p) => p.g_a * f_ext / p.mu_a,
            ControllerParams::Nac(p) => p.g_n * f_ext / p.damping_coeff_raw(f_ext),
        }
    }

    /// Instantaneous dissipation `d(v)·v` [W] under force sample `f_ext`.
    #[inline]
    pub(crate) fn dissipation_power(&self, v: T, f_ext: T) -> T {
        self.damping_force_raw(v, f_ext) * v
    }

    /// Kinetic storage `½ m v²` [J].
    #[inline]
    pub(crate) fn kinetic_storage(&self, v: T) -> T {
        lit::<T>(0.5) * self.virtual_inertia() * v * v
    }
}

// ==================== Tests ====================
