//! Time-domain simulation and numeric frequency-response measurement.
//!
//! Everything here is deliberately independent of the closed-form analysis
//! in [`crate::describing`]: the runner integrates the discrete update law
//! sample by sample, and the probes below (`measure_gain`,
//! `numeric_bandwidth`, `numeric_time_constant`, `numeric_dc_gain`) extract
//! frequency-domain quantities from raw traces. Agreement between the two
//! routes is what the analysis-vs-simulation tests check; keeping this
//! module formula-free is what makes those checks meaningful.

use serde::{Deserialize, Serialize};

use crate::controller::{ControllerParams, ControllerState, EnergyLedger, SfcParams};
use crate::describing::{self, BodeCurve, BodePoint};
use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};
use crate::signal::InputSignal;
use crate::spectrum;
use crate::stability::{self, DtClass, StepVerdict};

/// Hard cap on trace rows (≈1.6 GB of `f64` columns) so a typo'd `dt`
/// fails fast instead of exhausting memory.
const MAX_TRACE_ROWS: usize = 20_000_000;

/// 20·log₁₀(√2): the half-power drop used for bandwidth readout [dB].
const HALF_POWER_DB: f64 = 3.010_299_956_639_812;

/// 1 − e⁻¹, the first-order step-response level at one time constant.
const ONE_TAU_LEVEL: f64 = 0.632_120_558_828_557_7;

// ==================== Configuration ====================

/// One open-loop simulation: a controller driven by a force signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig<T = f64> {
    /// Virtual dynamics under test.
    pub controller: ControllerParams<T>,
    /// External force applied to the virtual dynamics [N].
    pub input: InputSignal<T>,
    /// Integration step [s]; also the controller's sampling interval.
    pub dt: T,
    /// Simulated span [s], counted from `initial_state.t`.
    pub duration: T,
    /// Starting state; `ControllerState::at_rest()` for a cold start.
    pub initial_state: ControllerState<T>,
}

impl<T: Scalar> SimConfig<T> {
    pub fn validate(&self) -> Result<()> {
        self.controller.validate()?;
        self.input.validate()?;
        if !(self.dt.is_finite() && self.duration.is_finite()) {
            return Err(Error::NonFinite { quantity: "sample time or duration" });
        }
        if self.dt <= T::zero() {
            return Err(Error::config(format!("sample time must be positive, got {}", self.dt)));
        }
        if self.duration < self.dt {
            return Err(Error::config(format!(
                "duration {} is shorter than one sample interval {}",
                self.duration, self.dt
            )));
        }
        if !self.initial_state.is_finite() {
            return Err(Error::NonFinite { quantity: "initial state" });
        }
        Ok(())
    }
}

/// First-order operator model closing the loop around a controller.
///
/// The operator pushes with an intent force and feels the commanded motion
/// back through their own inertia and viscosity:
///
/// ```text
/// f_ext(t) = f_intent(t) − (m_h·v̇_out(t) + b_h·v_out(t))
/// ```
///
/// where `v_out` is the post-gain commanded velocity and the derivative is
/// a backward difference of the two previous outputs (the reaction a causal
/// implementation can actually compute).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanModel<T = f64> {
    /// Effective arm inertia [kg].
    pub m_h: T,
    /// Effective arm viscosity [N·s/m].
    pub b_h: T,
    /// Voluntary drive force [N].
    pub f_intent: InputSignal<T>,
}

impl<T: Scalar> HumanModel<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.m_h.is_finite() && self.b_h.is_finite()) {
            return Err(Error::NonFinite { quantity: "operator model parameter" });
        }
        if self.m_h < T::zero() || self.b_h < T::zero() {
            return Err(Error::invalid_params(format!(
                "operator inertia and viscosity must be nonnegative, got m_h={} b_h={}",
                self.m_h, self.b_h
            )));
        }
        self.f_intent.validate()
    }
}

// ==================== Trace ====================

/// Column-oriented record of a simulation run.
///
/// Row `k` holds the state *after* `k` update steps; row 0 is the initial
/// condition. All columns have equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace<T = f64> {
    /// Sample instants [s], an exact arithmetic grid `t₀ + k·dt`.
    pub time: Vec<T>,
    /// Force applied to the virtual dynamics [N].
    pub f_ext: Vec<T>,
    /// Reaction force of the operator model [N]; zero in open-loop runs.
    pub f_human: Vec<T>,
    /// Internal acceleration [m/s²].
    pub accel: Vec<T>,
    /// Internal (pre-gain) velocity [m/s].
    pub v_internal: Vec<T>,
    /// Commanded (post-gain) velocity [m/s].
    pub v_output: Vec<T>,
    /// Integrated internal position [m].
    pub position: Vec<T>,
    /// Accumulated drive work [J].
    pub work_in: Vec<T>,
    /// Accumulated dissipation [J].
    pub dissipated: Vec<T>,
    /// Instantaneous kinetic storage [J].
    pub storage: Vec<T>,
}

impl<T: Scalar> SimTrace<T> {
    fn with_capacity(rows: usize) -> Self {
        SimTrace {
            time: Vec::with_capacity(rows),
            f_ext: Vec::with_capacity(rows),
            f_human: Vec::with_capacity(rows),
            accel: Vec::with_capacity(rows),
            v_internal: Vec::with_capacity(rows),
            v_output: Vec::with_capacity(rows),
            position: Vec::with_capacity(rows),
            work_in: Vec::with_capacity(rows),
            dissipated: Vec::with_capacity(rows),
            storage: Vec::with_capacity(rows),
        }
    }

    fn push_row(
        &mut self,
        t: T,
        f_ext: T,
        f_human: T,
        state: &ControllerState<T>,
        v_out: T,
        ledger: &EnergyLedger<T>,
    ) {
        self.time.push(t);
        self.f_ext.push(f_ext);
        self.f_human.push(f_human);
        self.accel.push(state.a);
        self.v_internal.push(state.v);
        self.v_output.push(v_out);
        self.position.push(state.x);
        self.work_in.push(ledger.work_in);
        self.dissipated.push(ledger.dissipated);
        self.storage.push(ledger.storage);
    }

    /// Number of rows (steps + 1).
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    /// Commanded velocity at the final sample [m/s].
    pub fn last_v_output(&self) -> T {
        *self.v_output.last().expect("trace has at least the initial row")
    }

    /// Largest commanded speed over the whole run [m/s].
    pub fn peak_abs_v_output(&self) -> T {
        self.v_output.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()))
    }

    /// Largest internal speed over the whole run [m/s].
    pub fn max_abs_v_internal(&self) -> T {
        self.v_internal.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()))
    }

    /// Writes the trace as CSV with a fixed column order.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(
            w,
            "time,f_ext,f_human,accel,v_internal,v_output,position,work_in,dissipated,storage"
        )?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                self.time[i],
                self.f_ext[i],
                self.f_human[i],
                self.accel[i],
                self.v_internal[i],
                self.v_output[i],
                self.position[i],
                self.work_in[i],
                self.dissipated[i],
                self.storage[i]
            )?;
        }
        Ok(())
    }
}

// ==================== Runners ====================

/// Rows a run of `duration` at step `dt` will append after the initial one.
///
/// The quotient gets a 1e−9 relative nudge before truncation so that
/// durations meant as exact multiples of `dt` (but not representable) don't
/// lose their last step.
fn step_count<T: Scalar>(duration: T, dt: T) -> Result<usize> {
    let ratio = (duration / dt)
        .to_f64()
        .ok_or_else(|| Error::Numeric("duration/dt is not representable as f64".into()))?;
    let steps = (ratio * (1.0 + 1e-9)).floor();
    if !(steps >= 1.0) {
        return Err(Error::config(format!(
            "duration covers no complete step (duration/dt = {ratio})"
        )));
    }
    if steps >= MAX_TRACE_ROWS as f64 {
        return Err(Error::config(format!(
            "run would produce {steps:.0} rows; the limit is {MAX_TRACE_ROWS}"
        )));
    }
    Ok(steps as usize)
}

/// Simulates a controller driven by `config.input`.
///
/// Integration follows the discrete update law exactly — forward Euler with
/// the damping force at the previous velocity — because the point of the
/// trace is to expose that law's behaviour, artifacts included. Sample
/// times are laid on the exact grid `t₀ + k·dt` rather than accumulated, so
/// million-step runs don't drift. A non-finite state aborts with
/// [`Error::Divergence`] naming the offending step.
pub fn run<T: Scalar>(config: &SimConfig<T>) -> Result<SimTrace<T>> {
    config.validate()?;
    let steps = step_count(config.duration, config.dt)?;
    let dt = config.dt;
    let t0 = config.initial_state.t;

    let mut trace = SimTrace::with_capacity(steps + 1);
    let mut state = config.initial_state;
    let mut ledger = EnergyLedger::opening(&config.controller, state.v);
    let mut f_prev = config.input.sample(t0);
    trace.push_row(
        t0,
        f_prev,
        T::zero(),
        &state,
        config.controller.apply_gain(state.v),
        &ledger,
    );

    for k in 1..=steps {
        let t_k = t0 + lit::<T>(k as f64) * dt;
        let f_k = config.input.sample(t_k);
        let mut next = config.controller.step_discrete(&state, f_k, dt);
        next.t = t_k;
        if !next.is_finite() {
            return Err(Error::Divergence {
                step: k,
                time: t_k.to_f64().unwrap_or(f64::NAN),
                quantity: "controller state",
            });
        }
        ledger.advance(&config.controller, (state.v, f_prev), (next.v, f_k), dt);
        trace.push_row(
            t_k,
            f_k,
            T::zero(),
            &next,
            config.controller.apply_gain(next.v),
            &ledger,
        );
        state = next;
        f_prev = f_k;
    }
    Ok(trace)
}

/// Simulates a controller coupled to the operator model.
///
/// The force entering the virtual dynamics at step `k` is
/// `human.f_intent(t_k)` minus the operator's reaction to the *previous*
/// commanded output (backward difference for the inertial term, zero at the
/// first step). `config.input` is ignored here: in the coupled setting the
/// drive force is owned by the operator model, not the scenario.
pub fn run_coupled<T: Scalar>(
    config: &SimConfig<T>,
    human: &HumanModel<T>,
) -> Result<SimTrace<T>> {
    config.validate()?;
    human.validate()?;
    let steps = step_count(config.duration, config.dt)?;
    let dt = config.dt;
    let t0 = config.initial_state.t;

    let mut trace = SimTrace::with_capacity(steps + 1);
    let mut state = config.initial_state;
    let mut ledger = EnergyLedger::opening(&config.controller, state.v);
    let v_out0 = config.controller.apply_gain(state.v);
    let mut v_out_prev = v_out0;
    let mut v_out_prev2 = v_out0;
    let f_h0 = human.b_h * v_out0;
    let mut f_prev = human.f_intent.sample(t0) - f_h0;
    trace.push_row(t0, f_prev, f_h0, &state, v_out0, &ledger);

    for k in 1..=steps {
        let t_k = t0 + lit::<T>(k as f64) * dt;
        let f_h = human.m_h * (v_out_prev - v_out_prev2) / dt + human.b_h * v_out_prev;
        let f_k = human.f_intent.sample(t_k) - f_h;
        let mut next = config.controller.step_discrete(&state, f_k, dt);
        next.t = t_k;
        if !next.is_finite() {
            return Err(Error::Divergence {
                step: k,
                time: t_k.to_f64().unwrap_or(f64::NAN),
                quantity: "controller state",
            });
        }
        ledger.advance(&config.controller, (state.v, f_prev), (next.v, f_k), dt);
        let v_out = config.controller.apply_gain(next.v);
        trace.push_row(t_k, f_k, f_h, &next, v_out, &ledger);
        state = next;
        f_prev = f_k;
        v_out_prev2 = v_out_prev;
        v_out_prev = v_out;
    }
    Ok(trace)
}

// ==================== Sinusoidal gain measurement ====================

/// Fundamental-component readout of one sinusoidal probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainMeasurement<T = f64> {
    /// Probe frequency [rad/s].
    pub omega: T,
    /// Fundamental amplitude of the internal velocity [m/s].
    pub b: T,
    /// `b / amplitude` [m/s per N].
    pub gain: T,
    /// Phase of the velocity fundamental relative to the force [rad].
    pub phase_rad: T,
}

/// Largest integration step the discrete update law tolerates at this
/// drive amplitude [s].
fn dt_stability_cap<T: Scalar>(p: &ControllerParams<T>, amplitude: T) -> Result<T> {
    match p {
        ControllerParams::Sfc(s) => stability::max_sample_time(s, amplitude),
        ControllerParams::Lac(l) => Ok(lit::<T>(2.0) * l.m_a / l.mu_a),
        // Worst case is the gate fully open: damping m/(mu+alpha).
        ControllerParams::Nac(n) => Ok(lit::<T>(2.0) * n.m_n / (n.mu_n + n.alpha_n)),
    }
}

/// Slowest settling time scale at this drive amplitude [s]; used to size
/// transients, so an estimate is fine.
fn time_constant_estimate<T: Scalar>(p: &ControllerParams<T>, amplitude: T) -> Result<T> {
    match p {
        ControllerParams::Sfc(s) => describing::time_constant_analytic(s, amplitude),
        ControllerParams::Lac(l) => Ok(l.m_a / l.mu_a),
        // Gate shut is the slowest N-AC mode.
        ControllerParams::Nac(n) => Ok(n.m_n / n.mu_n),
    }
}

/// Measures the velocity response to `amplitude·sin(ω t)` by simulation.
///
/// The probe picks its own integration step: an integer number of
/// subdivisions per period (at least 512, more when stability demands a
/// smaller step), so the projection window covers whole cycles exactly. It
/// discards a transient of `max(5τ, 10 periods)` and then projects the last
/// ten cycles of internal velocity onto the drive fundamental
/// (rectangle-rule Fourier integral). Gain is referred to the *internal*
/// velocity; multiply by the output gain for the commanded one.
pub fn measure_gain<T: Scalar>(
    p: &ControllerParams<T>,
    amplitude: T,
    omega: T,
) -> Result<GainMeasurement<T>> {
    p.validate()?;
    if !(amplitude.is_finite() && omega.is_finite()) {
        return Err(Error::NonFinite { quantity: "probe amplitude or frequency" });
    }
    if amplitude <= T::zero() || omega <= T::zero() {
        return Err(Error::domain(format!(
            "probe needs positive amplitude and frequency, got A={amplitude} omega={omega}"
        )));
    }
    let period = lit::<T>(std::f64::consts::TAU) / omega;
    let cap = dt_stability_cap(p, amplitude)?;
    let min_div = (period / (lit::<T>(0.5) * cap))
        .to_f64()
        .map(f64::ceil)
        .unwrap_or(f64::MAX);
    if min_div > 1e7 {
        return Err(Error::config(format!(
            "frequency {omega} rad/s needs {min_div:.0} steps per period to stay stable; \
             that exceeds the probe budget"
        )));
    }
    let n_div = (min_div as usize).max(512);
    let dt = period / lit::<T>(n_div as f64);

    let tau = time_constant_estimate(p, amplitude)?;
    let transient = (lit::<T>(5.0) * tau).max(lit::<T>(10.0) * period);
    let transient_steps = (transient / dt).to_f64().map(f64::ceil).unwrap_or(f64::MAX) as usize;
    let window = 10 * n_div;
    let total_steps = transient_steps + window;
    if total_steps >= MAX_TRACE_ROWS {
        return Err(Error::config(format!(
            "probe at omega={omega} would need {total_steps} steps; the limit is {MAX_TRACE_ROWS}"
        )));
    }
    let config = SimConfig {
        controller: *p,
        input: InputSignal::Sine { amplitude, omega },
        dt,
        duration: dt * lit::<T>(total_steps as f64),
        initial_state: ControllerState::at_rest(),
    };
    let trace = run(&config)?;
    let len = trace.len();
    debug_assert!(len > window, "probe trace shorter than its projection window");

    let mut b_s = T::zero();
    let mut b_c = T::zero();
    for j in (len - window)..len {
        let phase = omega * trace.time[j];
        b_s = b_s + trace.v_internal[j] * phase.sin();
        b_c = b_c + trace.v_internal[j] * phase.cos();
    }
    let scale = lit::<T>(2.0) / lit::<T>(window as f64);
    b_s = b_s * scale;
    b_c = b_c * scale;
    let b = b_s.hypot(b_c);
    Ok(GainMeasurement {
        omega,
        b,
        gain: b / amplitude,
        phase_rad: b_c.atan2(b_s),
    })
}

// ==================== Numeric frequency-domain probes ====================

/// Default probe grid: 60 log-spaced frequencies over 0.01–100 rad/s.
pub const DEFAULT_GRID_POINTS: usize = 60;

pub fn default_omega_grid<T: Scalar>() -> Vec<T> {
    let span = DEFAULT_GRID_POINTS - 1;
    (0..DEFAULT_GRID_POINTS)
        .map(|i| lit::<T>(10f64.powf(-2.0 + 4.0 * i as f64 / span as f64)))
        .collect()
}

/// Sweeps `measure_gain` over a frequency grid into a Bode curve.
pub fn numeric_bode<T: Scalar>(
    p: &ControllerParams<T>,
    amplitude: T,
    omegas: &[T],
) -> Result<BodeCurve<T>> {
    if omegas.is_empty() {
        return Err(Error::domain("frequency grid is empty"));
    }
    let mut points = Vec::with_capacity(omegas.len());
    for &omega in omegas {
        let m = measure_gain(p, amplitude, omega)?;
        points.push(BodePoint {
            omega,
            gain_db: describing::to_db(m.gain),
            phase_rad: m.phase_rad,
        });
    }
    let curve = BodeCurve { amplitude_a: amplitude, points };
    curve.validate()?;
    Ok(curve)
}

/// Half-power bandwidth of a measured curve [rad/s].
///
/// The low-frequency plateau is taken from the first grid point, so the
/// grid must start well below the knee. Log-frequency linear interpolation
/// between the samples bracketing the −3.01 dB crossing; a curve that never
/// drops that far yields [`Error::NoCrossing`].
pub fn numeric_bandwidth<T: Scalar>(curve: &BodeCurve<T>) -> Result<T> {
    curve.validate()?;
    let pts = &curve.points;
    if pts.len() < 2 {
        return Err(Error::domain(format!(
            "bandwidth readout needs at least two curve points, got {}",
            pts.len()
        )));
    }
    let target = pts[0].gain_db - lit::<T>(HALF_POWER_DB);
    for j in 1..pts.len() {
        if pts[j].gain_db <= target {
            let g0 = pts[j - 1].gain_db;
            let g1 = pts[j].gain_db;
            let lw0 = pts[j - 1].omega.log10();
            let lw1 = pts[j].omega.log10();
            let frac = (target - g0) / (g1 - g0);
            return Ok(lit::<T>(10.0).powf(lw0 + (lw1 - lw0) * frac));
        }
    }
    Err(Error::NoCrossing {
        level_db: target.to_f64().unwrap_or(f64::NAN),
    })
}

/// 63.2%-rise time constant of a step-response trace [s].
///
/// The steady level is the mean of the trailing tenth of the internal
/// velocity; if that tail still moves by more than 1% relative, or the
/// trace never crosses the level, the measurement is refused rather than
/// guessed. Time is counted from the first sample.
pub fn numeric_time_constant<T: Scalar>(trace: &SimTrace<T>) -> Result<T> {
    let len = trace.len();
    if len < 20 {
        return Err(Error::domain(format!(
            "time-constant readout needs at least 20 samples, got {len}"
        )));
    }
    let tail_len = (len / 10).max(2);
    let tail = &trace.v_internal[len - tail_len..];
    let mut sum = T::zero();
    let mut lo = tail[0];
    let mut hi = tail[0];
    for &v in tail {
        sum = sum + v;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let mean = sum / lit::<T>(tail_len as f64);
    if mean.abs() <= T::epsilon() {
        return Err(Error::NoSteadyState(
            "trace settles at zero; there is no rise level to time".into(),
        ));
    }
    let rel_spread = ((hi - lo) / mean.abs()).to_f64().unwrap_or(f64::NAN);
    if !(rel_spread <= 0.01) {
        return Err(Error::NoSteadyState(format!(
            "trailing tenth still moves by {rel_spread:.2e} relative; not settled"
        )));
    }
    let target = lit::<T>(ONE_TAU_LEVEL) * mean;
    let dir = if mean > T::zero() { T::one() } else { -T::one() };
    if (trace.v_internal[0] - target) * dir >= T::zero() {
        // Already past the level at the first sample.
        return Ok(T::zero());
    }
    for j in 1..len {
        if (trace.v_internal[j] - target) * dir >= T::zero() {
            let v0 = trace.v_internal[j - 1];
            let v1 = trace.v_internal[j];
            let frac = (target - v0) / (v1 - v0);
            let t = trace.time[j - 1] + (trace.time[j] - trace.time[j - 1]) * frac;
            return Ok(t - trace.time[0]);
        }
    }
    Err(Error::NoSteadyState(
        "trace never crossed 63.2% of its settled level".into(),
    ))
}

/// Steady internal-velocity gain under a constant force, by simulation.
///
/// The discrete update has the true equilibrium as its exact fixed point,
/// so once settled the readout is independent of the step size.
pub fn numeric_dc_gain<T: Scalar>(p: &ControllerParams<T>, amplitude: T) -> Result<T> {
    p.validate()?;
    if !amplitude.is_finite() {
        return Err(Error::NonFinite { quantity: "drive amplitude" });
    }
    if amplitude <= T::zero() {
        return Err(Error::domain(format!(
            "steady-gain probe needs a positive amplitude, got {amplitude}"
        )));
    }
    let cap = dt_stability_cap(p, amplitude)?;
    let tau = time_constant_estimate(p, amplitude)?;
    let dt = (cap * lit::<T>(0.25)).min(tau / lit::<T>(50.0));
    let config = SimConfig {
        controller: *p,
        input: InputSignal::Step { amplitude },
        dt,
        duration: lit::<T>(12.0) * tau,
        initial_state: ControllerState::at_rest(),
    };
    let trace = run(&config)?;
    let v_final = *trace.v_internal.last().expect("trace is never empty");
    Ok(v_final / amplitude)
}

/// Change of steady gain when the drive grows by `w` decades [dB],
/// measured from two constant-force runs.
pub fn numeric_gain_variation<T: Scalar>(
    p: &ControllerParams<T>,
    amplitude: T,
    w: u32,
) -> Result<T> {
    if w == 0 {
        return Err(Error::domain(
            "gain variation needs at least one decade of amplitude growth",
        ));
    }
    let g_low = numeric_dc_gain(p, amplitude)?;
    let g_high = numeric_dc_gain(p, amplitude * lit::<T>(10f64.powi(w as i32)))?;
    Ok(lit::<T>(20.0) * (g_high / g_low).log10())
}

// ==================== Trace-level diagnostics ====================

/// Fraction of a signal's spectral power between `lo` and `hi` [rad/s].
///
/// Thin wrapper over the Hz-based spectral tooling for callers that work
/// in angular frequency.
pub fn band_energy<T: Scalar>(samples: &[T], dt: T, lo: T, hi: T) -> Result<T> {
    let tau = std::f64::consts::TAU;
    let as_f64: Vec<f64> = samples.iter().map(|s| s.to_f64().unwrap_or(f64::NAN)).collect();
    let frac = spectrum::band_fraction(
        &as_f64,
        dt.to_f64().unwrap_or(f64::NAN),
        lo.to_f64().unwrap_or(f64::NAN) / tau,
        hi.to_f64().unwrap_or(f64::NAN) / tau,
    )?;
    Ok(lit::<T>(frac))
}

/// Runs a constant-force step and grades the outcome.
///
/// Verdict precedence: divergent (run aborts, or the internal speed
/// overshoots ten times its steady value) over marginal (step size within
/// ±5% of the stability bound) over oscillatory (sign-alternating
/// acceleration in the trailing quarter) over converged.
pub fn classify_step_run<T: Scalar>(
    p: &SfcParams<T>,
    f: T,
    dt: T,
    duration: T,
) -> Result<StepVerdict> {
    if !f.is_finite() {
        return Err(Error::NonFinite { quantity: "step force" });
    }
    if f == T::zero() {
        return Err(Error::domain("step verdict needs a nonzero force"));
    }
    let config = SimConfig {
        controller: ControllerParams::Sfc(*p),
        input: InputSignal::Step { amplitude: f },
        dt,
        duration,
        initial_state: ControllerState::at_rest(),
    };
    let trace = match run(&config) {
        Ok(t) => t,
        Err(Error::Divergence { .. }) => return Ok(StepVerdict::Divergent),
        Err(e) => return Err(e),
    };
    let steady = p.steady_internal_velocity(f).abs();
    if trace.max_abs_v_internal() > lit::<T>(10.0) * steady {
        return Ok(StepVerdict::Divergent);
    }
    if stability::classify_sample_time(p, f.abs(), dt)? == DtClass::Marginal {
        return Ok(StepVerdict::Marginal);
    }
    if stability::oscillation_detected(&trace.accel) {
        return Ok(StepVerdict::Oscillatory);
    }
    Ok(StepVerdict::Converged)
}

// ==================== Tests ====================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::{LacParams, NacParams};
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_4;

    fn fixed_sfc() -> SfcParams<f64> {
        SfcParams::new(1.0, 393.0, 3.0, 0.21).unwrap()
    }

    fn fixed_lac() -> LacParams<f64> {
        LacParams::new(1.0, 17.0, 0.17).unwrap()
    }

    fn step_config(f: f64, dt: f64, duration: f64) -> SimConfig<f64> {
        SimConfig {
            controller: ControllerParams::Sfc(fixed_sfc()),
            input: InputSignal::Step { amplitude: f },
            dt,
            duration,
            initial_state: ControllerState::at_rest(),
        }
    }

    #[test]
    fn zero_input_stays_at_rest() {
        let trace = run(&step_config(0.0, 0.002, 0.1)).unwrap();
        assert_eq!(trace.len(), 51);
        for i in 0..trace.len() {
            assert_eq!(trace.v_internal[i], 0.0, "row {i}");
            assert_eq!(trace.v_output[i], 0.0, "row {i}");
            assert_eq!(trace.work_in[i], 0.0, "row {i}");
        }
    }

    #[test]
    fn row_count_survives_inexact_duration_ratios() {
        assert_eq!(run(&step_config(1.0, 0.002, 0.6)).unwrap().len(), 301);
        // 0.3/0.1 is 2.9999999999999996 in floating point; the nudge keeps
        // the third step.
        assert_eq!(run(&step_config(1.0, 0.1, 0.3)).unwrap().len(), 4);
    }

    #[test]
    fn step_settles_at_the_closed_form_equilibrium() {
        let trace = run(&step_config(5.0, 0.002, 1.0)).unwrap();
        let v_star = (5.0f64 / 393.0).cbrt();
        assert_relative_eq!(trace.last_v_output(), 0.21 * v_star, max_relative = 1e-9);
        assert_relative_eq!(
            *trace.v_internal.last().unwrap(),
            v_star,
            max_relative = 1e-9
        );
        // Energy account: what went in equals what was burned plus what is
        // stored, up to trapezoidal tolerance.
        let i = trace.len() - 1;
        let residual = trace.work_in[i] - trace.dissipated[i] - trace.storage[i];
        assert!(
            residual.abs() < 2e-3 * trace.work_in[i],
            "energy books are off by {residual}"
        );
    }

    #[test]
    fn linear_controller_impulse_peak_matches_first_order_theory() {
        let config = SimConfig {
            controller: ControllerParams::Lac(fixed_lac()),
            input: InputSignal::impulse_profile(5.0, 50.0, 2.0, 2.4),
            dt: 0.002,
            duration: 4.0,
            initial_state: ControllerState::at_rest(),
        };
        let trace = run(&config).unwrap();
        // Baseline: 5 N × 0.17/17 = 0.05 m/s; during the 0.4 s burst the
        // output rises toward 0.5 m/s with tau = 1/17 s.
        let peak = trace.peak_abs_v_output();
        let expected = 0.5 + (0.05 - 0.5) * (-17.0f64 * 0.4).exp();
        assert_relative_eq!(peak, expected, max_relative = 2e-3);
        let idx_before = (1.9f64 / 0.002).round() as usize;
        assert_relative_eq!(trace.v_output[idx_before], 0.05, max_relative = 1e-5);
    }

    #[test]
    fn csv_layout_is_stable() {
        let trace = run(&step_config(5.0, 0.002, 0.01)).unwrap();
        let mut out = Vec::new();
        trace.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "time,f_ext,f_human,accel,v_internal,v_output,position,work_in,dissipated,storage"
        );
        assert_eq!(text.lines().count(), 1 + trace.len());
        for line in lines {
            assert_eq!(line.split(',').count(), 10, "bad row: {line}");
        }
    }

    #[test]
    fn diverging_step_is_reported_with_its_location() {
        let err = run(&step_config(50.0, 0.05, 1.0)).unwrap_err();
        match err {
            Error::Divergence { step, time, .. } => {
                assert!(step > 0);
                assert!(time > 0.0);
            }
            other => panic!("expected a divergence report, got {other}"),
        }
    }

    #[test]
    fn coupled_loop_with_no_intent_stays_at_rest() {
        let config = SimConfig {
            controller: ControllerParams::Sfc(fixed_sfc()),
            input: InputSignal::Step { amplitude: 0.0 },
            dt: 0.002,
            duration: 0.1,
            initial_state: ControllerState::at_rest(),
        };
        let human = HumanModel {
            m_h: 1.0,
            b_h: 10.0,
            f_intent: InputSignal::Step { amplitude: 0.0 },
        };
        let trace = run_coupled(&config, &human).unwrap();
        assert!(trace.v_internal.iter().all(|&v| v == 0.0));
        assert!(trace.f_human.iter().all(|&f| f == 0.0));
    }

    #[test]
    fn coupled_steady_state_balances_intent_against_reaction() {
        // At equilibrium the backward difference vanishes and
        // mu v^3 = f_intent - b_h g v, i.e. 393 v^3 + 2.1 v - 5 = 0.
        let config = SimConfig {
            controller: ControllerParams::Sfc(fixed_sfc()),
            input: InputSignal::Step { amplitude: 0.0 },
            dt: 0.002,
            duration: 4.0,
            initial_state: ControllerState::at_rest(),
        };
        let human = HumanModel {
            m_h: 1.0,
            b_h: 10.0,
            f_intent: InputSignal::Step { amplitude: 5.0 },
        };
        let trace = run_coupled(&config, &human).unwrap();
        let v = *trace.v_internal.last().unwrap();
        let residual = 393.0 * v.powi(3) + 2.1 * v - 5.0;
        assert!(
            residual.abs() < 1e-3,
            "force balance residual {residual} at v = {v}"
        );
        let v_out = trace.last_v_output();
        let f_h = *trace.f_human.last().unwrap();
        assert_relative_eq!(f_h, 10.0 * v_out, max_relative = 1e-4);
    }

    #[test]
    fn coupled_initial_row_reports_the_viscous_reaction() {
        let mut initial = ControllerState::at_rest();
        initial.v = 1.0;
        let config = SimConfig {
            controller: ControllerParams::Sfc(fixed_sfc()),
            input: InputSignal::Step { amplitude: 0.0 },
            dt: 0.002,
            duration: 0.01,
            initial_state: initial,
        };
        let human = HumanModel {
            m_h: 2.0,
            b_h: 10.0,
            f_intent: InputSignal::Step { amplitude: 0.0 },
        };
        let trace = run_coupled(&config, &human).unwrap();
        // v_out(0) = 0.21; the inertial term sees no history yet.
        assert_relative_eq!(trace.f_human[0], 10.0 * 0.21, max_relative = 1e-12);
        assert_relative_eq!(trace.f_ext[0], -10.0 * 0.21, max_relative = 1e-12);
    }

    #[test]
    fn gain_probe_matches_linear_frequency_response() {
        // m = mu = g = 1: |H(j·1)| = 1/sqrt(2), phase = -45 deg.
        let p = ControllerParams::Lac(LacParams::new(1.0, 1.0, 1.0).unwrap());
        let m = measure_gain(&p, 1.0, 1.0).unwrap();
        assert_relative_eq!(m.gain, std::f64::consts::FRAC_1_SQRT_2, max_relative = 0.01);
        assert!(
            (m.phase_rad + FRAC_PI_4).abs() < 1f64.to_radians(),
            "phase {} deg",
            m.phase_rad.to_degrees()
        );
        assert_relative_eq!(m.b, m.gain, max_relative = 1e-12);
    }

    #[test]
    fn gain_probe_rejects_degenerate_drives() {
        let p = ControllerParams::Lac(fixed_lac());
        assert!(measure_gain(&p, 0.0, 1.0).is_err());
        assert!(measure_gain(&p, 1.0, 0.0).is_err());
        assert!(measure_gain(&p, 1.0, -2.0).is_err());
    }

    #[test]
    fn force_gated_controller_probe_stays_stable() {
        let p: ControllerParams<f64> =
            ControllerParams::Nac(NacParams::new(1.0, 15.5, 25.0, 20.0, 0.17).unwrap());
        let m = measure_gain(&p, 5.0, 10.0).unwrap();
        assert!(m.gain.is_finite() && m.gain > 0.0);
        assert!(m.phase_rad < 0.0, "damped system must lag, got {}", m.phase_rad);
    }

    #[test]
    fn default_grid_shape() {
        let grid: Vec<f64> = default_omega_grid();
        assert_eq!(grid.len(), DEFAULT_GRID_POINTS);
        assert_relative_eq!(grid[0], 0.01, max_relative = 1e-12);
        assert_relative_eq!(grid[59], 100.0, max_relative = 1e-12);
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn bandwidth_readout_recovers_a_synthetic_first_order_knee() {
        let omega_c = 2.5;
        let points: Vec<BodePoint<f64>> = default_omega_grid::<f64>()
            .into_iter()
            .map(|w: f64| BodePoint {
                omega: w,
                gain_db: -10.0 * (1.0 + (w / omega_c).powi(2)).log10(),
                phase_rad: -(w / omega_c).atan(),
            })
            .collect();
        let curve = BodeCurve { amplitude_a: 1.0, points };
        let bw = numeric_bandwidth(&curve).unwrap();
        assert_relative_eq!(bw, omega_c, max_relative = 0.02);
    }

    #[test]
    fn flat_curve_reports_no_crossing() {
        let points: Vec<BodePoint<f64>> = default_omega_grid::<f64>()
            .into_iter()
            .map(|w| BodePoint { omega: w, gain_db: -2.0, phase_rad: 0.0 })
            .collect();
        let curve = BodeCurve { amplitude_a: 1.0, points };
        assert!(matches!(
            numeric_bandwidth(&curve),
            Err(Error::NoCrossing { .. })
        ));
    }

    #[test]
    fn time_constant_readout_matches_linear_theory() {
        let config = SimConfig {
            controller: ControllerParams::Lac(fixed_lac()),
            input: InputSignal::Step { amplitude: 5.0 },
            dt: 1e-4,
            duration: 1.0,
            initial_state: ControllerState::at_rest(),
        };
        let trace = run(&config).unwrap();
        let tau = numeric_time_constant(&trace).unwrap();
        assert_relative_eq!(tau, 1.0 / 17.0, max_relative = 0.02);
    }

    #[test]
    fn time_constant_refuses_an_unsettled_trace() {
        let config = SimConfig {
            controller: ControllerParams::Lac(fixed_lac()),
            input: InputSignal::Sine { amplitude: 5.0, omega: 5.0 },
            dt: 1e-3,
            duration: 12.0,
            initial_state: ControllerState::at_rest(),
        };
        let trace = run(&config).unwrap();
        assert!(matches!(
            numeric_time_constant(&trace),
            Err(Error::NoSteadyState(_))
        ));
    }

    #[test]
    fn dc_gain_probe_lands_on_the_fixed_point() {
        let p = ControllerParams::Sfc(fixed_sfc());
        let g = numeric_dc_gain(&p, 5.0).unwrap();
        assert_relative_eq!(g, (5.0f64 / 393.0).cbrt() / 5.0, max_relative = 1e-6);
    }

    #[test]
    fn linear_controller_has_no_gain_variation() {
        let p = ControllerParams::Lac(fixed_lac());
        let dq = numeric_gain_variation(&p, 1.0, 1).unwrap();
        assert!(dq.abs() < 1e-6, "linear law drifted by {dq} dB");
        assert!(numeric_gain_variation(&p, 1.0, 0).is_err());
    }

    #[test]
    fn band_energy_of_a_constant_sits_at_low_frequency() {
        // 512 samples at 1 kHz give a 1.95 Hz bin spacing, so the band
        // split is placed at 5 Hz — above the window-leakage sidelobes.
        let samples = vec![5.0f64; 512];
        let tau = std::f64::consts::TAU;
        let low = band_energy(&samples, 1e-3, 0.0, 5.0 * tau).unwrap();
        let high = band_energy(&samples, 1e-3, 5.0 * tau, 500.0 * tau).unwrap();
        assert!(low > 0.95, "low-band fraction {low}");
        assert!(high < 0.05, "high-band fraction {high}");
    }

    #[test]
    fn step_verdicts_track_the_stability_bound() {
        let p = fixed_sfc();
        let cases = [
            (0.002, StepVerdict::Converged),
            (0.005, StepVerdict::Converged),
            (0.0067, StepVerdict::Marginal),
            (0.008, StepVerdict::Oscillatory),
            (0.05, StepVerdict::Divergent),
        ];
        for (dt, expected) in cases {
            let verdict = classify_step_run(&p, 50.0, dt, 3.0).unwrap();
            assert_eq!(verdict, expected, "dt = {dt}");
        }
    }

    #[test]
    fn config_validation_rejects_nonsense() {
        let mut c = step_config(1.0, 0.002, 0.5);
        c.dt = -1.0;
        assert!(run(&c).is_err());
        let mut c = step_config(1.0, 0.002, 0.5);
        c.duration = 1e-4;
        assert!(run(&c).is_err());
        let mut c = step_config(1.0, 0.002, 0.5);
        c.initial_state.v = f64::NAN;
        assert!(run(&c).is_err());
        // A run that would blow the row cap is refused up front.
        let c = step_config(1.0, 1e-9, 1.0);
        assert!(matches!(run(&c), Err(Error::Config(_))));
    }

    #[test]
    fn human_model_validation() {
        let bad = HumanModel {
            m_h: -1.0,
            b_h: 10.0,
            f_intent: InputSignal::Step { amplitude: 0.0 },
        };
        assert!(bad.validate().is_err());
    }
}
