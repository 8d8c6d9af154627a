//! Randomized invariants: statements that must hold on *every* valid input,
//! not just the worked examples. Each failure shrinks to a minimal
//! counterexample, so keep the statements sharp.

use proptest::prelude::*;
use std::f64::consts::PI;

use stf_control::classify::{classify, ForceSetBounds};
use stf_control::describing::{gamma, psi};
use stf_control::sim;
use stf_control::stability::{apparent_phase_raw, max_sample_time, StepVerdict};
use stf_control::tuner::{tune, TuningRequirements};
use stf_control::{ControllerParams, ControllerState, InputSignal, SfcParams, SimConfig};

// ==================== Strategies ====================

fn sfc_tuple() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (0.5..2.0f64, 5.0..400.0f64, 1.0..4.0f64, 0.05..0.5f64)
}

fn build_sfc(t: (f64, f64, f64, f64)) -> SfcParams {
    SfcParams::new(t.0, t.1, t.2, t.3).expect("strategy stays inside the valid domain")
}

// ==================== Energy accounting ====================

proptest! {
    /// A discrete run under the sample-time bound must never manufacture
    /// energy: at every sample the stored energy gained since the start is
    /// covered by the work the force put in.
    #[test]
    fn bounded_runs_never_create_energy(
        raw in sfc_tuple(),
        input_pick in 0..3usize,
        amp in 1.0..60.0f64,
        omega in 0.5..100.0f64,
        f_low in 0.0..10.0f64,
    ) {
        let p = build_sfc(raw);
        let f_max = 60.0;
        let dt = 0.5 * max_sample_time(&p, f_max).expect("bound exists");
        let input = match input_pick {
            0 => InputSignal::Step { amplitude: amp },
            1 => InputSignal::Sine { amplitude: amp, omega },
            _ => InputSignal::impulse_profile(f_low, amp, 100.0 * dt, 200.0 * dt),
        };
        let config = SimConfig {
            controller: ControllerParams::Sfc(p),
            input,
            dt,
            duration: 500.0 * dt,
            initial_state: ControllerState::at_rest(),
        };
        let trace = sim::run(&config).expect("run under the bound should complete");
        // The ledger integrates work with the trapezoidal rule while the
        // dynamics step forward-Euler; the two differ by the force-slew
        // coupling Σ ½·dt·v·Δf, which is bookkeeping, not physics. Any
        // surplus beyond that slack would mean the discrete dynamics
        // genuinely created energy.
        let mut slew_slack = 0.0;
        for k in 0..trace.len() {
            if k > 0 {
                slew_slack += 0.5
                    * dt
                    * trace.v_internal[k - 1].abs()
                    * (trace.f_ext[k] - trace.f_ext[k - 1]).abs();
            }
            let delta_v = trace.storage[k] - trace.storage[0];
            let work = trace.work_in[k];
            let slack = 1e-9 + 1e-12 * (work.abs() + trace.dissipated[k]) + slew_slack;
            prop_assert!(
                delta_v <= work + slack,
                "row {k}: stored {delta_v} J exceeds work {work} J (+{slack})"
            );
        }
    }
}

// ==================== Step verdicts under the bound ====================

proptest! {
    /// Any step run whose sample time stays clear of the bound must grade
    /// as converged — no ringing, no divergence, regardless of parameters.
    #[test]
    fn step_runs_well_under_the_bound_converge(
        raw in sfc_tuple(),
        f in 1.0..60.0f64,
        frac in 0.05..0.8f64,
    ) {
        let p = build_sfc(raw);
        let dt = frac * max_sample_time(&p, f).expect("bound exists");
        let tau = stf_control::describing::time_constant_analytic(&p, f).expect("in domain");
        let duration = (30.0 * tau).max(400.0 * dt);
        let verdict = sim::classify_step_run(&p, f, dt, duration).expect("run completes");
        prop_assert_eq!(
            verdict,
            StepVerdict::Converged,
            "dt = {} (fraction {} of the bound) must converge cleanly",
            dt,
            frac
        );
    }
}

// ==================== Discrete phase box ====================

proptest! {
    /// Over the whole admissible `(Q, ΔTω)` box the apparent phase stays
    /// strictly inside the passive quarter turn, and it always lags at
    /// least the half-sample delay.
    #[test]
    fn apparent_phase_stays_inside_the_quarter_turn(
        q in 1e-6..0.999_999f64,
        frac in 1e-6..0.999_999f64,
    ) {
        let dt_omega = frac * PI;
        let phase = apparent_phase_raw(q, dt_omega).expect("inside the domain");
        prop_assert!(phase > -PI / 2.0, "phase {phase} fell out of the quarter turn");
        prop_assert!(
            phase <= -dt_omega / 2.0 + 1e-12,
            "phase {phase} cannot lag less than the half-sample delay {}",
            -dt_omega / 2.0
        );
    }
}

// ==================== Tuner algebra ====================

proptest! {
    /// The tuner solves a two-point fit: the returned set must pass through
    /// *both* requirement points exactly, to rounding error.
    #[test]
    fn tuned_sets_hit_both_steady_points_exactly(
        f_ease in 1.0..10.0f64,
        ratio in 3.0..15.0f64,
        v_d in 0.01..0.2f64,
        n_target in 1.5..6.0f64,
        w_c in 5.0..30.0f64,
        m in 0.5..2.0f64,
    ) {
        let req = TuningRequirements {
            f_ease,
            f_interf: f_ease * ratio,
            v_d,
            v_c: v_d * ratio.powf(1.0 / n_target),
            w_c_ease: w_c,
            dt: 1e-4,
            m,
        };
        let tuned = tune(&req).expect("requirements are feasible");
        let p = ControllerParams::Sfc(tuned.params);

        prop_assert!(
            (tuned.params.n - n_target).abs() / n_target < 1e-9,
            "exponent should reproduce the two-point fit: {} vs {n_target}",
            tuned.params.n
        );
        let at_ease = p.steady_state_velocity(req.f_ease);
        prop_assert!(
            (at_ease - req.v_d).abs() / req.v_d < 1e-9,
            "ease point must be exact: {at_ease} vs {}",
            req.v_d
        );
        let at_interf = p.steady_state_velocity(req.f_interf);
        prop_assert!(
            (at_interf - req.v_c).abs() / req.v_c < 1e-9,
            "interference point must be exact: {at_interf} vs {}",
            req.v_c
        );
        if !tuned.bandwidth_adjusted {
            prop_assert_eq!(
                tuned.w_c_ease_effective,
                req.w_c_ease,
                "an unadjusted bandwidth must pass through untouched"
            );
        } else {
            prop_assert!(
                tuned.w_c_ease_effective < req.w_c_ease,
                "adjustment only ever lowers the requested bandwidth"
            );
        }
    }
}

// ==================== Stability bound shape ====================

proptest! {
    /// Harder contact can only tighten the sample-time budget.
    #[test]
    fn stability_bound_tightens_with_force(
        raw in sfc_tuple(),
        f1 in 1.0..100.0f64,
        factor in 1.0..10.0f64,
    ) {
        let p = build_sfc(raw);
        let loose = max_sample_time(&p, f1).expect("bound exists");
        let tight = max_sample_time(&p, f1 * factor).expect("bound exists");
        prop_assert!(
            tight <= loose * (1.0 + 1e-12),
            "bound must not grow with force: {tight} at {} N vs {loose} at {f1} N",
            f1 * factor
        );
    }
}

// ==================== Classifier ====================

proptest! {
    /// The classifier is total on bounded records, and scaling a record up
    /// uniformly can never demote an impact: the peak only grows and the
    /// spectral support (a relative measure) stays put.
    #[test]
    fn classifier_is_total_and_scaling_preserves_impact(
        samples in prop::collection::vec(-60.0..60.0f64, 32..256),
        dt in 1e-3..0.02f64,
        f_th in 5.0..30.0f64,
        eps_plus in 2.0..50.0f64,
        eps_minus in 0.1..1.9f64,
        scale in 1.0..10.0f64,
    ) {
        let bounds = ForceSetBounds::new(f_th, eps_plus, eps_minus).expect("ordered bounds");
        let before = classify(&samples, dt, &bounds).expect("classification is total");
        if before.label == stf_control::classify::ForceClassLabel::Impact {
            let scaled: Vec<f64> = samples.iter().map(|s| s * scale).collect();
            let after = classify(&scaled, dt, &bounds).expect("classification is total");
            prop_assert_eq!(
                after.label,
                stf_control::classify::ForceClassLabel::Impact,
                "scaling by {} demoted an impact",
                scale
            );
        }
    }
}

// ==================== Special-function identities ====================

proptest! {
    /// Γ satisfies its recurrence, and the equivalent-damping shape factor
    /// strictly decreases in the exponent — thicker laws always shave the
    /// fundamental harder.
    #[test]
    fn gamma_recurrence_and_shape_factor_monotonicity_hold(
        x in 0.1..20.0f64,
        n1 in 1.0..99.0f64,
        gap in 0.01..10.0f64,
    ) {
        let lhs = gamma(x + 1.0).expect("in domain");
        let rhs = x * gamma(x).expect("in domain");
        prop_assert!(
            (lhs - rhs).abs() / rhs.abs() < 1e-9,
            "recurrence violated at x = {x}: {lhs} vs {rhs}"
        );

        let n2 = (n1 + gap).min(100.0);
        let lo = psi(n2).expect("in domain");
        let hi = psi(n1).expect("in domain");
        prop_assert!(
            lo < hi,
            "shape factor must strictly decrease: psi({n2}) = {lo} vs psi({n1}) = {hi}"
        );
    }
}
