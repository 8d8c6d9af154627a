//! Command implementations and their machine-parsable JSON summaries.
//!
//! Every command prints exactly one JSON line per result to stdout and
//! writes file artifacts atomically, so identical invocations produce
//! byte-identical outputs and interrupted runs leave no partial files.

use std::path::{Path, PathBuf};

use serde::Serialize;
use stf_control::classify::{classify, ForceClassLabel, ForceSetBounds};
use stf_control::describing;
use stf_control::kinematics::{
    planar_two_link_jacobian, task_to_joint, DMatrix, DVector, DlsConfig,
};
use stf_control::sim;
use stf_control::stability::{
    check_sample_time, classify_sample_time, coupled_stability_check,
    worst_case_velocity_amplitude, CoupledCheckInput, DtClass, StepVerdict,
};
use stf_control::tuner;
use stf_control::{ControllerParams, SfcParams, SimConfig, SimTrace};

use crate::schema::{
    params_source, preset, read_json, write_atomic, AnalysisRequest, BodeSpec, ClassifySpec,
    CliParams, IkSpec, InputSpec, ParamsFile, RequirementsSpec, ResolvedScenario, Scenario,
    TuningBlock, VerificationBlock,
};
use crate::{CheckArgs, ClassifyArgs, Cli, Cmd, Failure, Method, TablesArgs};

// ==================== Dispatch ====================

pub fn dispatch(cli: Cli) -> Result<(), Failure> {
    let Cli { config, out, preset: preset_flag, seedless: _, cmd } = cli;
    let preset_flag = preset_flag.as_deref();
    match cmd {
        Cmd::Simulate => cmd_simulate(
            &require(config, "--config <scenario.json>")?,
            &require(out, "--out <trace.csv>")?,
            preset_flag,
        ),
        Cmd::Bode(args) => {
            let file = params_source(preset_flag, args.params.as_deref())?;
            cmd_bode(file, &args.amplitude_n, args.method, &require(out, "--out <bode.csv>")?)
        }
        Cmd::Tune => cmd_tune(
            &require(config, "--config <requirements.json>")?,
            &require(out, "--out <params.json>")?,
        ),
        Cmd::Check(args) => {
            let file = params_source(preset_flag, args.params.as_deref())?;
            cmd_check(file, &args)
        }
        Cmd::Classify(args) => {
            cmd_classify(&require(config, "--config <scenario.json>")?, preset_flag, &args)
        }
        Cmd::Ik => cmd_ik(&require(config, "--config <ik.json>")?, out.as_deref()),
        Cmd::Tables(args) => cmd_tables(&args),
    }
}

fn require(opt: Option<PathBuf>, what: &str) -> Result<PathBuf, Failure> {
    opt.ok_or_else(|| Failure::Invalid(format!("missing required flag {what}")))
}

/// Directory a config file lives in; anchors relative paths inside it.
fn base_dir(config: &Path) -> &Path {
    match config.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string(value)
        .map_err(|e| Failure::Invalid(format!("cannot encode summary: {e}")))
}

fn to_json_pretty_file<T: Serialize>(value: &T) -> Result<Vec<u8>, Failure> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| Failure::Invalid(format!("cannot encode artifact: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

// ==================== simulate ====================

#[derive(Serialize)]
struct SimSummary {
    name: String,
    rows: usize,
    dt_s: f64,
    duration_s: f64,
    final_v_output_mps: f64,
    peak_abs_v_output_mps: f64,
    /// Step-run grade, present for shear-thickening controllers under a
    /// plain step: converged / marginal / oscillatory / divergent.
    #[serde(skip_serializing_if = "Option::is_none")]
    step_verdict: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    step_metrics: Option<StepMetricsBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    energy: Option<EnergyBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    classification: Option<ClassifyBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bode: Option<Vec<BodeBlock>>,
}

#[derive(Serialize)]
struct StepMetricsBlock {
    /// Closed-form steady output for step inputs [m/s]; absent otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    predicted_steady_v_output_mps: Option<f64>,
    /// 63.2%-rise time extracted from the trace [s]; absent when the run
    /// never settles.
    #[serde(skip_serializing_if = "Option::is_none")]
    time_constant_numeric_s: Option<f64>,
}

#[derive(Serialize)]
struct EnergyBlock {
    work_in_j: f64,
    dissipated_j: f64,
    storage_initial_j: f64,
    storage_final_j: f64,
    /// `work − dissipated − ΔV`; integration error only.
    balance_residual_j: f64,
}

#[derive(Serialize)]
struct ClassifyBlock {
    label: ForceClassLabel,
    f_max_n: f64,
    w_max_hz: f64,
}

#[derive(Serialize)]
struct BodeBlock {
    amplitude_n: f64,
    /// Half-power crossover [rad/s]; absent when the curve never drops 3 dB.
    #[serde(skip_serializing_if = "Option::is_none")]
    bandwidth_rad_s: Option<f64>,
    points: Vec<BodePointBlock>,
}

#[derive(Serialize)]
struct BodePointBlock {
    omega_rad_s: f64,
    gain_db: f64,
    phase_deg: f64,
}

fn verdict_str(v: StepVerdict) -> &'static str {
    match v {
        StepVerdict::Converged => "converged",
        StepVerdict::Marginal => "marginal",
        StepVerdict::Oscillatory => "oscillatory",
        StepVerdict::Divergent => "divergent",
    }
}

fn cmd_simulate(config: &Path, out: &Path, preset_flag: Option<&str>) -> Result<(), Failure> {
    let scenario: Scenario = read_json(config)?;
    let resolved = scenario.resolve(preset_flag, base_dir(config))?;
    let sim_config = SimConfig {
        controller: resolved.controller,
        input: resolved.input.to_signal(),
        dt: resolved.dt_s,
        duration: resolved.duration_s,
        initial_state: resolved.initial_state,
    };
    let trace = sim::run(&sim_config).map_err(Failure::from_lib)?;

    let mut csv = Vec::with_capacity(trace.len() * 96);
    trace
        .write_csv(&mut csv)
        .map_err(|e| Failure::Invalid(format!("cannot serialize trace: {e}")))?;
    write_atomic(out, &csv)?;

    let summary = build_summary(&resolved, &trace)?;
    println!("{}", to_json(&summary)?);
    Ok(())
}

fn build_summary(resolved: &ResolvedScenario, trace: &SimTrace) -> Result<SimSummary, Failure> {
    let mut summary = SimSummary {
        name: resolved.name.clone(),
        rows: trace.len(),
        dt_s: resolved.dt_s,
        duration_s: resolved.duration_s,
        final_v_output_mps: trace.last_v_output(),
        peak_abs_v_output_mps: trace.peak_abs_v_output(),
        step_verdict: None,
        step_metrics: None,
        energy: None,
        classification: None,
        bode: None,
    };
    if let (ControllerParams::Sfc(p), InputSpec::Step { force_n }) =
        (&resolved.controller, &resolved.input)
    {
        if *force_n != 0.0 {
            let verdict = sim::classify_step_run(p, *force_n, resolved.dt_s, resolved.duration_s)
                .map_err(Failure::from_lib)?;
            summary.step_verdict = Some(verdict_str(verdict));
        }
    }
    for request in &resolved.analyses {
        match request {
            AnalysisRequest::StepMetrics => {
                let predicted = match &resolved.input {
                    InputSpec::Step { force_n } => {
                        Some(resolved.controller.steady_state_velocity(*force_n))
                    }
                    _ => None,
                };
                summary.step_metrics = Some(StepMetricsBlock {
                    predicted_steady_v_output_mps: predicted,
                    time_constant_numeric_s: sim::numeric_time_constant(trace).ok(),
                });
            }
            AnalysisRequest::Energy => {
                let last = trace.len() - 1;
                summary.energy = Some(EnergyBlock {
                    work_in_j: trace.work_in[last],
                    dissipated_j: trace.dissipated[last],
                    storage_initial_j: trace.storage[0],
                    storage_final_j: trace.storage[last],
                    balance_residual_j: trace.work_in[last]
                        - trace.dissipated[last]
                        - (trace.storage[last] - trace.storage[0]),
                });
            }
            AnalysisRequest::Classify(spec) => {
                let bounds = build_bounds(spec)?;
                let result =
                    classify(&trace.f_ext, resolved.dt_s, &bounds).map_err(Failure::from_lib)?;
                summary.classification = Some(ClassifyBlock {
                    label: result.label,
                    f_max_n: result.f_max,
                    w_max_hz: result.w_max_hz,
                });
            }
            AnalysisRequest::Bode(BodeSpec { amplitudes_n }) => {
                let grid: Vec<f64> = sim::default_omega_grid();
                let mut blocks = Vec::with_capacity(amplitudes_n.len());
                for &a in amplitudes_n {
                    let curve = sim::numeric_bode(&resolved.controller, a, &grid)
                        .map_err(Failure::from_lib)?;
                    blocks.push(bode_block(&curve));
                }
                summary.bode = Some(blocks);
            }
        }
    }
    Ok(summary)
}

fn build_bounds(spec: &ClassifySpec) -> Result<ForceSetBounds, Failure> {
    let mut bounds = ForceSetBounds::new(spec.f_th_n, spec.eps_plus_hz, spec.eps_minus_hz)
        .map_err(Failure::from_lib)?;
    if let Some(floor) = spec.noise_floor_n {
        bounds.noise_floor = floor;
        bounds.validate().map_err(Failure::from_lib)?;
    }
    Ok(bounds)
}

fn bode_block(curve: &describing::BodeCurve<f64>) -> BodeBlock {
    BodeBlock {
        amplitude_n: curve.amplitude_a,
        bandwidth_rad_s: sim::numeric_bandwidth(curve).ok(),
        points: curve
            .points
            .iter()
            .map(|pt| BodePointBlock {
                omega_rad_s: pt.omega,
                gain_db: pt.gain_db,
                phase_deg: pt.phase_rad.to_degrees(),
            })
            .collect(),
    }
}

// ==================== bode ====================

#[derive(Serialize)]
struct BodeCsvRow {
    amplitude: f64,
    omega: f64,
    gain_db: f64,
    phase_deg: f64,
}

#[derive(Serialize)]
struct BodeSummary {
    method: &'static str,
    points_per_curve: usize,
    curves: Vec<BodeCurveSummary>,
}

#[derive(Serialize)]
struct BodeCurveSummary {
    amplitude_n: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    bandwidth_rad_s: Option<f64>,
}

fn cmd_bode(
    file: ParamsFile,
    amplitudes: &[f64],
    method: Method,
    out: &Path,
) -> Result<(), Failure> {
    for &a in amplitudes {
        if !(a.is_finite() && a > 0.0) {
            return Err(Failure::Invalid(format!(
                "drive amplitudes must be positive and finite, got {a}"
            )));
        }
    }
    let controller = file.params.to_controller()?;
    let grid: Vec<f64> = sim::default_omega_grid();
    let mut curves = Vec::with_capacity(amplitudes.len());
    for &a in amplitudes {
        let curve = match method {
            Method::Numeric => {
                sim::numeric_bode(&controller, a, &grid).map_err(Failure::from_lib)?
            }
            Method::Analytic => {
                let sfc = file.params.require_sfc("--method analytic")?;
                describing::analytic_bode(&sfc, a, &grid).map_err(Failure::from_lib)?
            }
        };
        curves.push(curve);
    }

    let mut writer = csv::Writer::from_writer(Vec::new());
    for curve in &curves {
        for pt in &curve.points {
            writer
                .serialize(BodeCsvRow {
                    amplitude: curve.amplitude_a,
                    omega: pt.omega,
                    gain_db: pt.gain_db,
                    phase_deg: pt.phase_rad.to_degrees(),
                })
                .map_err(|e| Failure::Invalid(format!("cannot serialize Bode row: {e}")))?;
        }
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Failure::Invalid(format!("cannot serialize Bode table: {e}")))?;
    write_atomic(out, &bytes)?;

    let summary = BodeSummary {
        method: match method {
            Method::Numeric => "numeric",
            Method::Analytic => "analytic",
        },
        points_per_curve: grid.len(),
        curves: curves
            .iter()
            .map(|c| BodeCurveSummary {
                amplitude_n: c.amplitude_a,
                bandwidth_rad_s: sim::numeric_bandwidth(c).ok(),
            })
            .collect(),
    };
    println!("{}", to_json(&summary)?);
    Ok(())
}

// ==================== tune ====================

#[derive(Serialize)]
struct TuneSummary {
    out_path: String,
    n: f64,
    mu: f64,
    g: f64,
    m_kg: f64,
    dt_s: f64,
    w_c_ease_effective_rad_s: f64,
    bandwidth_adjusted: bool,
    w_c_max_rad_s: f64,
    satisfied: bool,
}

fn cmd_tune(config: &Path, out: &Path) -> Result<(), Failure> {
    let spec: RequirementsSpec = read_json(config)?;
    let req = spec.to_requirements();
    let tuned = tuner::tune(&req).map_err(Failure::from_lib)?;
    let verification = tuner::verify_tuning(&tuned, &req).map_err(Failure::from_lib)?;

    let artifact = ParamsFile {
        description: "auto-tuned shear-thickening parameter set".into(),
        params: CliParams::Sfc {
            m_kg: tuned.params.m,
            mu: tuned.params.mu,
            n: tuned.params.n,
            g: tuned.params.g,
        },
        dt_s: req.dt,
        tuning: Some(TuningBlock {
            requirements: spec,
            w_c_ease_effective_rad_s: tuned.w_c_ease_effective,
            bandwidth_adjusted: tuned.bandwidth_adjusted,
            w_c_max_rad_s: tuned.w_c_max,
            verification: VerificationBlock {
                steady_output_ease_mps: verification.steady_output_ease,
                steady_output_interf_mps: verification.steady_output_interf,
                sample_time_bound_s: verification.sample_time_bound,
                traction_ok: verification.traction_ok,
                impact_ok: verification.impact_ok,
                sample_time_ok: verification.sample_time_ok,
                satisfied: verification.satisfied,
            },
        }),
    };
    write_atomic(out, &to_json_pretty_file(&artifact)?)?;

    if !verification.satisfied {
        eprintln!(
            "warning: tuned set fails its own verification; see the tuning block in {}",
            out.display()
        );
    }
    let summary = TuneSummary {
        out_path: out.display().to_string(),
        n: tuned.params.n,
        mu: tuned.params.mu,
        g: tuned.params.g,
        m_kg: tuned.params.m,
        dt_s: req.dt,
        w_c_ease_effective_rad_s: tuned.w_c_ease_effective,
        bandwidth_adjusted: tuned.bandwidth_adjusted,
        w_c_max_rad_s: tuned.w_c_max,
        satisfied: verification.satisfied,
    };
    println!("{}", to_json(&summary)?);
    Ok(())
}

// ==================== check ====================

#[derive(Serialize)]
struct CheckSummary {
    f_max_n: f64,
    dt_s: f64,
    dt_bound_s: f64,
    /// `dt / bound`; satisfied ⇔ margin < 1.
    margin: f64,
    satisfied: bool,
    /// safe / marginal (within ±5% of the bound) / violated.
    class: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    coupled: Option<CoupledBlock>,
}

#[derive(Serialize)]
struct CoupledBlock {
    omega_rad_s: f64,
    /// Worst-case internal velocity amplitude fed to the check [m/s].
    b_worst_mps: f64,
    /// One-step damping ratio; must stay inside (0, 1).
    q: f64,
    /// Phase advance per sample [rad]; must stay inside (0, π).
    dt_omega_rad: f64,
    satisfied: bool,
    margin: f64,
}

fn class_str(class: DtClass) -> &'static str {
    match class {
        DtClass::Safe => "safe",
        DtClass::Marginal => "marginal",
        DtClass::Violated => "violated",
    }
}

fn cmd_check(file: ParamsFile, args: &CheckArgs) -> Result<(), Failure> {
    let sfc = file.params.require_sfc("the sample-time check")?;
    let dt = args.dt_s.unwrap_or(file.dt_s);
    let report = check_sample_time(&sfc, args.f_max_n, dt).map_err(Failure::from_lib)?;
    let class = classify_sample_time(&sfc, args.f_max_n, dt).map_err(Failure::from_lib)?;

    let coupled = match args.omega_rad_s {
        Some(omega) => {
            let b = worst_case_velocity_amplitude(&sfc, args.f_max_n).map_err(Failure::from_lib)?;
            let rep = coupled_stability_check(&CoupledCheckInput { params: sfc, b, omega, dt })
                .map_err(Failure::from_lib)?;
            Some(CoupledBlock {
                omega_rad_s: omega,
                b_worst_mps: b,
                q: rep.q,
                dt_omega_rad: rep.dt_omega,
                satisfied: rep.satisfied,
                margin: rep.margin,
            })
        }
        None => None,
    };

    let summary = CheckSummary {
        f_max_n: args.f_max_n,
        dt_s: dt,
        dt_bound_s: report.bound_value,
        margin: report.margin,
        satisfied: report.satisfied,
        class: class_str(class),
        coupled,
    };
    println!("{}", to_json(&summary)?);

    if !report.satisfied {
        return Err(Failure::Constraint(format!(
            "sample time {dt} s exceeds the stability bound {} s at {} N",
            report.bound_value, args.f_max_n
        )));
    }
    if let Some(c) = &summary.coupled {
        if !c.satisfied {
            return Err(Failure::Constraint(format!(
                "coupled condition violated at omega {} rad/s: Q = {}, dt*omega = {} rad",
                c.omega_rad_s, c.q, c.dt_omega_rad
            )));
        }
    }
    Ok(())
}

// ==================== classify ====================

#[derive(Serialize)]
struct ClassifySummary {
    name: String,
    samples: usize,
    dt_s: f64,
    label: ForceClassLabel,
    f_max_n: f64,
    w_max_hz: f64,
    bounds: BoundsBlock,
}

#[derive(Serialize)]
struct BoundsBlock {
    f_th_n: f64,
    eps_plus_hz: f64,
    eps_minus_hz: f64,
    noise_floor_n: f64,
}

fn cmd_classify(
    config: &Path,
    preset_flag: Option<&str>,
    args: &ClassifyArgs,
) -> Result<(), Failure> {
    let scenario: Scenario = read_json(config)?;
    let name = scenario.name.clone();
    let duration = scenario.duration_s;
    // The classifier looks at the force record only, so the controller is
    // irrelevant — resolve it solely when the sample time hides in a
    // referenced parameter file.
    let (dt, input) = match scenario.dt_s {
        Some(dt) => (dt, scenario.input.clone()),
        None => {
            let resolved = scenario.resolve(preset_flag, base_dir(config))?;
            (resolved.dt_s, resolved.input)
        }
    };
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Failure::Invalid(format!("sample time must be positive, got {dt}")));
    }
    let signal = input.to_signal();
    signal.validate().map_err(Failure::from_lib)?;
    let steps = (duration / dt * (1.0 + 1e-9)).floor();
    if !(steps.is_finite() && steps >= 1.0 && steps < 20_000_000.0) {
        return Err(Failure::Invalid(format!(
            "duration {duration} s at dt {dt} s gives an unusable sample count"
        )));
    }
    let rows = steps as usize + 1;
    let samples: Vec<f64> = (0..rows).map(|k| signal.sample(k as f64 * dt)).collect();

    let spec = ClassifySpec {
        f_th_n: args.f_th_n,
        eps_plus_hz: args.eps_plus_hz,
        eps_minus_hz: args.eps_minus_hz,
        noise_floor_n: args.noise_floor_n,
    };
    let bounds = build_bounds(&spec)?;
    let result = classify(&samples, dt, &bounds).map_err(Failure::from_lib)?;

    let summary = ClassifySummary {
        name,
        samples: rows,
        dt_s: dt,
        label: result.label,
        f_max_n: result.f_max,
        w_max_hz: result.w_max_hz,
        bounds: BoundsBlock {
            f_th_n: bounds.f_th,
            eps_plus_hz: bounds.eps_plus_hz,
            eps_minus_hz: bounds.eps_minus_hz,
            noise_floor_n: bounds.noise_floor,
        },
    };
    println!("{}", to_json(&summary)?);
    Ok(())
}

// ==================== ik ====================

#[derive(Serialize)]
struct IkSummary {
    mode: &'static str,
    task_rows: usize,
    joint_cols: usize,
    sigma_min: f64,
    /// Whether the damped branch handled this pose.
    damped: bool,
    epsilon: f64,
    lambda: f64,
    joint_rates_rad_s: Vec<f64>,
}

fn cmd_ik(config: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let spec: IkSpec = read_json(config)?;
    let (jacobian, v_task, epsilon, lambda, mode) = match spec {
        IkSpec::TwoLink { link1_m, link2_m, q1_rad, q2_rad, task_velocity_mps, epsilon, lambda } => {
            let j = planar_two_link_jacobian(link1_m, link2_m, q1_rad, q2_rad);
            let v = DVector::from_column_slice(&task_velocity_mps);
            (j, v, epsilon, lambda, "two_link")
        }
        IkSpec::Raw { jacobian, task_velocity, epsilon, lambda } => {
            let rows = jacobian.len();
            if rows == 0 {
                return Err(Failure::Invalid("Jacobian has no rows".into()));
            }
            let cols = jacobian[0].len();
            if jacobian.iter().any(|r| r.len() != cols) {
                return Err(Failure::Invalid("Jacobian rows have unequal lengths".into()));
            }
            let flat: Vec<f64> = jacobian.into_iter().flatten().collect();
            let j = DMatrix::from_row_slice(rows, cols, &flat);
            (j, DVector::from_vec(task_velocity), epsilon, lambda, "raw")
        }
    };
    let mut cfg = DlsConfig::default();
    if let Some(e) = epsilon {
        cfg.epsilon = e;
    }
    if let Some(l) = lambda {
        cfg.lambda = l;
    }
    let rates = task_to_joint(&jacobian, &cfg, &v_task).map_err(Failure::from_lib)?;
    let sigma_min = jacobian
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(f64::INFINITY, |acc, &s| acc.min(s));

    let summary = IkSummary {
        mode,
        task_rows: jacobian.nrows(),
        joint_cols: jacobian.ncols(),
        sigma_min,
        damped: sigma_min <= cfg.epsilon,
        epsilon: cfg.epsilon,
        lambda: cfg.lambda,
        joint_rates_rad_s: rates.iter().copied().collect(),
    };
    if let Some(path) = out {
        write_atomic(path, &to_json_pretty_file(&summary)?)?;
    }
    println!("{}", to_json(&summary)?);
    Ok(())
}

// ==================== tables ====================

/// Reference-table regression report.
///
/// `analytic` is always the closed form and is never replaced by a
/// measurement; `reproduced_numeric` is what this binary's simulator
/// measures; `reference_numeric` holds frozen reference values for
/// regression comparison and is never recomputed.
#[derive(Serialize)]
struct TableReport {
    table_id: u8,
    title: &'static str,
    input_label: &'static str,
    value_unit: &'static str,
    rows: Vec<TableRow>,
}

#[derive(Serialize)]
struct TableRow {
    input: f64,
    analytic: f64,
    reproduced_numeric: f64,
    /// `|analytic − reproduced| / max(|reproduced|, 1e−12)`.
    relative_error: f64,
    reference_numeric: f64,
    /// `|reproduced − reference| / max(|reference|, 1e−12)`.
    reference_residual: f64,
}

#[derive(Serialize)]
struct TableLine {
    table_id: u8,
    path: String,
    rows: usize,
    max_relative_error: f64,
    max_reference_residual: f64,
}

fn rel_err(value: f64, against: f64) -> f64 {
    (value - against).abs() / against.abs().max(1e-12)
}

fn table_row(input: f64, analytic: f64, numeric: f64, reference: f64) -> TableRow {
    TableRow {
        input,
        analytic,
        reproduced_numeric: numeric,
        relative_error: rel_err(analytic, numeric),
        reference_numeric: reference,
        reference_residual: rel_err(numeric, reference),
    }
}

fn cmd_tables(args: &TablesArgs) -> Result<(), Failure> {
    let mut ids: Vec<u8> = if args.which.is_empty() { vec![3, 4, 5] } else { args.which.clone() };
    ids.sort_unstable();
    ids.dedup();
    for &id in &ids {
        if !(3..=5).contains(&id) {
            return Err(Failure::Invalid(format!("unknown table id {id}; known ids: 3, 4, 5")));
        }
    }
    std::fs::create_dir_all(&args.out_dir).map_err(|e| {
        Failure::Invalid(format!("cannot create {}: {e}", args.out_dir.display()))
    })?;
    for &id in &ids {
        let report = build_table(id)?;
        let path = args.out_dir.join(format!("table_{id}.json"));
        write_atomic(&path, &to_json_pretty_file(&report)?)?;
        let line = TableLine {
            table_id: id,
            path: path.display().to_string(),
            rows: report.rows.len(),
            max_relative_error: report
                .rows
                .iter()
                .map(|r| r.relative_error)
                .fold(0.0, f64::max),
            max_reference_residual: report
                .rows
                .iter()
                .map(|r| r.reference_residual)
                .fold(0.0, f64::max),
        };
        println!("{}", to_json(&line)?);
    }
    Ok(())
}

fn build_table(id: u8) -> Result<TableReport, Failure> {
    match id {
        3 => {
            // Half-power bandwidth of the unit-coefficient cubic law,
            // analytic formula vs a measured sweep.
            let p = SfcParams::new(1.0, 1.0, 3.0, 1.0).map_err(Failure::from_lib)?;
            let controller = ControllerParams::Sfc(p);
            let grid: Vec<f64> = sim::default_omega_grid();
            let mut rows = Vec::new();
            for (a, reference) in [(1.0, 1.04), (10.0, 4.90), (100.0, 23.20)] {
                let analytic = describing::bandwidth_analytic(&p, a).map_err(Failure::from_lib)?;
                let curve =
                    sim::numeric_bode(&controller, a, &grid).map_err(Failure::from_lib)?;
                let numeric = sim::numeric_bandwidth(&curve).map_err(Failure::from_lib)?;
                rows.push(table_row(a, analytic, numeric, reference));
            }
            Ok(TableReport {
                table_id: 3,
                title: "Half-power bandwidth vs drive amplitude, unit-coefficient cubic law",
                input_label: "amplitude_n",
                value_unit: "rad/s",
                rows,
            })
        }
        4 => {
            // Step-response time constant of the fixed-base set, analytic
            // formula vs fine-step measured runs.
            let p = preset("fixed_sfc")?.params.require_sfc("table 4")?;
            let mut rows = Vec::new();
            for (a, reference) in [(0.5, 0.145), (5.0, 0.032), (50.0, 0.007)] {
                let analytic =
                    describing::time_constant_analytic(&p, a).map_err(Failure::from_lib)?;
                let config = SimConfig {
                    controller: ControllerParams::Sfc(p),
                    input: stf_control::InputSignal::Step { amplitude: a },
                    dt: 1e-4,
                    duration: (14.0 * analytic).max(0.05),
                    initial_state: stf_control::ControllerState::at_rest(),
                };
                let trace = sim::run(&config).map_err(Failure::from_lib)?;
                let numeric = sim::numeric_time_constant(&trace).map_err(Failure::from_lib)?;
                rows.push(table_row(a, analytic, numeric, reference));
            }
            Ok(TableReport {
                table_id: 4,
                title: "Step-response time constant vs drive amplitude, fixed-base set",
                input_label: "amplitude_n",
                value_unit: "s",
                rows,
            })
        }
        5 => {
            // System gain variation across two input decades, closed form vs
            // measured steady-state ratios.
            let mut rows = Vec::new();
            for (n, reference) in [(1.0, 0.0), (3.0, -26.67), (10.0, -36.00), (100.0, -39.60)] {
                let analytic = describing::gain_variation(n, 2).map_err(Failure::from_lib)?;
                let controller = ControllerParams::Sfc(
                    SfcParams::new(1.0, 1.0, n, 1.0).map_err(Failure::from_lib)?,
                );
                let numeric = sim::numeric_gain_variation(&controller, 1.0, 2)
                    .map_err(Failure::from_lib)?;
                rows.push(table_row(n, analytic, numeric, reference));
            }
            Ok(TableReport {
                table_id: 5,
                title: "System gain variation across two input decades",
                input_label: "exponent",
                value_unit: "dB",
                rows,
            })
        }
        _ => unreachable!("ids validated by the caller"),
    }
}
