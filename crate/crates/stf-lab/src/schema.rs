//! JSON-facing configuration types.
//!
//! Every physical quantity in these schemas carries its unit in the key
//! name (`dt_s`, `force_n`, `omega_rad_s`, …) so a config file can never be
//! read with the wrong unit in mind. Conversion into the library's types
//! happens here, in one place, together with preset resolution.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stf_control::{ControllerParams, ControllerState, InputSignal, LacParams, NacParams, SfcParams};

use crate::Failure;

// ==================== Parameter sets ====================

/// A controller parameter set as it appears on disk (presets, tuner output).
///
/// `mu` and `alpha` have the exponent-dependent unit N·(s/m)^n, so they are
/// the one place the key carries no suffix; everything else is annotated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CliParams {
    /// Shear-thickening (power-law) controller.
    Sfc { m_kg: f64, mu: f64, n: f64, g: f64 },
    /// Linear admittance baseline.
    Lac { m_kg: f64, mu: f64, g: f64 },
    /// Force-gated nonlinear baseline; `sigma_n` is the gate's force scale [N].
    Nac { m_kg: f64, mu: f64, alpha: f64, sigma_n: f64, g: f64 },
}

impl CliParams {
    /// Validates and converts into the library representation.
    pub fn to_controller(self) -> Result<ControllerParams, Failure> {
        let params = match self {
            CliParams::Sfc { m_kg, mu, n, g } => {
                ControllerParams::Sfc(SfcParams::new(m_kg, mu, n, g).map_err(Failure::invalid)?)
            }
            CliParams::Lac { m_kg, mu, g } => {
                ControllerParams::Lac(LacParams::new(m_kg, mu, g).map_err(Failure::invalid)?)
            }
            CliParams::Nac { m_kg, mu, alpha, sigma_n, g } => ControllerParams::Nac(
                NacParams::new(m_kg, mu, alpha, sigma_n, g).map_err(Failure::invalid)?,
            ),
        };
        Ok(params)
    }

    /// The shear-thickening set, or an error naming the command that needs one.
    pub fn require_sfc(self, needed_by: &str) -> Result<SfcParams, Failure> {
        match self.to_controller()? {
            ControllerParams::Sfc(p) => Ok(p),
            _ => Err(Failure::Invalid(format!(
                "{needed_by} applies to the shear-thickening law only; pick an \"sfc\" parameter set"
            ))),
        }
    }
}

/// On-disk parameter file: what presets contain and what `tune` writes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamsFile {
    /// Human-readable role of the set.
    #[serde(default)]
    pub description: String,
    pub params: CliParams,
    /// Control-loop sample time the set is meant to run at [s].
    pub dt_s: f64,
    /// Present only on tuner output: how the set was derived.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tuning: Option<TuningBlock>,
}

/// Tuner provenance carried inside a [`ParamsFile`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TuningBlock {
    pub requirements: RequirementsSpec,
    /// Traction bandwidth actually realized [rad/s].
    pub w_c_ease_effective_rad_s: f64,
    /// Whether the sample time forced a bandwidth reduction.
    pub bandwidth_adjusted: bool,
    /// Implied impact-phase bandwidth [rad/s].
    pub w_c_max_rad_s: f64,
    pub verification: VerificationBlock,
}

/// The three closed-form post-tuning checks.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VerificationBlock {
    pub steady_output_ease_mps: f64,
    pub steady_output_interf_mps: f64,
    pub sample_time_bound_s: f64,
    pub traction_ok: bool,
    pub impact_ok: bool,
    pub sample_time_ok: bool,
    pub satisfied: bool,
}

// ==================== Presets ====================

/// Built-in parameter sets, embedded at compile time so the binary works
/// without the repository checkout.
const PRESET_SOURCES: [(&str, &str); 6] = [
    ("fixed_sfc", include_str!("../../../presets/fixed_sfc.json")),
    ("fixed_lac", include_str!("../../../presets/fixed_lac.json")),
    ("fixed_nac", include_str!("../../../presets/fixed_nac.json")),
    ("mobile_sfc", include_str!("../../../presets/mobile_sfc.json")),
    ("mobile_lac", include_str!("../../../presets/mobile_lac.json")),
    ("mobile_nac", include_str!("../../../presets/mobile_nac.json")),
];

/// Looks up a built-in preset by name.
pub fn preset(name: &str) -> Result<ParamsFile, Failure> {
    for (known, source) in PRESET_SOURCES {
        if known == name {
            return serde_json::from_str(source).map_err(|e| {
                Failure::Invalid(format!("embedded preset {name} failed to parse: {e}"))
            });
        }
    }
    let names: Vec<&str> = PRESET_SOURCES.iter().map(|(n, _)| *n).collect();
    Err(Failure::Invalid(format!(
        "unknown preset \"{name}\"; available: {}",
        names.join(", ")
    )))
}

/// Loads a parameter set from `--preset <name>` or `--params <path>`
/// (exactly one of the two).
pub fn params_source(
    preset_name: Option<&str>,
    params_path: Option<&Path>,
) -> Result<ParamsFile, Failure> {
    match (preset_name, params_path) {
        (Some(name), None) => preset(name),
        (None, Some(path)) => read_json(path),
        (Some(_), Some(_)) => Err(Failure::Invalid(
            "--preset and --params are mutually exclusive; pass one".into(),
        )),
        (None, None) => Err(Failure::Invalid(
            "pass a parameter set via --preset <name> or --params <path>".into(),
        )),
    }
}

// ==================== Scenario ====================

/// One simulation request: which controller, what force, how long.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// Omit to take the controller from the `--preset` flag instead.
    #[serde(default)]
    pub controller: Option<ControllerRef>,
    pub input: InputSpec,
    /// Omit to inherit the resolved parameter set's `dt_s`.
    #[serde(default)]
    pub dt_s: Option<f64>,
    pub duration_s: f64,
    /// Starting internal velocity [m/s]; zero (cold start) by default.
    #[serde(default)]
    pub initial_velocity_mps: f64,
    /// Post-run analyses to include in the summary.
    #[serde(default)]
    pub analyses: Vec<AnalysisRequest>,
}

/// Where a scenario's controller comes from.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ControllerRef {
    /// `{"preset": "fixed_sfc"}` — a built-in set.
    Preset { preset: String },
    /// `{"file": "tuned.json"}` — a params file on disk (e.g. tuner output),
    /// resolved relative to the scenario file's directory.
    File { file: PathBuf },
    /// `{"params": {"type": "sfc", ...}}` — inline.
    Inline { params: CliParams },
}

/// Force signal spec with unit-bearing keys; mirrors the library's signals.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputSpec {
    Step { force_n: f64 },
    Sine { amplitude_n: f64, omega_rad_s: f64 },
    ImpulseProfile { f_low_n: f64, f_high_n: f64, t_on_s: f64, t_off_s: f64 },
    Recorded { dt_s: f64, samples_n: Vec<f64> },
    Composite { parts: Vec<InputSpec> },
}

impl InputSpec {
    pub fn to_signal(&self) -> InputSignal {
        match self {
            InputSpec::Step { force_n } => InputSignal::Step { amplitude: *force_n },
            InputSpec::Sine { amplitude_n, omega_rad_s } => {
                InputSignal::Sine { amplitude: *amplitude_n, omega: *omega_rad_s }
            }
            InputSpec::ImpulseProfile { f_low_n, f_high_n, t_on_s, t_off_s } => {
                InputSignal::ImpulseProfile {
                    f_low: *f_low_n,
                    f_high: *f_high_n,
                    t_on: *t_on_s,
                    t_off: *t_off_s,
                }
            }
            InputSpec::Recorded { dt_s, samples_n } => {
                InputSignal::Recorded { samples: samples_n.clone(), dt: *dt_s }
            }
            InputSpec::Composite { parts } => {
                InputSignal::Composite { parts: parts.iter().map(InputSpec::to_signal).collect() }
            }
        }
    }
}

/// What to compute from a finished trace.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisRequest {
    /// Steady value, predicted steady value, numeric time constant.
    StepMetrics,
    /// Final energy-ledger row and its balance residual.
    Energy,
    /// Classify the applied force record against the given bounds.
    Classify(ClassifySpec),
    /// Measure frequency-response curves at the given drive amplitudes.
    Bode(BodeSpec),
}

/// Classification bounds with unit-bearing keys.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifySpec {
    pub f_th_n: f64,
    pub eps_plus_hz: f64,
    pub eps_minus_hz: f64,
    /// Defaults to the library's 1e−9 N floor.
    #[serde(default)]
    pub noise_floor_n: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodeSpec {
    pub amplitudes_n: Vec<f64>,
}

/// A scenario with everything resolved into library types.
pub struct ResolvedScenario {
    pub name: String,
    pub controller: ControllerParams,
    pub input: InputSpec,
    pub dt_s: f64,
    pub duration_s: f64,
    pub initial_state: ControllerState,
    pub analyses: Vec<AnalysisRequest>,
}

impl Scenario {
    /// Resolves the controller reference (scenario first, `--preset` flag as
    /// fallback) and the sample time (scenario first, parameter file second).
    ///
    /// `base_dir` anchors relative `{"file": ...}` references — the
    /// scenario's own directory, so a scenario and its tuned parameter file
    /// can travel together.
    pub fn resolve(
        self,
        preset_flag: Option<&str>,
        base_dir: &Path,
    ) -> Result<ResolvedScenario, Failure> {
        let source = match (&self.controller, preset_flag) {
            (Some(ControllerRef::Preset { preset: name }), _) => Some(preset(name)?),
            (Some(ControllerRef::File { file }), _) => {
                let path =
                    if file.is_absolute() { file.clone() } else { base_dir.join(file) };
                Some(read_json::<ParamsFile>(&path)?)
            }
            (Some(ControllerRef::Inline { .. }), _) => None,
            (None, Some(name)) => Some(preset(name)?),
            (None, None) => {
                return Err(Failure::Invalid(format!(
                    "scenario \"{}\" names no controller and no --preset was passed",
                    self.name
                )))
            }
        };
        let (cli_params, file_dt) = match (&self.controller, &source) {
            (Some(ControllerRef::Inline { params }), _) => (*params, None),
            (_, Some(file)) => (file.params, Some(file.dt_s)),
            _ => unreachable!("non-inline controllers always carry a source file"),
        };
        let controller = cli_params.to_controller()?;
        let dt_s = self.dt_s.or(file_dt).ok_or_else(|| {
            Failure::Invalid(format!(
                "scenario \"{}\" gives no dt_s and the inline parameter set carries none",
                self.name
            ))
        })?;
        let initial_state =
            ControllerState { v: self.initial_velocity_mps, ..ControllerState::at_rest() };
        Ok(ResolvedScenario {
            name: self.name,
            controller,
            input: self.input,
            dt_s,
            duration_s: self.duration_s,
            initial_state,
            analyses: self.analyses,
        })
    }
}

// ==================== Tuning requirements ====================

/// Tuning inputs with unit-bearing keys.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequirementsSpec {
    /// Largest traction (intentional guidance) force [N].
    pub f_ease_n: f64,
    /// Largest impact (unintentional contact) force [N].
    pub f_interf_n: f64,
    /// Desired steady output velocity at `f_ease_n` [m/s].
    pub v_d_mps: f64,
    /// Acceptable steady output velocity at `f_interf_n` [m/s].
    pub v_c_mps: f64,
    /// Requested traction-regime bandwidth [rad/s].
    pub w_c_ease_rad_s: f64,
    /// Control-loop sample time [s].
    pub dt_s: f64,
    /// Chosen virtual inertia [kg].
    pub m_kg: f64,
}

impl RequirementsSpec {
    pub fn to_requirements(self) -> stf_control::TuningRequirements {
        stf_control::TuningRequirements {
            f_ease: self.f_ease_n,
            f_interf: self.f_interf_n,
            v_d: self.v_d_mps,
            v_c: self.v_c_mps,
            w_c_ease: self.w_c_ease_rad_s,
            dt: self.dt_s,
            m: self.m_kg,
        }
    }
}

// ==================== Inverse-kinematics problems ====================

/// An IK request: either a planar two-link arm pose or a raw Jacobian.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum IkSpec {
    TwoLink {
        link1_m: f64,
        link2_m: f64,
        q1_rad: f64,
        q2_rad: f64,
        /// Commanded end-effector velocity `[vx, vy]` [m/s].
        task_velocity_mps: [f64; 2],
        #[serde(default)]
        epsilon: Option<f64>,
        #[serde(default)]
        lambda: Option<f64>,
    },
    Raw {
        /// Row-major Jacobian, `task rows × joint columns`.
        jacobian: Vec<Vec<f64>>,
        task_velocity: Vec<f64>,
        #[serde(default)]
        epsilon: Option<f64>,
        #[serde(default)]
        lambda: Option<f64>,
    },
}

// ==================== File helpers ====================

/// Reads and parses a JSON config, folding IO and syntax problems into one
/// invalid-input failure that names the file.
pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

/// Writes a file atomically: the bytes land under a temporary name in the
/// destination directory and are renamed into place, so a crash or a failed
/// run never leaves a truncated artifact at the target path.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let failed = |e: &dyn std::fmt::Display| {
        Failure::Invalid(format!("cannot write {}: {e}", path.display()))
    };
    let mut tmp = tempfile::Builder::new()
        .prefix(".stf-lab.")
        .tempfile_in(dir)
        .map_err(|e| failed(&e))?;
    tmp.write_all(bytes).map_err(|e| failed(&e))?;
    tmp.flush().map_err(|e| failed(&e))?;
    tmp.persist(path).map_err(|e| failed(&e))?;
    Ok(())
}
