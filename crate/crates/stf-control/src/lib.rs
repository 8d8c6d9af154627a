//! Virtual-dynamics admittance control with shear-thickening-fluid damping.
//!
//! # Overview
//!
//! An admittance controller maps a measured contact force to a commanded
//! velocity through simulated ("virtual") dynamics. This crate implements
//! three such virtual-dynamics laws and everything needed to analyze, tune,
//! and exercise them at desk scale:
//!
//! * [`controller`] — the shear-thickening fluid controller (SFC) with
//!   power-law damping `μ|ẋ|^{n−1}ẋ`, plus the linear (L-AC) and
//!   force-gated nonlinear (N-AC) baselines; forward-Euler stepping, steady
//!   states, phase-plane geometry, and the energy ledger.
//! * [`describing`] — closed-form frequency-domain characterization of the
//!   SFC via its describing function: the gamma-ratio coefficient `Ψ(n)`,
//!   amplitude-dependent gain/phase, bandwidth, time constant, and system
//!   gain variation.
//! * [`stability`] — discrete-time feasibility guards: the sample-time
//!   bound, the bandwidth bound, the coupled-stability condition, the
//!   apparent-admittance phase, and the power-law conditioning probe.
//! * [`tuner`] — parameter auto-tuning from interaction requirements
//!   (traction/impact force and velocity envelopes) to a full SFC parameter
//!   set, with a bandwidth-feasibility fallback.
//! * [`signal`] / [`sim`] — deterministic fixed-step simulation: input
//!   generators, open-loop and human-coupled runs, numeric Bode sweeps,
//!   step-response metrics, and FFT band-energy analysis.
//! * [`classify`] — offline force classification (contactless / traction /
//!   impact) from FFT amplitude and frequency-support statistics.
//! * [`kinematics`] — damped-least-squares differential inverse kinematics
//!   with singularity handling.
//!
//! All numerics are generic over the floating-point [`Scalar`] type
//! (`f32` or `f64`); the crate-root aliases fix `f64`, which every shipped
//! tool uses.
//!
//! # Units
//!
//! Forces are newtons, velocities m/s, angular frequencies rad/s, times
//! seconds — everywhere. Interfaces that report hertz (the classifier's
//! frequency-support statistics) say so explicitly in their names.

pub mod classify;
pub mod controller;
pub mod describing;
pub mod error;
pub mod kinematics;
pub mod scalar;
pub mod signal;
pub mod sim;
pub mod spectrum;
pub mod stability;
pub mod tuner;

pub use error::{Error, Result};
pub use scalar::Scalar;

// ---- Concrete f64 aliases for the shipped tools ----

/// Shear-thickening fluid controller parameters in `f64`.
pub type SfcParams = controller::SfcParams<f64>;
/// Linear admittance controller parameters in `f64`.
pub type LacParams = controller::LacParams<f64>;
/// Force-gated nonlinear admittance controller parameters in `f64`.
pub type NacParams = controller::NacParams<f64>;
/// Any of the three controller laws, in `f64`.
pub type ControllerParams = controller::ControllerParams<f64>;
/// Virtual-dynamics state in `f64`.
pub type ControllerState = controller::ControllerState<f64>;
/// Simulation configuration in `f64`.
pub type SimConfig = sim::SimConfig<f64>;
/// Simulation trace in `f64`.
pub type SimTrace = sim::SimTrace<f64>;
/// Input signal in `f64`.
pub type InputSignal = signal::InputSignal<f64>;
/// Human mass-damper coupling model in `f64`.
pub type HumanModel = sim::HumanModel<f64>;
/// Tuning requirements in `f64`.
pub type TuningRequirements = tuner::TuningRequirements<f64>;
/// Auto-tuned parameters in `f64`.
pub type TunedParams = tuner::TunedParams<f64>;
/// Jacobian matrix in `f64`.
pub type Jacobian = kinematics::Jacobian<f64>;
