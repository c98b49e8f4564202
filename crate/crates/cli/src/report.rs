//! Machine-readable command output.

use copostab_core::cpa::{CutSet, Status, TraceEntry};
use copostab_core::lyapunov::{Mode, ValidationReport};
use copostab_core::system::{Equilibrium, StepSizeCheck, Trajectory};
use serde::{Deserialize, Serialize};

use crate::document::SystemDocument;

pub const REPORT_SCHEMA: &str = "copostab.report/1";
pub const TRAJECTORY_SCHEMA: &str = "copostab.trajectories/1";
pub const SWEEP_SCHEMA: &str = "copostab.sweep/1";

/// Theta-scheme parameters used to discretize a continuous-time input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scheme {
    pub theta: f64,
    pub dt: f64,
}

impl Scheme {
    pub fn label(&self) -> String {
        scheme_label(self.theta)
    }
}

/// `explicit`, `implicit` or `theta=0.5` style label.
pub fn scheme_label(theta: f64) -> String {
    match theta {
        0.0 => "explicit".into(),
        1.0 => "implicit".into(),
        t => format!("theta={t}"),
    }
}

/// Wall-clock seconds per phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub prepare_s: f64,
    pub solve_s: f64,
    pub validate_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub tool_version: String,
    pub input: SystemDocument,
    pub input_hash: String,
    pub mode: Mode,
    pub scheme: Option<Scheme>,
    pub step_size: Option<StepSizeCheck>,
    /// Equilibrium the inhomogeneous input was shifted to.
    pub equilibrium: Option<Equilibrium>,
    pub epsilon: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub fast_sep: bool,
    pub verdict: Status,
    pub margin: f64,
    pub master_mu: f64,
    pub iterations: usize,
    /// Row-major candidate matrix when feasible.
    pub certificate: Option<Vec<Vec<f64>>>,
    pub trace: Vec<TraceEntry>,
    pub witnesses: CutSet,
    pub solvability_warning: bool,
    pub validation: Option<ValidationReport>,
    pub timings: Timings,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub min_lambda: f64,
    pub min_slack: f64,
    pub complementarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRun {
    pub x0: Vec<f64>,
    /// One path, or every branch when all solutions are followed.
    pub trajectories: Vec<Trajectory>,
    pub truncated: bool,
    pub residuals: Residuals,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub schema: String,
    pub tool_version: String,
    pub input_hash: String,
    pub system: String,
    pub scheme: Option<Scheme>,
    pub policy: String,
    pub seed: u64,
    pub steps: usize,
    pub runs: Vec<SimulationRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub dt: f64,
    pub verdict: Status,
    pub margin: f64,
    pub iterations: usize,
    pub time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema: String,
    pub tool_version: String,
    pub input: SystemDocument,
    pub input_hash: String,
    pub mode: Mode,
    pub theta: f64,
    pub epsilon: f64,
    pub entries: Vec<SweepEntry>,
    /// `margin(dt_k) / margin(dt_{k+1})` when both runs are feasible.
    pub margin_ratios: Vec<Option<f64>>,
    /// Ratio of the discretization residual at consecutive step sizes.
    pub residual_ratios: Vec<f64>,
}

pub fn tool_version() -> String {
    env!("CARGO_PKG_VERSION").into()
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports always serialize")
}
