//! Command implementations, independent of argument parsing.

use std::path::PathBuf;
use std::time::Instant;

use copostab_core::cpa::{run_cutting_plane, CpaOptions, Status};
use copostab_core::lyapunov::{discretization_residual, validate_certificate, Certificate, Mode};
use copostab_core::numkit::Matrix;
use copostab_core::system::{
    discretize, explore_branches, find_equilibrium, reduce_inhomogeneous, simulate,
    step_size_check, BranchPolicy, Dlcs, Equilibrium, InhomogeneousDlcs, Lcs, StepSizeCheck,
    Trajectory, BRANCH_BUDGET,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::document::{System, SystemDocument};
use crate::error::{exit, CliError, Result};
use crate::registry;
use crate::report::{
    tool_version, Residuals, RunReport, Scheme, SimulationRun, SweepEntry, SweepReport, Timings,
    TrajectoryReport, REPORT_SCHEMA, SWEEP_SCHEMA, TRAJECTORY_SCHEMA,
};

pub const SEED_ENV: &str = "COPOSTAB_SEED";

/// Where a system document comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    File(PathBuf),
    Example(String),
}

impl Source {
    pub fn load(&self) -> Result<SystemDocument> {
        match self {
            Source::File(path) => SystemDocument::load(path),
            Source::Example(name) => registry::example(name),
        }
    }
}

/// `explicit`, `implicit` or `theta=T` to the scheme parameter.
pub fn parse_scheme(text: &str) -> Result<f64> {
    let theta = match text {
        "explicit" => 0.0,
        "implicit" => 1.0,
        other => other
            .strip_prefix("theta=")
            .and_then(|t| t.parse::<f64>().ok())
            .ok_or_else(|| {
                CliError::Input(format!(
                    "unknown scheme '{other}' (explicit, implicit or theta=T)"
                ))
            })?,
    };
    if !(0.0..=1.0).contains(&theta) {
        return Err(CliError::Input(format!(
            "theta must lie in [0, 1], got {theta}"
        )));
    }
    Ok(theta)
}

/// The environment seed when set, otherwise `fallback`.
pub fn resolve_seed(fallback: u64, env: Option<String>) -> Result<u64> {
    match env {
        Some(text) => text.trim().parse().map_err(|_| {
            CliError::Input(format!("{SEED_ENV}='{text}' is not an unsigned integer"))
        }),
        None => Ok(fallback),
    }
}

/// A discrete-time homogeneous system ready for analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub dlcs: Dlcs,
    pub scheme: Option<Scheme>,
    pub step_size: Option<StepSizeCheck>,
    pub equilibrium: Option<Equilibrium>,
}

fn discretize_checked(lcs: &Lcs, theta: f64, dt: f64) -> Result<(Dlcs, StepSizeCheck)> {
    let check = step_size_check(lcs, dt, theta)?;
    Ok((discretize(lcs, dt, theta)?, check))
}

/// Discretizes continuous inputs and shifts inhomogeneous ones to their first equilibrium.
pub fn prepare(doc: &SystemDocument, theta: Option<f64>, dt: Option<f64>) -> Result<Prepared> {
    let plain = |dlcs| Prepared {
        dlcs,
        scheme: None,
        step_size: None,
        equilibrium: None,
    };
    match (doc.to_system()?, theta, dt) {
        (System::Continuous(lcs), Some(theta), Some(dt)) => {
            let (dlcs, check) = discretize_checked(&lcs, theta, dt)?;
            Ok(Prepared {
                dlcs,
                scheme: Some(Scheme { theta, dt }),
                step_size: Some(check),
                equilibrium: None,
            })
        }
        (System::Continuous(_), _, _) => Err(CliError::Input(
            "continuous-time input needs --scheme and --dt".into(),
        )),
        (_, Some(_), _) | (_, _, Some(_)) => Err(CliError::Input(
            "--scheme and --dt only apply to continuous-time input".into(),
        )),
        (System::Discrete(dlcs), None, None) => Ok(plain(dlcs)),
        (System::Inhomogeneous(sys), None, None) => {
            let eq = find_equilibrium(&sys)?
                .into_iter()
                .next()
                .ok_or(copostab_core::Error::EmptyResult)?;
            let mut prepared = plain(reduce_inhomogeneous(&sys, &eq)?);
            prepared.equilibrium = Some(eq);
            Ok(prepared)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOptions {
    pub mode: Mode,
    pub theta: Option<f64>,
    pub dt: Option<f64>,
    pub cpa: CpaOptions,
    pub validate: bool,
    pub trajectories: usize,
    pub horizon: usize,
}

impl CheckOptions {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            theta: None,
            dt: None,
            cpa: CpaOptions::default(),
            validate: false,
            trajectories: 100,
            horizon: 200,
        }
    }
}

fn matrix_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

/// Runs the cutting-plane search and, on request, trajectory validation.
pub fn check(doc: &SystemDocument, opts: &CheckOptions) -> Result<RunReport> {
    if opts.cpa.max_iter == 0 {
        return Err(CliError::Input("--max-iter must be positive".into()));
    }
    if !(opts.cpa.epsilon > 0.0 && opts.cpa.epsilon.is_finite()) {
        return Err(CliError::Input("--eps must be positive".into()));
    }
    let start = Instant::now();
    let prepared = prepare(doc, opts.theta, opts.dt)?;
    let prepare_s = start.elapsed().as_secs_f64();

    let t = Instant::now();
    let verdict = run_cutting_plane(&prepared.dlcs, opts.mode, &opts.cpa)?;
    let solve_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let validation = match (&verdict.certificate, opts.validate) {
        (Some(p), true) => {
            let cert = Certificate::new(opts.mode, p.clone(), &prepared.dlcs)?;
            Some(validate_certificate(
                &prepared.dlcs,
                &cert,
                opts.trajectories,
                opts.horizon,
                opts.cpa.seed,
            )?)
        }
        _ => None,
    };
    let validate_s = t.elapsed().as_secs_f64();

    Ok(RunReport {
        schema: REPORT_SCHEMA.into(),
        tool_version: tool_version(),
        input: doc.clone(),
        input_hash: doc.content_hash(),
        mode: opts.mode,
        scheme: prepared.scheme,
        step_size: prepared.step_size,
        equilibrium: prepared.equilibrium,
        epsilon: opts.cpa.epsilon,
        max_iter: opts.cpa.max_iter,
        seed: opts.cpa.seed,
        fast_sep: opts.cpa.fast_sep,
        verdict: verdict.status,
        margin: verdict.margin,
        master_mu: verdict.master_mu,
        iterations: verdict.iterations,
        certificate: verdict.certificate.as_ref().map(matrix_rows),
        trace: verdict.trace,
        witnesses: verdict.cuts,
        solvability_warning: verdict.solvability_warning,
        validation,
        timings: Timings {
            prepare_s,
            solve_s,
            validate_s,
            total_s: start.elapsed().as_secs_f64(),
        },
    })
}

/// Exit code for a finished check.
pub fn exit_code(report: &RunReport) -> u8 {
    match report.verdict {
        Status::Feasible if report.validation.as_ref().is_some_and(|v| !v.passed) => {
            exit::VALIDATION
        }
        Status::Feasible => exit::FEASIBLE,
        Status::Infeasible => exit::INFEASIBLE,
        Status::IterationLimit => exit::ITERATION_LIMIT,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    Lex,
    Random,
    All,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Lex => "lex",
            PolicyKind::Random => "random",
            PolicyKind::All => "all",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Start {
    Given(Vec<f64>),
    /// Seeded points uniform on the unit sphere.
    Random(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOptions {
    pub theta: Option<f64>,
    pub dt: Option<f64>,
    pub start: Start,
    pub steps: usize,
    pub policy: PolicyKind,
    pub seed: u64,
}

pub fn sphere_points(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let r = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if r > 1e-12 {
            out.push(v.into_iter().map(|c| c / r).collect());
        }
    }
    out
}

/// `x+ = A x + C lambda + g s`, `s+ = s`, slack `D x + F lambda + h s`: with `s = 1`
/// this reproduces the inhomogeneous system.
fn homogenize(sys: &InhomogeneousDlcs) -> Result<Dlcs> {
    let d = &sys.base;
    let (nx, nc) = (d.n_x(), d.n_c());
    let mut a = Matrix::zeros(nx + 1, nx + 1);
    a.set_block(0, 0, &d.dynamics);
    a.set_block(0, nx, &Matrix::column(&sys.offset));
    a[(nx, nx)] = 1.0;
    let mut c = Matrix::zeros(nx + 1, nc);
    c.set_block(0, 0, &d.input);
    let mut out = Matrix::zeros(nc, nx + 1);
    out.set_block(0, 0, &d.output);
    out.set_block(0, nx, &Matrix::column(&sys.bias));
    Ok(Dlcs::new(a, c, out, d.feedthrough.clone())?)
}

fn drop_last_coordinate(traj: &mut Trajectory) {
    for s in &mut traj.states {
        s.pop();
    }
}

/// Simulates from every start point and records worst-case complementarity residuals.
pub fn simulate_cmd(doc: &SystemDocument, opts: &SimulateOptions) -> Result<TrajectoryReport> {
    let (dlcs, scheme, lifted) = match doc.to_system()? {
        System::Inhomogeneous(sys) => {
            if opts.theta.is_some() || opts.dt.is_some() {
                return Err(CliError::Input(
                    "--scheme and --dt only apply to continuous-time input".into(),
                ));
            }
            (homogenize(&sys)?, None, true)
        }
        _ => {
            let p = prepare(doc, opts.theta, opts.dt)?;
            (p.dlcs, p.scheme, false)
        }
    };
    let nx = dlcs.n_x() - usize::from(lifted);
    let starts = match &opts.start {
        Start::Given(x0) => {
            if x0.len() != nx {
                return Err(CliError::Input(format!(
                    "--x0 has {} entries, system has {nx}",
                    x0.len()
                )));
            }
            vec![x0.clone()]
        }
        Start::Random(count) => sphere_points(nx, *count, opts.seed),
    };
    let mut runs = Vec::with_capacity(starts.len());
    for (i, x0) in starts.into_iter().enumerate() {
        let mut init = x0.clone();
        if lifted {
            init.push(1.0);
        }
        let (mut trajectories, truncated) = match opts.policy {
            PolicyKind::Lex => (
                vec![simulate(&dlcs, &init, opts.steps, BranchPolicy::Lex)?],
                false,
            ),
            PolicyKind::Random => {
                let policy = BranchPolicy::Random(opts.seed.wrapping_add(i as u64));
                (vec![simulate(&dlcs, &init, opts.steps, policy)?], false)
            }
            PolicyKind::All => {
                let e = explore_branches(&dlcs, &init, opts.steps, BRANCH_BUDGET)?;
                (e.trajectories, e.truncated)
            }
        };
        let mut residuals = Residuals {
            min_lambda: f64::INFINITY,
            min_slack: f64::INFINITY,
            complementarity: 0.0,
        };
        for t in &trajectories {
            let (l, w, c) = t.residuals(&dlcs);
            residuals.min_lambda = residuals.min_lambda.min(l);
            residuals.min_slack = residuals.min_slack.min(w);
            residuals.complementarity = residuals.complementarity.max(c);
        }
        // no steps: nothing to measure
        if trajectories.iter().all(|t| t.steps() == 0) {
            residuals.min_lambda = 0.0;
            residuals.min_slack = 0.0;
        }
        if lifted {
            trajectories.iter_mut().for_each(drop_last_coordinate);
        }
        runs.push(SimulationRun {
            x0,
            trajectories,
            truncated,
            residuals,
        });
    }
    Ok(TrajectoryReport {
        schema: TRAJECTORY_SCHEMA.into(),
        tool_version: tool_version(),
        input_hash: doc.content_hash(),
        system: doc.name.clone(),
        scheme,
        policy: opts.policy.name().into(),
        seed: opts.seed,
        steps: opts.steps,
        runs,
    })
}

fn continuous(doc: &SystemDocument) -> Result<Lcs> {
    match doc.to_system()? {
        System::Continuous(lcs) => Ok(lcs),
        _ => Err(CliError::Input(format!(
            "system '{}' is not continuous-time",
            doc.name
        ))),
    }
}

/// The discretized document together with the step-size diagnostics.
pub fn discretize_cmd(
    doc: &SystemDocument,
    theta: f64,
    dt: f64,
) -> Result<(SystemDocument, StepSizeCheck)> {
    let lcs = continuous(doc)?;
    let (dlcs, check) = discretize_checked(&lcs, theta, dt)?;
    let label = Scheme { theta, dt }.label();
    Ok((
        SystemDocument::from_dlcs(&format!("{}_{label}_dt{dt}", doc.name), &dlcs),
        check,
    ))
}

/// Runs `check` at each step size and relates consecutive results.
pub fn sweep(
    doc: &SystemDocument,
    mode: Mode,
    theta: f64,
    dts: &[f64],
    cpa: &CpaOptions,
) -> Result<SweepReport> {
    if dts.is_empty() {
        return Err(CliError::Input("--dts needs at least one step size".into()));
    }
    let lcs = continuous(doc)?;
    let mut entries = Vec::with_capacity(dts.len());
    let mut certificates = Vec::with_capacity(dts.len());
    for &dt in dts {
        let mut opts = CheckOptions::new(mode);
        opts.theta = Some(theta);
        opts.dt = Some(dt);
        opts.cpa = *cpa;
        let report = check(doc, &opts)?;
        entries.push(SweepEntry {
            dt,
            verdict: report.verdict,
            margin: report.margin,
            iterations: report.iterations,
            time_s: report.timings.total_s,
        });
        certificates.push(report.certificate);
    }
    let margin_ratios = entries
        .windows(2)
        .map(|w| {
            (w[0].verdict == Status::Feasible && w[1].verdict == Status::Feasible)
                .then(|| w[0].margin / w[1].margin)
        })
        .collect();
    let nx = lcs.n_x();
    let mut residual_ratios = Vec::new();
    for k in 0..dts.len().saturating_sub(1) {
        // the state block of the coarser certificate, or the identity
        let p = certificates[k]
            .as_ref()
            .map(|rows| Matrix::from_rows(rows).block(0, 0, nx, nx))
            .unwrap_or_else(|| Matrix::identity(nx));
        let coarse = discretization_residual(&lcs, &p, dts[k], theta)?;
        let fine = discretization_residual(&lcs, &p, dts[k + 1], theta)?;
        residual_ratios.push(coarse / fine);
    }
    Ok(SweepReport {
        schema: SWEEP_SCHEMA.into(),
        tool_version: tool_version(),
        input: doc.clone(),
        input_hash: doc.content_hash(),
        mode,
        theta,
        epsilon: cpa.epsilon,
        entries,
        margin_ratios,
        residual_ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schemes() {
        assert_eq!(parse_scheme("explicit").unwrap(), 0.0);
        assert_eq!(parse_scheme("implicit").unwrap(), 1.0);
        assert_eq!(parse_scheme("theta=0.5").unwrap(), 0.5);
        assert!(parse_scheme("theta=2").is_err());
        assert!(parse_scheme("rk4").is_err());
    }

    #[test]
    fn environment_seed_wins() {
        assert_eq!(resolve_seed(3, None).unwrap(), 3);
        assert_eq!(resolve_seed(3, Some("17".into())).unwrap(), 17);
        assert!(resolve_seed(3, Some("x".into())).is_err());
    }

    #[test]
    fn continuous_input_needs_scheme() {
        let doc = registry::example("cam31").unwrap();
        assert!(matches!(prepare(&doc, None, None), Err(CliError::Input(_))));
        let qp0 = registry::example("qp0").unwrap();
        assert!(matches!(
            prepare(&qp0, Some(0.0), Some(0.1)),
            Err(CliError::Input(_))
        ));
    }

    #[test]
    fn homogenized_system_tracks_offset() {
        let base = Dlcs::new(
            Matrix::from_rows(&[[0.5]]),
            Matrix::from_rows(&[[1.0]]),
            Matrix::from_rows(&[[1.0]]),
            Matrix::from_rows(&[[1.0]]),
        )
        .unwrap();
        let sys = InhomogeneousDlcs::new(base, vec![1.0], vec![0.0]).unwrap();
        let doc = SystemDocument::from_inhomogeneous("shift", &sys);
        let opts = SimulateOptions {
            theta: None,
            dt: None,
            start: Start::Given(vec![2.0]),
            steps: 3,
            policy: PolicyKind::Lex,
            seed: 0,
        };
        let report = simulate_cmd(&doc, &opts).unwrap();
        // x = 2 is the equilibrium of x+ = 0.5 x + 1
        for s in &report.runs[0].trajectories[0].states {
            assert_eq!(s, &vec![2.0]);
        }
    }
}
