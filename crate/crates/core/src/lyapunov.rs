//! Quadratic Lyapunov candidates: decrease matrices, S-lemma relaxations and
//! trajectory-based validation.
//!
//! For a state-only candidate `V(x) = x^T P x` the one-step difference along
//! `x+ = A x + C lambda` is the quadratic form of [`cqlf_decrease_matrix`] in
//! `(x, lambda)`. For an extended candidate `V(x, lambda) = [x; lambda]^T P [x; lambda]`
//! the difference `V(x+, lambda+) - V(x, lambda)` is the form of
//! [`eqlf_decrease_matrix`] in `(x, lambda, lambda+)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lcp::lcp_solve_all;
use crate::numkit::{check_symmetric, is_positive_definite, norm2, Matrix};
use crate::system::{discretize, Dlcs, Lcs};

/// Allowed increase of the Lyapunov function between consecutive states during validation.
pub const DECREASE_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// State-only quadratic function.
    Cqlf,
    /// Quadratic function of state and multiplier.
    Eqlf,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Cqlf => "cqlf",
            Mode::Eqlf => "eqlf",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "cqlf" => Ok(Mode::Cqlf),
            "eqlf" => Ok(Mode::Eqlf),
            other => Err(format!("unknown mode '{other}' (expected cqlf or eqlf)")),
        }
    }
}

impl Mode {
    /// Side length of the candidate matrix for a system with the given dimensions.
    pub fn candidate_dim(self, n_x: usize, n_c: usize) -> usize {
        match self {
            Mode::Cqlf => n_x,
            Mode::Eqlf => n_x + n_c,
        }
    }
}

/// A candidate Lyapunov matrix tagged with its mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub mode: Mode,
    pub matrix: Matrix,
}

impl Certificate {
    pub fn new(mode: Mode, matrix: Matrix, dlcs: &Dlcs) -> Result<Self> {
        let n = mode.candidate_dim(dlcs.n_x(), dlcs.n_c());
        if matrix.shape() != (n, n) {
            return Err(Error::Dimension(format!(
                "{mode} candidate must be {n}x{n}, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        check_symmetric(&matrix)?;
        Ok(Self { mode, matrix })
    }

    /// `V(x)` or `V(x, lambda)`; `lambda` is ignored for state-only candidates.
    pub fn value(&self, x: &[f64], lambda: &[f64]) -> f64 {
        match self.mode {
            Mode::Cqlf => self.matrix.quad_form(x),
            Mode::Eqlf => self.matrix.quad_form(&stack(&[x, lambda])),
        }
    }
}

pub(crate) fn stack(parts: &[&[f64]]) -> Vec<f64> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

fn expect_square(p: &Matrix, n: usize, what: &str) -> Result<()> {
    if p.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "{what} must be {n}x{n}, got {}x{}",
            p.rows(),
            p.cols()
        )));
    }
    Ok(())
}

/// `[[A^T P A - P, A^T P C], [C^T P A, C^T P C]]`.
pub fn cqlf_decrease_matrix(dlcs: &Dlcs, p_xx: &Matrix) -> Result<Matrix> {
    let (a, c) = (&dlcs.dynamics, &dlcs.input);
    expect_square(p_xx, dlcs.n_x(), "state weight")?;
    let at_p = a.transpose().mul(p_xx);
    let ct_p = c.transpose().mul(p_xx);
    let top_left = at_p.mul(a).sub(p_xx);
    let top_right = at_p.mul(c);
    let bottom_left = ct_p.mul(a);
    let bottom_right = ct_p.mul(c);
    Matrix::from_blocks(&[
        vec![&top_left, &top_right],
        vec![&bottom_left, &bottom_right],
    ])
}

/// Splits a candidate of side `n_x + n_c` into its state, cross and multiplier blocks.
pub fn split_extended(p: &Matrix, n_x: usize, n_c: usize) -> Result<(Matrix, Matrix, Matrix)> {
    expect_square(p, n_x + n_c, "extended weight")?;
    Ok((
        p.block(0, 0, n_x, n_x),
        p.block(0, n_x, n_x, n_c),
        p.block(n_x, n_x, n_c, n_c),
    ))
}

/// Decrease form of an extended candidate on `(x, lambda, lambda+)`.
pub fn eqlf_decrease_matrix(dlcs: &Dlcs, p: &Matrix) -> Result<Matrix> {
    let (a, c) = (&dlcs.dynamics, &dlcs.input);
    let (pxx, pxl, pll) = split_extended(p, dlcs.n_x(), dlcs.n_c())?;
    let at = a.transpose();
    let ct = c.transpose();
    let plx = pxl.transpose();
    let b11 = at.mul(&pxx).mul(a).sub(&pxx);
    let b12 = at.mul(&pxx).mul(c).sub(&pxl);
    let b13 = at.mul(&pxl);
    let b21 = ct.mul(&pxx).mul(a).sub(&plx);
    let b22 = ct.mul(&pxx).mul(c).sub(&pll);
    let b23 = ct.mul(&pxl);
    let b31 = plx.mul(a);
    let b32 = plx.mul(c);
    Matrix::from_blocks(&[
        vec![&b11, &b12, &b13],
        vec![&b21, &b22, &b23],
        vec![&b31, &b32, &pll],
    ])
}

/// Continuous-time decrease form `[[A^T P + P A, P C], [C^T P, 0]]`.
pub fn continuous_decrease_matrix(lcs: &Lcs, p_xx: &Matrix) -> Result<Matrix> {
    expect_square(p_xx, lcs.n_x(), "state weight")?;
    let pa = p_xx.mul(&lcs.dynamics);
    let top_left = pa.transpose().add(&pa);
    let top_right = p_xx.mul(&lcs.input);
    let bottom_left = top_right.transpose();
    let zero = Matrix::zeros(lcs.n_c(), lcs.n_c());
    Matrix::from_blocks(&[vec![&top_left, &top_right], vec![&bottom_left, &zero]])
}

/// `|M(P) - dt N^T Q(P) N|_inf` for the theta-scheme discretization with step `dt`,
/// where `N = [[A, C], [0, I]]`.
pub fn discretization_residual(lcs: &Lcs, p_xx: &Matrix, dt: f64, theta: f64) -> Result<f64> {
    let dlcs = discretize(lcs, dt, theta)?;
    let m = cqlf_decrease_matrix(&dlcs, p_xx)?;
    let q = continuous_decrease_matrix(lcs, p_xx)?;
    let zero = Matrix::zeros(lcs.n_c(), lcs.n_x());
    let eye = Matrix::identity(lcs.n_c());
    let n = Matrix::from_blocks(&[vec![&dlcs.dynamics, &dlcs.input], vec![&zero, &eye]])?;
    let approx = n.transpose().mul(&q).mul(&n).scale(dt);
    Ok(m.sub(&approx).norm_inf())
}

/// Both sides of the one-step decrease identity: the quadratic form of the decrease
/// matrix and the direct difference of the Lyapunov function.
pub fn decrease_identity(
    dlcs: &Dlcs,
    cert: &Certificate,
    x: &[f64],
    lambda: &[f64],
    lambda_next: Option<&[f64]>,
) -> Result<(f64, f64)> {
    if x.len() != dlcs.n_x() || lambda.len() != dlcs.n_c() {
        return Err(Error::Dimension("point does not match the system".into()));
    }
    let next = dlcs.advance(x, lambda);
    match cert.mode {
        Mode::Cqlf => {
            let m = cqlf_decrease_matrix(dlcs, &cert.matrix)?;
            let lhs = m.quad_form(&stack(&[x, lambda]));
            let rhs = cert.matrix.quad_form(&next) - cert.matrix.quad_form(x);
            Ok((lhs, rhs))
        }
        Mode::Eqlf => {
            let ln = lambda_next.ok_or_else(|| {
                Error::Dimension("extended mode needs the next multiplier".into())
            })?;
            if ln.len() != dlcs.n_c() {
                return Err(Error::Dimension(
                    "next multiplier does not match the system".into(),
                ));
            }
            let m = eqlf_decrease_matrix(dlcs, &cert.matrix)?;
            let lhs = m.quad_form(&stack(&[x, lambda, ln]));
            let rhs = cert.value(&next, ln) - cert.value(x, lambda);
            Ok((lhs, rhs))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub trajectories: usize,
    pub horizon: usize,
    pub seed: u64,
    /// Largest one-step increase over every trajectory, step and LCP branch.
    pub max_increase: f64,
    /// Largest fitted per-step ratio `V_{k+1} / V_k` over trajectories.
    pub decay_rate: f64,
    pub positive: bool,
    pub passed: bool,
}

struct TrajectoryCheck {
    max_increase: f64,
    decay_rate: f64,
    positive: bool,
}

/// Geometric rate from a least-squares line through `log V_k`.
fn fitted_rate(values: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 1e-250)
        .map(|(k, v)| (k as f64, v.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxy / sxx).exp()
}

fn check_trajectory(
    dlcs: &Dlcs,
    cert: &Certificate,
    x0: &[f64],
    horizon: usize,
    id: usize,
) -> Result<TrajectoryCheck> {
    let no_solution = |step| Error::TrajectoryNoSolution {
        trajectory: id,
        step,
    };
    let solve = |x: &[f64], step: usize| -> Result<Vec<Vec<f64>>> {
        let sols = lcp_solve_all(&dlcs.lcp_at(x)?)?;
        if sols.is_empty() {
            return Err(no_solution(step));
        }
        Ok(sols.into_iter().map(|s| s.lambda).collect())
    };
    let mut x = x0.to_vec();
    let mut values = Vec::with_capacity(horizon + 1);
    let mut max_increase = f64::NEG_INFINITY;
    let mut positive = true;
    let mut current = solve(&x, 0)?;
    for k in 0..horizon {
        if x.iter().all(|v| v.abs() < 1e-150) {
            break;
        }
        let mut next_sets = Vec::with_capacity(current.len());
        for lambda in &current {
            let xn = dlcs.advance(&x, lambda);
            let v_now = cert.value(&x, lambda);
            if norm2(&stack(&[&x, lambda])) > 1e-6 && v_now <= 0.0 {
                positive = false;
            }
            match cert.mode {
                Mode::Cqlf => {
                    max_increase = max_increase.max(cert.value(&xn, &[]) - v_now);
                }
                Mode::Eqlf => {
                    for ln in solve(&xn, k + 1)? {
                        max_increase = max_increase.max(cert.value(&xn, &ln) - v_now);
                    }
                }
            }
            next_sets.push(xn);
        }
        // follow the lowest-index branch
        values.push(cert.value(&x, &current[0]));
        x = next_sets.swap_remove(0);
        current = solve(&x, k + 1)?;
    }
    if max_increase == f64::NEG_INFINITY {
        max_increase = 0.0;
    }
    Ok(TrajectoryCheck {
        max_increase,
        decay_rate: fitted_rate(&values),
        positive,
    })
}

/// Simulates `n_traj` trajectories from seeded uniform points on the unit sphere and
/// checks that the candidate decreases along every LCP branch at every step.
pub fn validate_certificate(
    dlcs: &Dlcs,
    cert: &Certificate,
    n_traj: usize,
    horizon: usize,
    seed: u64,
) -> Result<ValidationReport> {
    let n = dlcs.n_x();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<Vec<f64>> = (0..n_traj)
        .map(|_| loop {
            let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let r = norm2(&v);
            if r > 1e-12 {
                break v.into_iter().map(|c| c / r).collect();
            }
        })
        .collect();
    let checks: Vec<TrajectoryCheck> = starts
        .par_iter()
        .enumerate()
        .map(|(i, x0)| check_trajectory(dlcs, cert, x0, horizon, i))
        .collect::<Result<_>>()?;

    let mut positive = checks.iter().all(|c| c.positive);
    if cert.mode == Mode::Cqlf {
        positive &= is_positive_definite(&cert.matrix)?;
    }
    let max_increase = checks
        .iter()
        .map(|c| c.max_increase)
        .reduce(f64::max)
        .unwrap_or(0.0);
    let decay_rate = checks.iter().map(|c| c.decay_rate).fold(0.0f64, f64::max);
    Ok(ValidationReport {
        trajectories: n_traj,
        horizon,
        seed,
        max_increase,
        decay_rate,
        positive,
        passed: positive && max_increase <= DECREASE_SLACK && decay_rate < 1.0,
    })
}

fn check_nonnegative(name: &'static str, w: &Matrix, n: usize) -> Result<()> {
    expect_square(w, n, name)?;
    for i in 0..n {
        for j in 0..n {
            if w[(i, j)] < 0.0 {
                return Err(Error::Negativity {
                    name,
                    row: i,
                    col: j,
                    value: w[(i, j)],
                });
            }
        }
    }
    Ok(())
}

/// `[[D, F], [0, I]]`: nonnegative on the graph of the solution map.
fn graph_rows(dlcs: &Dlcs) -> Result<Matrix> {
    let nc = dlcs.n_c();
    let zero = Matrix::zeros(nc, dlcs.n_x());
    let eye = Matrix::identity(nc);
    Matrix::from_blocks(&[vec![&dlcs.output, &dlcs.feedthrough], vec![&zero, &eye]])
}

/// `M(P) + H^T W H` with `H = [[D, F], [0, I]]`; `W` is `2 n_c` square and elementwise nonnegative.
pub fn slemma_cqlf(dlcs: &Dlcs, p_xx: &Matrix, w: &Matrix) -> Result<Matrix> {
    check_nonnegative("W", w, 2 * dlcs.n_c())?;
    let h = graph_rows(dlcs)?;
    let m = cqlf_decrease_matrix(dlcs, p_xx)?;
    Ok(m.add(&h.transpose().mul(w).mul(&h)))
}

/// Positivity matrix `P - H^T W1 H` and decrease matrix `M(P) + J^T W2 J + J'^T W3 J'` with
/// `J = [[D, F, 0], [0, I, 0]]` and `J' = [[DA, DC, F], [0, 0, I]]`.
pub fn slemma_eqlf(
    dlcs: &Dlcs,
    p: &Matrix,
    w1: &Matrix,
    w2: &Matrix,
    w3: &Matrix,
) -> Result<(Matrix, Matrix)> {
    let (nx, nc) = (dlcs.n_x(), dlcs.n_c());
    check_nonnegative("W1", w1, 2 * nc)?;
    check_nonnegative("W2", w2, 2 * nc)?;
    check_nonnegative("W3", w3, 2 * nc)?;
    expect_square(p, nx + nc, "extended weight")?;
    let h = graph_rows(dlcs)?;
    let pos = p.sub(&h.transpose().mul(w1).mul(&h));

    let z_cc = Matrix::zeros(nc, nc);
    let z_cx = Matrix::zeros(nc, nx);
    let eye = Matrix::identity(nc);
    let j = Matrix::from_blocks(&[
        vec![&dlcs.output, &dlcs.feedthrough, &z_cc],
        vec![&z_cx, &eye, &z_cc],
    ])?;
    let da = dlcs.output.mul(&dlcs.dynamics);
    let dc = dlcs.output.mul(&dlcs.input);
    let j_next =
        Matrix::from_blocks(&[vec![&da, &dc, &dlcs.feedthrough], vec![&z_cx, &z_cc, &eye]])?;
    let dec = eqlf_decrease_matrix(dlcs, p)?
        .add(&j.transpose().mul(w2).mul(&j))
        .add(&j_next.transpose().mul(w3).mul(&j_next));
    Ok((pos, dec))
}

/// True iff `s` is negative definite.
pub fn is_negative_definite(s: &Matrix) -> Result<bool> {
    is_positive_definite(&s.scale(-1.0))
}

/// `psi(x, lambda) = V(x+) - V(x)` for a state-only candidate.
pub fn cqlf_difference(dlcs: &Dlcs, p_xx: &Matrix, x: &[f64], lambda: &[f64]) -> f64 {
    let xn = dlcs.advance(x, lambda);
    p_xx.quad_form(&xn) - p_xx.quad_form(x)
}
