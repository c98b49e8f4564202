//! System models, theta-scheme discretization, equilibria and simulation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lcp::{is_p_matrix, lcp_solve_all, LcpInstance, LcpSolution};
use crate::numkit::tol::{DEDUP_TOL, FEAS_TOL, MAX_ENUM_DIM};
use crate::numkit::{inverse, norm_inf, Lu, Matrix};

/// Default number of branches kept by [`explore_branches`].
pub const BRANCH_BUDGET: usize = 256;

fn check_conformal(
    dynamics: &Matrix,
    input: &Matrix,
    output: &Matrix,
    feedthrough: &Matrix,
) -> Result<(usize, usize)> {
    let nx = dynamics.rows();
    let nc = feedthrough.rows();
    let ok = dynamics.shape() == (nx, nx)
        && input.shape() == (nx, nc)
        && output.shape() == (nc, nx)
        && feedthrough.shape() == (nc, nc);
    if !ok {
        return Err(Error::Dimension(format!(
            "system blocks are not conformal: {:?}, {:?}, {:?}, {:?}",
            dynamics.shape(),
            input.shape(),
            output.shape(),
            feedthrough.shape()
        )));
    }
    Ok((nx, nc))
}

/// Continuous-time system `dx/dt = dynamics x + input lambda`,
/// `0 <= lambda ⊥ output x + feedthrough lambda >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lcs {
    pub dynamics: Matrix,
    pub input: Matrix,
    pub output: Matrix,
    pub feedthrough: Matrix,
}

impl Lcs {
    pub fn new(
        dynamics: Matrix,
        input: Matrix,
        output: Matrix,
        feedthrough: Matrix,
    ) -> Result<Self> {
        check_conformal(&dynamics, &input, &output, &feedthrough)?;
        Ok(Self {
            dynamics,
            input,
            output,
            feedthrough,
        })
    }

    pub fn n_x(&self) -> usize {
        self.dynamics.rows()
    }

    pub fn n_c(&self) -> usize {
        self.feedthrough.rows()
    }
}

/// Discrete-time system `x+ = dynamics x + input lambda`,
/// `0 <= lambda ⊥ output x + feedthrough lambda >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dlcs {
    pub dynamics: Matrix,
    pub input: Matrix,
    pub output: Matrix,
    pub feedthrough: Matrix,
}

impl Dlcs {
    pub fn new(
        dynamics: Matrix,
        input: Matrix,
        output: Matrix,
        feedthrough: Matrix,
    ) -> Result<Self> {
        check_conformal(&dynamics, &input, &output, &feedthrough)?;
        Ok(Self {
            dynamics,
            input,
            output,
            feedthrough,
        })
    }

    pub fn n_x(&self) -> usize {
        self.dynamics.rows()
    }

    pub fn n_c(&self) -> usize {
        self.feedthrough.rows()
    }

    pub fn lcp_at(&self, x: &[f64]) -> Result<LcpInstance> {
        if x.len() != self.n_x() {
            return Err(Error::Dimension(format!(
                "state has {} entries, system has {}",
                x.len(),
                self.n_x()
            )));
        }
        LcpInstance::new(self.output.matvec(x), self.feedthrough.clone())
    }

    pub fn advance(&self, x: &[f64], lambda: &[f64]) -> Vec<f64> {
        let ax = self.dynamics.matvec(x);
        let cl = self.input.matvec(lambda);
        ax.iter().zip(cl).map(|(a, b)| a + b).collect()
    }
}

/// `x+ = dynamics x + input lambda + offset`, `0 <= lambda ⊥ output x + feedthrough lambda + bias >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InhomogeneousDlcs {
    pub base: Dlcs,
    pub offset: Vec<f64>,
    pub bias: Vec<f64>,
}

impl InhomogeneousDlcs {
    pub fn new(base: Dlcs, offset: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if offset.len() != base.n_x() || bias.len() != base.n_c() {
            return Err(Error::Dimension(format!(
                "offset/bias lengths {}/{} do not match n_x={}, n_c={}",
                offset.len(),
                bias.len(),
                base.n_x(),
                base.n_c()
            )));
        }
        Ok(Self { base, offset, bias })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSizeCheck {
    /// `dt * theta * |dynamics|_2`
    pub implicit_bound: f64,
    /// `dt * |R dynamics|_2` with `R = (I - theta dt dynamics)^-1`
    pub resolvent_bound: f64,
}

impl StepSizeCheck {
    pub fn passes(&self) -> bool {
        self.implicit_bound < 1.0 && self.resolvent_bound < 1.0
    }
}

fn resolvent(lcs: &Lcs, dt: f64, theta: f64) -> Result<Matrix> {
    let n = lcs.n_x();
    inverse(&Matrix::identity(n).sub(&lcs.dynamics.scale(theta * dt)))
}

/// Evaluates both step-size conditions without discretizing.
pub fn step_size_check(lcs: &Lcs, dt: f64, theta: f64) -> Result<StepSizeCheck> {
    let implicit_bound = dt * theta * lcs.dynamics.spectral_norm();
    let r = resolvent(lcs, dt, theta)?;
    let resolvent_bound = dt * r.mul(&lcs.dynamics).spectral_norm();
    Ok(StepSizeCheck {
        implicit_bound,
        resolvent_bound,
    })
}

/// Theta-scheme time stepping; `theta = 0` is explicit Euler, `theta = 1` implicit Euler.
pub fn discretize(lcs: &Lcs, dt: f64, theta: f64) -> Result<Dlcs> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::StepSize(format!("dt must be positive, got {dt}")));
    }
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::StepSize(format!(
            "theta must lie in [0, 1], got {theta}"
        )));
    }
    let implicit_bound = dt * theta * lcs.dynamics.spectral_norm();
    if implicit_bound >= 1.0 {
        return Err(Error::StepSize(format!(
            "dt * theta * |A|_2 = {implicit_bound:.6} >= 1"
        )));
    }
    let r = resolvent(lcs, dt, theta)?;
    let ra = r.mul(&lcs.dynamics);
    let resolvent_bound = dt * ra.spectral_norm();
    if resolvent_bound >= 1.0 {
        return Err(Error::StepSize(format!(
            "dt * |(I - theta dt A)^-1 A|_2 = {resolvent_bound:.6} >= 1"
        )));
    }
    let n = lcs.n_x();
    let dynamics = Matrix::identity(n).add(&ra.scale(dt));
    let rc = r.mul(&lcs.input).scale(dt);
    let output = lcs.output.mul(&dynamics);
    let feedthrough = lcs.feedthrough.add(&lcs.output.mul(&rc));
    Dlcs::new(dynamics, rc, output, feedthrough)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BranchPolicy {
    /// Lowest pattern index.
    #[default]
    Lex,
    Random(u64),
    /// All branches, breadth first, up to [`BRANCH_BUDGET`]; single-path simulation follows `Lex`.
    All,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next: Vec<f64>,
    pub lambda: Vec<f64>,
    pub pattern: u32,
    /// Number of distinct LCP solutions at this state.
    pub alternatives: usize,
}

fn pick<'a>(sols: &'a [LcpSolution], rng: Option<&mut ChaCha8Rng>) -> &'a LcpSolution {
    match rng {
        Some(rng) => &sols[rng.random_range(0..sols.len())],
        None => &sols[0],
    }
}

fn solutions_at(dlcs: &Dlcs, x: &[f64], step: usize) -> Result<Vec<LcpSolution>> {
    let sols = lcp_solve_all(&dlcs.lcp_at(x)?)?;
    if sols.is_empty() {
        return Err(Error::NoSolution { step });
    }
    Ok(sols)
}

/// One step; `Random` policies draw from `rng` (seeded from the policy when `None`).
pub fn step(
    dlcs: &Dlcs,
    x: &[f64],
    policy: BranchPolicy,
    rng: Option<&mut ChaCha8Rng>,
) -> Result<StepOutcome> {
    step_at(dlcs, x, policy, rng, 0)
}

fn step_at(
    dlcs: &Dlcs,
    x: &[f64],
    policy: BranchPolicy,
    rng: Option<&mut ChaCha8Rng>,
    index: usize,
) -> Result<StepOutcome> {
    let sols = solutions_at(dlcs, x, index)?;
    let chosen = match policy {
        BranchPolicy::Lex | BranchPolicy::All => pick(&sols, None),
        BranchPolicy::Random(seed) => match rng {
            Some(r) => pick(&sols, Some(r)),
            None => pick(&sols, Some(&mut ChaCha8Rng::seed_from_u64(seed))),
        },
    };
    Ok(StepOutcome {
        next: dlcs.advance(x, &chosen.lambda),
        lambda: chosen.lambda.clone(),
        pattern: chosen.pattern,
        alternatives: sols.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub pattern: u32,
    pub alternatives: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<Vec<f64>>,
    pub multipliers: Vec<Vec<f64>>,
    pub branch_log: Vec<BranchRecord>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.multipliers.len()
    }

    /// Worst violation of sign and complementarity conditions over all steps:
    /// `(min lambda, min slack, max |lambda^T slack|)`.
    pub fn residuals(&self, dlcs: &Dlcs) -> (f64, f64, f64) {
        let mut min_l = f64::INFINITY;
        let mut min_w = f64::INFINITY;
        let mut comp = 0.0f64;
        for (x, l) in self.states.iter().zip(&self.multipliers) {
            let dx = dlcs.output.matvec(x);
            let fl = dlcs.feedthrough.matvec(l);
            let w: Vec<f64> = dx.iter().zip(fl).map(|(a, b)| a + b).collect();
            min_l = l.iter().fold(min_l, |m, v| m.min(*v));
            min_w = w.iter().fold(min_w, |m, v| m.min(*v));
            comp = comp.max(l.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>().abs());
        }
        (min_l, min_w, comp)
    }
}

/// Follows a single branch per step according to `policy`.
pub fn simulate(dlcs: &Dlcs, x0: &[f64], steps: usize, policy: BranchPolicy) -> Result<Trajectory> {
    if x0.len() != dlcs.n_x() {
        return Err(Error::Dimension(format!(
            "initial state has {} entries, system has {}",
            x0.len(),
            dlcs.n_x()
        )));
    }
    let mut rng = match policy {
        BranchPolicy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut traj = Trajectory {
        states: vec![x0.to_vec()],
        ..Default::default()
    };
    let mut x = x0.to_vec();
    for k in 0..steps {
        let out = step_at(dlcs, &x, policy, rng.as_mut(), k)?;
        traj.multipliers.push(out.lambda);
        traj.branch_log.push(BranchRecord {
            pattern: out.pattern,
            alternatives: out.alternatives,
        });
        traj.states.push(out.next.clone());
        x = out.next;
    }
    Ok(traj)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchExploration {
    /// Trajectories in lexicographic order of their pattern sequences.
    pub trajectories: Vec<Trajectory>,
    /// Set when the budget cut off some branches.
    pub truncated: bool,
}

/// Breadth-first enumeration of every solution branch, keeping at most `budget` paths.
pub fn explore_branches(
    dlcs: &Dlcs,
    x0: &[f64],
    steps: usize,
    budget: usize,
) -> Result<BranchExploration> {
    if x0.len() != dlcs.n_x() {
        return Err(Error::Dimension(format!(
            "initial state has {} entries, system has {}",
            x0.len(),
            dlcs.n_x()
        )));
    }
    let budget = budget.max(1);
    let mut frontier = vec![Trajectory {
        states: vec![x0.to_vec()],
        ..Default::default()
    }];
    let mut truncated = false;
    for k in 0..steps {
        let mut next: Vec<Trajectory> = Vec::new();
        for traj in &frontier {
            let x = traj
                .states
                .last()
                .expect("trajectory holds its initial state");
            let sols = solutions_at(dlcs, x, k)?;
            for sol in &sols {
                if next.len() == budget {
                    truncated = true;
                    break;
                }
                let mut t = traj.clone();
                t.multipliers.push(sol.lambda.clone());
                t.branch_log.push(BranchRecord {
                    pattern: sol.pattern,
                    alternatives: sols.len(),
                });
                t.states.push(dlcs.advance(x, &sol.lambda));
                next.push(t);
            }
        }
        frontier = next;
    }
    Ok(BranchExploration {
        trajectories: frontier,
        truncated,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub state: Vec<f64>,
    pub lambda: Vec<f64>,
}

/// Equilibria by complementarity-pattern enumeration.
pub fn find_equilibrium(sys: &InhomogeneousDlcs) -> Result<Vec<Equilibrium>> {
    let d = &sys.base;
    let (nx, nc) = (d.n_x(), d.n_c());
    if nc > MAX_ENUM_DIM {
        return Err(Error::Dimension(format!(
            "enumeration supports at most {MAX_ENUM_DIM} complementarity pairs, got {nc}"
        )));
    }
    let n = nx + nc;
    let i_minus_a = Matrix::identity(nx).sub(&d.dynamics);
    let mut found: Vec<Equilibrium> = Vec::new();
    for support in 0..(1u32 << nc) {
        let mut sys_mat = Matrix::zeros(n, n);
        let mut rhs = vec![0.0; n];
        for i in 0..nx {
            for j in 0..nx {
                sys_mat[(i, j)] = i_minus_a[(i, j)];
            }
            for j in 0..nc {
                sys_mat[(i, nx + j)] = -d.input[(i, j)];
            }
            rhs[i] = sys.offset[i];
        }
        for i in 0..nc {
            let r = nx + i;
            if support & (1 << i) != 0 {
                for j in 0..nx {
                    sys_mat[(r, j)] = d.output[(i, j)];
                }
                for j in 0..nc {
                    sys_mat[(r, nx + j)] = d.feedthrough[(i, j)];
                }
                rhs[r] = -sys.bias[i];
            } else {
                sys_mat[(r, nx + i)] = 1.0;
            }
        }
        let Ok(sol) = Lu::factor(&sys_mat).and_then(|lu| lu.solve(&rhs)) else {
            continue;
        };
        let (x, lambda) = sol.split_at(nx);
        let w: Vec<f64> = d
            .output
            .matvec(x)
            .iter()
            .zip(d.feedthrough.matvec(lambda))
            .zip(&sys.bias)
            .map(|((a, b), c)| a + b + c)
            .collect();
        let scale = norm_inf(&sol).max(1.0);
        if lambda.iter().chain(&w).any(|v| *v < -FEAS_TOL * scale) {
            continue;
        }
        let dup = found.iter().any(|e| {
            e.state
                .iter()
                .chain(&e.lambda)
                .zip(x.iter().chain(lambda))
                .all(|(a, b)| (a - b).abs() <= DEDUP_TOL)
        });
        if !dup {
            found.push(Equilibrium {
                state: x.to_vec(),
                lambda: lambda.iter().map(|v| v.max(0.0)).collect(),
            });
        }
    }
    if found.is_empty() {
        return Err(Error::EmptyResult);
    }
    Ok(found)
}

/// Local homogeneous model around an equilibrium: the strictly active multipliers are
/// eliminated by a Schur complement and only the degenerate coordinates remain.
pub fn reduce_inhomogeneous(sys: &InhomogeneousDlcs, eq: &Equilibrium) -> Result<Dlcs> {
    let d = &sys.base;
    let nc = d.n_c();
    if !is_p_matrix(&d.feedthrough)? {
        return Err(Error::Precondition(
            "feedthrough matrix is not a P-matrix".into(),
        ));
    }
    let slack: Vec<f64> = d
        .output
        .matvec(&eq.state)
        .iter()
        .zip(d.feedthrough.matvec(&eq.lambda))
        .zip(&sys.bias)
        .map(|((a, b), c)| a + b + c)
        .collect();
    let tol = 1e-9 * norm_inf(&eq.state).max(1.0);
    let active: Vec<usize> = (0..nc).filter(|&i| eq.lambda[i] > tol).collect();
    let degenerate: Vec<usize> = (0..nc)
        .filter(|&i| eq.lambda[i] <= tol && slack[i] <= tol)
        .collect();
    let all_x: Vec<usize> = (0..d.n_x()).collect();

    let c_b = d.input.select_cols(&degenerate);
    let d_b = d.output.select_rows(&degenerate);
    let f_bb = d.feedthrough.submatrix(&degenerate, &degenerate);
    if active.is_empty() {
        return Dlcs::new(d.dynamics.clone(), c_b, d_b, f_bb);
    }
    let f_aa_inv = inverse(&d.feedthrough.submatrix(&active, &active))?;
    let c_a = d.input.select_cols(&active);
    let d_a = d.output.submatrix(&active, &all_x);
    let f_ab = d.feedthrough.submatrix(&active, &degenerate);
    let f_ba = d.feedthrough.submatrix(&degenerate, &active);
    let c_a_finv = c_a.mul(&f_aa_inv);
    let f_ba_finv = f_ba.mul(&f_aa_inv);
    Dlcs::new(
        d.dynamics.sub(&c_a_finv.mul(&d_a)),
        c_b.sub(&c_a_finv.mul(&f_ab)),
        d_b.sub(&f_ba_finv.mul(&d_a)),
        f_bb.sub(&f_ba_finv.mul(&f_ab)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(a: f64, c: f64, d: f64, f: f64) -> Dlcs {
        Dlcs::new(
            Matrix::from_rows(&[[a]]),
            Matrix::from_rows(&[[c]]),
            Matrix::from_rows(&[[d]]),
            Matrix::from_rows(&[[f]]),
        )
        .unwrap()
    }

    fn cam32() -> Lcs {
        Lcs::new(
            Matrix::from_rows(&[[-1.0]]),
            Matrix::from_rows(&[[0.0, 1.0]]),
            Matrix::from_rows(&[[1.0], [1.0]]),
            Matrix::from_rows(&[[1.0, 3.0], [0.0, 1.0]]),
        )
        .unwrap()
    }

    fn close(a: &Matrix, b: &Matrix) -> bool {
        a.shape() == b.shape() && a.sub(b).max_abs() < 1e-12
    }

    #[test]
    fn explicit_cam32() {
        let d = discretize(&cam32(), 0.1, 0.0).unwrap();
        assert!(close(&d.dynamics, &Matrix::from_rows(&[[0.9]])));
        assert!(close(&d.input, &Matrix::from_rows(&[[0.0, 0.1]])));
        assert!(close(&d.output, &Matrix::from_rows(&[[0.9], [0.9]])));
        assert!(close(
            &d.feedthrough,
            &Matrix::from_rows(&[[1.0, 3.1], [0.0, 1.1]])
        ));
    }

    #[test]
    fn zero_dynamics() {
        let lcs = Lcs::new(
            Matrix::zeros(2, 2),
            Matrix::from_rows(&[[1.0], [2.0]]),
            Matrix::from_rows(&[[1.0, -1.0]]),
            Matrix::from_rows(&[[2.0]]),
        )
        .unwrap();
        for theta in [0.0, 0.5, 1.0] {
            let d = discretize(&lcs, 0.1, theta).unwrap();
            assert!(close(&d.dynamics, &Matrix::identity(2)));
            assert!(close(&d.input, &lcs.input.scale(0.1)));
            assert!(close(&d.output, &lcs.output));
            assert!(close(
                &d.feedthrough,
                &Matrix::from_rows(&[[2.0 + 0.1 * (1.0 - 2.0)]])
            ));
        }
    }

    #[test]
    fn step_size_rejected() {
        assert!(matches!(
            discretize(&cam32(), 1.5, 0.0),
            Err(Error::StepSize(_))
        ));
        assert!(matches!(
            discretize(&cam32(), 1.0, 1.0),
            Err(Error::StepSize(_))
        ));
        assert!(matches!(
            discretize(&cam32(), -0.1, 0.0),
            Err(Error::StepSize(_))
        ));
    }

    #[test]
    fn scalar_step() {
        let out = step(
            &scalar(0.5, 1.0, -1.0, 1.0),
            &[2.0],
            BranchPolicy::Lex,
            None,
        )
        .unwrap();
        assert!((out.lambda[0] - 2.0).abs() < 1e-12);
        assert!((out.next[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_simulation_halves() {
        let t = simulate(&scalar(0.5, 0.0, 1.0, 1.0), &[1.0], 3, BranchPolicy::Lex).unwrap();
        let xs: Vec<f64> = t.states.iter().map(|s| s[0]).collect();
        assert_eq!(xs, vec![1.0, 0.5, 0.25, 0.125]);
        let t0 = simulate(&scalar(0.5, 0.0, 1.0, 1.0), &[1.0], 0, BranchPolicy::Lex).unwrap();
        assert_eq!(t0.states, vec![vec![1.0]]);
    }

    #[test]
    fn no_solution_reports_step() {
        // F = -1, q = 1 at x = 1 is solvable (lambda = 0 or 1); q = -1 has no solution
        let d = scalar(-1.0, 0.0, 1.0, -1.0);
        let err = simulate(&d, &[1.0], 5, BranchPolicy::Lex).unwrap_err();
        assert_eq!(err, Error::NoSolution { step: 1 });
    }

    #[test]
    fn random_policy_is_seeded() {
        let d = scalar(0.5, 1.0, 1.0, -1.0);
        let a = simulate(&d, &[1.0], 6, BranchPolicy::Random(7)).unwrap();
        let b = simulate(&d, &[1.0], 6, BranchPolicy::Random(7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn equilibria() {
        let base = scalar(0.5, 1.0, 1.0, 1.0);
        let sys = InhomogeneousDlcs::new(base, vec![1.0], vec![0.0]).unwrap();
        let eqs = find_equilibrium(&sys).unwrap();
        assert_eq!(eqs.len(), 1);
        assert!((eqs[0].state[0] - 2.0).abs() < 1e-12 && eqs[0].lambda[0] == 0.0);

        let sys =
            InhomogeneousDlcs::new(scalar(0.5, 1.0, -1.0, 1.0), vec![0.0], vec![-1.0]).unwrap();
        assert_eq!(find_equilibrium(&sys), Err(Error::EmptyResult));
    }

    #[test]
    fn reduction_without_active_set() {
        let base = Dlcs::new(
            Matrix::from_rows(&[[0.5, 0.1], [0.0, 0.3]]),
            Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]),
            Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]),
            Matrix::from_rows(&[[2.0, 1.0], [0.0, 1.0]]),
        )
        .unwrap();
        let sys = InhomogeneousDlcs::new(base.clone(), vec![0.0; 2], vec![0.0; 2]).unwrap();
        let eq = Equilibrium {
            state: vec![0.0; 2],
            lambda: vec![0.0; 2],
        };
        assert_eq!(reduce_inhomogeneous(&sys, &eq).unwrap(), base);

        let sys = InhomogeneousDlcs::new(base.clone(), vec![0.0; 2], vec![1.0; 2]).unwrap();
        let red = reduce_inhomogeneous(&sys, &eq).unwrap();
        assert_eq!(red.n_c(), 0);
        assert_eq!(red.dynamics, base.dynamics);
    }

    #[test]
    fn reduction_schur_complement() {
        let base = Dlcs::new(
            Matrix::identity(2).scale(0.5),
            Matrix::identity(2),
            Matrix::identity(2),
            Matrix::from_rows(&[[2.0, 1.0], [1.0, 3.0]]),
        )
        .unwrap();
        // at x = 0, lambda = (1, 0): w = (2 - 2, 1 - 1), so row 1 is active and row 2 degenerate
        let sys = InhomogeneousDlcs::new(base, vec![-1.0, 0.0], vec![-2.0, -1.0]).unwrap();
        let eq = Equilibrium {
            state: vec![0.0; 2],
            lambda: vec![1.0, 0.0],
        };
        let red = reduce_inhomogeneous(&sys, &eq).unwrap();
        // 3 - 1 * 1/2 * 1
        assert!((red.feedthrough[(0, 0)] - 2.5).abs() < 1e-12);
        assert!((red.dynamics[(0, 0)] - 0.0).abs() < 1e-12);
    }
}
