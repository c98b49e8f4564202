//! Linear complementarity problems `0 <= lambda ⊥ M lambda + q >= 0`, solved by
//! support enumeration, together with the matrix-class tests the stability
//! theory relies on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::tol::{COMP_TOL, DEDUP_TOL, FEAS_TOL, MAX_ENUM_DIM, PD_TOL};
use crate::numkit::{
    det_bareiss, lp_solve, norm_inf, solve_linear, LpProblem, LpStatus, Matrix, Polytope,
};

#[derive(Debug, Clone, PartialEq)]
pub struct LcpInstance {
    pub q: Vec<f64>,
    pub m: Matrix,
}

impl LcpInstance {
    pub fn new(q: Vec<f64>, m: Matrix) -> Result<Self> {
        if !m.is_square() || m.rows() != q.len() {
            return Err(Error::Dimension(format!(
                "LCP needs square M matching q: M is {}x{}, q has {}",
                m.rows(),
                m.cols(),
                q.len()
            )));
        }
        Ok(Self { q, m })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn slack(&self, lambda: &[f64]) -> Vec<f64> {
        self.m
            .matvec(lambda)
            .into_iter()
            .zip(&self.q)
            .map(|(a, b)| a + b)
            .collect()
    }
}

/// Index sets of a complementary point (0-based).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexPartition {
    /// `lambda_i > 0 = w_i`
    pub alpha: Vec<usize>,
    /// `lambda_i = 0 = w_i`
    pub beta: Vec<usize>,
    /// `lambda_i = 0 < w_i`
    pub gamma: Vec<usize>,
}

impl IndexPartition {
    pub fn is_strict(&self) -> bool {
        self.beta.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LcpSolution {
    pub lambda: Vec<f64>,
    pub slack: Vec<f64>,
    pub partition: IndexPartition,
    /// Support pattern (bit `i` set means `w_i = 0` was imposed) that produced this point.
    pub pattern: u32,
}

impl LcpSolution {
    pub fn complementarity_residual(&self) -> f64 {
        self.lambda
            .iter()
            .zip(&self.slack)
            .fold(0.0f64, |m, (l, w)| m.max((l * w).abs()))
    }
}

pub fn index_partition(lambda: &[f64], w: &[f64], tol: f64) -> Result<IndexPartition> {
    if lambda.len() != w.len() {
        return Err(Error::Dimension(format!(
            "lambda has {} entries, w has {}",
            lambda.len(),
            w.len()
        )));
    }
    let mut part = IndexPartition::default();
    for (i, (&l, &s)) in lambda.iter().zip(w).enumerate() {
        let l_zero = l.abs() <= tol;
        let w_zero = s.abs() <= tol;
        if l > tol && w_zero {
            part.alpha.push(i);
        } else if l_zero && w_zero {
            part.beta.push(i);
        } else if l_zero && s > tol {
            part.gamma.push(i);
        } else {
            return Err(Error::Partition {
                index: i,
                lambda: l,
                slack: s,
            });
        }
    }
    Ok(part)
}

fn check_enum_dim(n: usize) -> Result<()> {
    if n > MAX_ENUM_DIM {
        return Err(Error::Dimension(format!(
            "enumeration supports at most {MAX_ENUM_DIM} complementarity pairs, got {n}"
        )));
    }
    Ok(())
}

/// Representative of the pattern polytope `{lambda_{S^c} = 0, w_S = 0, lambda_S >= 0, w_{S^c} >= 0}`
/// that maximizes the smallest strict slack (capped at 1).
fn pattern_point(q: &[f64], m: &Matrix, support: u32) -> Option<Vec<f64>> {
    let n = q.len();
    let in_s = |i: usize| support & (1 << i) != 0;
    // variables: lambda (n), t
    let mut poly = Polytope::new(n + 1);
    for i in 0..n {
        let mut w_row = vec![0.0; n + 1];
        w_row[..n].copy_from_slice(m.row(i));
        let mut l_row = vec![0.0; n + 1];
        l_row[i] = 1.0;
        if in_s(i) {
            poly.push_eq(&w_row, -q[i]);
            l_row[n] = -1.0;
            poly.push_ineq(&l_row, 0.0);
        } else {
            poly.push_eq(&l_row, 0.0);
            w_row[n] = -1.0;
            poly.push_ineq(&w_row, -q[i]);
        }
    }
    let mut t = vec![0.0; n + 1];
    t[n] = 1.0;
    poly.push_ineq(&t, 0.0);
    t[n] = -1.0;
    poly.push_ineq(&t, -1.0);
    let mut obj = vec![0.0; n + 1];
    obj[n] = 1.0;
    let res = lp_solve(&LpProblem {
        objective: obj,
        constraints: poly.clone(),
    });
    if res.status != LpStatus::Optimal {
        return None;
    }
    let mut lambda = res.x[..n].to_vec();
    if res.value <= FEAS_TOL {
        // No strictly complementary point: move as far along the support as the cap allows,
        // so rays of the solution set are not collapsed onto the origin.
        let mass: Vec<f64> = (0..=n)
            .map(|i| if i < n && in_s(i) { 1.0 } else { 0.0 })
            .collect();
        let current: f64 = lambda
            .iter()
            .enumerate()
            .filter(|(i, _)| in_s(*i))
            .map(|(_, v)| v)
            .sum();
        let neg: Vec<f64> = mass.iter().map(|v| -v).collect();
        poly.push_ineq(&neg, -(current + 1.0));
        let spread = lp_solve(&LpProblem {
            objective: mass,
            constraints: poly,
        });
        if spread.status == LpStatus::Optimal {
            lambda = spread.x[..n].to_vec();
        }
    }

    // Polish onto the exact pattern solution when the principal block is nonsingular.
    let s_idx: Vec<usize> = (0..n).filter(|&i| in_s(i)).collect();
    if !s_idx.is_empty() {
        let mss = m.submatrix(&s_idx, &s_idx);
        let rhs: Vec<f64> = s_idx.iter().map(|&i| -q[i]).collect();
        if let Ok(ls) = solve_linear(&mss, &rhs) {
            let mut cand = vec![0.0; n];
            for (k, &i) in s_idx.iter().enumerate() {
                cand[i] = ls[k];
            }
            let close = cand.iter().zip(&lambda).all(|(a, b)| (a - b).abs() <= 1e-6);
            if close {
                lambda = cand;
            }
        }
    }
    for (i, l) in lambda.iter_mut().enumerate() {
        if !in_s(i) || l.abs() < 1e-14 {
            *l = l.max(0.0) * if in_s(i) { 1.0 } else { 0.0 };
        }
    }
    Some(lambda)
}

/// Every complementarity pattern with a nonempty solution set contributes one
/// representative; duplicates within `DEDUP_TOL` are merged. Results are ordered
/// by pattern index.
pub fn lcp_solve_all(inst: &LcpInstance) -> Result<Vec<LcpSolution>> {
    let n = inst.dim();
    check_enum_dim(n)?;
    // The solution set is positively homogeneous in q; solve on the unit scale.
    let scale = norm_inf(&inst.q);
    let s = if scale > 0.0 { scale } else { 1.0 };
    let qn: Vec<f64> = inst.q.iter().map(|v| v / s).collect();
    let mut out: Vec<LcpSolution> = Vec::new();
    for support in 0..(1u32 << n) {
        let Some(ln) = pattern_point(&qn, &inst.m, support) else {
            continue;
        };
        let lambda: Vec<f64> = ln.iter().map(|v| v * s).collect();
        let dup = out.iter().any(|sol| {
            sol.lambda
                .iter()
                .zip(&lambda)
                .all(|(a, b)| (a - b).abs() <= DEDUP_TOL * s)
        });
        if dup {
            continue;
        }
        let slack = inst.slack(&lambda);
        let tol = 1e-9 * s.max(1e-300);
        let partition = match index_partition(&lambda, &slack, tol) {
            Ok(p) => p,
            // LP noise just above the tolerance: classify by the imposed pattern.
            Err(_) => pattern_partition(&lambda, &slack, support, tol),
        };
        out.push(LcpSolution {
            lambda,
            slack,
            partition,
            pattern: support,
        });
    }
    Ok(out)
}

fn pattern_partition(lambda: &[f64], slack: &[f64], support: u32, tol: f64) -> IndexPartition {
    let mut part = IndexPartition::default();
    for i in 0..lambda.len() {
        let in_s = support & (1 << i) != 0;
        match (in_s, lambda[i] > tol, slack[i] > tol) {
            (true, true, _) => part.alpha.push(i),
            (false, _, true) => part.gamma.push(i),
            _ => part.beta.push(i),
        }
    }
    part
}

/// Principal minors `det(M_JJ) > PD_TOL` for every nonempty `J`.
pub fn is_p_matrix(m: &Matrix) -> Result<bool> {
    if !m.is_square() {
        return Err(Error::Dimension(
            "P-matrix test needs a square matrix".into(),
        ));
    }
    let n = m.rows();
    check_enum_dim(n)?;
    for mask in 1u32..(1u32 << n) {
        let idx: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        if det_bareiss(&m.submatrix(&idx, &idx))? <= PD_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `SOL(0, M) = {0}`, decided by one bounded LP per nonempty support.
pub fn is_r0_matrix(m: &Matrix) -> Result<bool> {
    if !m.is_square() {
        return Err(Error::Dimension("R0 test needs a square matrix".into()));
    }
    let n = m.rows();
    check_enum_dim(n)?;
    for mask in 1u32..(1u32 << n) {
        let in_s = |i: usize| mask & (1 << i) != 0;
        let mut poly = Polytope::new(n);
        let mut obj = vec![0.0; n];
        let mut sum = vec![0.0; n];
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            if in_s(i) {
                poly.push_ineq(&e, 0.0);
                poly.push_eq(m.row(i), 0.0);
                obj[i] = 1.0;
                sum[i] = -1.0;
            } else {
                poly.push_eq(&e, 0.0);
                poly.push_ineq(m.row(i), 0.0);
            }
        }
        poly.push_ineq(&sum, -1.0);
        let res = lp_solve(&LpProblem {
            objective: obj,
            constraints: poly,
        });
        if res.status == LpStatus::Optimal && res.value > FEAS_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolvabilityClass {
    pub is_p: bool,
    pub is_r0: bool,
    /// Only the P-matrix sufficient condition is decidable here.
    pub q_matrix_certified: bool,
}

pub fn assert_solvability_class(m: &Matrix) -> Result<SolvabilityClass> {
    let is_p = is_p_matrix(m)?;
    let is_r0 = is_p || is_r0_matrix(m)?;
    Ok(SolvabilityClass {
        is_p,
        is_r0,
        q_matrix_certified: is_p,
    })
}

/// Checks the sign and complementarity conditions of a candidate solution.
pub fn is_complementary(lambda: &[f64], w: &[f64], tol: f64) -> bool {
    lambda.iter().all(|&l| l >= -FEAS_TOL)
        && w.iter().all(|&s| s >= -FEAS_TOL)
        && lambda.iter().zip(w).all(|(l, s)| (l * s).abs() <= tol)
}

/// Default complementarity residual bound for solutions returned here.
pub const SOLUTION_COMP_TOL: f64 = COMP_TOL;
