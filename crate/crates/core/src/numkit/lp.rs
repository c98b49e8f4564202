//! Polytopes in constraint form and a linear-programming front end.

use microlp::{
    ComparisonOp, Error as LpError, OptimizationDirection, Problem, SolveOutcome, Variable,
};
use serde::{Deserialize, Serialize};

use super::matrix::Matrix;

/// `{v : eq_lhs v = eq_rhs, ineq_lhs v >= ineq_rhs}` over free variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    pub eq_lhs: Matrix,
    pub eq_rhs: Vec<f64>,
    pub ineq_lhs: Matrix,
    pub ineq_rhs: Vec<f64>,
}

impl Polytope {
    pub fn new(dim: usize) -> Self {
        Self {
            eq_lhs: Matrix::zeros(0, dim),
            eq_rhs: Vec::new(),
            ineq_lhs: Matrix::zeros(0, dim),
            ineq_rhs: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.eq_lhs.cols()
    }

    pub fn push_eq(&mut self, row: &[f64], rhs: f64) {
        self.eq_lhs.push_row(row);
        self.eq_rhs.push(rhs);
    }

    /// Adds `row . v >= rhs`.
    pub fn push_ineq(&mut self, row: &[f64], rhs: f64) {
        self.ineq_lhs.push_row(row);
        self.ineq_rhs.push(rhs);
    }

    /// Largest constraint violation at `v` (zero when feasible).
    pub fn violation(&self, v: &[f64]) -> f64 {
        let eq = self
            .eq_lhs
            .matvec(v)
            .iter()
            .zip(&self.eq_rhs)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let ineq = self
            .ineq_lhs
            .matvec(v)
            .iter()
            .zip(&self.ineq_rhs)
            .fold(0.0f64, |m, (a, b)| m.max(b - a));
        eq.max(ineq)
    }

    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        self.violation(v) <= tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// The solver stopped without a usable point.
    IterationLimit,
}

/// Maximize `objective . v` over `constraints`.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub constraints: Polytope,
}

#[derive(Debug, Clone)]
pub struct LpResult {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub value: f64,
}

/// Solves a linear program with the `microlp` simplex solver.
pub fn lp_solve(problem: &LpProblem) -> LpResult {
    let poly = &problem.constraints;
    let n = poly.dim();
    assert_eq!(
        problem.objective.len(),
        n,
        "objective length must match dimension"
    );
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<Variable> = problem
        .objective
        .iter()
        .map(|&c| lp.add_var(c, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    let terms = |row: &[f64]| -> Vec<(Variable, f64)> {
        vars.iter()
            .zip(row)
            .filter(|(_, c)| **c != 0.0)
            .map(|(v, c)| (*v, *c))
            .collect()
    };
    for (i, &rhs) in poly.eq_rhs.iter().enumerate() {
        lp.add_constraint(terms(poly.eq_lhs.row(i)), ComparisonOp::Eq, rhs);
    }
    for (i, &rhs) in poly.ineq_rhs.iter().enumerate() {
        lp.add_constraint(terms(poly.ineq_lhs.row(i)), ComparisonOp::Ge, rhs);
    }
    match lp.solve() {
        Ok(SolveOutcome::Solution(sol)) => {
            let x: Vec<f64> = vars.iter().map(|v| sol[*v]).collect();
            let value = x.iter().zip(&problem.objective).map(|(a, b)| a * b).sum();
            LpResult {
                status: LpStatus::Optimal,
                x,
                value,
            }
        }
        Ok(SolveOutcome::Interrupted(_)) => failed(n, LpStatus::IterationLimit, f64::NAN),
        Err(LpError::Infeasible) => failed(n, LpStatus::Infeasible, f64::NAN),
        Err(LpError::Unbounded) => failed(n, LpStatus::Unbounded, f64::INFINITY),
        Err(_) => failed(n, LpStatus::IterationLimit, f64::NAN),
    }
}

fn failed(n: usize, status: LpStatus, value: f64) -> LpResult {
    LpResult {
        status,
        x: vec![0.0; n],
        value,
    }
}

/// Phase-one feasibility: returns a feasible point if one exists.
pub fn find_feasible_point(poly: &Polytope) -> Option<Vec<f64>> {
    let res = lp_solve(&LpProblem {
        objective: vec![0.0; poly.dim()],
        constraints: poly.clone(),
    });
    match res.status {
        LpStatus::Optimal => Some(res.x),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box_1d() -> Polytope {
        let mut p = Polytope::new(1);
        p.push_ineq(&[1.0], 0.0);
        p.push_ineq(&[-1.0], -1.0);
        p
    }

    #[test]
    fn bounded_interval() {
        let r = lp_solve(&LpProblem {
            objective: vec![1.0],
            constraints: unit_box_1d(),
        });
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.x[0] - 1.0).abs() < 1e-12);
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn simplex_face_is_optimal() {
        let mut p = Polytope::new(2);
        p.push_ineq(&[1.0, 0.0], 0.0);
        p.push_ineq(&[0.0, 1.0], 0.0);
        p.push_eq(&[1.0, 1.0], 1.0);
        let r = lp_solve(&LpProblem {
            objective: vec![1.0, 1.0],
            constraints: p.clone(),
        });
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!(p.contains(&r.x, 1e-12));
    }

    #[test]
    fn unbounded_ray() {
        let mut p = Polytope::new(1);
        p.push_ineq(&[1.0], 0.0);
        let r = lp_solve(&LpProblem {
            objective: vec![1.0],
            constraints: p,
        });
        assert_eq!(r.status, LpStatus::Unbounded);
    }

    #[test]
    fn infeasible_system() {
        let mut p = Polytope::new(1);
        p.push_ineq(&[1.0], 2.0);
        p.push_ineq(&[-1.0], -1.0);
        let r = lp_solve(&LpProblem {
            objective: vec![0.0],
            constraints: p,
        });
        assert_eq!(r.status, LpStatus::Infeasible);
    }

    #[test]
    fn redundant_equalities_are_tolerated() {
        let mut p = Polytope::new(2);
        p.push_eq(&[1.0, 1.0], 1.0);
        p.push_eq(&[2.0, 2.0], 2.0);
        p.push_ineq(&[1.0, 0.0], 0.0);
        p.push_ineq(&[0.0, 1.0], 0.0);
        let r = lp_solve(&LpProblem {
            objective: vec![2.0, 1.0],
            constraints: p,
        });
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.value - 2.0).abs() < 1e-12);
    }
}
