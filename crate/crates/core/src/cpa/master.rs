use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lyapunov::{cqlf_decrease_matrix, eqlf_decrease_matrix, Mode};
use crate::numkit::{lp_solve, LpProblem, LpStatus, Matrix, Polytope};
use crate::system::Dlcs;

/// Witness vectors accumulated by the cutting-plane loop.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CutSet {
    /// Points where the candidate must be positive.
    pub positivity: Vec<Vec<f64>>,
    /// Points where the candidate must decrease.
    pub decrease: Vec<Vec<f64>>,
}

impl CutSet {
    pub fn len(&self) -> usize {
        self.positivity.len() + self.decrease.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Linear structure of the master problem: the candidate is parametrized by its upper
/// triangle, and the decrease form is linear in the candidate.
#[derive(Debug, Clone)]
pub struct MasterBasis {
    pub n: usize,
    /// `(i, j)` with `i <= j`, in row-major order.
    pub entries: Vec<(usize, usize)>,
    /// Decrease matrix of each symmetric basis element.
    pub decrease: Vec<Matrix>,
}

impl MasterBasis {
    pub fn new(dlcs: &Dlcs, mode: Mode) -> Result<Self> {
        let n = mode.candidate_dim(dlcs.n_x(), dlcs.n_c());
        let mut entries = Vec::new();
        let mut decrease = Vec::new();
        for i in 0..n {
            for j in i..n {
                let mut e = Matrix::zeros(n, n);
                e[(i, j)] = 1.0;
                e[(j, i)] = 1.0;
                decrease.push(match mode {
                    Mode::Cqlf => cqlf_decrease_matrix(dlcs, &e)?,
                    Mode::Eqlf => eqlf_decrease_matrix(dlcs, &e)?,
                });
                entries.push((i, j));
            }
        }
        Ok(Self {
            n,
            entries,
            decrease,
        })
    }

    pub fn positivity_row(&self, u: &[f64]) -> Vec<f64> {
        self.entries
            .iter()
            .map(|&(i, j)| {
                if i == j {
                    u[i] * u[i]
                } else {
                    2.0 * u[i] * u[j]
                }
            })
            .collect()
    }

    /// Coefficients of `-v^T M(P) v`.
    pub fn decrease_row(&self, v: &[f64]) -> Vec<f64> {
        self.decrease.iter().map(|m| -m.quad_form(v)).collect()
    }

    pub fn assemble(&self, coeffs: &[f64]) -> Matrix {
        let mut p = Matrix::zeros(self.n, self.n);
        for (&(i, j), &c) in self.entries.iter().zip(coeffs) {
            p[(i, j)] = c;
            p[(j, i)] = c;
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MasterSolution {
    pub mu: f64,
    pub candidate: Matrix,
}

/// Maximizes the common margin of all cuts over candidates with entries in `[-1, 1]`.
/// The margin is additionally capped at `n`, which only binds while no positivity cut exists.
pub fn master_solve(basis: &MasterBasis, cuts: &CutSet) -> MasterSolution {
    let k = basis.entries.len();
    let dim = k + 1;
    let mut poly = Polytope::new(dim);
    let push_cut = |coeffs: Vec<f64>, poly: &mut Polytope| {
        let mut row = coeffs;
        row.push(-1.0);
        poly.push_ineq(&row, 0.0);
    };
    for u in &cuts.positivity {
        push_cut(basis.positivity_row(u), &mut poly);
    }
    for v in &cuts.decrease {
        push_cut(basis.decrease_row(v), &mut poly);
    }
    for t in 0..k {
        let mut row = vec![0.0; dim];
        row[t] = 1.0;
        poly.push_ineq(&row, -1.0);
        row[t] = -1.0;
        poly.push_ineq(&row, -1.0);
    }
    let mut cap = vec![0.0; dim];
    cap[k] = -1.0;
    poly.push_ineq(&cap, -(basis.n as f64));

    let mut objective = vec![0.0; dim];
    objective[k] = 1.0;
    let res = lp_solve(&LpProblem {
        objective,
        constraints: poly,
    });
    match res.status {
        LpStatus::Optimal => MasterSolution {
            mu: res.x[k],
            candidate: basis.assemble(&res.x[..k]),
        },
        // P = 0, mu = 0 is always feasible; fall back to it on numerical failure.
        _ => MasterSolution {
            mu: 0.0,
            candidate: Matrix::zeros(basis.n, basis.n),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trivial(n: usize) -> Dlcs {
        Dlcs::new(
            Matrix::identity(n),
            Matrix::zeros(n, 1),
            Matrix::zeros(1, n),
            Matrix::identity(1),
        )
        .unwrap()
    }

    #[test]
    fn single_positivity_cut() {
        let basis = MasterBasis::new(&trivial(1), Mode::Cqlf).unwrap();
        let cuts = CutSet {
            positivity: vec![vec![1.0]],
            decrease: vec![],
        };
        let sol = master_solve(&basis, &cuts);
        assert!((sol.mu - 1.0).abs() < 1e-12);
        assert!((sol.candidate[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unit_vectors_in_plane() {
        let basis = MasterBasis::new(&trivial(2), Mode::Cqlf).unwrap();
        let cuts = CutSet {
            positivity: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            decrease: vec![],
        };
        let sol = master_solve(&basis, &cuts);
        assert!((sol.mu - 1.0).abs() < 1e-12);
        assert!((sol.candidate[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((sol.candidate[(1, 1)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn margin_capped_by_dimension() {
        let basis = MasterBasis::new(&trivial(2), Mode::Cqlf).unwrap();
        let sol = master_solve(&basis, &CutSet::default());
        assert!(sol.mu <= 2.0 + 1e-12);
    }

    #[test]
    fn rows_match_forms() {
        let d = Dlcs::new(
            Matrix::from_rows(&[[0.5, 0.2], [0.1, 0.7]]),
            Matrix::from_rows(&[[1.0], [-1.0]]),
            Matrix::from_rows(&[[1.0, 2.0]]),
            Matrix::from_rows(&[[1.5]]),
        )
        .unwrap();
        for mode in [Mode::Cqlf, Mode::Eqlf] {
            let basis = MasterBasis::new(&d, mode).unwrap();
            let coeffs: Vec<f64> = (0..basis.entries.len())
                .map(|t| ((t * 7 % 5) as f64 - 2.0) / 3.0)
                .collect();
            let p = basis.assemble(&coeffs);
            let u: Vec<f64> = (0..basis.n).map(|i| 0.3 - 0.2 * i as f64).collect();
            let pos: f64 = basis
                .positivity_row(&u)
                .iter()
                .zip(&coeffs)
                .map(|(a, b)| a * b)
                .sum();
            assert!((pos - p.quad_form(&u)).abs() < 1e-12);
            let m = match mode {
                Mode::Cqlf => cqlf_decrease_matrix(&d, &p).unwrap(),
                Mode::Eqlf => eqlf_decrease_matrix(&d, &p).unwrap(),
            };
            let v: Vec<f64> = (0..m.rows()).map(|i| 0.1 * i as f64 - 0.15).collect();
            let dec: f64 = basis
                .decrease_row(&v)
                .iter()
                .zip(&coeffs)
                .map(|(a, b)| a * b)
                .sum();
            assert!((dec + m.quad_form(&v)).abs() < 1e-12);
        }
    }
}
