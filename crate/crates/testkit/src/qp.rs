use crate::dense::{norm1, quad, solve, Mat};

/// A linear constraint `row . v (=|>=) rhs`.
#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

impl Row {
    pub fn new(coeffs: Vec<f64>, rhs: f64) -> Self {
        Self { coeffs, rhs }
    }

    fn eval(&self, v: &[f64]) -> f64 {
        self.coeffs.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() - self.rhs
    }
}

/// Exact minimum of `v^T q v` over `{eq = 0, ineq >= 0}` by solving the stationarity
/// system on every face. The region must be bounded. Returns `None` when empty.
pub fn face_min(q: &Mat, eq: &[Row], ineq: &[Row]) -> Option<(f64, Vec<f64>)> {
    let n = q.len();
    let k = ineq.len();
    assert!(k < 24, "too many inequalities for face enumeration");
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << k) {
        let tight: Vec<&Row> = eq
            .iter()
            .chain((0..k).filter(|i| mask & (1 << i) != 0).map(|i| &ineq[i]))
            .collect();
        let r = tight.len();
        if r > n {
            continue;
        }
        // [[2q, K^T], [K, 0]] [v; y] = [0; rhs]
        let dim = n + r;
        let mut kkt = vec![vec![0.0; dim]; dim];
        let mut rhs = vec![0.0; dim];
        for i in 0..n {
            for j in 0..n {
                kkt[i][j] = q[i][j] + q[j][i];
            }
        }
        for (t, row) in tight.iter().enumerate() {
            for j in 0..n {
                kkt[n + t][j] = row.coeffs[j];
                kkt[j][n + t] = row.coeffs[j];
            }
            rhs[n + t] = row.rhs;
        }
        let Some(sol) = solve(&kkt, &rhs, 1e-11) else {
            continue;
        };
        let v = &sol[..n];
        let scale = 1.0 + norm1(v);
        let feasible = eq.iter().all(|e| e.eval(v).abs() <= 1e-9 * scale)
            && ineq.iter().all(|g| g.eval(v) >= -1e-9 * scale);
        if feasible {
            let val = quad(q, v);
            if best.as_ref().is_none_or(|(b, _)| val < *b) {
                best = Some((val, v.to_vec()));
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_minimum_of_identity() {
        let q = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let eq = [Row::new(vec![1.0, 1.0], 1.0)];
        let ineq = [Row::new(vec![1.0, 0.0], 0.0), Row::new(vec![0.0, 1.0], 0.0)];
        let (v, x) = face_min(&q, &eq, &ineq).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        assert!((x[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn concave_minimum_at_vertex() {
        let q = vec![vec![-1.0, 0.0], vec![0.0, -2.0]];
        let eq = [Row::new(vec![1.0, 1.0], 1.0)];
        let ineq = [Row::new(vec![1.0, 0.0], 0.0), Row::new(vec![0.0, 1.0], 0.0)];
        assert_eq!(face_min(&q, &eq, &ineq).unwrap().0, -2.0);
    }
}
