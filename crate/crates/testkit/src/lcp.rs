use crate::dense::{matvec, solve, Mat};

/// Every solution of `0 <= lambda ⊥ m lambda + q >= 0`, by trying each support set.
pub fn all_solutions(q: &[f64], m: &Mat, tol: f64) -> Vec<Vec<f64>> {
    let n = q.len();
    let mut out: Vec<Vec<f64>> = Vec::new();
    for mask in 0u32..(1 << n) {
        let s: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let mut lambda = vec![0.0; n];
        if !s.is_empty() {
            let sub: Mat = s
                .iter()
                .map(|&i| s.iter().map(|&j| m[i][j]).collect())
                .collect();
            let rhs: Vec<f64> = s.iter().map(|&i| -q[i]).collect();
            let Some(ls) = solve(&sub, &rhs, 1e-12) else {
                continue;
            };
            for (k, &i) in s.iter().enumerate() {
                lambda[i] = ls[k];
            }
        }
        let w: Vec<f64> = matvec(m, &lambda)
            .iter()
            .zip(q)
            .map(|(a, b)| a + b)
            .collect();
        let scale = 1.0 + q.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let ok = lambda
            .iter()
            .zip(&w)
            .all(|(l, wi)| *l >= -tol * scale && *wi >= -tol * scale);
        if ok
            && !out.iter().any(|o| {
                o.iter()
                    .zip(&lambda)
                    .all(|(a, b)| (a - b).abs() <= 1e-9 * scale)
            })
        {
            out.push(lambda);
        }
    }
    out
}
