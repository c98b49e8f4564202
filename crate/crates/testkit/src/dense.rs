pub type Mat = Vec<Vec<f64>>;

pub fn zeros(r: usize, c: usize) -> Mat {
    vec![vec![0.0; c]; r]
}

pub fn identity(n: usize) -> Mat {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn rows(m: &Mat) -> usize {
    m.len()
}

pub fn cols(m: &Mat) -> usize {
    m.first().map_or(0, |r| r.len())
}

pub fn matvec(m: &Mat, v: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let (n, k, p) = (rows(a), cols(a), cols(b));
    let mut out = zeros(n, p);
    for i in 0..n {
        for t in 0..k {
            for j in 0..p {
                out[i][j] += a[i][t] * b[t][j];
            }
        }
    }
    out
}

pub fn transpose(a: &Mat) -> Mat {
    let mut out = zeros(cols(a), rows(a));
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out[j][i] = *v;
        }
    }
    out
}

pub fn quad(m: &Mat, v: &[f64]) -> f64 {
    v.iter().zip(matvec(m, v)).map(|(a, b)| a * b).sum()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm1(v: &[f64]) -> f64 {
    v.iter().map(|c| c.abs()).sum()
}

/// Gaussian elimination with partial pivoting; `None` when a pivot falls below `tol`
/// relative to the largest entry.
pub fn solve(a: &Mat, b: &[f64], tol: f64) -> Option<Vec<f64>> {
    let n = rows(a);
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-300);
    let mut aug: Mat = a
        .iter()
        .zip(b)
        .map(|(r, &bi)| r.iter().copied().chain([bi]).collect())
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| aug[i][c].abs().total_cmp(&aug[j][c].abs()))?;
        if aug[p][c].abs() <= tol * scale {
            return None;
        }
        aug.swap(c, p);
        for r in c + 1..n {
            let f = aug[r][c] / aug[c][c];
            if f != 0.0 {
                for k in c..=n {
                    aug[r][k] -= f * aug[c][k];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| aug[r][k] * x[k]).sum();
        x[r] = (aug[r][n] - s) / aug[r][r];
    }
    Some(x)
}

/// Places blocks row by row; every block in a row must have the same height.
pub fn blocks(grid: &[Vec<&Mat>]) -> Mat {
    let mut out = Mat::new();
    for brow in grid {
        let h = rows(brow[0]);
        for i in 0..h {
            out.push(brow.iter().flat_map(|b| b[i].iter().copied()).collect());
        }
    }
    out
}
