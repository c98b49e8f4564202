//! Gaussian elimination kernels: LU with partial pivoting, symmetric pivoted
//! factorization for definiteness tests, fraction-free determinants and
//! equality-constraint reduction.

use super::matrix::Matrix;
use super::tol::{PD_TOL, PIVOT_TOL, SYM_TOL};
use crate::error::{Error, Result};

/// LU factorization `P A = L U` with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Matrix,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    pub fn factor(a: &Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!(
                "LU needs a square matrix, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        let scale = a.max_abs().max(1.0);
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let (p, pv) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold(
                    (k, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
            if pv < PIVOT_TOL * scale {
                return Err(Error::Singular {
                    column: k,
                    pivot: pv,
                });
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f != 0.0 {
                    for j in (k + 1)..n {
                        lu[(i, j)] -= f * lu[(k, j)];
                    }
                }
            }
        }
        Ok(Self { n, lu, perm, sign })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::Dimension(format!(
                "rhs has length {}, system has {}",
                b.len(),
                self.n
            )));
        }
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        Ok(x)
    }

    pub fn solve_matrix(&self, b: &Matrix) -> Result<Matrix> {
        let mut out = Matrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let col: Vec<f64> = (0..b.rows()).map(|i| b[(i, j)]).collect();
            let x = self.solve(&col)?;
            for (i, v) in x.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        Ok(out)
    }

    pub fn det(&self) -> f64 {
        (0..self.n).fold(self.sign, |acc, i| acc * self.lu[(i, i)])
    }
}

/// Solves `A x = b` by LU with partial pivoting.
pub fn solve_linear(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.rows() {
        return Err(Error::Dimension(format!(
            "rhs has length {}, matrix has {} rows",
            b.len(),
            a.rows()
        )));
    }
    Lu::factor(a)?.solve(b)
}

pub fn inverse(a: &Matrix) -> Result<Matrix> {
    Lu::factor(a)?.solve_matrix(&Matrix::identity(a.rows()))
}

pub fn check_symmetric(s: &Matrix) -> Result<()> {
    if !s.is_square() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    let asym = s.max_asymmetry();
    if asym > SYM_TOL * s.max_abs().max(1.0) {
        return Err(Error::Asymmetry(asym));
    }
    Ok(())
}

/// Pivots of the diagonally pivoted symmetric elimination `S = L D L^T`.
///
/// At each step the largest remaining diagonal entry is eliminated. Elimination
/// stops at the first pivot that is not above `PD_TOL`; the returned vector then
/// ends with that pivot.
pub fn symmetric_pivots(s: &Matrix) -> Result<Vec<f64>> {
    check_symmetric(s)?;
    let n = s.rows();
    let mut work = s.symmetrize();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut pivots = Vec::with_capacity(n);
    while !remaining.is_empty() {
        let (pos, &k) = remaining
            .iter()
            .enumerate()
            .max_by(|a, b| work[(*a.1, *a.1)].total_cmp(&work[(*b.1, *b.1)]))
            .expect("nonempty");
        let pivot = work[(k, k)];
        pivots.push(pivot);
        if pivot <= PD_TOL {
            break;
        }
        remaining.remove(pos);
        for &i in &remaining {
            let f = work[(i, k)] / pivot;
            for &j in &remaining {
                work[(i, j)] -= f * work[(k, j)];
            }
        }
    }
    Ok(pivots)
}

/// True iff every pivot of the symmetric pivoted factorization exceeds `PD_TOL`.
pub fn is_positive_definite(s: &Matrix) -> Result<bool> {
    let pivots = symmetric_pivots(s)?;
    Ok(pivots.len() == s.rows() && pivots.iter().all(|&p| p > PD_TOL))
}

/// Determinant by fraction-free (Bareiss) elimination with row pivoting.
pub fn det_bareiss(a: &Matrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::Dimension(
            "determinant of a non-square matrix".into(),
        ));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(1.0);
    }
    let mut m = a.clone();
    let mut sign = 1.0;
    let mut prev = 1.0;
    for k in 0..n - 1 {
        let p = (k..n)
            .max_by(|&i, &j| m[(i, k)].abs().total_cmp(&m[(j, k)].abs()))
            .unwrap();
        if m[(p, k)] == 0.0 {
            return Ok(0.0);
        }
        if p != k {
            for j in 0..n {
                let t = m[(k, j)];
                m[(k, j)] = m[(p, j)];
                m[(p, j)] = t;
            }
            sign = -sign;
        }
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                m[(i, j)] = (m[(i, j)] * m[(k, k)] - m[(i, k)] * m[(k, j)]) / prev;
            }
            m[(i, k)] = 0.0;
        }
        prev = m[(k, k)];
    }
    Ok(sign * m[(n - 1, n - 1)])
}

/// Affine parametrization `{v : E v = e} = {v0 + Z y}` with orthonormal `Z`.
#[derive(Debug, Clone)]
pub struct AffineHull {
    pub origin: Vec<f64>,
    pub basis: Matrix,
}

/// Reduces an equality system by row echelon elimination.
///
/// Returns `None` when the system is inconsistent. Rows that are numerically
/// dependent are dropped.
pub fn affine_hull(e: &Matrix, rhs: &[f64], n: usize) -> Option<AffineHull> {
    let m = e.rows();
    let mut aug = Matrix::zeros(m, n + 1);
    for i in 0..m {
        // Row scaling keeps the rank tolerance meaningful for mixed magnitudes.
        let scale = e
            .row(i)
            .iter()
            .fold(0.0f64, |a, v| a.max(v.abs()))
            .max(rhs[i].abs());
        let s = if scale > 0.0 { 1.0 / scale } else { 1.0 };
        for j in 0..n {
            aug[(i, j)] = e[(i, j)] * s;
        }
        aug[(i, n)] = rhs[i] * s;
    }
    let tol = 1e-10;
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..n {
        if r == m {
            break;
        }
        let p = (r..m)
            .max_by(|&i, &j| aug[(i, c)].abs().total_cmp(&aug[(j, c)].abs()))
            .unwrap();
        if aug[(p, c)].abs() <= tol {
            continue;
        }
        if p != r {
            for j in 0..=n {
                let t = aug[(r, j)];
                aug[(r, j)] = aug[(p, j)];
                aug[(p, j)] = t;
            }
        }
        let pv = aug[(r, c)];
        for j in 0..=n {
            aug[(r, j)] /= pv;
        }
        for i in 0..m {
            if i != r {
                let f = aug[(i, c)];
                if f != 0.0 {
                    for j in 0..=n {
                        aug[(i, j)] -= f * aug[(r, j)];
                    }
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    for i in r..m {
        if aug[(i, n)].abs() > 1e-9 {
            return None;
        }
    }
    let mut origin = vec![0.0; n];
    for (row, &c) in pivot_cols.iter().enumerate() {
        origin[c] = aug[(row, n)];
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivot_cols.contains(c)).collect();
    let mut raw: Vec<Vec<f64>> = Vec::with_capacity(free.len());
    for &f in &free {
        let mut z = vec![0.0; n];
        z[f] = 1.0;
        for (row, &c) in pivot_cols.iter().enumerate() {
            z[c] = -aug[(row, f)];
        }
        raw.push(z);
    }
    // Modified Gram-Schmidt.
    let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(raw.len());
    for mut z in raw {
        for q in &ortho {
            let d: f64 = z.iter().zip(q).map(|(a, b)| a * b).sum();
            for (zi, qi) in z.iter_mut().zip(q) {
                *zi -= d * qi;
            }
        }
        let nrm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nrm > 1e-12 {
            ortho.push(z.into_iter().map(|v| v / nrm).collect());
        }
    }
    let mut basis = Matrix::zeros(n, ortho.len());
    for (j, q) in ortho.iter().enumerate() {
        for i in 0..n {
            basis[(i, j)] = q[i];
        }
    }
    // Project the particular solution onto the orthogonal complement of the basis
    // so the origin is the minimum-norm point of the hull.
    for q in &ortho {
        let d: f64 = origin.iter().zip(q).map(|(a, b)| a * b).sum();
        for (oi, qi) in origin.iter_mut().zip(q) {
            *oi -= d * qi;
        }
    }
    Some(AffineHull { origin, basis })
}
