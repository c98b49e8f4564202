//! Global minimization of a (possibly indefinite) quadratic form over a bounded
//! polytope by exhaustive KKT enumeration.
//!
//! A bounded quadratic program attains its minimum at a point that is stationary
//! on the affine hull of some face. Faces are enumerated through subsets of
//! inequality rows held at equality; for each subset the equality-constrained KKT
//! system is solved and primal-feasible solutions are kept. Subsets whose KKT
//! matrix is singular are skipped: along a null direction of the reduced Hessian
//! the objective is constant at a stationary point, so the same value reappears on
//! a smaller face. Subsets of full size give exactly the vertices.

use super::linalg::{affine_hull, Lu};
use super::lp::{find_feasible_point, Polytope};
use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Feasibility slack (after row normalization) for accepting a KKT candidate.
const CANDIDATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct QpMinimum {
    pub value: f64,
    pub argmin: Vec<f64>,
}

/// Returns the global minimum of `v^T Q v` over `poly`.
pub fn qp_global_min(q: &Matrix, poly: &Polytope) -> Result<QpMinimum> {
    let mut cands = qp_candidates(q, poly)?;
    Ok(cands.swap_remove(0))
}

/// All feasible KKT candidates, sorted by objective value (ties keep enumeration order).
pub fn qp_candidates(q: &Matrix, poly: &Polytope) -> Result<Vec<QpMinimum>> {
    let n = poly.dim();
    if q.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "objective is {}x{}, polytope lives in R^{n}",
            q.rows(),
            q.cols()
        )));
    }
    let Some(hull) = affine_hull(&poly.eq_lhs, &poly.eq_rhs, n) else {
        return Err(Error::EmptyFeasible);
    };
    let z = &hull.basis;
    let v0 = &hull.origin;
    let k = z.cols();
    let qs = q.symmetrize();

    // Reduced inequalities B y >= h with unit-norm rows.
    let gz = poly.ineq_lhs.mul(z);
    let gv0 = poly.ineq_lhs.matvec(v0);
    let mut b_rows: Vec<Vec<f64>> = Vec::new();
    let mut h: Vec<f64> = Vec::new();
    for i in 0..poly.ineq_lhs.rows() {
        let row = gz.row(i);
        let rhs = poly.ineq_rhs[i] - gv0[i];
        let nrm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nrm <= 1e-12 {
            if rhs > CANDIDATE_TOL {
                return Err(Error::EmptyFeasible);
            }
            continue;
        }
        b_rows.push(row.iter().map(|v| v / nrm).collect());
        h.push(rhs / nrm);
    }

    // f(y) = y^T H y + 2 g^T y + c
    let hmat = z.transpose().mul(&qs).mul(z);
    let g = z.transpose().matvec(&qs.matvec(v0));

    let lift = |y: &[f64]| -> Vec<f64> {
        let zy = z.matvec(y);
        v0.iter().zip(zy).map(|(a, b)| a + b).collect()
    };
    let feasible = |y: &[f64]| -> bool {
        b_rows.iter().zip(&h).all(|(row, hi)| {
            row.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() >= hi - CANDIDATE_TOL
        })
    };

    let mut out: Vec<QpMinimum> = Vec::new();
    let m = b_rows.len();
    let mut subset: Vec<usize> = Vec::with_capacity(k);
    for size in 0..=k.min(m) {
        for_each_combination(m, size, &mut subset, &mut |s| {
            let dim = k + s.len();
            let mut kkt = Matrix::zeros(dim, dim);
            let mut rhs = vec![0.0; dim];
            for i in 0..k {
                for j in 0..k {
                    kkt[(i, j)] = 2.0 * hmat[(i, j)];
                }
                rhs[i] = -2.0 * g[i];
            }
            for (a, &r) in s.iter().enumerate() {
                for j in 0..k {
                    kkt[(k + a, j)] = b_rows[r][j];
                    kkt[(j, k + a)] = b_rows[r][j];
                }
                rhs[k + a] = h[r];
            }
            let Ok(lu) = Lu::factor(&kkt) else {
                return;
            };
            let Ok(sol) = lu.solve(&rhs) else {
                return;
            };
            let y = &sol[..k];
            if !feasible(y) {
                return;
            }
            let v = lift(y);
            out.push(QpMinimum {
                value: qs.quad_form(&v),
                argmin: v,
            });
        });
    }

    if out.is_empty() {
        // Either empty, or every face was numerically degenerate; phase one decides.
        match find_feasible_point(poly) {
            None => return Err(Error::EmptyFeasible),
            Some(v) => out.push(QpMinimum {
                value: qs.quad_form(&v),
                argmin: v,
            }),
        }
    }
    out.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(out)
}

/// Every vertex of a bounded polytope (basic feasible solutions), deduplicated.
pub fn polytope_vertices(poly: &Polytope) -> Result<Vec<Vec<f64>>> {
    let n = poly.dim();
    let Some(hull) = affine_hull(&poly.eq_lhs, &poly.eq_rhs, n) else {
        return Err(Error::EmptyFeasible);
    };
    let k = hull.basis.cols();
    let gz = poly.ineq_lhs.mul(&hull.basis);
    let gv0 = poly.ineq_lhs.matvec(&hull.origin);
    let m = gz.rows();
    let mut verts: Vec<Vec<f64>> = Vec::new();
    let mut subset = Vec::new();
    for_each_combination(m, k, &mut subset, &mut |s| {
        let bs = gz.select_rows(s);
        let rhs: Vec<f64> = s.iter().map(|&r| poly.ineq_rhs[r] - gv0[r]).collect();
        let Ok(y) = Lu::factor(&bs).and_then(|lu| lu.solve(&rhs)) else {
            return;
        };
        let zy = hull.basis.matvec(&y);
        let v: Vec<f64> = hull.origin.iter().zip(zy).map(|(a, b)| a + b).collect();
        if poly.contains(&v, 1e-9)
            && !verts
                .iter()
                .any(|w| w.iter().zip(&v).all(|(a, b)| (a - b).abs() < 1e-9))
        {
            verts.push(v);
        }
    });
    Ok(verts)
}

/// Calls `f` with every `size`-subset of `0..m` in lexicographic order.
pub fn for_each_combination(
    m: usize,
    size: usize,
    buf: &mut Vec<usize>,
    f: &mut dyn FnMut(&[usize]),
) {
    buf.clear();
    if size > m {
        return;
    }
    buf.extend(0..size);
    loop {
        f(buf);
        // advance
        let mut i = size;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if buf[i] < m - size + i {
                buf[i] += 1;
                for j in (i + 1)..size {
                    buf[j] = buf[j - 1] + 1;
                }
                break;
            }
            if i == 0 {
                return;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simplex2() -> Polytope {
        let mut p = Polytope::new(2);
        p.push_ineq(&[1.0, 0.0], 0.0);
        p.push_ineq(&[0.0, 1.0], 0.0);
        p.push_eq(&[1.0, 1.0], 1.0);
        p
    }

    #[test]
    fn zero_objective() {
        let r = qp_global_min(&Matrix::zeros(2, 2), &simplex2()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn identity_on_simplex() {
        let r = qp_global_min(&Matrix::identity(2), &simplex2()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
        assert!((r.argmin[0] - 0.5).abs() < 1e-12 && (r.argmin[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn indefinite_on_simplex() {
        let q = Matrix::from_diag(&[1.0, -1.0]);
        let r = qp_global_min(&q, &simplex2()).unwrap();
        assert!((r.value + 1.0).abs() < 1e-12);
        assert!(r.argmin[0].abs() < 1e-12 && (r.argmin[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_polytope() {
        let mut p = simplex2();
        p.push_ineq(&[1.0, 1.0], 2.0);
        assert_eq!(
            qp_global_min(&Matrix::identity(2), &p),
            Err(Error::EmptyFeasible)
        );
        let mut p2 = Polytope::new(1);
        p2.push_eq(&[1.0], 1.0);
        p2.push_eq(&[1.0], 2.0);
        assert_eq!(
            qp_global_min(&Matrix::identity(1), &p2),
            Err(Error::EmptyFeasible)
        );
    }

    #[test]
    fn combinations_are_lexicographic() {
        let mut seen = Vec::new();
        let mut buf = Vec::new();
        for_each_combination(4, 2, &mut buf, &mut |s| seen.push(s.to_vec()));
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], vec![0, 1]);
        assert_eq!(seen[5], vec![2, 3]);
        let mut count = 0;
        for_each_combination(3, 0, &mut buf, &mut |_| count += 1);
        assert_eq!(count, 1);
    }

    #[test]
    fn square_vertices() {
        let mut p = Polytope::new(2);
        for (row, rhs) in [
            ([1.0, 0.0], 0.0),
            ([-1.0, 0.0], -1.0),
            ([0.0, 1.0], 0.0),
            ([0.0, -1.0], -1.0),
        ] {
            p.push_ineq(&row, rhs);
        }
        assert_eq!(polytope_vertices(&p).unwrap().len(), 4);
    }
}
