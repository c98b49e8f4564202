use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{find_feasible_point, Matrix, Polytope};
use crate::system::Dlcs;

/// Largest `n_x + 2 n_c` for which pieces are enumerated.
pub const PIECE_BUDGET: usize = 14;

/// Which cone a piece belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeKind {
    /// All of state space.
    State,
    /// Graph of the solution map: `(x, lambda)` with `lambda` solving the LCP at `x`.
    Graph,
    /// Graph extended by a solution of the LCP at the successor state.
    ExtendedGraph,
}

impl ConeKind {
    pub fn dim(self, n_x: usize, n_c: usize) -> usize {
        match self {
            ConeKind::State => n_x,
            ConeKind::Graph => n_x + n_c,
            ConeKind::ExtendedGraph => n_x + 2 * n_c,
        }
    }
}

/// One orthant/complementarity assignment; bit `i` of `active` means `lambda_i` may be
/// positive and row `i` of the LCP holds with equality.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConePattern {
    pub kind: ConeKind,
    /// `+1` or `-1` per state coordinate.
    pub orthant: Vec<i8>,
    pub active: u32,
    pub next_active: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConePiece {
    pub pattern: ConePattern,
    /// The piece intersected with the unit 1-norm sphere.
    pub polytope: Polytope,
}

fn unit(dim: usize, i: usize, scale: f64) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[i] = scale;
    e
}

/// Adds `lambda_i >= 0, w_i = 0` (active) or `lambda_i = 0, w_i >= 0` for each row,
/// where `w = rows * v` and `lambda` sits at `offset`.
fn push_complementarity(poly: &mut Polytope, rows: &Matrix, offset: usize, active: u32) {
    let dim = poly.dim();
    for i in 0..rows.rows() {
        let e = unit(dim, offset + i, 1.0);
        if active & (1 << i) != 0 {
            poly.push_ineq(&e, 0.0);
            poly.push_eq(rows.row(i), 0.0);
        } else {
            poly.push_eq(&e, 0.0);
            poly.push_ineq(rows.row(i), 0.0);
        }
    }
}

fn build(dlcs: &Dlcs, pattern: &ConePattern) -> Polytope {
    let (nx, nc) = (dlcs.n_x(), dlcs.n_c());
    let dim = pattern.kind.dim(nx, nc);
    let mut poly = Polytope::new(dim);
    let mut sphere = vec![1.0; dim];
    for (j, &s) in pattern.orthant.iter().enumerate() {
        poly.push_ineq(&unit(dim, j, s as f64), 0.0);
        sphere[j] = s as f64;
    }
    poly.push_eq(&sphere, 1.0);
    if pattern.kind == ConeKind::State {
        return poly;
    }
    // w = D x + F lambda
    let mut rows = Matrix::zeros(nc, dim);
    rows.set_block(0, 0, &dlcs.output);
    rows.set_block(0, nx, &dlcs.feedthrough);
    push_complementarity(&mut poly, &rows, nx, pattern.active);
    if pattern.kind == ConeKind::ExtendedGraph {
        // w+ = D A x + D C lambda + F lambda+
        let mut next = Matrix::zeros(nc, dim);
        next.set_block(0, 0, &dlcs.output.mul(&dlcs.dynamics));
        next.set_block(0, nx, &dlcs.output.mul(&dlcs.input));
        next.set_block(0, nx + nc, &dlcs.feedthrough);
        push_complementarity(&mut poly, &next, nx + nc, pattern.next_active);
    }
    poly
}

/// All nonempty pieces of the cone, in pattern order (orthant fastest, then `active`,
/// then `next_active`).
pub fn enumerate_pieces(dlcs: &Dlcs, kind: ConeKind) -> Result<Vec<ConePiece>> {
    let (nx, nc) = (dlcs.n_x(), dlcs.n_c());
    if nx + 2 * nc > PIECE_BUDGET {
        return Err(Error::Budget(format!(
            "n_x + 2 n_c = {} exceeds the piece budget {PIECE_BUDGET}",
            nx + 2 * nc
        )));
    }
    let n_active = if kind == ConeKind::State {
        1
    } else {
        1u32 << nc
    };
    let n_next = if kind == ConeKind::ExtendedGraph {
        1u32 << nc
    } else {
        1
    };
    let mut out = Vec::new();
    for next_active in 0..n_next {
        for active in 0..n_active {
            for signs in 0..(1u32 << nx) {
                let orthant = (0..nx)
                    .map(|j| if signs & (1 << j) != 0 { -1 } else { 1 })
                    .collect();
                let pattern = ConePattern {
                    kind,
                    orthant,
                    active,
                    next_active,
                };
                let polytope = build(dlcs, &pattern);
                if find_feasible_point(&polytope).is_some() {
                    out.push(ConePiece { pattern, polytope });
                }
            }
        }
    }
    Ok(out)
}

/// Membership of `v` in the cone (not necessarily on the sphere) up to `tol`.
pub fn cone_contains(dlcs: &Dlcs, kind: ConeKind, v: &[f64], tol: f64) -> bool {
    let (nx, nc) = (dlcs.n_x(), dlcs.n_c());
    if v.len() != kind.dim(nx, nc) {
        return false;
    }
    if kind == ConeKind::State {
        return true;
    }
    let scale = v.iter().fold(1.0f64, |m, c| m.max(c.abs()));
    let tol = tol * scale;
    let comp_ok = |lambda: &[f64], w: &[f64]| {
        lambda
            .iter()
            .zip(w)
            .all(|(l, s)| *l >= -tol && *s >= -tol && (l.min(*s)).abs() <= tol)
    };
    let (x, rest) = v.split_at(nx);
    let lambda = &rest[..nc];
    let w: Vec<f64> = dlcs
        .output
        .matvec(x)
        .iter()
        .zip(dlcs.feedthrough.matvec(lambda))
        .map(|(a, b)| a + b)
        .collect();
    if !comp_ok(lambda, &w) {
        return false;
    }
    if kind == ConeKind::Graph {
        return true;
    }
    let next = &rest[nc..];
    let xn = dlcs.advance(x, lambda);
    let wn: Vec<f64> = dlcs
        .output
        .matvec(&xn)
        .iter()
        .zip(dlcs.feedthrough.matvec(next))
        .map(|(a, b)| a + b)
        .collect();
    comp_ok(next, &wn)
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

    #[test]
    fn scalar_graph_pieces() {
        let d = scalar(0.5, 0.0, 1.0, 1.0);
        let pieces = enumerate_pieces(&d, ConeKind::Graph).unwrap();
        // x >= 0 with lambda = 0 and x <= 0 with x + lambda = 0 survive
        assert!(pieces.len() <= 4);
        let pos_free = pieces
            .iter()
            .find(|p| p.pattern.orthant == vec![1] && p.pattern.active == 0)
            .expect("x = 1 piece");
        assert!(pos_free.polytope.contains(&[1.0, 0.0], 1e-12));
        assert!(!pieces
            .iter()
            .any(|p| p.pattern.orthant == vec![1] && p.pattern.active == 1));
    }

    #[test]
    fn state_pieces_are_orthants() {
        let d = scalar(0.5, 0.0, 1.0, 1.0);
        let d2 = Dlcs::new(
            Matrix::identity(2),
            Matrix::zeros(2, 1),
            Matrix::zeros(1, 2),
            Matrix::identity(1),
        )
        .unwrap();
        assert_eq!(enumerate_pieces(&d, ConeKind::State).unwrap().len(), 2);
        assert_eq!(enumerate_pieces(&d2, ConeKind::State).unwrap().len(), 4);
    }

    #[test]
    fn budget() {
        let d = Dlcs::new(
            Matrix::identity(5),
            Matrix::zeros(5, 5),
            Matrix::zeros(5, 5),
            Matrix::identity(5),
        )
        .unwrap();
        assert!(matches!(
            enumerate_pieces(&d, ConeKind::Graph),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn membership() {
        let d = scalar(0.5, 1.0, -1.0, 1.0);
        // x = 1: q = -1, lambda = 1
        assert!(cone_contains(&d, ConeKind::Graph, &[1.0, 1.0], 1e-9));
        assert!(!cone_contains(&d, ConeKind::Graph, &[1.0, 0.0], 1e-9));
        // x+ = 0.5 + 1 = 1.5, q+ = -1.5, lambda+ = 1.5
        assert!(cone_contains(
            &d,
            ConeKind::ExtendedGraph,
            &[1.0, 1.0, 1.5],
            1e-9
        ));
    }
}
