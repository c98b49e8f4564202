use rayon::prelude::*;

use super::pieces::ConePiece;
use crate::error::{Error, Result};
use crate::lyapunov::{cqlf_decrease_matrix, eqlf_decrease_matrix, Mode};
use crate::numkit::{norm1, qp_candidates, Matrix, QpMinimum};
use crate::system::Dlcs;

/// Maximum number of runner-up points kept for the duplicate-cut guard.
const MAX_ALTERNATES: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct Separation {
    /// Global minimum of the form over the union of pieces.
    pub value: f64,
    /// A minimizer on the unit 1-norm sphere.
    pub witness: Vec<f64>,
    /// Index of the piece holding the witness.
    pub piece: usize,
    /// Other stationary points with value below the threshold, best first.
    pub alternates: Vec<(f64, Vec<f64>)>,
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let s = norm1(v);
    if s > 0.0 {
        v.iter().map(|c| c / s).collect()
    } else {
        v.to_vec()
    }
}

/// Exact minimum of `v^T form v` over the pieces. With `fast` set, pieces are scanned in
/// order and the scan stops at the first piece whose minimum is `<= 0`. Candidates below
/// `threshold` other than the minimizer are returned as alternates.
pub fn separate(
    form: &Matrix,
    pieces: &[ConePiece],
    fast: bool,
    threshold: f64,
) -> Result<Separation> {
    let solve = |p: &ConePiece| match qp_candidates(form, &p.polytope) {
        Ok(c) => Ok(c),
        Err(Error::EmptyFeasible) => Ok(Vec::new()),
        Err(e) => Err(e),
    };
    let per_piece: Vec<Vec<QpMinimum>> = if fast {
        let mut out = Vec::with_capacity(pieces.len());
        for p in pieces {
            let c = solve(p)?;
            let stop = c.first().is_some_and(|m| m.value <= 0.0);
            out.push(c);
            if stop {
                break;
            }
        }
        out
    } else {
        pieces.par_iter().map(solve).collect::<Result<_>>()?
    };

    let mut best: Option<(f64, usize)> = None;
    for (idx, cands) in per_piece.iter().enumerate() {
        if let Some(first) = cands.first() {
            if best.is_none_or(|(v, _)| first.value < v) {
                best = Some((first.value, idx));
            }
        }
    }
    let Some((value, piece)) = best else {
        return Err(Error::EmptyFeasible);
    };
    let witness = normalized(&per_piece[piece][0].argmin);

    let mut alternates: Vec<(f64, usize, Vec<f64>)> = per_piece
        .iter()
        .enumerate()
        .flat_map(|(idx, cands)| {
            cands
                .iter()
                .enumerate()
                .filter(move |(k, c)| c.value < threshold && !(idx == piece && *k == 0))
                .map(move |(_, c)| (c.value, idx, normalized(&c.argmin)))
        })
        .collect();
    alternates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    alternates.truncate(MAX_ALTERNATES);
    Ok(Separation {
        value,
        witness,
        piece,
        alternates: alternates.into_iter().map(|(v, _, w)| (v, w)).collect(),
    })
}

/// Minimum of `u^T P u` over the positivity cone.
pub fn separate_pos(
    candidate: &Matrix,
    pieces: &[ConePiece],
    fast: bool,
    threshold: f64,
) -> Result<Separation> {
    separate(&candidate.symmetrize(), pieces, fast, threshold)
}

/// The form whose minimum over the decrease cone is the decrease margin.
pub fn negated_decrease(dlcs: &Dlcs, mode: Mode, candidate: &Matrix) -> Result<Matrix> {
    let m = match mode {
        Mode::Cqlf => cqlf_decrease_matrix(dlcs, candidate)?,
        Mode::Eqlf => eqlf_decrease_matrix(dlcs, candidate)?,
    };
    Ok(m.scale(-1.0))
}

/// Minimum of `-v^T M(P) v` over the decrease cone.
pub fn separate_decrease(
    dlcs: &Dlcs,
    mode: Mode,
    candidate: &Matrix,
    pieces: &[ConePiece],
    fast: bool,
    threshold: f64,
) -> Result<Separation> {
    separate(
        &negated_decrease(dlcs, mode, candidate)?,
        pieces,
        fast,
        threshold,
    )
}

#[cfg(test)]
mod tests {
    use super::super::pieces::{enumerate_pieces, ConeKind};
    use super::*;

    fn plane() -> Dlcs {
        Dlcs::new(
            Matrix::identity(2),
            Matrix::zeros(2, 1),
            Matrix::zeros(1, 2),
            Matrix::identity(1),
        )
        .unwrap()
    }

    #[test]
    fn identity_on_sphere() {
        let pieces = enumerate_pieces(&plane(), ConeKind::State).unwrap();
        let s = separate_pos(&Matrix::identity(2), &pieces, false, 0.0).unwrap();
        assert!((s.value - 0.5).abs() < 1e-12);
        assert!(s.witness.iter().all(|c| (c.abs() - 0.5).abs() < 1e-12));
    }

    #[test]
    fn indefinite_candidate() {
        let pieces = enumerate_pieces(&plane(), ConeKind::State).unwrap();
        let s = separate_pos(&Matrix::from_diag(&[1.0, -1.0]), &pieces, false, 0.0).unwrap();
        assert!((s.value + 1.0).abs() < 1e-12);
        assert!(s.witness[0].abs() < 1e-12 && (s.witness[1].abs() - 1.0).abs() < 1e-12);
        let z = separate_pos(&Matrix::zeros(2, 2), &pieces, false, 0.0).unwrap();
        assert_eq!(z.value, 0.0);
    }

    #[test]
    fn scalar_decrease() {
        let d = Dlcs::new(
            Matrix::from_rows(&[[0.5]]),
            Matrix::from_rows(&[[0.0]]),
            Matrix::from_rows(&[[1.0]]),
            Matrix::from_rows(&[[1.0]]),
        )
        .unwrap();
        let pieces = enumerate_pieces(&d, ConeKind::Graph).unwrap();
        let s =
            separate_decrease(&d, Mode::Cqlf, &Matrix::identity(1), &pieces, false, 0.0).unwrap();
        // x = 1 gives 0.75; x = -1 forces lambda = 1, so (-1/2, 1/2) gives 0.75 / 4
        assert!((s.value - 0.1875).abs() < 1e-12, "{}", s.value);
        assert!((s.witness[0] + 0.5).abs() < 1e-12 && (s.witness[1] - 0.5).abs() < 1e-12);
        let s =
            separate_decrease(&d, Mode::Cqlf, &Matrix::zeros(1, 1), &pieces, false, 0.0).unwrap();
        assert_eq!(s.value, 0.0);
    }

    #[test]
    fn fast_mode_stops_at_nonpositive() {
        let pieces = enumerate_pieces(&plane(), ConeKind::State).unwrap();
        let s = separate_pos(&Matrix::from_diag(&[-1.0, -2.0]), &pieces, true, 0.0).unwrap();
        assert!(s.value <= 0.0);
        assert_eq!(s.piece, 0);
    }
}
