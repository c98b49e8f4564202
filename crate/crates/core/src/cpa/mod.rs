//! Exact cutting-plane search for quadratic Lyapunov functions.
//!
//! The master problem is a linear program over the candidate matrix and a common
//! margin, constrained by finitely many witness vectors. Separation minimizes the
//! positivity and decrease forms over the nonconvex cones by enumerating their
//! polyhedral pieces and solving each piece exactly; any point with value below
//! the tolerance becomes a new witness.

mod master;
mod miqcp;
mod pieces;
mod separation;

pub use master::{master_solve, CutSet, MasterBasis, MasterSolution};
pub use miqcp::{
    export_separation_miqcp, BigM, MiqcpConstraint, MiqcpDocument, MiqcpObjective, MiqcpVariable,
    Sense, SeparationTarget, MIQCP_SCHEMA,
};
pub use pieces::{cone_contains, enumerate_pieces, ConeKind, ConePattern, ConePiece, PIECE_BUDGET};
pub use separation::{negated_decrease, separate, separate_decrease, separate_pos, Separation};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lcp::{assert_solvability_class, lcp_solve_all};
use crate::lyapunov::{stack, Mode};
use crate::numkit::{norm1, Matrix};
use crate::system::Dlcs;

/// Witnesses closer than this (infinity norm) to a stored cut count as duplicates.
pub const DUPLICATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpaOptions {
    pub epsilon: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Stop each separation at the first piece with a nonpositive minimum.
    pub fast_sep: bool,
}

impl Default for CpaOptions {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            max_iter: 500,
            seed: 0,
            fast_sep: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Feasible,
    Infeasible,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub master_mu: f64,
    pub positivity_margin: Option<f64>,
    pub decrease_margin: Option<f64>,
    pub added_positivity: bool,
    pub added_decrease: bool,
    /// A violated witness duplicated an existing cut and no alternative was found.
    pub degenerate_cut: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub mode: Mode,
    pub epsilon: f64,
    /// Certified margin `min(positivity, decrease)` when feasible, otherwise the last master margin.
    pub margin: f64,
    /// Optimal value of the last master problem.
    pub master_mu: f64,
    pub certificate: Option<Matrix>,
    pub iterations: usize,
    pub trace: Vec<TraceEntry>,
    pub cuts: CutSet,
    /// Set when the feedthrough matrix is only known to be R0, not P.
    pub solvability_warning: bool,
}

/// Cones on which the candidate must be positive and decreasing.
pub fn cones(mode: Mode) -> (ConeKind, ConeKind) {
    match mode {
        Mode::Cqlf => (ConeKind::State, ConeKind::Graph),
        Mode::Eqlf => (ConeKind::Graph, ConeKind::ExtendedGraph),
    }
}

/// Starting positivity cuts: `±e_i` for state-only candidates, normalized LCP graph points
/// at `2 n_x` seeded random states for extended ones.
pub fn initial_cuts(dlcs: &Dlcs, mode: Mode, seed: u64) -> Result<CutSet> {
    let nx = dlcs.n_x();
    let mut cuts = CutSet::default();
    match mode {
        Mode::Cqlf => {
            for i in 0..nx {
                for s in [1.0, -1.0] {
                    let mut e = vec![0.0; nx];
                    e[i] = s;
                    cuts.positivity.push(e);
                }
            }
        }
        Mode::Eqlf => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..2 * nx {
                let x: Vec<f64> = (0..nx).map(|_| StandardNormal.sample(&mut rng)).collect();
                let sols = lcp_solve_all(&dlcs.lcp_at(&x)?)?;
                let Some(sol) = sols.first() else {
                    continue;
                };
                let v = stack(&[&x, &sol.lambda]);
                let s = norm1(&v);
                if s > 0.0 {
                    cuts.positivity.push(v.iter().map(|c| c / s).collect());
                }
            }
        }
    }
    Ok(cuts)
}

fn is_duplicate(set: &[Vec<f64>], v: &[f64]) -> bool {
    set.iter()
        .any(|c| c.iter().zip(v).all(|(a, b)| (a - b).abs() <= DUPLICATE_TOL))
}

/// Adds the separation witness, or the best non-duplicate alternate below `epsilon`.
/// Returns false when every candidate duplicates an existing cut.
fn add_cut(set: &mut Vec<Vec<f64>>, sep: &Separation, epsilon: f64) -> bool {
    let chosen = std::iter::once(&sep.witness)
        .chain(
            sep.alternates
                .iter()
                .filter(|(v, _)| *v < epsilon)
                .map(|(_, w)| w),
        )
        .find(|w| !is_duplicate(set, w));
    match chosen {
        Some(w) => {
            set.push(w.clone());
            true
        }
        None => false,
    }
}

/// Runs the cutting-plane loop with freshly enumerated pieces.
pub fn run_cutting_plane(dlcs: &Dlcs, mode: Mode, opts: &CpaOptions) -> Result<Verdict> {
    let class = assert_solvability_class(&dlcs.feedthrough)?;
    if !class.is_r0 {
        return Err(Error::Precondition(
            "feedthrough matrix is not an R0-matrix".into(),
        ));
    }
    let (k1, k2) = cones(mode);
    let pos_pieces = enumerate_pieces(dlcs, k1)?;
    let dec_pieces = enumerate_pieces(dlcs, k2)?;
    let basis = MasterBasis::new(dlcs, mode)?;
    let mut cuts = initial_cuts(dlcs, mode, opts.seed)?;
    let mut trace = Vec::new();
    let eps = opts.epsilon;

    let finish = |status, margin, master_mu, certificate, iterations, trace, cuts| Verdict {
        status,
        mode,
        epsilon: eps,
        margin,
        master_mu,
        certificate,
        iterations,
        trace,
        cuts,
        solvability_warning: !class.q_matrix_certified,
    };

    let mut last_mu = f64::NAN;
    for iter in 1..=opts.max_iter {
        let sol = master_solve(&basis, &cuts);
        last_mu = sol.mu;
        let mut entry = TraceEntry {
            iteration: iter,
            master_mu: sol.mu,
            positivity_margin: None,
            decrease_margin: None,
            added_positivity: false,
            added_decrease: false,
            degenerate_cut: false,
        };
        if sol.mu < eps {
            trace.push(entry);
            return Ok(finish(
                Status::Infeasible,
                sol.mu,
                sol.mu,
                None,
                iter,
                trace,
                cuts,
            ));
        }
        let pos = separate_pos(&sol.candidate, &pos_pieces, opts.fast_sep, eps)?;
        let dec = separate_decrease(dlcs, mode, &sol.candidate, &dec_pieces, opts.fast_sep, eps)?;
        entry.positivity_margin = Some(pos.value);
        entry.decrease_margin = Some(dec.value);
        // a fast scan only stops early at a nonpositive value, so a margin >= eps is exact
        let certified = pos.value.min(dec.value);
        if certified >= eps {
            trace.push(entry);
            return Ok(finish(
                Status::Feasible,
                certified,
                sol.mu,
                Some(sol.candidate),
                iter,
                trace,
                cuts,
            ));
        }
        if pos.value < eps {
            entry.added_positivity = add_cut(&mut cuts.positivity, &pos, eps);
        }
        if dec.value < eps {
            entry.added_decrease = add_cut(&mut cuts.decrease, &dec, eps);
        }
        entry.degenerate_cut = !entry.added_positivity && !entry.added_decrease;
        trace.push(entry);
    }
    Ok(finish(
        Status::IterationLimit,
        last_mu,
        last_mu,
        None,
        opts.max_iter,
        trace,
        cuts,
    ))
}

/// Both separation margins of a candidate, recomputed from freshly enumerated pieces.
pub fn recheck_certificate(dlcs: &Dlcs, mode: Mode, candidate: &Matrix) -> Result<(f64, f64)> {
    let (k1, k2) = cones(mode);
    let pos = separate_pos(
        candidate,
        &enumerate_pieces(dlcs, k1)?,
        false,
        f64::NEG_INFINITY,
    )?;
    let dec = separate_decrease(
        dlcs,
        mode,
        candidate,
        &enumerate_pieces(dlcs, k2)?,
        false,
        f64::NEG_INFINITY,
    )?;
    Ok((pos.value, dec.value))
}

/// Re-solves the master problem on a stored cut set; an infeasibility verdict is
/// confirmed when the result stays below the tolerance.
pub fn recheck_refutation(dlcs: &Dlcs, mode: Mode, cuts: &CutSet) -> Result<f64> {
    let basis = MasterBasis::new(dlcs, mode)?;
    Ok(master_solve(&basis, cuts).mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_stable_system_is_certified() {
        let d = Dlcs::new(
            Matrix::from_rows(&[[0.5]]),
            Matrix::from_rows(&[[0.0]]),
            Matrix::from_rows(&[[1.0]]),
            Matrix::from_rows(&[[1.0]]),
        )
        .unwrap();
        let v = run_cutting_plane(&d, Mode::Cqlf, &CpaOptions::default()).unwrap();
        assert_eq!(v.status, Status::Feasible);
        assert!(v.margin >= 1e-6);
        let (p, q) = recheck_certificate(&d, Mode::Cqlf, v.certificate.as_ref().unwrap()).unwrap();
        assert!(p.min(q) >= 1e-6);
    }

    #[test]
    fn unstable_scalar_is_refuted() {
        let d = Dlcs::new(
            Matrix::from_rows(&[[1.5]]),
            Matrix::from_rows(&[[0.0]]),
            Matrix::from_rows(&[[1.0]]),
            Matrix::from_rows(&[[1.0]]),
        )
        .unwrap();
        let v = run_cutting_plane(&d, Mode::Cqlf, &CpaOptions::default()).unwrap();
        assert_eq!(v.status, Status::Infeasible);
        assert!(recheck_refutation(&d, Mode::Cqlf, &v.cuts).unwrap() < 1e-6);
    }

    #[test]
    fn non_r0_feedthrough_rejected() {
        let d = Dlcs::new(
            Matrix::from_rows(&[[0.5]]),
            Matrix::from_rows(&[[1.0]]),
            Matrix::from_rows(&[[1.0]]),
            Matrix::from_rows(&[[0.0]]),
        )
        .unwrap();
        assert!(matches!(
            run_cutting_plane(&d, Mode::Cqlf, &CpaOptions::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn duplicate_witness_falls_back_to_alternate() {
        let mut set = vec![vec![1.0, 0.0]];
        let sep = Separation {
            value: -1.0,
            witness: vec![1.0, 0.0],
            piece: 0,
            alternates: vec![(-0.5, vec![0.0, 1.0])],
        };
        assert!(add_cut(&mut set, &sep, 1e-6));
        assert_eq!(set[1], vec![0.0, 1.0]);
        assert!(!add_cut(&mut set, &sep, 1e-6));
    }
}
