//! Separation problems written out as mixed-integer quadratically constrained
//! programs for an external solver. The state is split as `x = xp - xm` with an
//! orthant binary per coordinate, and each complementarity pair gets a binary with
//! a big-M bound on its slack row.

use serde::{Deserialize, Serialize};

use super::separation::negated_decrease;
use crate::error::{Error, Result};
use crate::lyapunov::Mode;
use crate::numkit::Matrix;
use crate::system::Dlcs;

pub const MIQCP_SCHEMA: &str = "copostab.miqcp/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparationTarget {
    Positivity,
    Decrease,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiqcpVariable {
    pub name: String,
    pub binary: bool,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiqcpConstraint {
    pub name: String,
    /// `(variable index, coefficient)`
    pub linear: Vec<(usize, f64)>,
    /// `(i, j, coefficient)`, contributing `coefficient * v_i * v_j`
    pub quadratic: Vec<(usize, usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiqcpObjective {
    pub sense: String,
    pub linear: Vec<(usize, f64)>,
    pub quadratic: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BigM {
    pub name: String,
    pub row: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiqcpDocument {
    pub schema: String,
    pub mode: Mode,
    pub target: SeparationTarget,
    pub variables: Vec<MiqcpVariable>,
    /// Indices of the binary variables.
    pub binaries: Vec<usize>,
    pub objective: MiqcpObjective,
    pub constraints: Vec<MiqcpConstraint>,
    pub big_m: Vec<BigM>,
}

struct Builder {
    vars: Vec<MiqcpVariable>,
    cons: Vec<MiqcpConstraint>,
}

impl Builder {
    fn var(&mut self, name: String, binary: bool, lower: Option<f64>, upper: Option<f64>) -> usize {
        self.vars.push(MiqcpVariable {
            name,
            binary,
            lower,
            upper,
        });
        self.vars.len() - 1
    }

    fn row(&mut self, name: String, linear: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.cons.push(MiqcpConstraint {
            name,
            linear: linear.into_iter().filter(|(_, c)| *c != 0.0).collect(),
            quadratic: Vec::new(),
            sense,
            rhs,
        });
    }
}

fn row_max_abs(m: &Matrix, i: usize) -> f64 {
    m.row(i).iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

fn row_max(m: &Matrix, i: usize) -> f64 {
    m.row(i).iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Writes the separation problem for `candidate` as a self-contained MIQCP. The
/// objective is the separated form; `nu` carries its value through an epigraph row.
pub fn export_separation_miqcp(
    dlcs: &Dlcs,
    mode: Mode,
    target: SeparationTarget,
    candidate: &Matrix,
) -> Result<MiqcpDocument> {
    let (nx, nc) = (dlcs.n_x(), dlcs.n_c());
    let n = mode.candidate_dim(nx, nc);
    if candidate.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "{mode} candidate must be {n}x{n}, got {}x{}",
            candidate.rows(),
            candidate.cols()
        )));
    }
    let form = match target {
        SeparationTarget::Positivity => candidate.symmetrize(),
        SeparationTarget::Decrease => negated_decrease(dlcs, mode, candidate)?,
    };
    // number of multiplier blocks in the separated vector
    let blocks = form.rows().saturating_sub(nx) / nc.max(1);
    let blocks = if nc == 0 { 0 } else { blocks };

    let mut b = Builder {
        vars: Vec::new(),
        cons: Vec::new(),
    };
    let xp: Vec<usize> = (0..nx)
        .map(|j| b.var(format!("xp{}", j + 1), false, Some(0.0), None))
        .collect();
    let xm: Vec<usize> = (0..nx)
        .map(|j| b.var(format!("xm{}", j + 1), false, Some(0.0), None))
        .collect();
    let lam: Vec<usize> = if blocks >= 1 {
        (0..nc)
            .map(|i| b.var(format!("lambda{}", i + 1), false, Some(0.0), None))
            .collect()
    } else {
        Vec::new()
    };
    let lam_next: Vec<usize> = if blocks >= 2 {
        (0..nc)
            .map(|i| b.var(format!("lambda_next{}", i + 1), false, Some(0.0), None))
            .collect()
    } else {
        Vec::new()
    };
    let nu = b.var("nu".into(), false, None, None);
    let y: Vec<usize> = (0..nx)
        .map(|j| b.var(format!("y{}", j + 1), true, Some(0.0), Some(1.0)))
        .collect();
    let z: Vec<usize> = (0..lam.len())
        .map(|i| b.var(format!("z{}", i + 1), true, Some(0.0), Some(1.0)))
        .collect();
    let w: Vec<usize> = (0..lam_next.len())
        .map(|i| b.var(format!("w{}", i + 1), true, Some(0.0), Some(1.0)))
        .collect();

    // original coordinate k as a linear combination of model variables
    let coord = |k: usize| -> Vec<(usize, f64)> {
        if k < nx {
            vec![(xp[k], 1.0), (xm[k], -1.0)]
        } else if k < nx + nc {
            vec![(lam[k - nx], 1.0)]
        } else {
            vec![(lam_next[k - nx - nc], 1.0)]
        }
    };
    let mut quadratic = Vec::new();
    for r in 0..form.rows() {
        for c in 0..form.cols() {
            let q = form[(r, c)];
            if q == 0.0 {
                continue;
            }
            for &(vi, ci) in &coord(r) {
                for &(vj, cj) in &coord(c) {
                    quadratic.push((vi, vj, q * ci * cj));
                }
            }
        }
    }
    b.cons.push(MiqcpConstraint {
        name: "epigraph".into(),
        linear: vec![(nu, -1.0)],
        quadratic: quadratic.clone(),
        sense: Sense::Le,
        rhs: 0.0,
    });

    let sphere: Vec<(usize, f64)> = xp
        .iter()
        .chain(&xm)
        .chain(&lam)
        .chain(&lam_next)
        .map(|&v| (v, 1.0))
        .collect();
    b.row("unit_norm".into(), sphere, Sense::Eq, 1.0);
    for j in 0..nx {
        b.row(
            format!("xp_orthant{}", j + 1),
            vec![(xp[j], 1.0), (y[j], -1.0)],
            Sense::Le,
            0.0,
        );
        b.row(
            format!("xm_orthant{}", j + 1),
            vec![(xm[j], 1.0), (y[j], 1.0)],
            Sense::Le,
            1.0,
        );
    }

    // slack row over (x, lambda, lambda_next) in original coordinates
    let slack_terms = |coeffs: &[f64]| -> Vec<(usize, f64)> {
        let mut t = Vec::new();
        for (k, &a) in coeffs.iter().enumerate() {
            if a != 0.0 {
                t.extend(coord(k).into_iter().map(|(v, c)| (v, a * c)));
            }
        }
        t
    };
    let mut big_m = Vec::new();
    if !lam.is_empty() {
        for i in 0..nc {
            let theta = row_max_abs(&dlcs.output, i).max(row_max(&dlcs.feedthrough, i));
            let mut coeffs = dlcs.output.row(i).to_vec();
            coeffs.extend_from_slice(dlcs.feedthrough.row(i));
            b.row(
                format!("lambda_switch{}", i + 1),
                vec![(lam[i], 1.0), (z[i], -1.0)],
                Sense::Le,
                0.0,
            );
            b.row(
                format!("slack_lower{}", i + 1),
                slack_terms(&coeffs),
                Sense::Ge,
                0.0,
            );
            let mut upper = slack_terms(&coeffs);
            upper.push((z[i], theta));
            b.row(format!("slack_upper{}", i + 1), upper, Sense::Le, theta);
            big_m.push(BigM {
                name: format!("theta{}", i + 1),
                row: i + 1,
                value: theta,
            });
        }
    }
    if !lam_next.is_empty() {
        let da = dlcs.output.mul(&dlcs.dynamics);
        let dc = dlcs.output.mul(&dlcs.input);
        for i in 0..nc {
            let theta = row_max_abs(&da, i)
                .max(row_max(&dlcs.feedthrough, i))
                .max(row_max(&dc, i));
            let mut coeffs = da.row(i).to_vec();
            coeffs.extend_from_slice(dc.row(i));
            coeffs.extend_from_slice(dlcs.feedthrough.row(i));
            b.row(
                format!("next_switch{}", i + 1),
                vec![(lam_next[i], 1.0), (w[i], -1.0)],
                Sense::Le,
                0.0,
            );
            b.row(
                format!("next_slack_lower{}", i + 1),
                slack_terms(&coeffs),
                Sense::Ge,
                0.0,
            );
            let mut upper = slack_terms(&coeffs);
            upper.push((w[i], theta));
            b.row(
                format!("next_slack_upper{}", i + 1),
                upper,
                Sense::Le,
                theta,
            );
            big_m.push(BigM {
                name: format!("next_theta{}", i + 1),
                row: i + 1,
                value: theta,
            });
        }
    }

    let binaries = b
        .vars
        .iter()
        .enumerate()
        .filter(|(_, v)| v.binary)
        .map(|(i, _)| i)
        .collect();
    Ok(MiqcpDocument {
        schema: MIQCP_SCHEMA.into(),
        mode,
        target,
        variables: b.vars,
        binaries,
        objective: MiqcpObjective {
            sense: "minimize".into(),
            linear: Vec::new(),
            quadratic,
        },
        constraints: b.cons,
        big_m,
    })
}

#[cfg(test)]
mod tests {
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
    fn positivity_counts() {
        let doc = export_separation_miqcp(
            &plane(),
            Mode::Cqlf,
            SeparationTarget::Positivity,
            &Matrix::identity(2),
        )
        .unwrap();
        assert_eq!(doc.binaries.len(), 2);
        assert_eq!(doc.variables.iter().filter(|v| !v.binary).count(), 5);
        let norm = doc
            .constraints
            .iter()
            .find(|c| c.name == "unit_norm")
            .unwrap();
        assert_eq!(norm.linear.len(), 4);
        assert_eq!(norm.rhs, 1.0);
        assert!(doc.big_m.is_empty());
    }

    #[test]
    fn extended_decrease_has_next_rows() {
        let d = Dlcs::new(
            Matrix::from_rows(&[[0.5]]),
            Matrix::from_rows(&[[1.0]]),
            Matrix::from_rows(&[[-2.0]]),
            Matrix::from_rows(&[[1.0]]),
        )
        .unwrap();
        let doc = export_separation_miqcp(
            &d,
            Mode::Eqlf,
            SeparationTarget::Decrease,
            &Matrix::identity(2),
        )
        .unwrap();
        // DA = -1, DC = -2, F = 1: max(|-1|, 1, -2) = 1
        let next = doc.big_m.iter().find(|m| m.name == "next_theta1").unwrap();
        assert_eq!(next.value, 1.0);
        assert!(doc
            .constraints
            .iter()
            .any(|c| c.name == "next_slack_upper1"));
        assert_eq!(doc.binaries.len(), 3);
    }

    #[test]
    fn wrong_candidate_size() {
        assert!(export_separation_miqcp(
            &plane(),
            Mode::Eqlf,
            SeparationTarget::Decrease,
            &Matrix::identity(2)
        )
        .is_err());
    }
}
