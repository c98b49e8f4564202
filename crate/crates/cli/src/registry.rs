//! Built-in benchmark systems.

use copostab_core::numkit::Matrix;
use copostab_core::system::{Dlcs, Lcs};

use crate::document::SystemDocument;
use crate::error::{CliError, Result};

pub const EXAMPLE_NAMES: [&str; 5] = ["cam31", "cam32", "cam33", "hem2", "qp0"];

fn m<const N: usize>(rows: &[[f64; N]]) -> Matrix {
    Matrix::from_rows(rows)
}

fn lcs(name: &str, a: Matrix, c: Matrix, d: Matrix, f: Matrix) -> SystemDocument {
    SystemDocument::from_lcs(
        name,
        &Lcs::new(a, c, d, f).expect("registry dimensions are consistent"),
    )
}

fn build(name: &str) -> Option<SystemDocument> {
    let doc = match name {
        "cam31" => lcs(
            name,
            m(&[[1.0]]),
            m(&[[2.0, -2.0]]),
            m(&[[1.0], [-1.0]]),
            m(&[[1.0, 3.0], [0.0, 1.0]]),
        ),
        "cam32" => lcs(
            name,
            m(&[[-1.0]]),
            m(&[[0.0, 1.0]]),
            m(&[[1.0], [1.0]]),
            m(&[[1.0, 3.0], [0.0, 1.0]]),
        ),
        "cam33" => lcs(
            name,
            m(&[[-5.0, -4.0, 0.0], [-1.0, -2.0, 0.0], [0.0, 0.0, 1.0]]),
            m(&[[-3.0, 0.0, 0.0], [-21.0, 0.0, 0.0], [0.0, 2.0, -2.0]]),
            m(&[[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]),
            m(&[[1.0, 0.0, 0.0], [0.0, 1.0, 3.0], [0.0, 0.0, 1.0]]),
        ),
        "hem2" => lcs(
            name,
            m(&[
                [0.0, 0.0, 1.0, 0.0],
                [0.0, 0.0, 0.0, 1.0],
                [-2.0, 1.0, 0.0, 0.0],
                [1.0, -1.0, 0.0, 0.0],
            ]),
            m(&[[0.0], [0.0], [1.0], [0.0]]),
            m(&[[1.0, 0.0, 0.0, 0.0]]),
            m(&[[1.0]]),
        ),
        // the input column acts through the first multiplier only
        "qp0" => SystemDocument::from_dlcs(
            name,
            &Dlcs::new(
                m(&[[0.5, 0.25], [-0.25, 0.5]]),
                m(&[[3.0, 0.0], [5.0, 0.0]]),
                m(&[[1.0, 0.0], [0.0, 0.0]]),
                m(&[[1.0, -1.0], [1.0, 0.0]]),
            )
            .expect("registry dimensions are consistent"),
        ),
        _ => return None,
    };
    Some(doc)
}

/// All built-in systems in registry order.
pub fn examples() -> Vec<SystemDocument> {
    EXAMPLE_NAMES.iter().filter_map(|n| build(n)).collect()
}

pub fn example(name: &str) -> Result<SystemDocument> {
    build(name).ok_or_else(|| CliError::UnknownExample {
        name: name.into(),
        available: EXAMPLE_NAMES.join(", "),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_resolves() {
        assert_eq!(examples().len(), EXAMPLE_NAMES.len());
        for doc in examples() {
            doc.validate().unwrap();
        }
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(
            example("cam34"),
            Err(CliError::UnknownExample { .. })
        ));
    }
}
