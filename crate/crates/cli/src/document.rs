//! On-disk system descriptions.

use std::collections::BTreeMap;
use std::path::Path;

use copostab_core::numkit::Matrix;
use copostab_core::system::{Dlcs, InhomogeneousDlcs, Lcs};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const SYSTEM_SCHEMA: &str = "copostab.system/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    /// Continuous time, `x' = A x + C lambda`.
    Lcs,
    /// Discrete time, `x+ = A x + C lambda`.
    Dlcs,
    /// Discrete time with constant terms `g` (dynamics) and `h` (slack).
    InhomogeneousDlcs,
}

impl SystemKind {
    /// Matrix keys in the order dynamics, input, output, feedthrough.
    pub fn matrix_names(self) -> [&'static str; 4] {
        match self {
            SystemKind::Lcs => ["A_tilde", "C_tilde", "D_tilde", "F_tilde"],
            SystemKind::Dlcs | SystemKind::InhomogeneousDlcs => ["A", "C", "D", "F"],
        }
    }
}

/// A system with row-major matrices keyed by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemDocument {
    pub schema: String,
    pub name: String,
    pub kind: SystemKind,
    pub n_x: usize,
    pub n_c: usize,
    pub matrices: BTreeMap<String, Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<f64>>,
}

/// A parsed document.
#[derive(Debug, Clone, PartialEq)]
pub enum System {
    Continuous(Lcs),
    Discrete(Dlcs),
    Inhomogeneous(InhomogeneousDlcs),
}

fn matrices(kind: SystemKind, m: [&Matrix; 4]) -> BTreeMap<String, Vec<f64>> {
    kind.matrix_names()
        .iter()
        .zip(m)
        .map(|(name, m)| (name.to_string(), m.as_slice().to_vec()))
        .collect()
}

impl SystemDocument {
    pub fn from_lcs(name: &str, lcs: &Lcs) -> Self {
        Self {
            schema: SYSTEM_SCHEMA.into(),
            name: name.into(),
            kind: SystemKind::Lcs,
            n_x: lcs.n_x(),
            n_c: lcs.n_c(),
            matrices: matrices(
                SystemKind::Lcs,
                [&lcs.dynamics, &lcs.input, &lcs.output, &lcs.feedthrough],
            ),
            g: None,
            h: None,
        }
    }

    pub fn from_dlcs(name: &str, dlcs: &Dlcs) -> Self {
        Self {
            schema: SYSTEM_SCHEMA.into(),
            name: name.into(),
            kind: SystemKind::Dlcs,
            n_x: dlcs.n_x(),
            n_c: dlcs.n_c(),
            matrices: matrices(
                SystemKind::Dlcs,
                [&dlcs.dynamics, &dlcs.input, &dlcs.output, &dlcs.feedthrough],
            ),
            g: None,
            h: None,
        }
    }

    pub fn from_inhomogeneous(name: &str, sys: &InhomogeneousDlcs) -> Self {
        let mut doc = Self::from_dlcs(name, &sys.base);
        doc.kind = SystemKind::InhomogeneousDlcs;
        doc.g = Some(sys.offset.clone());
        doc.h = Some(sys.bias.clone());
        doc
    }

    pub fn parse(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text)?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("system documents always serialize")
    }

    /// SHA-256 of the compact serialization, hex encoded.
    pub fn content_hash(&self) -> String {
        let text = serde_json::to_string(self).expect("system documents always serialize");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    fn shapes(&self) -> [(usize, usize); 4] {
        let (nx, nc) = (self.n_x, self.n_c);
        [(nx, nx), (nx, nc), (nc, nx), (nc, nc)]
    }

    /// Checks schema, keys, array lengths and finiteness.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Input(format!("system '{}': {msg}", self.name)));
        if self.schema != SYSTEM_SCHEMA {
            return bad(format!("schema '{}' is not {SYSTEM_SCHEMA}", self.schema));
        }
        if self.n_x == 0 {
            return bad("n_x must be positive".into());
        }
        let names = self.kind.matrix_names();
        if let Some(extra) = self.matrices.keys().find(|k| !names.contains(&k.as_str())) {
            return bad(format!(
                "unexpected matrix '{extra}' for kind {:?}",
                self.kind
            ));
        }
        for (name, (r, c)) in names.iter().zip(self.shapes()) {
            let Some(data) = self.matrices.get(*name) else {
                return bad(format!("missing matrix '{name}'"));
            };
            if data.len() != r * c {
                return bad(format!(
                    "matrix '{name}' has {} entries, expected {r}x{c}",
                    data.len()
                ));
            }
            if data.iter().any(|v| !v.is_finite()) {
                return bad(format!("matrix '{name}' has a non-finite entry"));
            }
        }
        let inhomogeneous = self.kind == SystemKind::InhomogeneousDlcs;
        for (label, vec, len) in [("g", &self.g, self.n_x), ("h", &self.h, self.n_c)] {
            match vec {
                Some(_) if !inhomogeneous => {
                    return bad(format!("'{label}' is only allowed for inhomogeneous_dlcs"))
                }
                Some(v) if v.len() != len => {
                    return bad(format!("'{label}' has {} entries, expected {len}", v.len()))
                }
                Some(v) if v.iter().any(|x| !x.is_finite()) => {
                    return bad(format!("'{label}' has a non-finite entry"))
                }
                None if inhomogeneous => return bad(format!("missing vector '{label}'")),
                _ => {}
            }
        }
        Ok(())
    }

    fn matrix(&self, index: usize) -> Result<Matrix> {
        let name = self.kind.matrix_names()[index];
        let (r, c) = self.shapes()[index];
        Ok(Matrix::from_row_major(r, c, self.matrices[name].clone())?)
    }

    pub fn to_system(&self) -> Result<System> {
        self.validate()?;
        let [a, c, d, f] = [0, 1, 2, 3].map(|i| self.matrix(i));
        let (a, c, d, f) = (a?, c?, d?, f?);
        Ok(match self.kind {
            SystemKind::Lcs => System::Continuous(Lcs::new(a, c, d, f)?),
            SystemKind::Dlcs => System::Discrete(Dlcs::new(a, c, d, f)?),
            SystemKind::InhomogeneousDlcs => System::Inhomogeneous(InhomogeneousDlcs::new(
                Dlcs::new(a, c, d, f)?,
                self.g.clone().unwrap_or_default(),
                self.h.clone().unwrap_or_default(),
            )?),
        })
    }
}
