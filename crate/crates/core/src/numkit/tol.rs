//! Numerical tolerances shared by every kernel. All sit at least two orders of
//! magnitude below the default separation tolerance of `1e-6`.

/// Residual bound for linear solves, relative to `1 + |b|_inf`.
pub const LIN_TOL: f64 = 1e-10;
/// Smallest admissible pivot in LU, relative to the largest matrix entry.
pub const PIVOT_TOL: f64 = 1e-12;
/// Pivots of the symmetric factorization must exceed this for definiteness.
pub const PD_TOL: f64 = 1e-10;
/// Primal feasibility and reduced-cost tolerance of the LP solver.
pub const FEAS_TOL: f64 = 1e-9;
/// Allowed asymmetry of matrices treated as symmetric.
pub const SYM_TOL: f64 = 1e-9;
/// Complementarity residual bound `|lambda_i w_i|`.
pub const COMP_TOL: f64 = 1e-8;
/// Infinity-norm distance under which two LCP solutions are merged.
pub const DEDUP_TOL: f64 = 1e-8;
/// Largest LCP dimension handled by support enumeration.
pub const MAX_ENUM_DIM: usize = 12;
