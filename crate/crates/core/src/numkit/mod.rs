//! Dense linear algebra, linear programming and a global quadratic
//! minimizer over bounded polytopes.

mod linalg;
mod lp;
mod matrix;
mod qp;
pub mod tol;

pub use linalg::{
    affine_hull, check_symmetric, det_bareiss, inverse, is_positive_definite, solve_linear,
    symmetric_pivots, AffineHull, Lu,
};
pub use lp::{find_feasible_point, lp_solve, LpProblem, LpResult, LpStatus, Polytope};
pub use matrix::{dot, norm1, norm2, norm_inf, Matrix};
pub use qp::{for_each_combination, polytope_vertices, qp_candidates, qp_global_min, QpMinimum};
