//! Finite-dimensional *-algebras with finite group actions.

pub mod algebra;
pub mod galois;
pub mod group;
pub mod inner;
pub(crate) mod json;

pub use algebra::{block_algebra, diagonal_algebra, full_matrix_algebra, matrix_unit, SpanBuilder, StarAlgebra};
pub use galois::{
    averaged_algebra, block_indicator, boring_cover, canonical_map_matrix, evaluate_solution, fixed_point_algebra, random_action,
    solve_canonical, CanonicalMapReport, CanonicalOutcome, GaloisSolution,
};
pub use group::{ActionDefects, Automorphism, FiniteGroup, GroupAction};
pub use inner::{is_inner, InnerOutcome};
