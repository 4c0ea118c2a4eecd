//! Abstract divisorial spaces over ℚ in finite dimension: semilinear cones,
//! the order they induce, the b-pseudo-metric, Cauchy completions and the
//! continuous extension of intersection maps.

mod completion;
mod cone;
mod intersection;
mod linalg;
mod space;

pub use completion::{completion_distance, CompletionElement};
pub use cone::{Cell, Constraint, RationalVector, SemilinearCone};
pub use intersection::{
    check_intersection_axioms, extend_intersection, AmpCheck, AxiomReport, ExtendedValue, IntersectionMap, Violation,
};
pub use space::DivisorialSpace;
