//! Calculus of concave functions on ℝ: evaluation, pointwise minima,
//! Legendre duality, one-dimensional Monge–Ampère measures and local
//! energies, with divergence decided from exponents.

mod concave;
mod dual;
mod energy;
mod formula;
mod measure;
mod piecewise;
pub mod quadrature;
pub mod roots;
mod weak;

pub use concave::{cutoff, min_concave, sup_difference, sup_distance, ConcaveFn, Piece, JOIN_TOL};
pub use dual::{dual_sup_distance, legendre_dual, DualFn};
pub use energy::{integrate_against, local_energy, mixed_local_energy, DEFAULT_TOL};
pub use formula::{Formula, Integral, PowerTerm};
pub use measure::{monge_ampere, Atom, DensityPiece, Measure1D, ATOM_FLOOR};
pub use weak::{weak_convergence_check, WeakReport};
