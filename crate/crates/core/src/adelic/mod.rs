//! The adelic curve of ℚ and toric metric families on the projective line:
//! places and the product formula, heights of points, roof functions,
//! global heights and energies, and positivity.

mod family;
mod place;

pub use family::{
    extended_height, global_energy, nef_check, raw_exceptions, strongly_nef_local_check, AdelicFamily, EnergyReport,
    LocalNefCheck, NefReport, NefStatus, ToricDivisor,
};
pub use place::{
    abs_value, factor_rational, log_abs, product_formula_check, support, valuation, LogCombination, Place,
    ProductFormula,
};
