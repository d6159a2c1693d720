//! Moduli of continuity: the explicit modulus, the operator moduli of the
//! velocity laws, and the breach-scenario certificate.

mod bounds;
mod field;
mod modulus;
mod operators;
mod params;

pub use bounds::{
    canonical_grid, convection_bound, convection_bound_for, dissipation_bound, dissipation_bound_for,
    dissipation_parts, search_parameters, validate_moc, verify_negativity, CandidateRecord, Check, MarginRecord,
    NegativityReport, SearchBudget, SearchReport, ValidationReport, WorstMargin,
};
pub use field::{
    concave_majorant, displacement_increments, exhaustive_modulus, field_moc_check, moc_margin, MocViolation,
};
pub use modulus::{gradient_from_moc, log_grid, scale_moc, Extrapolation, ModulusOfContinuity, TabulatedModulus};
pub use operators::{omega1, omega2, omega_big};
pub use params::{EstimateConstants, MocParameters};
