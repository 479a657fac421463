//! Two-point functions, Ward residuals and their property checks.

pub mod checks;
pub mod family;
pub mod ward;

pub use checks::*;
pub use family::{
    dual_scaling_function, eval_correlator, grad_correlator, CorrelatorFamily, CorrelatorParams, CorrelatorSpec,
    FieldPoint, Jet, Partials,
};
pub use ward::{
    apply_at, build_reduced_system, dual_ward_generators, meta_ward_generators, restrict, ward_residual,
    ward_residual_on, Field, GeneratorResidual, Grid, Region, ResidualReport, BODY_TWO_OFFSETS, GRID_MARGIN,
};
