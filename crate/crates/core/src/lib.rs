//! Exact and numerical verification of meta-conformal symmetry generators,
//! their Ward identities, and the resulting two-point functions.

pub mod correlators;
pub mod diffop;
pub mod error;
pub mod exactalg;
pub mod hardy;
pub mod opexpr;
pub mod reps;

pub use diffop::{BodyIndex, DiffOp};
pub use error::{Error, Result};
pub use exactalg::{Assignment, GaussianRational, Poly, Ring, Var};
pub use opexpr::{parse_op_expr, parse_poly};
