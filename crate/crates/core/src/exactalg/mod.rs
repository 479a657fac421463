//! Exact arithmetic: Gaussian-rational scalars and Laurent-in-`mu`
//! multivariate polynomials.

mod poly;
mod ring;
mod scalar;

pub use poly::{Assignment, Exponents, Poly};
pub(crate) use poly::join_signed;
pub use ring::{Ring, Var, VarSymbol};
pub use scalar::GaussianRational;
