//! Generator families and exact algebra checks.

pub mod generators;
pub mod verify;

pub use generators::{make_generator, meta_x_binomial, Family, GeneratorSpec, Kind, ParamValues};
pub use verify::{
    contract_cga, verify_chiral_isomorphism, verify_dynamical_symmetry, verify_n_extension,
    verify_n_extension_with, verify_solution_space_invariance, verify_structure_constants,
    verify_structure_constants_with, AlgebraReport, Contraction, Factory, GeneratorSource, PairCheck,
};
