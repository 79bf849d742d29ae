//! Witness polynomials and their measurable decompositions.

pub mod builders;
pub mod decompose;
pub mod lower;
pub mod poly;
pub mod quadrature;

pub use lower::{lower_normal_form, lower_to_matrix, poly_expectation, poly_expectation_after_loss, real_expectation};
pub use poly::{rewrite_antinormal, AntiMono, AntiNormalForm, Factor, Mono, NormalForm, OperatorPolynomial, Symbol, Term};
pub use quadrature::{preferred_angles, quadrature_form, rewrite_quadrature_form, rewrite_quadrature_form_with, QuadSlot, QuadratureForm};
pub use builders::{
    build_code_witness, build_gkp_plus_witness, build_iqp_witness, build_resource_witness, cat_quadrature_angles,
    mode_nullifier, squeezed_nullifier_constant, transformed_momentum, witness_value, CodeFamily, Witness, WitnessSpec,
};
pub use decompose::{
    decompose_for_measurement, DecompositionEntry, Measurable, MeasurementSetting, Strategy, WitnessDecomposition,
};
