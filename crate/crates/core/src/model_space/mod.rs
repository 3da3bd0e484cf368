//! Scalar model spaces `K_B` for finite Blaschke products `B`.

pub mod basis;
pub mod blaschke;
pub mod clark;
pub mod crofoot;
pub mod multiplier;
pub mod poly;
pub mod rational;
pub mod singular;

pub use basis::{
    compressed_shift, conjugation, conjugation_matrix, gram_of, kernel, kernel_coefficients,
    membership_residual, mult_partial_isometry, shift_matrix, tm_basis, ModelSpaceBasis,
};
pub use blaschke::{FiniteBlaschke, FiniteBlaschkeJson};
pub use clark::{clark_measure, inner_from_measure, AtomicMeasure, AtomicMeasureJson};
pub use crofoot::crofoot;
pub use multiplier::{
    isometric_multiplier, isometry_gap, multiplier_exists, multiplier_residual, multiplier_space,
    IsometricMultiplier,
};
pub use rational::{h2_inner, h2_norm, Rational};
pub use singular::{atomic_singular_inner, carrier_measure, quadrature_isometry_check};
