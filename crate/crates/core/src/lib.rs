//! Exact and numerical tools for rescaled convolutions of singular densities,
//! symmetric-polynomial uniqueness certificates, and Birkhoff sums of a
//! logarithmic cocycle over irrational rotations.

pub mod exact_scalar;
pub mod power_series;
pub mod sympoly;
pub mod linalg;
pub mod uniqueness;
pub mod golden;
pub mod numerics;
pub mod rotation;
