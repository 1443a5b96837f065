//! Harmonic analysis on Damek–Ricci spaces: group arithmetic, inverse Abel transform,
//! spectral multipliers and wave-propagator kernels.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod abel_calculus;
pub mod dr_space;
pub mod error;
pub mod fit;
pub mod htype_group;
pub mod kernel;
pub mod numdiff;
pub mod ode;
pub mod quad;
pub mod spherical;
pub mod wave_kernels;

#[cfg(test)]
mod proptests;

pub use error::{Error, Result};
pub use dr_space::{DRSpace, SPoint, SpaceDescriptor};
pub use htype_group::{homogeneous_norm, AlgebraDescriptor, Family, HTypeAlgebra, NPoint};
