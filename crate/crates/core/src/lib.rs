//! Design and verification of surface-electrode ion traps with an integrated
//! multilayer microwave meander.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atom;
pub mod cli;
pub mod constants;
pub mod coupling;
pub mod electrostatics;
pub mod error;
pub mod geometry;
pub mod magnetostatics;
pub mod quadrupole;
pub mod thermal;
pub mod workflow;

pub use error::{Error, Result};
