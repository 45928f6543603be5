//! Partial-wave scattering, resonance, time-delay, photodetachment and
//! semiclassical barrier tools for central model potentials, in Hartree
//! atomic units.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod cli;
pub mod error;
pub mod grid;
pub mod photo;
pub mod potential;
pub mod radialsolver;
pub mod resonance;
pub mod scattering;
pub mod timedelay;
pub mod units;
pub mod wkb;

pub use error::{Error, Result};
