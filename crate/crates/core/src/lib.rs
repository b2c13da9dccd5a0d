//! Spectral toolkit for bounded ancient solutions of the time-dependent Stokes
//! system: Fourier multipliers, divergence-free boundary extension, explicit
//! shear flows, a per-mode Stokes simulator and projected heat kernel
//! potentials for exterior domains.

pub mod banded;
pub mod cli;
pub mod error;
pub mod extension;
pub mod experiments;
pub mod exterior;
pub mod fit;
pub mod flows;
pub mod jet;
pub mod multipliers;
pub mod simulator;
pub mod spectral;

pub use error::{Error, Result};
