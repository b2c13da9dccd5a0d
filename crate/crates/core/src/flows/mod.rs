//! Explicit ancient shear flows, time mollification and Stokes residuals.

pub mod mollify;
pub mod residual;
pub mod shear;
pub mod signal;

pub use mollify::{mollify_time, Mollifier};
pub use residual::{stokes_residual, Pressure, SpaceTimeField, StokesResidual};
pub use shear::{assemble_shear, dirichlet_heat_shear, dirichlet_unit, ShearSolution};
pub use signal::TimeSignal;
