//! Grids, fields, transforms and differential operators.

pub mod field;
pub mod grid;
pub mod ops;
pub mod random;
pub mod snapshot;
pub mod transform;

pub use field::{ScalarField, SpectralField, VectorField, Vorticity};
pub use grid::{Geometry, Grid};
pub use ops::{
    derivative, divergence, gradient, laplacian, second_derivative, velocity_from_vorticity, vorticity,
    Recovery,
};
pub use transform::{dft, dft_pair, idft, idft_pair, idft_with_residue};
