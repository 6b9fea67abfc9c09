//! Axisymmetric swirl-free Euler flow: ring kernel, Hill's vortex,
//! vortex-particle dynamics, shift diagnostics and constrained energy
//! maximization.

pub mod checks;
pub mod constants;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod hill;
pub mod io;
pub mod kernel;
pub mod quadrature;
pub mod varmax;

mod pairsum;

pub use error::{Error, Result};
pub use field::{DiagRecord, GridField, GridSpec, Particle, ParticleField, Symmetry};
pub use hill::{HillParams, PairParams};
pub use kernel::{HalfPlanePoint, Kernel, KernelConfig};
