//! Numerical laboratory for 1-D compressible Navier-Stokes equations in
//! Lagrangian coordinates with discontinuous initial specific volume.
//!
//! The crate builds solutions the way the underlying well-posedness theory
//! does: half-line heat kernels glued across coefficient jumps by an
//! interface flux history, a frozen-coefficient parametrix in the smooth
//! region, Duhamel integrals discretized by product integration on graded
//! time meshes, and a Picard iteration for the nonlinear coupling — all
//! measured in weighted space-time norms. An independent finite-difference
//! oracle cross-checks every solver path.

pub mod duhamel;
pub mod error;
pub mod fixed_point;
pub mod grid;
pub mod kernel;
pub mod model;
pub mod norms;
pub mod oracle;
pub mod parabolic;
pub mod quad;
pub mod scenario;
pub mod smoothing;
pub mod special;
pub mod transmission;

pub use error::{Error, Result};
pub use grid::{Grid, GridFunction, SpaceTimeField};
