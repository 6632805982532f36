//! Nonlinear consensus and synchronization flows on weighted oriented
//! simplicial complexes.
//!
//! The crate is split into four layers:
//!
//! - [`complex`]: the complex itself, validation, adjacency and generators;
//! - [`operators`]: boundary, weight and Laplacian matrices;
//! - [`dynamics`]: the flow, its energy and a fixed-step integrator;
//! - [`analysis`]: fixed points, linear stability, homology and twist-like states.

pub mod analysis;
pub mod complex;
pub mod dynamics;
pub mod error;
pub mod operators;

pub use complex::{SimplexRef, SimplicialComplex};
pub use dynamics::{FlowConfig, IntegratorSettings, Method, Nonlinearity, SimplexFlow, Trajectory};
pub use error::{Error, Result};
