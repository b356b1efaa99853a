//! Immersed peridynamics: a fluid-structure interaction solver in which a
//! hyperelastic solid discretized by non-ordinary state-based peridynamics
//! (constitutive correspondence) is immersed in incompressible viscous flow
//! on a uniform staggered grid. Structure and fluid exchange forces and
//! velocities through a regularized delta-function kernel, so the solid needs
//! no background mesh and may tear: bonds break at a critical stretch and the
//! resulting damage field tracks crack growth driven entirely by the flow.
//!
//! Layout:
//! - [`math`]: small fixed-dimension vector/matrix helpers
//! - [`lattice`]: solid point lattices, horizons, bond graphs
//! - [`material`]: stabilized hyperelastic constitutive laws
//! - [`mechanics`]: correspondence shape tensors, nonlocal deformation
//!   gradients, bond forces, failure and damage
//! - [`fluid`]: staggered-grid incompressible Navier-Stokes solver
//! - [`coupling`]: spreading/interpolation between lattice and grid
//! - [`stepper`]: the midpoint fluid-structure time integrator
//! - [`scenario`]: benchmark configurations (compression, Cook's membrane,
//!   torsion, channel-spanning bands with and without failure)
//! - [`run`]: simulation driver, observables, series output, parameter sweeps
//! - [`verify`]: self-contained invariant checks runnable at any time

pub mod config;
pub mod coupling;
pub mod fluid;
pub mod lattice;
pub mod material;
pub mod math;
pub mod mechanics;
pub mod output;
pub mod run;
pub mod scenario;
pub mod stepper;
pub mod verify;

use std::fmt;

/// Unified error type. `Config` errors correspond to process exit code 2,
/// `Runtime` errors to exit code 3.
#[derive(Debug, Clone)]
pub enum SimError {
    /// Invalid configuration; the string names the offending field.
    Config(String),
    /// Fatal runtime condition; the string carries the integrator phase tag
    /// or solver stage where it arose.
    Runtime(String),
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::Config(msg) => write!(f, "invalid config: {msg}"),
            SimError::Runtime(msg) => write!(f, "runtime error: {msg}"),
        }
    }
}

impl std::error::Error for SimError {}

impl SimError {
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config(_) => 2,
            SimError::Runtime(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
