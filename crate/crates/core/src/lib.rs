//! Flux-jump stabilized discontinuous Galerkin solver for the reaction-diffusion
//! problem `-div(K grad u) + u = f` on the unit square with homogeneous Dirichlet
//! data imposed weakly.
//!
//! The crate is organised bottom-up:
//! - [`mesh`]: structured quadrilateral meshes with the higher-index normal convention
//! - [`refelem`]: orthonormal total-degree modal bases and Gauss rules
//! - [`forms`]: local kernels of the bilinear and linear forms
//! - [`system`]: global sparse assembly, manufactured cases and linear solvers
//! - [`analysis`]: error norms, rates, the triple-norm surrogate, inf-sup and inequality probes
//! - [`study`]: the batch drivers behind the `fluxdg` command line tool

pub mod analysis;
pub mod error;
pub mod forms;
pub mod mesh;
pub mod refelem;
pub mod study;
pub mod system;

pub use error::{DgError, Result};

/// A point (or vector) in the plane.
pub type Point = [f64; 2];
