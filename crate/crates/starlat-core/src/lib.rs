//! Core library for star-lattice metamaterial analysis and design.
//!
//! Everything in here is pure computation: parametric lattice geometry,
//! a 2D Timoshenko frame solver with periodic boundary conditions,
//! homogenization of the effective Poisson's ratio and thermal expansion
//! coefficient, augmented-Lagrangian stochastic optimizers (particle swarm
//! and harmony search), and the constrained-optimization schedule that
//! traces the design envelope of achievable (nu, NCTE) pairs.
//!
//! The crate is `no_std` (with `alloc`) so it stays free of IO concerns;
//! the companion CLI crate provides file formats, plots and the command
//! line front end.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod envelope;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod homog;
pub mod linalg;
pub mod material;
pub mod mesh;
pub mod optim;
pub mod oracle;
pub mod problems;

pub use error::Error;
pub use geometry::{Bounds, RveModel, RveParams};
pub use homog::{EvalConfig, Evaluator, HomogenizedProps};
pub use mesh::Mesh;
pub use optim::{OptConfig, OptResult, OptimizationProblem};

/// Result alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
