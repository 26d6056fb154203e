//! Porous medium equation on the unit square: a P1 finite-element forward
//! solver and recovery of the polytropic exponent from one late-time snapshot.
//!
//! The pipeline is
//!
//! 1. [`forward::solve_forward`] integrates `u_t = Δu^γ` with zero Dirichlet
//!    data to a final time `T`, giving the measurement `u_T`;
//! 2. [`inversion::recover_gamma`] computes `w = (-Δ)^{-1} u_T` and minimizes
//!    `‖(α-1)(1+T) u_T^α - w‖` over `α`.
//!
//! [`profile`] solves the stationary eigenproblem `-Δf^γ = f/(γ-1)` whose
//! solutions give exact separable solutions, used as accuracy fixtures.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod fem;
pub mod forward;
pub mod inversion;
pub mod io;
pub mod mesh;
pub mod profile;

pub use error::{Error, Result};
pub use fem::{LumpedMass, Norm, ScalarField, SparseMatrix};
pub use forward::{ForwardConfig, ForwardResult, InitialData};
pub use inversion::{InversionConfig, InversionReport};
pub use mesh::Mesh;
pub use profile::ProfileResult;
