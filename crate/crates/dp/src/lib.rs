//! Finite-element solver and verification harness for the Dirichlet
//! double-phase problem with a gradient-dependent right-hand side
//!
//!   -div(|grad u|^(p-2) grad u + mu(x) |grad u|^(q-2) grad u) = f(x, u, grad u)
//!
//! together with the Musielak-Orlicz norm machinery, r-Laplacian first
//! eigenvalues, and certificate checkers for the existence and uniqueness
//! conditions on the convection term f.

pub mod cli;
pub mod config;
pub mod convection;
pub mod doublephase;
pub mod eigen;
pub mod error;
pub mod fem;
pub mod orlicz;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};
