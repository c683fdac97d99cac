//! Spline discretization of the first-order wave equation with commuting
//! quasi-interpolant projectors.
//!
//! The crate is organized bottom-up:
//!
//! - [`splines1d`]: univariate B-spline spaces, open and periodic.
//! - [`quasi_interp`]: point-evaluation quasi-interpolants and their commuting
//!   antiderivative-based companions.
//! - [`geometry`]: parameterizations of the physical domain and pull-backs.
//! - [`derham2d`]: tensor-product velocity/pressure spaces, the divergence
//!   matrix and the multivariate projectors.
//! - [`assembly`]: mass matrices, the projection-coefficient matrix Θ and the
//!   scalar H¹ pencil.
//! - [`linalg`]: sparse storage, SPD solvers and a generalized eigensolver.
//! - [`solver`]: Crank–Nicolson integration of the projected and Galerkin schemes.
//! - [`reference`]: analytic and discrete standing-wave reference solutions.

pub mod assembly;
pub mod derham2d;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod quasi_interp;
pub mod reference;
pub mod solver;
pub mod splines1d;

pub use error::{Error, Result};
