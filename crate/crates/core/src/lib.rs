//! Exponential (Lawson) time integration with discontinuous Galerkin space
//! discretisation for kinetic plasma models.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod convergence;
pub mod dg_core;
pub mod diagnostics;
pub mod error;
pub mod exp_ops;
pub mod lawson;
pub mod linalg;
pub mod models;
pub mod phase_space;
pub mod simulation;

pub use error::{Error, Result};
