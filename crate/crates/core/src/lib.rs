//! Simulation and verification toolkit for frustrated synchronization models:
//! the Kuramoto-Sakaguchi phase model, the Lohe sphere model and the Lohe
//! matrix model.

// `!(x <= tol)` rejects NaN; index loops mirror the component formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod integrate;
pub mod invariants;
pub mod linalg;
pub mod reduce_kuramoto;
pub mod reduce_sphere;
pub mod sample;
pub mod state;

pub use error::{Error, Result};
