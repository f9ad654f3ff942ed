//! Generalized coherent states for rank-1 Lie algebras (su(2), su(1,1) and
//! the Weyl-Heisenberg algebra), the splitting of a system into two
//! subsystems of the same symmetry, and numerical checks that coherent
//! states are exactly the pure states that factorize on splitting and so
//! never violate the CHSH inequality.

pub mod algebra;
pub mod belltest;
pub mod cli;
pub mod coherent;
pub mod optimize;
pub mod splitting;
pub mod uniqueness;
mod error;

pub use error::{Error, Result};
