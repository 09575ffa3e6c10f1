//! Optimal adversarial 0-1 loss for finite-support multi-class
//! distributions under an ℓ2-bounded attacker, with cheaper lower and
//! upper bounds.

pub mod bounds;
pub mod cli;
pub mod data;
pub mod error;
pub mod geometry;
pub mod hypergraph;
pub mod lp;

pub use error::{Error, Result};
