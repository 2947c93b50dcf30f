//! Nested lattice codes over ergodic block-fading channels.

pub mod csir;
pub mod csit;
pub mod error;
pub mod fading;
pub mod gap;
pub mod harness;
pub mod lattice;
pub mod numeric;
pub mod power;
pub mod rng;

pub use error::{Error, Result};
