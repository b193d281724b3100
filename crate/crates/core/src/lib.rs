//! Critical first-passage percolation on the triangular lattice.

pub mod circuits;
pub mod cle;
pub mod config;
pub mod error;
pub mod experiments;
pub mod fpp;
pub mod grid;
pub mod lattice;
pub mod mix;
pub mod replicate;
pub mod shape;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
