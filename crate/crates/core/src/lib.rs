//! Bounded-cohomological invariants of surface group representations into
//! Sp(2n,R): Kashiwara–Maslov indices, rotation numbers on the universal
//! cover, and Toledo invariants.

pub mod error;
pub mod numkernel;
pub mod symplectic;
pub mod lagrangian;
pub mod cover;
pub mod surface;
pub mod constructors;
pub mod suites;
pub mod cli;

pub use error::{Error, Result};
