//! Exact simulation of magic-state preparation by gauging charge conjugation in
//! a Z4 surface code, condensing anyons of the resulting D4 quantum double, and
//! consuming the magic state in T-gate teleportation. A symbolic anyon layer
//! tracks the expected logical state at every stage.

pub mod anyon_algebra;
pub mod cli;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod protocol;
pub mod quantum_double;
pub mod zn_code;

pub use error::{Error, Result};
