//! The full preparation pipeline and its stages.

pub mod condense;
pub mod gauge;
pub mod logical;
pub mod negative;
pub mod pipeline;
pub mod record;
pub mod teleport;

pub use gauge::Patch;
pub use record::{Check, Mode, Recorder, StageRecord};
