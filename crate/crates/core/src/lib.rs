//! Numerical toolkit for quasiperiodically forced circle maps.

pub mod circle;
pub mod cli;
pub mod denjoy;
pub mod error;
pub mod graphs;
pub mod harper;
pub mod numerics;
pub mod rotation;
pub mod systems;

pub use error::{Error, Result};
