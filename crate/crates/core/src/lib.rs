//! Banach Lie algebroids on truncated sequence spaces and the linear Poisson
//! structure on their predual bundles.

pub mod algebroid;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod funcalg;
pub mod poisson;
pub mod presets;
pub mod reconstruct;
pub mod report;
pub mod sampling;
pub mod spaces;
pub mod suite;

pub use error::{Error, Result};
