pub mod cli;
pub mod cohomology;
pub mod divisor;
pub mod examples;
pub mod error;
pub mod fan;
pub mod lattice;
pub mod mmp;
pub mod mori;
pub mod polyhedral;
pub mod verify;

pub use error::{Error, Result};
