pub mod anneal;
pub mod cli;
pub mod constraints;
pub mod drivers;
pub mod encodings;
pub mod error;
pub mod pauli;
pub mod spectral;
pub mod statespace;

pub use error::{CqaError, Result};
