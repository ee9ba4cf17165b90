pub mod chem;
pub mod dynamics;
pub mod error;
pub mod expm;
pub mod linalg;
pub mod mapping;
pub mod observables;
pub mod operators;
pub mod spectra;
pub mod states;
pub mod workflow;

pub use error::{Error, Result};
