pub mod complete;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod limits;
pub mod loops;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
