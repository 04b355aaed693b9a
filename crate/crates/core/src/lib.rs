pub mod census;
pub mod connectivity;
pub mod error;
pub mod experiments;
pub mod model;
pub mod montecarlo;
pub mod output;
pub mod rng;
pub mod theory;

pub use error::{Error, Result};
