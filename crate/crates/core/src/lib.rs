pub mod config;
pub mod error;
pub mod flux;
pub mod lindblad;
mod linalg;
pub mod pulse;
pub mod registry;
pub mod scattering;
pub mod sweep;
pub mod units;

pub use error::{Error, Result};
