pub mod asymptotics;
pub mod cli;
pub mod config;
pub mod dist;
pub mod error;
pub mod estimate;
pub mod quadrature;
pub mod roots;
pub mod series;
pub mod simulator;
pub mod transforms;
pub mod validation;

pub use error::{Error, Result};
