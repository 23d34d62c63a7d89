pub mod alternatives;
pub mod asymptotics;
pub mod beta_model;
pub mod bootstrap;
pub mod datasets;
pub mod error;
pub mod exec;
pub mod power;
pub mod quadrature;
pub mod rng;
pub mod specfun;

pub use error::{Error, Result};
