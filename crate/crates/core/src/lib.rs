mod duhamel;
pub mod error;
pub mod expr;
pub mod kernel;
pub mod laplace;
pub mod problems;
pub mod quad;
pub mod selftest;
pub mod series;
pub mod solver;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A computed value with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}
