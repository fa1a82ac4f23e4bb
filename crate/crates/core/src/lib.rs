//! Point counting on the cubic surface `x1 x2 x3 = x4 (x1 + x2 + x3)^2`.

pub mod arith;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod forms;
pub mod surface;
pub mod tallies;
pub mod torsor;

pub use config::Limits;
pub use error::{Error, Result};
