pub mod arith;
pub mod cli;
pub mod config;
pub mod curves;
pub mod density;
pub mod error;
pub mod forms;
pub mod iwasawa;
pub mod levels;
pub mod report;
pub mod residual;

pub use error::{Error, PrimeKind, Result};
