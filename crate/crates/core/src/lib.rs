pub mod config;
pub mod dual;
pub mod error;
pub mod expr;
pub mod flatness;
pub mod forms;
pub mod geodesic;
pub mod metric;
pub mod quasimetric;
mod quadrature;
pub mod report;
pub mod run;
pub mod sampling;

pub use error::{Error, Result};
