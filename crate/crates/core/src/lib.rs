pub mod basis;
pub mod config;
pub mod dgp;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod illposedness;
pub mod lepski;
pub mod linalg;

pub use error::{Error, Result};
