//! Design of finite-length spatially-coupled LDPC codes by Markov chain Monte
//! Carlo optimization of their partitioning and lifting matrices.

pub mod bec;
pub mod cycles;
pub mod error;
pub mod estimator;
pub mod matrix;
pub mod optimizer;
pub mod oracle;

pub use error::{Error, Result};
