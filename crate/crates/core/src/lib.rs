pub mod config;
pub mod error;
pub mod kernels;
pub mod oracle;
pub mod pipeline;
pub mod physical;
pub mod problem;
pub mod quadrature;
pub mod special;
pub mod table;
pub mod volterra;

pub use error::{Error, Result};
