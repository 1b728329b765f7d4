pub mod calculus;
pub mod cli;
pub mod error;
pub mod grid;
pub mod model;
pub mod operator;
pub mod par;
pub mod quadrature;
pub mod specfun;
pub mod symbol;
pub mod verify;

pub use error::{Error, Result};
