pub mod approx;
pub mod channel;
pub mod compiler;
pub mod error;
pub mod linalg;
pub mod matrix;
pub mod par;
pub mod problem;
pub mod reduction;
pub mod reference;
pub mod suite;

pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, C64};
