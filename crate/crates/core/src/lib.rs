pub mod dynamics;
pub mod error;
pub mod functionals;
pub mod grid;
pub mod groundstate;
pub mod operator;
pub mod orlicz;
pub mod stability;
pub mod tridiag;

pub use error::{Error, Result};
pub use grid::{Grid, GridFunction};
