pub mod banded;
pub mod combinatorics;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod field;
pub mod grid;
pub mod heat1d;
pub mod implicit;
pub mod io;
pub mod norms;
pub mod scalar;
pub mod shercliff;
pub mod solver2d;
pub mod solver3d;

pub use error::{Error, Result};
