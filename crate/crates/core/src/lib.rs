pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod operators;
pub mod params;
pub mod point;
pub mod problems;
pub mod semilag;
pub mod stencils;
pub mod timestepper;
pub mod weights;

pub use error::{Error, Result};
pub use point::Point;
