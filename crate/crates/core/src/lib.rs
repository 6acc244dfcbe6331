pub mod appendix;
pub mod complexes;
pub mod conditions;
pub mod constants;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod homology;
pub mod sampling;
pub mod shapes;

pub use error::{Error, Result};
