pub mod currents;
pub mod error;
pub mod exterior;
pub mod fields;
pub mod geometry;
pub mod radon;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
