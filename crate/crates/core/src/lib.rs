//! Complex dimensions, zeta functions and box-counting functions of
//! self-similar sets and fractal strings.

pub mod analysis;
pub mod builtin;
pub mod error;
pub mod geometry;
pub mod packing;
pub mod par;
pub mod roots;
pub mod scale;
pub mod step;
pub mod strings;
pub mod zeta;

pub use error::{Error, Result};
