//! Stress intensity factors for cracks in elastic wedges.

pub mod cli;
pub mod edge;
pub mod error;
pub mod factor;
pub mod halfplane;
pub mod internal;
pub mod kernels;
pub mod oracle;
pub mod quadrature;
pub mod roots;
pub mod specfun;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
