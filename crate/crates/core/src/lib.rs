//! Model-extraction attacks against label-only prediction servers, the
//! defenses those servers can deploy, and tools for measuring both.

pub mod analysis;
pub mod attacks;
pub mod datasets;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod nonlinear;
pub mod oracle;

pub use error::{Error, Result};
