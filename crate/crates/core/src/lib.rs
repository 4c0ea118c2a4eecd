pub mod adelic;
pub mod convex;
pub mod divisorial;
pub mod error;
pub mod rational;

pub use error::{Error, ErrorClass, Result};
