pub mod conjugate;
pub mod error;
pub mod harness;
pub mod map;
pub mod moments;
pub mod oracle;
pub mod property;
pub mod special;

pub use error::{Error, ErrorCategory, Result};
