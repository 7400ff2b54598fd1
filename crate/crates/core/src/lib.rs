pub mod base;
pub mod bundle;
pub mod cli;
pub mod closed_form;
pub mod error;
pub mod expr;
pub mod fd;
pub mod oracle;
pub mod suite;
pub mod tensor;
pub mod weights;

pub use error::{Error, Result};
