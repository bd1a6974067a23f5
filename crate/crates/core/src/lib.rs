//! residua: a structure-preserving partial evaluator for MiniF77.
// Errors carry names and positions for diagnostics and sit on cold paths.
#![allow(clippy::result_large_err)]

pub mod analysis;
pub mod constraints;
pub mod driver;
pub mod error;
pub mod frontend;
pub mod interp;
pub mod report;
pub mod specializer;
pub mod value;

pub use error::{ConstraintError, FrontendError, LexError, SemanticError, SpecializeError};
