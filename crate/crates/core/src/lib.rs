//! Grade-level readability assessment for Portuguese text.

pub mod error;
pub mod textmodel;

pub use error::{Error, Result};
pub mod lexicons;
pub mod features;
pub mod dataset;
pub mod svm;
pub mod evaluation;
pub mod learnloop;
pub mod corpusio;
