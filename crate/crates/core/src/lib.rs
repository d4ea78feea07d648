//! Degree-4 sum-of-squares pseudomoments for the Sherrington-Kirkpatrick
//! problem: witness construction, explicit extension, PSD certification,
//! proof-quantity diagnostics, frame extensions and a gaussian tensor engine.

pub mod deg4;
pub mod diagnostics;
pub mod ensembles;
pub mod error;
pub mod etf;
pub mod harness;
pub mod linalg;
pub mod tensor;
pub mod witness;

pub use error::{Error, Result};
