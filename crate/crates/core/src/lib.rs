//! Data-driven quantum measurement tomography with semidefinite programs.
//!
//! Given frequencies from preparing a set of assumed input states and
//! measuring an unknown POVM, the SDP estimators find the smallest
//! perturbation of the data that is consistent with quantum mechanics. A
//! large perturbation flags a mismatch between the assumed and the actual
//! states; a see-saw between measurement and state fits can repair it.

pub mod conic;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod noise;
pub mod quantum;
pub mod sampling;
pub mod seesaw;
mod serde_util;

pub use error::{QmtError, Result};
