//! Composite Floquet scattering analysis of linear periodically time-varying
//! circuits, with reference switched-capacitor circulator designs and a
//! time-domain steady-state solver for cross-checking.

pub mod circulator;
pub mod elements;
pub mod error;
pub mod floquet;
pub mod linalg;
pub mod network;
pub mod oracle;

pub use error::{Error, Result};
