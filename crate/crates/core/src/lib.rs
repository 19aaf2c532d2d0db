//! Lake-equation simulator in vorticity–stream-function form.

pub mod cli;
pub mod diagnostics;
pub mod discrete;
pub mod domain;
pub mod elliptic;
pub mod error;
pub mod linalg;
pub mod scenario;
pub mod solver;
pub mod transport;

pub use error::{LakeError, Result};
