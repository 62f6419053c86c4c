//! HDG discretization of Stokes flow coupled to a dual-porosity Darcy medium
//! on triangles.
//!
//! [`driver::run`] is the entry point for the packaged scenarios; the modules
//! below it can be used directly to set up other problems.

pub mod driver;
pub mod error;
pub mod fem;
pub mod forms;
pub mod linalg;
pub mod mesh;
pub mod mms;
pub mod postproc;
pub mod spaces;

pub use error::{Error, Result};
