//! Exact lifting of cochain complexes, cochain maps and homotopies along
//! square-zero deformations of matrix categories over finite rings.

pub mod algebra;
pub mod cli;
pub mod cohomology;
pub mod complex;
pub mod crude;
pub mod defun;
pub mod doc;
pub mod error;
pub mod finring;
pub mod linalg;
pub mod obstruction;
pub mod oracle;
pub mod report;

pub use error::{Error, Result};
