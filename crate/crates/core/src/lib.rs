//! Entropy structure, non-conservative products, action functionals and
//! entropy-rate selection for hyperbolic systems of conservation laws.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fd;
pub mod linalg;
pub mod quadrature;

pub mod action;
pub mod checks;
pub mod dlm;
pub mod entropy;
pub mod field;
pub mod selection;
pub mod system;

pub use error::{Error, Result};
pub use linalg::{Matrix, State};
