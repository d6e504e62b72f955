//! Persistent minimal models of tame persistent commutative differential
//! graded algebras over the rationals, computed exactly.

pub mod cdga;
pub mod cli_io;
pub mod error;
pub mod exactla;
pub mod homotopy;
pub mod minimal;
pub mod pcomplex;
pub mod persistence;
pub mod pminimal;

pub use error::{Error, Result};
