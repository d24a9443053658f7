//! Approximate and sparse matrix multiplication over streams of outer products.
//!
//! Two algorithms share the column-row view `AB = sum_t A[:, t] B[t, :]`:
//!
//! * [`approx`] keeps a fixed-size summary of the largest entries of a product
//!   of nonnegative matrices, with guaranteed additive error.
//! * [`group`] recovers the heaviest entries of a product of arbitrary real
//!   matrices exactly, by group testing over prime residues.

pub mod approx;
pub mod cli;
pub mod error;
pub mod group;
pub mod io;
pub mod linalg;
pub mod outer;
pub mod summary;

pub use error::{Error, Result};
pub use linalg::{multiply_exact, DenseMatrix, Position, SparseMatrix};
pub use summary::EntrySummary;
