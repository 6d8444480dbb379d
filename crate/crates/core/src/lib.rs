//! Exact and floating-point determinants, permanents, pfaffians and
//! hafnians, with verifiers for inequalities between them.

pub mod batteries;
pub mod blockpoly;
pub mod error;
pub mod exec;
pub mod format;
pub mod gram;
pub mod inequalities;
pub mod matfun;
pub mod matrix;
pub mod polarization;
pub mod report;
pub mod scalar;
pub mod wick;

pub use error::{Error, Result};
pub use exec::Exec;
pub use matfun::{Config, Functional, MatrixDiagnostics};
pub use matrix::{Kind, RectMatrix, SquareMatrix};
pub use scalar::{Number, Rational, Scalar};
