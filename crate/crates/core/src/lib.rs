//! Discrete Wronskians of quasi-exponential spaces with complex step, an
//! inverse Wronski solver, and dense evaluation-module realizations of the
//! XXX transfer matrices used to check their reality properties.

pub mod error;
pub mod inverse;
pub mod linalg;
pub mod matrixz;
pub mod perm;
pub mod poly;
pub mod quasiexp;
pub mod yangian;

pub use error::{Error, Result};
pub use inverse::{InverseProblem, SolutionSet};
pub use num_complex::Complex64;
pub use poly::{CPoly, RationalFn, Tolerance};
pub use quasiexp::{DiscreteWronskian, LogBase, QESpace, QuasiExp};
