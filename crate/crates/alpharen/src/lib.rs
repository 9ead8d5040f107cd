//! Scalar Euclidean Feynman amplitudes in the Schwinger parameter
//! representation with per-line analytic regularization, recursive
//! subtraction of subdivergences, and numerical Laurent-coefficient
//! extraction in the regulator.
//!
//! The numeric core is generic over the floating scalar via [`float::Real`];
//! concrete `f64` aliases live at the crate root.

pub mod error;
pub mod float;
pub mod graph;
pub mod laurent;
pub mod linalg;
pub mod mompoly;
pub mod parametric;
pub mod quad;
pub mod renorm;
pub mod sector;
pub mod special;
pub mod subgraph;

pub use error::{Error, Result};

/// Default scalar used by the CLI and the concrete aliases below.
pub type Scalar = f64;
/// Complex number over the default scalar.
pub type CScalar = num_complex::Complex<Scalar>;
