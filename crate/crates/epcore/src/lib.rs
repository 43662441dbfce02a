//! Pseudo-completeness relations and closed-form dynamics for non-Hermitian
//! matrices at exceptional points.

pub mod adiabatic;
pub mod assignment;
pub mod diagnostics;
pub mod error;
pub mod jordan;
pub mod linalg;
pub mod models;
pub mod pcr;
pub mod propagator;
pub mod scalar;
pub mod tolerances;

pub use error::{Error, Result};
pub use scalar::Real;
pub use tolerances::Tolerances;

/// Double-precision complex scalar.
pub type C64 = num_complex::Complex<f64>;
pub type ComplexMatrix = linalg::CMatrix<f64>;
pub type ComplexVector = linalg::CVector<f64>;
