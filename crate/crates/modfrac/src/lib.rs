//! Fractional integrals of modular forms.
//!
//! The crate evaluates `f_alpha(x) = sum a_n (n+kappa)^(-alpha) e(n x / m)` by a
//! truncated series and by an integral along the vertical ray, checks the
//! approximate functional equation near rationals, estimates pointwise
//! Hoelder exponents and carries the exact group theory (cusps, widths,
//! Atkin-Lehner matrices) those computations rely on.

pub mod afe;
pub mod diophantine;
pub mod error;
pub mod eval;
pub mod forms;
pub mod holder;
pub mod linalg;
pub mod modgroup;
pub mod par;
pub mod point;
pub mod quad;
pub mod tolerances;
pub mod wavelet;

pub use error::{Error, Result};
pub use num_complex::Complex64;
