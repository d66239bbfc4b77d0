//! Certified solutions of `Gamma(z) = A(z)` and of systems
//! `Gamma(z_i) = A_i(z_1, ..., z_n)`.

pub mod algebraic;
pub mod contour;
pub mod error;
pub mod exp_rouche;
pub mod gamma;
pub mod level_curves;
pub mod numeric;
pub mod solver_1d;
pub mod solver_nd;

pub use error::{Error, Result};
pub use num_complex::Complex64;
