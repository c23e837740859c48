//! Special-function and quadrature kernels behind the analytic formulas.
//!
//! All routines are pure functions and can be called from any thread.

mod hypergeometric;
pub mod quadrature;
mod shadowing;

pub use hypergeometric::{gauss_2f1, interference_f};
pub use shadowing::{fractional_moment, ShadowingModel};
