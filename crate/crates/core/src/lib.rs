//! Theta functions with characteristics on the Siegel upper half space,
//! Thetanullwert maps, Schottky-Jung factorization residuals and
//! Fubini-Study pullback forms.

// `!(x > 0.0)` guards reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod fubini;
pub mod nullwerte;
pub mod siegel;
pub mod theta;

pub use nalgebra;
pub use num_complex;
