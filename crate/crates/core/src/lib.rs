//! Morse homology of compact oriented manifolds with boundary.
//!
//! The Morse complex is generated by interior critical points together with
//! the critical points of the boundary functions that take positive values.
//! Its differential counts gradient trajectories through the interior and
//! broken trajectories that first run inside a boundary component to a
//! negative-valued critical point and then leave it.

pub mod circle;
pub mod complex;
pub mod corpus;
pub mod error;
pub mod flow;
pub mod homology;
pub mod matrix;
pub mod morse_data;
pub mod smith;

pub use error::{Error, Result};
pub use matrix::IntMatrix;
