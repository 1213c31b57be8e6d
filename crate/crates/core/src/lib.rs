//! Numerical verification toolkit for a family of quasi-analytic vanishing
//! results: if a smooth function is flat at a singular point of a suitable
//! vector field and its derivative along the field is controlled by the
//! function itself, the function must vanish near that point.
//!
//! The crate turns each ingredient of that statement into something
//! checkable in floating point:
//!
//! - [`expr`]: a small expression language (`x1..xn`, arithmetic, `exp`,
//!   `ln`, `abs`, `sqrt`, `sin`, `cos`) with exact symbolic derivatives;
//! - [`field`]: vector fields, Jacobians, eigenvalue classification of
//!   singular points, and inner-product positivity sampling;
//! - [`flow`]: fixed-step RK4 and adaptive RKF45 integration of field
//!   orbits, sink-rate fitting, and maximal-interval estimation;
//! - [`inequality`]: derivative-along-field sampling, inequality-constant
//!   estimation, and Gronwall-type bound verification along orbits;
//! - [`certifier`]: flatness probing, the hypothesis-by-hypothesis
//!   vanishing certificate, and polynomial lower-bound witnesses;
//! - [`catalog`]: built-in worked problems with their expected outcomes.

pub mod catalog;
pub mod certifier;
pub mod error;
pub mod expr;
pub mod field;
pub mod flow;
pub mod inequality;
pub mod linalg;
pub mod report;
pub mod sample;

pub use error::{Error, Result};
