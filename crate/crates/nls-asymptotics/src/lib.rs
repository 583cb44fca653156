//! Large-time asymptotics machinery for two-component cubic nonlinear
//! Schrödinger systems.
//!
//! The crate reduces a general cubic system with a coercive mass-like
//! conserved quantity to a standard form with parameters `p1..p5, q1..q3`,
//! evaluates exact solutions of the quadratic-quantity flow `(D, R, I)` on
//! the sphere of radius `ρ`, rebuilds the complex amplitudes from those
//! quantities and evaluates the asymptotic profiles built on them. Every
//! closed form is paired with a numerical oracle.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod closed_form;
pub mod elliptic;
pub mod error;
pub mod ode;
pub mod profile;
pub mod quadratic_flow;
pub mod quadrature;
pub mod reconstruction;
pub mod standard_form;

pub use error::{Error, Result};
