//! Integrable defects in the deformed oscillator lattice and in Liouville
//! field theory.
//!
//! The crate is organised bottom-up:
//!
//! - [`laurent`]: Laurent polynomials in `u = e^λ` and 2×2 matrices over them.
//! - [`rmatrix`]: the trigonometric r-matrix and generic checkers for the
//!   quadratic and linear classical algebras.
//! - [`lattice`]: the bulk deformed-oscillator lattice.
//! - [`defect`]: the lattice with one type-II defect.
//! - [`continuum`]: the Liouville field theory on an interval.
//! - [`continuum_defect`]: Liouville with a type-II defect at a point.
//! - [`backlund`]: auto- and hetero-Bäcklund transformations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backlund;
pub mod continuum;
pub mod continuum_defect;
pub mod defect;
pub mod error;
pub mod lattice;
pub mod laurent;
pub mod ode;
pub mod rmatrix;
pub mod sampling;

pub use error::{Error, Result};

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat2 = Matrix2<Complex64>;
pub type Mat4 = Matrix4<Complex64>;

/// Shorthand for a complex number.
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    Complex64::new(re, im)
}

/// Imaginary unit.
pub const I: C64 = Complex64::new(0.0, 1.0);

/// Largest entry modulus of a matrix.
pub fn max_abs<const R: usize, const C: usize>(m: &nalgebra::SMatrix<C64, R, C>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/laurent.md")]
    mod laurent {}
    #[doc = include_str!("../../../book/src/lattice.md")]
    mod lattice {}
    #[doc = include_str!("../../../book/src/defect.md")]
    mod defect {}
    #[doc = include_str!("../../../book/src/continuum.md")]
    mod continuum {}
    #[doc = include_str!("../../../book/src/continuum_defect.md")]
    mod continuum_defect {}
    #[doc = include_str!("../../../book/src/backlund.md")]
    mod backlund {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
}
