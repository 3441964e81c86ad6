//! Townes soliton, modulation constants and reduced collapse dynamics for the
//! Schrödinger-Helmholtz equation in two dimensions.

// `!(x > 0.0)` rejects NaN along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod figures;
pub mod functionals;
pub mod helmholtz;
pub mod quadrature;
pub mod radial;
pub mod regime;
pub mod soliton;
pub mod special;

pub use error::{Error, Result};
