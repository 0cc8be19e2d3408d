//! Interval superposition arithmetic.
//!
//! A function `f: X ⊂ ℝⁿ → ℝ` over a box `X` is enclosed by an `n × N` matrix of
//! intervals: each axis is split into `N` equal branches and `f(x)` lies in the
//! sum of one entry per row, selected by the branch holding each coordinate.
//! Factorable functions are bounded by propagating such models through a
//! library of atoms.

pub mod bivariate;
pub mod error;
pub mod expr;
pub mod interval;
pub mod model;
pub mod oracle;
pub mod univariate;

pub use bivariate::{
    add_models, div_models, mul_models, scalar_affine, sub_models, ProductWorkspace,
};
pub use error::{Error, Result};
pub use interval::Interval;
pub use model::{Domain, RangeBounds, SuperpositionModel};
pub use univariate::{
    central_points, compose, derived_unary, remainder_bound, AtomKind, CompositionWorkspace,
    DerivedUnary,
};
