//! Exact computation in oriented intersection theories.
//!
//! The crate models an intersection theory by its formal group law (additive
//! for Chow groups, multiplicative for K-theory, or the universal law over a
//! free rational coefficient ring), builds the intersection rings of
//! projective-bundle towers, and evaluates virtual torus-localization sums
//! with a consistency check against direct integration.

pub mod algebra;
pub mod axioms;
pub mod equivariant;
pub mod error;
pub mod expr;
pub mod fgl;
pub mod localization;
pub mod space;
pub mod task;

pub use error::{Error, Result};
