//! Truncated equivariant coefficients and the localized ring.

pub mod localized;
pub mod torus;

pub use localized::{
    assert_constant, char_c1, character_line, invert_equivariant_euler, loc_combine, LocOp,
    LocalizedElement,
};
pub use torus::{Character, TorusContext, DEFAULT_MAX_CAP};
