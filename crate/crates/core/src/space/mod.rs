//! Model spaces and their intersection rings.

pub mod ktheory;
pub mod model;
pub mod ring;

pub use ktheory::{from_k_basis, to_k_basis, KClass};
pub use model::{BundleSpec, LineSummand, SpaceModel};
pub use ring::{build_equivariant_space, build_space, IntersectionRing};
