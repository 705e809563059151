//! Finite commutative local rings, surjection towers and fiber products.

pub mod pgroup;
pub mod ring;
pub mod tower;

pub use pgroup::SubgroupBasis;
pub use ring::{elementary_basis, is_prime, ring_fiber_product, Elem, FiberProduct, FiniteRing, RingMap};
pub use tower::{Tower, TowerCaps, TowerKind};
