//! Growth sequences of interval diffeomorphisms.
//!
//! Builds diffeomorphisms of `[0, 1]` whose derivative has a prescribed
//! modulus of continuity, computes `Γₙ(f) = max(‖(fⁿ)'‖∞, ‖(f⁻ⁿ)'‖∞)`, and
//! compares the result with the upper and lower growth bounds expressed in
//! terms of the modulus.

pub mod bounds;
pub mod diffeo;
pub mod dynamics;
pub mod error;
pub mod lab;
pub mod modulus;
pub mod numerics;

pub use bounds::{BoundSpec, Theorem};
pub use diffeo::{Diffeo, PastedSpec, Sign};
pub use dynamics::{GridSpec, GrowthRecord, Trajectory};
pub use error::{Error, Result};
pub use modulus::{Modulus, ModulusKind, RegularityReport};
