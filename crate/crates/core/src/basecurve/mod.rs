//! The hyperelliptic base curve: places, divisors, functions, quadratic
//! differentials and Riemann-Roch spaces.

pub mod curve;
pub mod divisor;
pub mod function;
mod linsys;
pub mod quad;
pub mod riemann_roch;

pub use curve::{CurveFile, HyperellipticCurve, PlaceC};
pub use divisor::{DivisorC, DivisorFile, PlaceEntry, PlaceKind};
pub use function::FnC;
pub use quad::{divisor_of_quaddiff, qspecial_system, QuadDifferential, QuadFile};
pub use riemann_roch::{rr_dimension, rr_space_on_c};
