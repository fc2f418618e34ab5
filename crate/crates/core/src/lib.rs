//! Exact computations with rank-2 Higgs bundles over hyperelliptic curves
//! defined over small prime fields.

pub mod error;
pub mod basecurve;
pub mod bundleengine;
pub mod exactalg;
pub mod spectral;
pub mod wobblylab;

pub use error::{Result, WobblyError};
