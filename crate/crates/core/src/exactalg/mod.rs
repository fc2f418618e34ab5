//! Exact arithmetic over prime fields: scalars, polynomials, rational
//! functions, truncated Laurent series and matrices.

pub mod fp;
pub mod linalg;
pub mod poly;
pub mod polymat;
pub mod ratfn;
pub mod series;

pub use fp::{Fp, Fp2, PrimeField};
pub use linalg::Matrix;
pub use poly::Poly;
pub use polymat::{weak_popov_reduce, LaurentMatrix, PolyMatrix};
pub use ratfn::RatFn;
pub use series::Series;
