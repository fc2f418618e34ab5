use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WobblyError {
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("leading coefficient is not a square in the field")]
    NonSquareLeading,
    #[error("generated module has rank {found}, expected {expected}")]
    RankDeficient { expected: usize, found: usize },
    #[error("divisor has support at a closed point of degree > 1 ({0})")]
    IrrationalSupport(String),
    #[error("spectral curve is singular at the closed point with minimal polynomial {0}")]
    SingularSpectral(String),
    #[error("fiber over {0} is inert (quadratic non-residue)")]
    InertPlace(String),
    #[error("injection vanishes along {0}; strip the pullback summand first")]
    DegenerateInjection(String),
    #[error("quadratic differential does not vanish on the required divisor")]
    NotQSpecial,
    #[error("outside the admissible regime: {0}")]
    RegimeError(String),
    #[error("h0 = {0} < 2, not in a Brill-Noether locus of rank >= 2")]
    NotBrillNoether(usize),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, WobblyError>;
