//! Classification of direct images, component labels, Brill-Noether
//! numerology, sampling surveys and the self-check ledger.

mod classify;
mod singular;
mod survey;
mod verify;

pub use classify::{classify, square_root_twist, ClassificationReport, DestabilizerStatus, Membership, SquareRoot, Verdict};
pub use singular::{detect_singular, SingularReport};
pub use survey::{survey, trial_seed, Frequency, SurveyCounts, SurveyReport};
pub use verify::{check_all, verify_suite, verify_suite_with, CHECK_PRIMES, CheckEntry, Fault, Reproducer, VerifyLedger};

use serde::{Deserialize, Serialize};

use crate::basecurve::{HyperellipticCurve, QuadDifferential};
use crate::exactalg::Poly;
use crate::Result;

pub const SCHEMA: &str = "wobbly-report/1";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// The quadratic differential used by default for a genus: split fiber at
/// infinity in genus 2, ramified in genus 3 and above.
pub fn default_quad(c: &HyperellipticCurve) -> Result<QuadDifferential> {
    let f = c.field();
    if c.genus() == 2 {
        QuadDifferential::new(c, Poly::from_i64(f, &[0, -2, 1]), Poly::zero(f))
    } else {
        let mut a = vec![3, 1];
        a.resize(2 * c.genus() - 2, 0);
        a[2 * c.genus() - 3] = 5;
        let mut b = vec![0; c.genus() - 2];
        b[0] = 2;
        QuadDifferential::new(c, Poly::from_i64(f, &a), Poly::from_i64(f, &b))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentEntry {
    pub k: i64,
    /// `"divisor"` or `"codim > 1"`.
    pub kind: String,
}

/// Admissible component indices for degree parity `lambda`.
pub fn component_spectrum(g: usize, lambda: i64) -> Vec<ComponentEntry> {
    let g = g as i64;
    (lambda..=2 * g - 2 - lambda)
        .step_by(2)
        .map(|k| ComponentEntry { k, kind: if k <= g { "divisor" } else { "codim > 1" }.into() })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BnNumbers {
    pub genus: usize,
    pub spectral_genus: i64,
    pub r: i64,
    pub degree: i64,
    pub rho: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_rank_two: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_qspecial: Option<i64>,
    /// Predicted codimension of the singular wobbly locus, by parity of d.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub codim_singular: Option<i64>,
}

pub fn rho(gt: i64, r: i64, d: i64) -> i64 {
    gt - r * (gt - d + r - 1)
}

pub fn bn_numbers(g: usize, r: i64, d: i64) -> BnNumbers {
    let gi = g as i64;
    let gt = 4 * gi - 3;
    let two = r == 2;
    BnNumbers {
        genus: g,
        spectral_genus: gt,
        r,
        degree: d,
        rho: rho(gt, r, d),
        rho_rank_two: two.then(|| 2 * d - 4 * gi + 1),
        rho_qspecial: two.then(|| d - gi - 3),
        codim_singular: two.then(|| 4 + d.rem_euclid(2)),
    }
}
