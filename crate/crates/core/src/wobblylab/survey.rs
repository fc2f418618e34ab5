use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{SCHEMA, VERSION};
use crate::basecurve::{CurveFile, DivisorC, HyperellipticCurve, QuadDifferential, QuadFile};
use crate::bundleengine::{destabilizer_search, direct_image, lattice_of_ct, DestabilizerResult, StabilityTest};
use crate::spectral::{build_spectral, is_qspecial_spectral, DivisorCt, SpectralCurve};
use crate::Result;

/// Per-trial seed: splitmix64 of `seed` mixed with the trial index.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    let mut z = seed ^ trial.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(0x2545_f491_4f6c_dd1d);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyCounts {
    pub qspecial: usize,
    pub h0_at_least_two: usize,
    /// Semistability violated by a found sub-line bundle.
    pub destabilized: usize,
    /// `h⁰ ≥ 2` and no sub-line bundle of slope `≥ μ(E)` found.
    pub bn_stable_candidates: usize,
    /// `h⁰ ≥ 2`, Q-special and no destabilizer found.
    pub singular_wobbly: usize,
}

/// Empirical frequency with a 95% Wilson score interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frequency {
    pub value: f64,
    pub low: f64,
    pub high: f64,
}

impl Frequency {
    pub fn new(hits: usize, n: usize) -> Self {
        if n == 0 {
            return Self { value: 0.0, low: 0.0, high: 1.0 };
        }
        let (k, n) = (hits as f64, n as f64);
        let z = 1.96f64;
        let p = k / n;
        let den = 1.0 + z * z / n;
        let mid = (p + z * z / (2.0 * n)) / den;
        let rad = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / den;
        Self { value: p, low: (mid - rad).max(0.0), high: (mid + rad).min(1.0) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurveyFrequencies {
    pub qspecial: Frequency,
    pub h0_at_least_two: Frequency,
    pub destabilized: Frequency,
    pub bn_stable_candidates: Frequency,
    pub singular_wobbly: Frequency,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurveyReport {
    pub schema: String,
    pub version: String,
    pub curve: CurveFile,
    pub q: QuadFile,
    pub degree: i64,
    pub trials: usize,
    pub seed: u64,
    pub effort: usize,
    pub counts: SurveyCounts,
    pub frequencies: SurveyFrequencies,
    /// Derived seed of each trial that hit `bn_stable_candidates`.
    pub bn_candidate_seeds: Vec<u64>,
}

#[derive(Default)]
struct Trial {
    qspecial: bool,
    h0_two: bool,
    destabilized: bool,
    bn_candidate: bool,
}

fn run_trial(s: &SpectralCurve, d: i64, effort: usize, seed: u64) -> Result<Trial> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let div = DivisorCt::from_places((0..d).map(|_| s.sample_place_rng(&mut rng)));
    let qspecial = is_qspecial_spectral(s, &div).0;
    let h0 = lattice_of_ct(s, &div)?.h0();
    let data = direct_image(s, &DivisorC::zero(), &div)?;
    let semi = destabilizer_search(&data, StabilityTest::Semistable, effort, seed)?;
    let destabilized = matches!(semi, DestabilizerResult::Destabilized { .. });
    let bn_candidate = h0 >= 2
        && !destabilized
        && matches!(destabilizer_search(&data, StabilityTest::Stable, effort, seed)?, DestabilizerResult::NoneFound { .. });
    Ok(Trial { qspecial, h0_two: h0 >= 2, destabilized, bn_candidate })
}

/// Sample effective degree-`d` divisors from rational places and tabulate.
pub fn survey(c: &HyperellipticCurve, q: &QuadDifferential, d: i64, trials: usize, seed: u64, effort: usize) -> Result<SurveyReport> {
    let s = build_spectral(c, q)?;
    if d < 0 {
        return Err(crate::WobblyError::InvalidInput(format!("degree {d} < 0")));
    }
    let seeds: Vec<u64> = (0..trials as u64).map(|i| trial_seed(seed, i)).collect();
    let results: Vec<Result<Trial>> = seeds.par_iter().map(|&ts| run_trial(&s, d, effort, ts)).collect();
    let mut counts = SurveyCounts::default();
    let mut bn_candidate_seeds = Vec::new();
    for (r, &ts) in results.into_iter().zip(&seeds) {
        let t = r?;
        counts.qspecial += t.qspecial as usize;
        counts.h0_at_least_two += t.h0_two as usize;
        counts.destabilized += t.destabilized as usize;
        counts.bn_stable_candidates += t.bn_candidate as usize;
        counts.singular_wobbly += (t.h0_two && t.qspecial && !t.destabilized) as usize;
        if t.bn_candidate {
            bn_candidate_seeds.push(ts);
        }
    }
    let f = |k| Frequency::new(k, trials);
    let frequencies = SurveyFrequencies {
        qspecial: f(counts.qspecial),
        h0_at_least_two: f(counts.h0_at_least_two),
        destabilized: f(counts.destabilized),
        bn_stable_candidates: f(counts.bn_stable_candidates),
        singular_wobbly: f(counts.singular_wobbly),
    };
    Ok(SurveyReport {
        schema: SCHEMA.into(),
        version: VERSION.into(),
        curve: CurveFile::from_curve(c),
        q: QuadFile::from_quad(q),
        degree: d,
        trials,
        seed,
        effort,
        counts,
        frequencies,
        bn_candidate_seeds,
    })
}


#[cfg(test)]
mod survey_runs {
    use super::*;
    use crate::wobblylab::default_quad;

    fn std(g: usize) -> (HyperellipticCurve, QuadDifferential) {
        let c = HyperellipticCurve::standard(131, g).unwrap();
        let q = default_quad(&c).unwrap();
        (c, q)
    }

    #[test]
    fn low_degree_saturation_and_monotone() {
        let (c, q) = std(2);
        let mut last = 1.0;
        for d in 1..=4 {
            let r = survey(&c, &q, d, 40, 5, 2).unwrap();
            assert!(r.counts.qspecial <= r.trials);
            if d <= 2 {
                assert_eq!(r.counts.qspecial, r.trials);
            }
            assert!(r.frequencies.qspecial.value <= last);
            last = r.frequencies.qspecial.value;
        }
        assert!(last < 1.0);
    }

    #[test]
    fn deterministic() {
        let (c, q) = std(3);
        let a = survey(&c, &q, 4, 16, 9, 2).unwrap();
        let b = survey(&c, &q, 4, 16, 9, 2).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
