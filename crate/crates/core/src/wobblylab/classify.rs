use serde::{Deserialize, Serialize};

use super::{SCHEMA, VERSION};
use crate::basecurve::{CurveFile, DivisorC, DivisorFile, HyperellipticCurve, PlaceC, QuadDifferential, QuadFile};
use crate::bundleengine::{destabilizer_search, direct_image, hh_limit_status, iso_trivial, lattice_of_ct, DestabilizerResult, HhLimit, StabilityTest};
use crate::spectral::{
    build_spectral, divisor_ct_to_file, is_qspecial_spectral, norm_divisor, pullback_summand, DivisorCt, InfinityFiber, SpectralCurve,
};
use crate::{Result, WobblyError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// Q-special with certified semistability.
    Wobbly,
    /// Not Q-special and no destabilizer found.
    VeryStable,
    /// Q-special, no destabilizer found, semistability not certified.
    WobblyIfSemistable,
    Unstable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum DestabilizerStatus {
    Destabilized { sub: DivisorFile, degree: i64 },
    NoneFound { tried: usize },
}

impl DestabilizerStatus {
    pub fn from_result(r: &DestabilizerResult) -> Self {
        match r {
            DestabilizerResult::Destabilized { sub, .. } => {
                Self::Destabilized { sub: DivisorFile::from_divisor(sub), degree: sub.degree() }
            }
            DestabilizerResult::NoneFound { tried } => Self::NoneFound { tried: *tried },
        }
    }
}

/// Component label. `refined` is `(k + 2·deg P, k)` when the divisor has a
/// pullback summand `π*P`: kernel-type membership in the first index, plain
/// membership in the second.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Membership {
    pub k: i64,
    pub in_bound: bool,
    pub kernel_index: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refined: Option<(i64, i64)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum SquareRoot {
    /// `L` with `2L ~ K + λ·∞ − Nm(D̃)`.
    Found { divisor: DivisorFile },
    NotFound { tried: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveSummary {
    pub curve: CurveFile,
    pub spectral_genus: usize,
    pub infinity_fiber: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub schema: String,
    pub version: String,
    pub seed: u64,
    pub effort: usize,
    pub summary: CurveSummary,
    pub q: QuadFile,
    pub divisor: DivisorFile,
    pub degree: i64,
    pub lambda: i64,
    pub norm: DivisorFile,
    pub pullback_summand: DivisorFile,
    pub reduced: bool,
    pub qspecial: bool,
    pub qspecial_dim: usize,
    pub h0: usize,
    pub destabilizer: DestabilizerStatus,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hh_limit: Option<HhLimit>,
    pub membership: Membership,
    pub square_root: SquareRoot,
}

fn summary(s: &SpectralCurve) -> CurveSummary {
    let infinity_fiber = match s.infinity_fiber() {
        InfinityFiber::Split(_) => "split",
        InfinityFiber::Ramified => "ramified",
        InfinityFiber::Inert => "inert",
    };
    CurveSummary { curve: CurveFile::from_curve(s.base()), spectral_genus: s.genus(), infinity_fiber: infinity_fiber.into() }
}

/// Bounded search for `L = T + n·∞` with `2L ~ K + λ·∞ − D`, over small
/// rational corrections `T`. Pairs `P + P̄` and doubled Weierstrass points in
/// `D` are already covered by `T = 0`.
pub fn square_root_twist(c: &HyperellipticCurve, d: &DivisorC, lambda: i64, effort: usize) -> SquareRoot {
    let k = DivisorC::single(PlaceC::Infinity, c.canonical_degree() + lambda);
    let target_deg = k.degree() - d.degree();
    let places = c.rational_places();
    let mut cands: Vec<DivisorC> = vec![DivisorC::zero()];
    for p in &places {
        cands.push(DivisorC::place(*p));
        cands.push(DivisorC::single(*p, -1));
    }
    'outer: for (i, a) in places.iter().enumerate() {
        for b in &places[i..] {
            if cands.len() >= effort {
                break 'outer;
            }
            cands.push(DivisorC::from_places([*a, *b]));
        }
    }
    let mut tried = 0;
    for t in cands.into_iter().take(effort.max(1)) {
        let lead = target_deg - 2 * t.degree();
        if lead.rem_euclid(2) != 0 {
            continue;
        }
        tried += 1;
        let l = t.add(&DivisorC::single(PlaceC::Infinity, lead / 2));
        if iso_trivial(c, &l.scale(2).sub(&k).add(d)) {
            return SquareRoot::Found { divisor: DivisorFile::from_divisor(&l) };
        }
    }
    SquareRoot::NotFound { tried }
}

/// Classify `π_*O(D̃)` up to twist.
pub fn classify(c: &HyperellipticCurve, q: &QuadDifferential, d: &DivisorCt, effort: usize, seed: u64) -> Result<ClassificationReport> {
    let s = build_spectral(c, q)?;
    d.check(&s)?;
    if !d.is_effective() {
        return Err(WobblyError::InvalidInput(format!("divisor {d} is not effective")));
    }
    let g = c.genus() as i64;
    let deg = d.degree();
    let lambda = deg.rem_euclid(2);
    let k = 4 * g - 4 - deg;
    let nm = norm_divisor(d);
    let (p, _) = pullback_summand(&s, d)?;
    let (qspecial, sys) = is_qspecial_spectral(&s, d);
    let h0 = lattice_of_ct(&s, d)?.h0();
    let data = direct_image(&s, &DivisorC::zero(), d)?;
    let found = destabilizer_search(&data, StabilityTest::Semistable, effort, seed)?;
    let verdict = match (&found, qspecial) {
        (DestabilizerResult::Destabilized { .. }, _) => Verdict::Unstable,
        (DestabilizerResult::NoneFound { .. }, true) => Verdict::WobblyIfSemistable,
        (DestabilizerResult::NoneFound { .. }, false) => Verdict::VeryStable,
    };
    let hh_limit = if verdict == Verdict::Unstable && deg < c.canonical_degree() {
        Some(hh_limit_status(&s, &DivisorC::zero(), d, effort, seed)?.verdict)
    } else {
        None
    };
    let in_bound = lambda <= k && k <= 2 * g - 2 - lambda;
    if matches!(verdict, Verdict::Wobbly | Verdict::WobblyIfSemistable) && !in_bound {
        return Err(WobblyError::Invariant(format!("wobbly verdict with k = {k} outside [{lambda}, {}]", 2 * g - 2 - lambda)));
    }
    let membership = Membership {
        k,
        in_bound,
        kernel_index: k + 2 * p.degree(),
        refined: (!p.is_zero()).then(|| (k + 2 * p.degree(), k)),
    };
    Ok(ClassificationReport {
        schema: SCHEMA.into(),
        version: VERSION.into(),
        seed,
        effort,
        summary: summary(&s),
        q: QuadFile::from_quad(q),
        divisor: divisor_ct_to_file(d),
        degree: deg,
        lambda,
        norm: DivisorFile::from_divisor(&nm),
        pullback_summand: DivisorFile::from_divisor(&p),
        reduced: d.is_reduced(),
        qspecial,
        qspecial_dim: sys.len(),
        h0,
        destabilizer: DestabilizerStatus::from_result(&found),
        verdict,
        hh_limit,
        membership,
        square_root: square_root_twist(c, &nm, lambda, effort.max(8) * 8),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basecurve::divisor_of_quaddiff;
    use crate::exactalg::Poly;
    use crate::spectral::PlaceCt;
    use crate::wobblylab::default_quad;

    fn setup(g: usize) -> (HyperellipticCurve, QuadDifferential, SpectralCurve) {
        let c = HyperellipticCurve::standard(131, g).unwrap();
        let q = default_quad(&c).unwrap();
        let s = build_spectral(&c, &q).unwrap();
        (c, q, s)
    }

    #[test]
    fn single_ramified_place_is_unstable() {
        let (c, q, s) = setup(2);
        let r = s.rational_places().into_iter().find(|p| matches!(p, PlaceCt::Ramified { .. })).unwrap();
        let rep = classify(&c, &q, &DivisorCt::single(r, 1), 4, 1).unwrap();
        assert!(rep.qspecial);
        assert_eq!(rep.verdict, Verdict::Unstable);
        assert_eq!(rep.hh_limit, Some(HhLimit::VeryStableLimit));
        assert_eq!((rep.membership.k, rep.lambda, rep.membership.in_bound), (3, 1, false));
    }

    #[test]
    fn canonical_degree_without_pullback() {
        let (c, q, s) = setup(2);
        let mut seen = 0;
        for seed in 0..20u64 {
            let d = DivisorCt::from_places([s.sample_place(seed), s.sample_place(seed + 100)]);
            if !pullback_summand(&s, &d).unwrap().0.is_zero() {
                continue;
            }
            let rep = classify(&c, &q, &d, 4, seed).unwrap();
            assert!(rep.qspecial);
            assert_eq!(rep.membership, Membership { k: 2, in_bound: true, kernel_index: 2, refined: None });
            assert_ne!(rep.verdict, Verdict::VeryStable);
            seen += 1;
        }
        assert!(seen > 10);
    }

    #[test]
    fn norm_equal_to_a_quadratic_divisor() {
        let (c, q, s) = setup(2);
        let f = c.field();
        // q₀ = (x − a)(x − b) with both fibers rational and split on the spectral curve
        let split: Vec<_> = f
            .elements()
            .filter(|&a| {
                c.places_over(a).is_some_and(|v| v.len() == 2 && v.iter().all(|p| s.fiber(p).is_ok_and(|fb| fb.len() == 2)))
            })
            .take(2)
            .collect();
        let q0 = QuadDifferential::new(&c, Poly::from_roots(f, &split), Poly::zero(f)).unwrap();
        let dq = divisor_of_quaddiff(&c, &q0).unwrap();
        let mut d = DivisorCt::zero();
        for (p, &m) in dq.iter() {
            d.add_place(s.fiber(p).unwrap()[0], m);
        }
        assert_eq!(norm_divisor(&d), dq);
        let rep = classify(&c, &q, &d, 4, 3).unwrap();
        assert!(rep.qspecial);
        assert_eq!(rep.qspecial_dim, 1);
        assert_eq!((rep.degree, rep.membership.k, rep.membership.in_bound), (4, 0, true));
    }

    #[test]
    fn pullback_summand_refines_membership() {
        let (c, q, s) = setup(3);
        let p = crate::bundleengine::higgs::sample_split_base(&s, &mut <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(4));
        let mut d = crate::spectral::pullback_divisor(&s, &DivisorC::place(p)).unwrap();
        for seed in [5, 6, 7] {
            d.add_place(s.sample_place(seed), 1);
        }
        let rep = classify(&c, &q, &d, 4, 9).unwrap();
        let k = 4 * 3 - 4 - rep.degree;
        assert_eq!(rep.membership.refined, Some((k + 2, k)));
    }

    #[test]
    fn deterministic_bytes() {
        let (c, q, s) = setup(3);
        let d = DivisorCt::from_places((0..5).map(|i| s.sample_place(i)));
        let a = serde_json::to_string(&classify(&c, &q, &d, 3, 11).unwrap()).unwrap();
        let b = serde_json::to_string(&classify(&c, &q, &d, 3, 11).unwrap()).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("\"schema\":\"wobbly-report/1\""));
    }

    #[test]
    fn square_roots() {
        let (c, ..) = setup(2);
        // D = P + P̄: L = ∞ ⋅ n for the right n
        let p = c.rational_places().into_iter().find(|p| !p.is_branch() && *p != PlaceC::Infinity).unwrap();
        let d = DivisorC::from_places([p, p.conjugate()]);
        assert!(matches!(square_root_twist(&c, &d, 0, 4), SquareRoot::Found { .. }));
        if let SquareRoot::Found { divisor } = square_root_twist(&c, &d.add(&DivisorC::place(p)), 1, 200) {
            let l = divisor.to_divisor(&c).unwrap();
            let k = DivisorC::single(PlaceC::Infinity, 3);
            assert!(iso_trivial(&c, &l.scale(2).sub(&k).add(&d.add(&DivisorC::place(p)))));
        }
    }
}
