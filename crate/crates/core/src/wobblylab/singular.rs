use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{SCHEMA, VERSION};
use crate::basecurve::{rr_dimension, DivisorC, DivisorFile, FnC, HyperellipticCurve, PlaceC, QuadDifferential};
use crate::bundleengine::{direct_image, hom_line_to_e, lattice_of_ct, verify_section};
use crate::exactalg::{Fp, Poly};
use crate::spectral::{build_spectral, pullback_divisor, DivisorCt, FnCt, SpectralCurve};
use crate::{Result, WobblyError};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingularReport {
    pub schema: String,
    pub version: String,
    pub degree: i64,
    pub h0: usize,
    /// Sampled members of the linear series, and how many of them have no
    /// pullback summand over a rational place.
    pub generic_sampled: usize,
    pub generic_clean: usize,
    /// `dim H⁰(K_C L² Λ⁻¹)`, the same for every injection.
    pub dim_v_injection: usize,
    /// `(h⁰ − 1) + dim_v_injection`.
    pub dim_v_l: usize,
    pub dim_v_l_bound: usize,
    /// Effective `P` on which a combination of two injections vanishes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vanishing: Option<DivisorFile>,
    /// `(4g−4−d, 4g−4−d+2·deg P)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub components: Option<(i64, i64)>,
    /// `3g − 3 − h⁰²` in degree `g̃ − 1`, when nonnegative.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_floor: Option<i64>,
}

/// Rational places over the rational roots of the given polynomials, and ∞.
fn places_over_roots(c: &HyperellipticCurve, polys: &[Poly]) -> Vec<PlaceC> {
    let mut out = vec![PlaceC::Infinity];
    for p in polys.iter().filter(|p| !p.is_zero()) {
        for a in p.roots() {
            out.extend(c.places_over(a).unwrap_or_default());
        }
    }
    out.sort();
    out.dedup();
    out
}

fn fn_polys(f: &FnC, c: &HyperellipticCurve) -> [Poly; 2] {
    [f.numerator_norm(c), f.c().clone()]
}

/// Rational base places `P` with `ψ ∈ H⁰(D̃ − π*P)`; inert fibers are skipped.
fn vanishing_places(s: &SpectralCurve, psi: &FnCt, d: &DivisorCt, cands: &[PlaceC]) -> Result<DivisorC> {
    let mut p = DivisorC::zero();
    for &pl in cands {
        if s.fiber(&pl).is_err() {
            continue;
        }
        loop {
            let mut next = p.clone();
            next.add_place(pl, 1);
            let twist = d.sub(&pullback_divisor(s, &next)?);
            if twist.degree() < 0 || !verify_section(s, psi, &twist)? {
                break;
            }
            p = next;
        }
    }
    Ok(p)
}

fn combine(secs: &[FnCt], t: &[Fp]) -> FnCt {
    let mut acc = secs[0].scale(t[0]);
    for (v, &k) in secs.iter().zip(t).skip(1) {
        acc = acc.add(&v.scale(k));
    }
    acc
}

/// Search for a singular wobbly point coming from `|D̃|` with `h⁰ ≥ 2`.
pub fn detect_singular(c: &HyperellipticCurve, q: &QuadDifferential, d: &DivisorCt, effort: usize) -> Result<SingularReport> {
    let s = build_spectral(c, q)?;
    d.check(&s)?;
    if !d.is_effective() {
        return Err(WobblyError::InvalidInput(format!("divisor {d} is not effective")));
    }
    let h0 = lattice_of_ct(&s, d)?.h0();
    if h0 < 2 {
        return Err(WobblyError::NotBrillNoether(h0));
    }
    let g = c.genus() as i64;
    let deg = d.degree();
    let data = direct_image(&s, &DivisorC::zero(), d)?;
    let (_, secs) = hom_line_to_e(&data, &DivisorC::zero())?;
    let lam = data.det_divisor()?;

    // generic members: ψ with Nm(ψ) zero or pole data giving the candidates
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let sampled = effort.max(1);
    let mut clean = 0;
    for _ in 0..sampled {
        let t: Vec<_> = (0..secs.len()).map(|_| c.field().random(&mut rng)).collect();
        let psi = combine(&secs, &t);
        if psi.is_zero() {
            continue;
        }
        let mut polys = fn_polys(&psi.norm(&s), c).to_vec();
        polys.push(Poly::from_roots(c.field(), &d.base_support().iter().filter_map(|p| p.x()).collect::<Vec<_>>()));
        if vanishing_places(&s, &psi, d, &places_over_roots(c, &polys))?.is_zero() {
            clean += 1;
        }
    }

    let k = DivisorC::single(PlaceC::Infinity, c.canonical_degree());
    let dim_v_injection = rr_dimension(c, &k.sub(&lam));
    let dim_v_l = h0 - 1 + dim_v_injection;
    let dim_v_l_bound = h0 + (3 * g - 4 - deg).max(0) as usize;

    // two injections are dependent exactly on the zeros of ψ₁ ∧ ψ₂ as a
    // section of det E
    let wedge = crate::bundleengine::wedge(&secs[0], &secs[1], &s);
    let mut polys = fn_polys(&wedge, c).to_vec();
    polys.push(Poly::from_roots(c.field(), &lam.support().iter().filter_map(|p| p.x()).collect::<Vec<_>>()));
    let cands = places_over_roots(c, &polys);
    let mut vanishing = None;
    'search: for &pl in &cands {
        if s.fiber(&pl).is_err() {
            continue;
        }
        let sub = d.sub(&pullback_divisor(&s, &DivisorC::place(pl))?);
        if sub.degree() < 0 || lattice_of_ct(&s, &sub)?.h0() == 0 {
            continue;
        }
        let f = c.field();
        let ratios = std::iter::once([f.one(), f.zero()]).chain(f.elements().map(|a| [a, f.one()]));
        for t in ratios {
            let psi = combine(&secs[..2], &t);
            if verify_section(&s, &psi, &sub)? {
                let p = vanishing_places(&s, &psi, d, &cands)?;
                vanishing = Some(p);
                break 'search;
            }
        }
    }
    let kd = 4 * g - 4 - deg;
    let components = vanishing.as_ref().map(|p| (kd, kd + 2 * p.degree()));
    let gt = s.genus() as i64;
    let r2 = (h0 * h0) as i64;
    let theta_floor = (deg == gt - 1 && r2 <= 3 * g - 3).then_some(3 * g - 3 - r2);
    Ok(SingularReport {
        schema: SCHEMA.into(),
        version: VERSION.into(),
        degree: deg,
        h0,
        generic_sampled: sampled,
        generic_clean: clean,
        dim_v_injection,
        dim_v_l,
        dim_v_l_bound,
        vanishing: vanishing.as_ref().map(DivisorFile::from_divisor),
        components,
        theta_floor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wobblylab::default_quad;

    #[test]
    fn needs_two_sections() {
        let c = HyperellipticCurve::standard(131, 2).unwrap();
        let q = default_quad(&c).unwrap();
        let s = build_spectral(&c, &q).unwrap();
        let d = DivisorCt::from_places([s.sample_place(1), s.sample_place(2)]);
        assert!(matches!(detect_singular(&c, &q, &d, 2), Err(WobblyError::NotBrillNoether(1))));
    }

    #[test]
    fn finds_vanishing_combination() {
        // h⁰ ≥ 2 in genus 3 at degree 7 is forced by a g¹ pulled back plus points
        let c = HyperellipticCurve::standard(131, 3).unwrap();
        let q = default_quad(&c).unwrap();
        let s = build_spectral(&c, &q).unwrap();
        let mut found = 0;
        for seed in 0..6u64 {
            let mut d = DivisorCt::from_places((0..3).map(|i| s.sample_place(seed * 10 + i)));
            // the hyperelliptic pencil pulls back to a pencil
            d = d.add(&pullback_divisor(&s, &DivisorC::single(PlaceC::Infinity, 2)).unwrap());
            let rep = match detect_singular(&c, &q, &d, 3) {
                Ok(r) => r,
                Err(WobblyError::NotBrillNoether(_)) => continue,
                Err(e) => panic!("{e}"),
            };
            assert!(rep.h0 >= 2);
            if let Some((k1, k2)) = rep.components {
                let p = rep.vanishing.as_ref().unwrap().to_divisor(&c).unwrap();
                assert!(p.degree() >= 1);
                assert_eq!(k2 - k1, 2 * p.degree());
                found += 1;
            }
        }
        assert!(found > 0);
    }
}
