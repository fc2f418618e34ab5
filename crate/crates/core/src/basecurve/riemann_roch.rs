//! Riemann-Roch spaces `L(D)` on the base curve.

use std::collections::BTreeMap;

use super::curve::{HyperellipticCurve, PlaceC};
use super::divisor::DivisorC;
use super::function::FnC;
use super::linsys::Ansatz;
use crate::exactalg::{Fp, Poly};

fn space(curve: &HyperellipticCurve, d: &DivisorC) -> Vec<FnC> {
    let f = curve.field();
    let g = curve.genus() as i64;
    // Denominator c(x) clearing all allowed finite poles.
    let mut k: BTreeMap<Fp, i64> = BTreeMap::new();
    for (p, &m) in d.iter() {
        if let (Some(a), true) = (p.x(), m > 0) {
            let e = p.ramification();
            let need = (m + e - 1) / e;
            let v = k.entry(a).or_insert(0);
            *v = (*v).max(need);
        }
    }
    let mut c = Poly::one(f);
    for (&a, &e) in &k {
        c = &c * &Poly::linear(a).pow(e as u64);
    }
    let dc = c.deg_i64();
    let m_inf = d.mult(&PlaceC::Infinity);
    let ans = Ansatz { da: dc + m_inf.div_euclid(2), db: dc + (m_inf - 2 * g - 1).div_euclid(2) };
    // ord_P(A + B·y) ≥ ord_P(c) − D(P) at every finite place where this is positive.
    let mut conds = Vec::new();
    for (&a, &e) in &k {
        for pl in curve.places_over(a).expect("support places are rational") {
            let r = e * pl.ramification() - d.mult(&pl);
            if r > 0 {
                conds.push((pl, r));
            }
        }
    }
    for (p, &m) in d.iter() {
        if m < 0 && *p != PlaceC::Infinity && !k.contains_key(&p.x().unwrap()) {
            conds.push((*p, -m));
        }
    }
    ans.solve(curve, &conds).into_iter().map(|(a, b)| FnC::new(a, b, c.clone())).collect()
}

/// Basis of `L(D) = {φ : div(φ) + D ≥ 0}`. Checks Riemann-Roch against the
/// canonical class `(2g−2)·∞` before returning.
pub fn rr_space_on_c(curve: &HyperellipticCurve, d: &DivisorC) -> Vec<FnC> {
    let basis = space(curve, d);
    let k = DivisorC::single(PlaceC::Infinity, curve.canonical_degree());
    let dual = space(curve, &k.sub(d)).len() as i64;
    let g = curve.genus() as i64;
    assert_eq!(
        basis.len() as i64 - dual,
        d.degree() - g + 1,
        "Riemann-Roch fails for D = {d}"
    );
    basis
}

pub fn rr_dimension(curve: &HyperellipticCurve, d: &DivisorC) -> usize {
    space(curve, d).len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn canonical_examples() {
        for g in [2usize, 3] {
            let c = HyperellipticCurve::standard(131, g).unwrap();
            assert_eq!(rr_space_on_c(&c, &DivisorC::zero()).len(), 1);
            let k = DivisorC::single(PlaceC::Infinity, c.canonical_degree());
            assert_eq!(rr_space_on_c(&c, &k).len(), g);
            for n in (2 * g as i64 - 1)..(4 * g as i64) {
                assert_eq!(rr_space_on_c(&c, &DivisorC::single(PlaceC::Infinity, n)).len() as i64, n - g as i64 + 1);
            }
        }
    }

    #[test]
    fn basis_functions_lie_in_space() {
        let c = HyperellipticCurve::standard(131, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let mut d = DivisorC::zero();
            for _ in 0..4 {
                d.add_place(c.sample_place_rng(&mut rng), rng.gen_range(-1..=2));
            }
            for phi in rr_space_on_c(&c, &d) {
                for (p, &m) in d.iter() {
                    assert!(phi.ord_at(&c, p) >= -m, "{phi:?} at {p}");
                }
            }
        }
    }

    #[test]
    fn riemann_roch_on_random_divisors() {
        for g in [2usize, 3] {
            let c = HyperellipticCurve::standard(131, g).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(17 + g as u64);
            for _ in 0..100 {
                let target = rng.gen_range(-2..=4 * g as i64);
                let mut d = DivisorC::zero();
                // random signed combination with the requested degree
                let extra = rng.gen_range(0..3);
                for _ in 0..extra {
                    d.add_place(c.sample_place_rng(&mut rng), -1);
                }
                while d.degree() < target {
                    d.add_place(c.sample_place_rng(&mut rng), 1);
                }
                while d.degree() > target {
                    d.add_place(c.sample_place_rng(&mut rng), -1);
                }
                // rr_space_on_c asserts Riemann-Roch internally
                let l = rr_space_on_c(&c, &d).len() as i64;
                if d.degree() < 0 {
                    assert_eq!(l, 0);
                }
            }
        }
    }
}
