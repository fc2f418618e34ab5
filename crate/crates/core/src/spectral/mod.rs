//! Smooth SL₂ spectral curves `w² = A + B·y` over the base curve.

pub mod curve;
pub mod divisor;
pub mod function;

pub use curve::{smoothness_obstruction, InfinityFiber, LocalCt, PlaceCt, SpectralCurve};
pub use divisor::{
    divisor_ct_from_file, divisor_ct_to_file, involution_divisor, is_qspecial_spectral, norm_divisor,
    pullback_divisor, pullback_summand, DivisorCt,
};
pub use function::FnCt;

use crate::basecurve::{HyperellipticCurve, QuadDifferential};
use crate::error::Result;

/// Build the spectral curve of `q`, rejecting singular ones.
pub fn build_spectral(c: &HyperellipticCurve, q: &QuadDifferential) -> Result<SpectralCurve> {
    SpectralCurve::build(c, q)
}

#[cfg(test)]
mod oracle_tests {
    //! Brute-force smoothness check over all points with coordinates in
    //! `F_{p²}`, compared with the symbolic certificate.

    use super::curve::obstruction;
    use super::*;
    use crate::exactalg::{Fp, Fp2, Poly, PrimeField};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ev(p: &Poly, x: Fp2) -> Fp2 {
        p.coeffs().iter().rev().fold(x.zero_like(), |acc, &c| acc * x + x.lift(c))
    }

    struct Oracle {
        roots: Vec<Fp2>,
        singular_x: Vec<Fp2>,
        infinity: bool,
    }

    fn oracle(c: &HyperellipticCurve, q: &QuadDifferential, nr: Fp) -> Oracle {
        let fld = c.field();
        let (a, b, f) = (q.a(), q.b(), c.f());
        let (da, db, df) = (a.derivative(), b.derivative(), f.derivative());
        let mut singular_x = Vec::new();
        let mut roots = Vec::new();
        for u in fld.elements() {
            for v in fld.elements() {
                let x = Fp2::with_nr(u, v, nr);
                roots.push(x);
                let fx = ev(f, x);
                let Some(y) = fx.sqrt() else { continue };
                if fx.is_zero() {
                    if ev(a, x).is_zero() && ev(b, x).is_zero() {
                        singular_x.push(x);
                    }
                    continue;
                }
                for eta in [y, -y] {
                    let h = ev(a, x) + ev(b, x) * eta;
                    if !h.is_zero() {
                        continue;
                    }
                    let two_eta_inv = (eta + eta).inv().unwrap();
                    let dh = ev(&da, x) + ev(&db, x) * eta + ev(b, x) * ev(&df, x) * two_eta_inv;
                    if dh.is_zero() {
                        singular_x.push(x);
                    }
                }
            }
        }
        let g = c.genus() as i64;
        let infinity = a.deg_i64() <= 2 * g - 3 && (b.is_zero() || b.deg_i64() <= g - 4);
        Oracle { roots, singular_x, infinity }
    }

    fn random_poly(fld: PrimeField, deg: i64, rng: &mut ChaCha8Rng) -> Poly {
        if deg < 0 {
            return Poly::zero(fld);
        }
        Poly::new(fld, (0..=deg).map(|_| fld.random(rng)).collect())
    }

    fn random_instance(fld: PrimeField, rng: &mut ChaCha8Rng) -> (HyperellipticCurve, QuadDifferential) {
        let g = rng.gen_range(2..=4usize);
        let c = loop {
            let mut f = random_poly(fld, 2 * g as i64, rng);
            f = &f + &Poly::monomial(fld.one(), 2 * g + 1);
            if let Ok(c) = HyperellipticCurve::new(fld, g, f) {
                break c;
            }
        };
        let (gi, f) = (g as i64, c.f().clone());
        let kind = rng.gen_range(0..6);
        let (mut a, mut b) = (random_poly(fld, 2 * gi - 2, rng), random_poly(fld, gi - 3, rng));
        match kind {
            0 => {}
            1 => {
                // double root
                let r = Poly::linear(fld.random(rng));
                a = &(&r * &r) * &random_poly(fld, 2 * gi - 4, rng);
            }
            2 => {
                // root at a branch point of the base curve, if any
                if let Some(&r) = f.roots().first() {
                    a = &Poly::linear(r) * &random_poly(fld, 2 * gi - 3, rng);
                    if rng.gen_bool(0.5) {
                        b = &b - &Poly::constant(b.eval(r));
                    }
                }
            }
            3 => {
                // low degree: trouble at infinity
                a = random_poly(fld, rng.gen_range(0..=2 * gi - 3), rng);
                b = random_poly(fld, gi - 4, rng);
            }
            4 => {
                // common factor of A and B
                if g == 4 {
                    let r = Poly::linear(fld.random(rng));
                    a = &r * &random_poly(fld, 2 * gi - 3, rng);
                    b = r.scale(fld.random_nonzero(rng));
                }
            }
            _ => {
                // tangency: force h(P) = 0 and dh(P) = 0 at a rational non-branch point
                let x0 = fld.random(rng);
                if let Some(y0) = c.f().eval(x0).sqrt().filter(|y| !y.is_zero()) {
                    let lin = Poly::linear(x0);
                    let bv = b.eval(x0);
                    let db = b.derivative().eval(x0);
                    let fp = c.f().derivative().eval(x0);
                    // A ≡ −B·y (mod (x−x0)²) along the branch through (x0, y0)
                    let a0 = -(bv * y0);
                    let a1 = -(db * y0 + bv * fp / (y0 + y0));
                    let target = Poly::new(fld, vec![a0 - a1 * x0, a1]);
                    a = &(&(&lin * &lin) * &random_poly(fld, 2 * gi - 4, rng)) + &target;
                }
            }
        }
        let q = QuadDifferential::new(&c, a, b).unwrap();
        (c, q)
    }

    #[test]
    fn symbolic_certificate_matches_enumeration() {
        let fld = PrimeField::new(23).unwrap();
        let nr = fld.non_residue();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let (mut checked, mut smooth, mut singular) = (0, 0, 0);
        while checked < 220 {
            let (c, q) = random_instance(fld, &mut rng);
            if q.is_zero() {
                continue;
            }
            let cert = smoothness_obstruction(&c, &q);
            let o = oracle(&c, &q, nr);
            match &cert {
                None => {
                    assert!(o.singular_x.is_empty() && !o.infinity, "missed singularity: f={} q=({}, {})", c.f(), q.a(), q.b());
                    smooth += 1;
                }
                Some(m) if m == "infinity" => {
                    assert!(o.infinity && o.singular_x.is_empty(), "f={} q=({}, {}) sing={:?}", c.f(), q.a(), q.b(), o.singular_x);
                    singular += 1;
                }
                Some(_) => {
                    let m = obstruction(&c, &q).unwrap().unwrap();
                    // the offending point is visible when x and y both lie in F_{p²}
                    let visible = o.roots.iter().any(|&x| ev(&m, x).is_zero() && ev(c.f(), x).is_square());
                    let hit = o.singular_x.iter().any(|&x| ev(&m, x).is_zero());
                    assert!(hit || !visible, "certificate {cert:?} not confirmed: f={} q=({}, {})", c.f(), q.a(), q.b());
                    singular += 1;
                }
            }
            checked += 1;
        }
        assert!(smooth >= 30 && singular >= 30, "smooth {smooth}, singular {singular}");
    }
}
