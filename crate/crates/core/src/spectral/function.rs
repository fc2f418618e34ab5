//! Functions `(a₀ + a₁y + a₂w + a₃yw) / c` on the spectral curve.

use std::fmt;

use super::curve::{PlaceCt, SpectralCurve};
use super::divisor::DivisorCt;
use crate::basecurve::curve::eval_poly_series;
use crate::basecurve::function::rational_fibers;
use crate::basecurve::{FnC, PlaceC};
use crate::error::Result;
use crate::exactalg::{Poly, Series};

#[derive(Clone, PartialEq, Eq)]
pub struct FnCt {
    a: [Poly; 4],
    c: Poly,
}

impl FnCt {
    pub fn new(a: [Poly; 4], c: Poly) -> Self {
        assert!(!c.is_zero(), "zero denominator");
        let g = a.iter().fold(c.clone(), |acc, p| acc.gcd(p));
        let mut a = a.map(|p| p.div_exact(&g).unwrap());
        let mut c = c.div_exact(&g).unwrap();
        let s = c.lc().inv().unwrap();
        for p in a.iter_mut() {
            *p = p.scale(s);
        }
        c = c.scale(s);
        Self { a, c }
    }

    pub fn one(s: &SpectralCurve) -> Self {
        let f = s.base().field();
        Self::from_parts(&FnC::from_poly(Poly::one(f)), &FnC::from_poly(Poly::zero(f)))
    }

    /// `N₀ + N₁·w`.
    pub fn from_parts(n0: &FnC, n1: &FnC) -> Self {
        let c = n0.c().gcd(n1.c());
        let l = &n0.c().div_exact(&c).unwrap() * n1.c();
        let m0 = l.div_exact(n0.c()).unwrap();
        let m1 = l.div_exact(n1.c()).unwrap();
        Self::new([n0.a() * &m0, n0.b() * &m0, n1.a() * &m1, n1.b() * &m1], l)
    }

    /// The coordinate `w`.
    pub fn w(s: &SpectralCurve) -> Self {
        let f = s.base().field();
        Self::from_parts(&FnC::from_poly(Poly::zero(f)), &FnC::from_poly(Poly::one(f)))
    }

    pub fn from_base(p: &FnC) -> Self {
        let f = p.a().field();
        Self::from_parts(p, &FnC::from_poly(Poly::zero(f)))
    }

    /// Coordinates over `{1, y, w, yw}` with common denominator.
    pub fn coeffs(&self) -> &[Poly; 4] {
        &self.a
    }

    pub fn den(&self) -> &Poly {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|p| p.is_zero())
    }

    pub fn parts(&self) -> (FnC, FnC) {
        (
            FnC::new(self.a[0].clone(), self.a[1].clone(), self.c.clone()),
            FnC::new(self.a[2].clone(), self.a[3].clone(), self.c.clone()),
        )
    }

    pub fn add(&self, o: &Self) -> Self {
        let (p0, p1) = self.parts();
        let (q0, q1) = o.parts();
        Self::from_parts(&p0.add(&q0), &p1.add(&q1))
    }

    pub fn scale(&self, k: crate::exactalg::Fp) -> Self {
        Self::new(self.a.clone().map(|p| p.scale(k)), self.c.clone())
    }

    pub fn mul(&self, o: &Self, s: &SpectralCurve) -> Self {
        let c = s.base();
        let (p0, p1) = self.parts();
        let (q0, q1) = o.parts();
        let n0 = p0.mul(&q0, c).add(&p1.mul(&q1, c).mul(s.h(), c));
        let n1 = p0.mul(&q1, c).add(&p1.mul(&q0, c));
        Self::from_parts(&n0, &n1)
    }

    pub fn involution(&self) -> Self {
        let (p0, p1) = self.parts();
        Self::from_parts(&p0, &p1.neg())
    }

    /// `N₀² − N₁²h`.
    pub fn norm(&self, s: &SpectralCurve) -> FnC {
        let c = s.base();
        let (p0, p1) = self.parts();
        p0.mul(&p0, c).sub(&p1.mul(&p1, c).mul(s.h(), c))
    }

    pub fn inv(&self, s: &SpectralCurve) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm(s).inv(s.base())?;
        Some(self.involution().mul(&Self::from_base(&n), s))
    }

    fn expand(&self, s: &SpectralCurve, pl: &PlaceCt, n: i64) -> (Series, Series) {
        let l = s.local(pl, n);
        let yw = l.y.mul(&l.w);
        let terms = [None, Some(&l.y), Some(&l.w), Some(&yw)];
        let mut num = Series::zero(s.base().field(), crate::basecurve::curve::EXACT);
        for (p, t) in self.a.iter().zip(terms) {
            if p.is_zero() {
                continue;
            }
            let v = eval_poly_series(p, &l.x);
            num = num.add(&match t {
                None => v,
                Some(t) => v.mul(t),
            });
        }
        (num, eval_poly_series(&self.c, &l.x))
    }

    /// Series at a degree-1 place.
    pub fn series_at(&self, s: &SpectralCurve, pl: &PlaceCt, n: i64) -> Option<Series> {
        let (num, den) = self.expand(s, pl, n);
        num.valuation()?;
        let den = den.truncate(den.val_bound() + num.rel_prec());
        Some(num.mul(&den.inv()?))
    }

    pub fn ord_at(&self, s: &SpectralCurve, pl: &PlaceCt) -> i64 {
        assert!(!self.is_zero(), "valuation of the zero function");
        if *pl == PlaceCt::InertInfinity {
            // unramified: min over the parts, w contributing ord_∞(h)/2
            let (p0, p1) = self.parts();
            let c = s.base();
            let o0 = if p0.is_zero() { i64::MAX } else { p0.ord_at(c, &PlaceC::Infinity) };
            let o1 = if p1.is_zero() { i64::MAX } else { p1.ord_at(c, &PlaceC::Infinity) + s.h_ord_inf() / 2 };
            return o0.min(o1);
        }
        let mut n = s.base().default_precision();
        loop {
            let (num, den) = self.expand(s, pl, n);
            if let (Some(a), Some(b)) = (num.valuation(), den.valuation()) {
                return a - b;
            }
            n *= 2;
        }
    }

    /// Principal divisor; places are found over the rational roots of the
    /// norm's numerator and denominator.
    pub fn divisor(&self, s: &SpectralCurve) -> Result<DivisorCt> {
        let c = s.base();
        let nm = self.norm(s);
        let mut base_places: Vec<PlaceC> = Vec::new();
        for poly in [nm.numerator_norm(c), nm.c().clone(), self.c.clone()] {
            if poly.degree().unwrap_or(0) > 0 {
                base_places.extend(rational_fibers(c, &poly)?);
            }
        }
        base_places.push(PlaceC::Infinity);
        base_places.sort();
        base_places.dedup();
        let mut d = DivisorCt::zero();
        for bp in base_places {
            for q in s.fiber(&bp)? {
                d.add_place(q, self.ord_at(s, &q));
            }
        }
        Ok(d)
    }
}

impl fmt::Debug for FnCt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + ({})y + ({})w + ({})yw)/({})", self.a[0], self.a[1], self.a[2], self.a[3], self.c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basecurve::{HyperellipticCurve, QuadDifferential};
    use crate::spectral::divisor::norm_divisor;
    use crate::error::WobblyError;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(g: usize) -> SpectralCurve {
        let c = HyperellipticCurve::standard(131, g).unwrap();
        let f = c.field();
        let q = if g == 2 {
            QuadDifferential::new(&c, Poly::from_i64(f, &[0, -2, 1]), Poly::zero(f)).unwrap()
        } else {
            QuadDifferential::new(&c, Poly::from_i64(f, &[3, 1, 0, 5]), Poly::from_i64(f, &[2])).unwrap()
        };
        SpectralCurve::build(&c, &q).unwrap()
    }

    #[test]
    fn w_has_simple_zeros_at_ramification() {
        let s = setup(2);
        let w = FnCt::w(&s);
        for pl in s.rational_places() {
            let expect = match pl {
                PlaceCt::Ramified { base } if base != PlaceC::Infinity => 1,
                PlaceCt::Split { base: PlaceC::Infinity, .. } => -2,
                _ => 0,
            };
            assert_eq!(w.ord_at(&s, &pl), expect, "{pl}");
        }
    }

    #[test]
    fn ramified_infinity_orders() {
        let s = setup(3);
        assert_eq!(s.infinity_fiber(), super::super::curve::InfinityFiber::Ramified);
        let r = PlaceCt::Ramified { base: PlaceC::Infinity };
        assert_eq!(FnCt::from_base(&FnC::from_poly(Poly::x(s.base().field()))).ord_at(&s, &r), -4);
        // w has ord −(4g−5) at ∞ of C, ramification doubles then halves
        assert_eq!(FnCt::w(&s).ord_at(&s, &r), -7);
    }

    #[test]
    fn principal_divisors_degree_zero_and_norm() {
        // products of atoms x − a, w, v + w, whose supports are usually rational
        let s = setup(2);
        let c = s.base();
        let f = c.field();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut done = 0;
        for _ in 0..200 {
            let mut phi = FnCt::one(&s);
            for _ in 0..rng.gen_range(1..5) {
                let atom = match rng.gen_range(0..3) {
                    0 => FnCt::from_base(&FnC::from_poly(Poly::linear(f.random(&mut rng)))),
                    1 => FnCt::w(&s),
                    _ => FnCt::from_parts(&FnC::from_poly(Poly::constant(f.random(&mut rng))), &FnC::from_poly(Poly::one(f))),
                };
                let atom = if rng.gen_bool(0.4) { atom.inv(&s).unwrap() } else { atom };
                phi = phi.mul(&atom, &s);
            }
            match phi.divisor(&s) {
                Ok(d) => {
                    assert_eq!(d.degree(), 0, "{phi:?}");
                    // Nm(div φ) = div(Nm φ)
                    assert_eq!(norm_divisor(&d), phi.norm(&s).divisor(c).unwrap());
                    done += 1;
                }
                Err(WobblyError::IrrationalSupport(_)) | Err(WobblyError::InertPlace(_)) => {}
                Err(e) => panic!("{e}"),
            }
        }
        assert!(done >= 20, "{done}");
    }

    #[test]
    fn inverse() {
        let s = setup(3);
        let f = s.base().field();
        let phi = FnCt::new(
            [Poly::from_i64(f, &[1, 2]), Poly::from_i64(f, &[3]), Poly::from_i64(f, &[0, 1]), Poly::from_i64(f, &[5])],
            Poly::from_i64(f, &[2, 1]),
        );
        assert_eq!(phi.mul(&phi.inv(&s).unwrap(), &s), FnCt::one(&s));
    }
}
