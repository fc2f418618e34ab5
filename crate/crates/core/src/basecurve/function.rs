//! Elements `(A + B·y) / c` of the function field of the base curve.

use std::fmt;

use super::curve::{eval_poly_series, HyperellipticCurve, PlaceC};
use super::divisor::DivisorC;
use crate::error::{Result, WobblyError};
use crate::exactalg::{Poly, Series};

#[derive(Clone, PartialEq, Eq)]
pub struct FnC {
    a: Poly,
    b: Poly,
    c: Poly,
}

impl FnC {
    pub fn new(a: Poly, b: Poly, c: Poly) -> Self {
        assert!(!c.is_zero(), "zero denominator");
        let g = a.gcd(&b).gcd(&c);
        let (mut a, mut b, mut c) = (a.div_exact(&g).unwrap(), b.div_exact(&g).unwrap(), c.div_exact(&g).unwrap());
        let s = c.lc().inv().unwrap();
        a = a.scale(s);
        b = b.scale(s);
        c = c.scale(s);
        if a.is_zero() && b.is_zero() {
            c = Poly::one(c.field());
        }
        Self { a, b, c }
    }

    pub fn from_poly(a: Poly) -> Self {
        let f = a.field();
        Self::new(a, Poly::zero(f), Poly::one(f))
    }

    /// The coordinate function `y`.
    pub fn y(curve: &HyperellipticCurve) -> Self {
        let f = curve.field();
        Self::new(Poly::zero(f), Poly::one(f), Poly::one(f))
    }

    pub fn a(&self) -> &Poly {
        &self.a
    }

    pub fn b(&self) -> &Poly {
        &self.b
    }

    pub fn c(&self) -> &Poly {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(&(&self.a * &o.c) + &(&o.a * &self.c), &(&self.b * &o.c) + &(&o.b * &self.c), &self.c * &o.c)
    }

    pub fn neg(&self) -> Self {
        Self { a: -&self.a, b: -&self.b, c: self.c.clone() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self, curve: &HyperellipticCurve) -> Self {
        let a = &(&self.a * &o.a) + &(&(&self.b * &o.b) * curve.f());
        let b = &(&self.a * &o.b) + &(&self.b * &o.a);
        Self::new(a, b, &self.c * &o.c)
    }

    /// `A² − B²f`, the norm of the numerator.
    pub fn numerator_norm(&self, curve: &HyperellipticCurve) -> Poly {
        &(&self.a * &self.a) - &(&(&self.b * &self.b) * curve.f())
    }

    pub fn inv(&self, curve: &HyperellipticCurve) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.numerator_norm(curve);
        Some(Self::new(&self.a * &self.c, -&(&self.b * &self.c), n))
    }

    /// Numerator and denominator expanded at `pl` to relative order `n`.
    fn expand(&self, curve: &HyperellipticCurve, pl: &PlaceC, n: i64) -> (Series, Series) {
        let (x, y) = curve.local_xy(pl, n);
        let num = eval_poly_series(&self.a, &x).add(&eval_poly_series(&self.b, &x).mul(&y));
        (num, eval_poly_series(&self.c, &x))
    }

    /// Series of the function itself at `pl`.
    pub fn series_at(&self, curve: &HyperellipticCurve, pl: &PlaceC, n: i64) -> Option<Series> {
        let (num, den) = self.expand(curve, pl, n);
        num.valuation()?;
        let den = den.truncate(den.val_bound() + num.rel_prec());
        Some(num.mul(&den.inv()?))
    }

    /// Exact valuation at `pl`, retrying at higher precision while the
    /// expansion is indeterminate.
    pub fn ord_at(&self, curve: &HyperellipticCurve, pl: &PlaceC) -> i64 {
        assert!(!self.is_zero(), "valuation of the zero function");
        let mut n = curve.default_precision();
        loop {
            let (num, den) = self.expand(curve, pl, n);
            if let (Some(a), Some(b)) = (num.valuation(), den.valuation()) {
                return a - b;
            }
            n *= 2;
        }
    }

    /// Principal divisor. Errors if zeros or poles sit at points of degree > 1.
    pub fn divisor(&self, curve: &HyperellipticCurve) -> Result<DivisorC> {
        assert!(!self.is_zero());
        let mut d = DivisorC::zero();
        for poly in [self.numerator_norm(curve), self.c.clone()] {
            let roots = rational_fibers(curve, &poly)?;
            for pl in roots {
                if d.mult(&pl) == 0 {
                    d.add_place(pl, self.ord_at(curve, &pl));
                }
            }
        }
        d.add_place(PlaceC::Infinity, self.ord_at(curve, &PlaceC::Infinity));
        Ok(d)
    }
}

/// Places over the roots of `poly`; errors if a root fiber or a factor is
/// not rational. Weierstrass places over roots are included.
pub fn rational_fibers(curve: &HyperellipticCurve, poly: &Poly) -> Result<Vec<PlaceC>> {
    if poly.is_zero() {
        return Err(WobblyError::Invariant("fibers of the zero polynomial".into()));
    }
    let roots = poly.roots();
    let counted: usize = roots.iter().map(|&a| poly.root_multiplicity(a)).sum();
    if counted != poly.degree().unwrap() {
        let mut rest = poly.clone();
        for &a in &roots {
            rest = rest.div_exact(&Poly::linear(a).pow(poly.root_multiplicity(a) as u64)).unwrap();
        }
        let m = rest.smallest_irreducible_factor().unwrap();
        return Err(WobblyError::IrrationalSupport(format!("{m}")));
    }
    let mut out = Vec::new();
    for a in roots {
        let over = curve
            .places_over(a)
            .ok_or_else(|| WobblyError::IrrationalSupport(format!("y^2 - f({a}) over x = {a}")))?;
        out.extend(over);
    }
    Ok(out)
}

impl fmt::Debug for FnC {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + ({})y)/({})", self.a, self.b, self.c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::PrimeField;
    use proptest::prelude::*;

    fn c2() -> HyperellipticCurve {
        HyperellipticCurve::standard(131, 2).unwrap()
    }

    #[test]
    fn ord_examples() {
        let c = c2();
        let f = c.field();
        let a = f.elem(2);
        let b = c.f().eval(a).sqrt().unwrap();
        let xa = FnC::from_poly(Poly::linear(a));
        assert_eq!(xa.ord_at(&c, &PlaceC::Finite { x: a, y: b }), 1);
        let w = f.from_i64(-1);
        assert_eq!(FnC::from_poly(Poly::linear(w)).ord_at(&c, &PlaceC::Weierstrass { x: w }), 2);
        assert_eq!(FnC::y(&c).ord_at(&c, &PlaceC::Infinity), -5);
        assert_eq!(FnC::from_poly(Poly::x(f)).ord_at(&c, &PlaceC::Infinity), -2);
    }

    #[test]
    fn inverse_and_product() {
        let c = c2();
        let f = c.field();
        let phi = FnC::new(Poly::from_i64(f, &[3, 1]), Poly::from_i64(f, &[1]), Poly::from_i64(f, &[0, 1]));
        let one = phi.mul(&phi.inv(&c).unwrap(), &c);
        assert_eq!(one, FnC::from_poly(Poly::one(f)));
    }

    fn small_curve() -> HyperellipticCurve {
        // p = 13 keeps rational factorisation of norms common
        HyperellipticCurve::standard(13, 2).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]
        #[test]
        fn principal_divisors_have_degree_zero(a in proptest::collection::vec(0i64..13, 1..4),
                                               b in proptest::collection::vec(0i64..13, 0..3),
                                               c in proptest::collection::vec(0i64..13, 1..3)) {
            let cur = small_curve();
            let f: PrimeField = cur.field();
            let (pa, pb, pc) = (Poly::from_i64(f, &a), Poly::from_i64(f, &b), Poly::from_i64(f, &c));
            prop_assume!(!pc.is_zero() && !(pa.is_zero() && pb.is_zero()));
            let phi = FnC::new(pa, pb, pc);
            match phi.divisor(&cur) {
                Ok(d) => prop_assert_eq!(d.degree(), 0),
                Err(WobblyError::IrrationalSupport(_)) => {}
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }
}
