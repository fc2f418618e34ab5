//! Rational functions in one variable, kept in lowest terms with monic denominator.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::fp::{Fp, PrimeField};
use super::poly::Poly;

#[derive(Clone, PartialEq, Eq)]
pub struct RatFn {
    num: Poly,
    den: Poly,
}

impl RatFn {
    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            let f = num.field();
            return Self { num, den: Poly::one(f) };
        }
        let g = num.gcd(&den);
        let mut n = num.div_exact(&g).unwrap();
        let mut d = den.div_exact(&g).unwrap();
        let lc = d.lc().inv().unwrap();
        n = n.scale(lc);
        d = d.scale(lc);
        Self { num: n, den: d }
    }

    pub fn from_poly(p: Poly) -> Self {
        let f = p.field();
        Self { num: p, den: Poly::one(f) }
    }

    pub fn zero(f: PrimeField) -> Self {
        Self::from_poly(Poly::zero(f))
    }

    pub fn one(f: PrimeField) -> Self {
        Self::from_poly(Poly::one(f))
    }

    pub fn constant(c: Fp) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn field(&self) -> PrimeField {
        self.num.field()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_poly(&self) -> bool {
        self.den.degree() == Some(0)
    }

    pub fn as_poly(&self) -> Option<Poly> {
        self.is_poly().then(|| self.num.clone())
    }

    pub fn inv(&self) -> Option<Self> {
        (!self.is_zero()).then(|| Self::new(self.den.clone(), self.num.clone()))
    }

    /// Valuation at the finite point `a`.
    pub fn ord_at(&self, a: Fp) -> i64 {
        self.num.root_multiplicity(a) as i64 - self.den.root_multiplicity(a) as i64
    }

    /// Order at infinity in `x`: `deg den − deg num`.
    pub fn ord_inf(&self) -> i64 {
        self.den.deg_i64() - self.num.deg_i64()
    }

    /// If this is `c·x^k` with `k ∈ Z`, return `(c, k)`.
    pub fn as_monomial(&self) -> Option<(Fp, i64)> {
        let nl = self.num.low_degree()?;
        let dl = self.den.low_degree()?;
        if self.num.degree() != Some(nl) || self.den.degree() != Some(dl) {
            return None;
        }
        Some((self.num.lc() / self.den.lc(), nl as i64 - dl as i64))
    }
}

impl fmt::Debug for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_poly() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl Add for &RatFn {
    type Output = RatFn;
    fn add(self, o: &RatFn) -> RatFn {
        if self.den == o.den {
            return RatFn::new(&self.num + &o.num, self.den.clone());
        }
        RatFn::new(&(&self.num * &o.den) + &(&o.num * &self.den), &self.den * &o.den)
    }
}

impl Sub for &RatFn {
    type Output = RatFn;
    fn sub(self, o: &RatFn) -> RatFn {
        self + &(-o)
    }
}

impl Mul for &RatFn {
    type Output = RatFn;
    fn mul(self, o: &RatFn) -> RatFn {
        RatFn::new(&self.num * &o.num, &self.den * &o.den)
    }
}

impl Div for &RatFn {
    type Output = RatFn;
    fn div(self, o: &RatFn) -> RatFn {
        self * &o.inv().expect("division by zero rational function")
    }
}

impl Neg for &RatFn {
    type Output = RatFn;
    fn neg(self) -> RatFn {
        RatFn { num: -&self.num, den: self.den.clone() }
    }
}
