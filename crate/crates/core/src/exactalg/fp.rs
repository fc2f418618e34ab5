//! Prime-field scalars and the quadratic extension used by test oracles.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use rand::Rng;

use crate::error::{Result, WobblyError};

/// The field `F_p` for an odd prime `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if p == 2 {
            return Err(WobblyError::InvalidCurve(
                "characteristic 2 is not supported".into(),
            ));
        }
        if !(3..(1 << 31)).contains(&p) || !is_prime(p) {
            return Err(WobblyError::InvalidCurve(format!("{p} is not an odd prime below 2^31")));
        }
        Ok(Self { p })
    }

    #[inline]
    pub fn p(self) -> u64 {
        self.p
    }

    #[inline]
    pub fn zero(self) -> Fp {
        Fp { v: 0, p: self.p }
    }

    #[inline]
    pub fn one(self) -> Fp {
        Fp { v: 1, p: self.p }
    }

    #[inline]
    pub fn elem(self, v: u64) -> Fp {
        Fp { v: v % self.p, p: self.p }
    }

    pub fn from_i64(self, v: i64) -> Fp {
        Fp { v: v.rem_euclid(self.p as i64) as u64, p: self.p }
    }

    pub fn random<R: Rng + ?Sized>(self, rng: &mut R) -> Fp {
        self.elem(rng.gen_range(0..self.p))
    }

    pub fn random_nonzero<R: Rng + ?Sized>(self, rng: &mut R) -> Fp {
        self.elem(rng.gen_range(1..self.p))
    }

    /// All elements `0, 1, ..., p-1`.
    pub fn elements(self) -> impl Iterator<Item = Fp> {
        (0..self.p).map(move |v| Fp { v, p: self.p })
    }

    /// Smallest quadratic non-residue.
    pub fn non_residue(self) -> Fp {
        self.elements()
            .skip(2)
            .find(|a| a.legendre() == -1)
            .expect("odd prime field has a non-residue")
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Residue modulo an odd prime. The modulus travels with the value.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fp {
    v: u64,
    p: u64,
}

impl Fp {
    #[inline]
    pub fn value(self) -> u64 {
        self.v
    }

    #[inline]
    pub fn field(self) -> PrimeField {
        PrimeField { p: self.p }
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.v == 0
    }

    #[inline]
    pub fn is_one(self) -> bool {
        self.v == 1
    }

    /// Representative in `(-p/2, p/2]`, used for human-facing output.
    pub fn signed(self) -> i64 {
        if self.v > self.p / 2 {
            self.v as i64 - self.p as i64
        } else {
            self.v as i64
        }
    }

    pub fn pow(self, mut e: u64) -> Fp {
        let mut base = self;
        let mut acc = self.field().one();
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    pub fn inv(self) -> Option<Fp> {
        if self.is_zero() {
            None
        } else {
            Some(self.pow(self.p - 2))
        }
    }

    /// Legendre symbol: 0, 1 or -1.
    pub fn legendre(self) -> i8 {
        if self.is_zero() {
            return 0;
        }
        if self.pow((self.p - 1) / 2).is_one() {
            1
        } else {
            -1
        }
    }

    pub fn is_square(self) -> bool {
        self.legendre() >= 0
    }

    /// Tonelli-Shanks square root. Returns the root with the smaller
    /// canonical representative, or `None` for a non-residue.
    pub fn sqrt(self) -> Option<Fp> {
        let f = self.field();
        if self.is_zero() {
            return Some(self);
        }
        if self.legendre() != 1 {
            return None;
        }
        let p = self.p;
        if p % 4 == 3 {
            let r = self.pow((p + 1) / 4);
            return Some(canonical_root(r));
        }
        let mut q = p - 1;
        let mut s = 0u32;
        while q.is_multiple_of(2) {
            q /= 2;
            s += 1;
        }
        let z = f.non_residue();
        let mut m = s;
        let mut c = z.pow(q);
        let mut t = self.pow(q);
        let mut r = self.pow(q.div_ceil(2));
        while !t.is_one() {
            let mut i = 0;
            let mut t2 = t;
            while !t2.is_one() {
                t2 = t2 * t2;
                i += 1;
            }
            let mut b = c;
            for _ in 0..(m - i - 1) {
                b = b * b;
            }
            m = i;
            c = b * b;
            t *= c;
            r *= b;
        }
        Some(canonical_root(r))
    }
}

fn canonical_root(r: Fp) -> Fp {
    let neg = -r;
    if neg.v < r.v {
        neg
    } else {
        r
    }
}

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.v)
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.v)
    }
}

impl Add for Fp {
    type Output = Fp;
    #[inline]
    fn add(self, o: Fp) -> Fp {
        debug_assert_eq!(self.p, o.p);
        let s = self.v + o.v;
        Fp { v: if s >= self.p { s - self.p } else { s }, p: self.p }
    }
}

impl Sub for Fp {
    type Output = Fp;
    #[inline]
    fn sub(self, o: Fp) -> Fp {
        debug_assert_eq!(self.p, o.p);
        Fp { v: if self.v >= o.v { self.v - o.v } else { self.v + self.p - o.v }, p: self.p }
    }
}

impl Mul for Fp {
    type Output = Fp;
    #[inline]
    fn mul(self, o: Fp) -> Fp {
        debug_assert_eq!(self.p, o.p);
        Fp { v: self.v * o.v % self.p, p: self.p }
    }
}

impl Div for Fp {
    type Output = Fp;
    fn div(self, o: Fp) -> Fp {
        self * o.inv().expect("division by zero in F_p")
    }
}

impl Neg for Fp {
    type Output = Fp;
    #[inline]
    fn neg(self) -> Fp {
        Fp { v: if self.v == 0 { 0 } else { self.p - self.v }, p: self.p }
    }
}

impl AddAssign for Fp {
    fn add_assign(&mut self, o: Fp) {
        *self = *self + o;
    }
}

impl SubAssign for Fp {
    fn sub_assign(&mut self, o: Fp) {
        *self = *self - o;
    }
}

impl MulAssign for Fp {
    fn mul_assign(&mut self, o: Fp) {
        *self = *self * o;
    }
}

/// Element `a + b·θ` of `F_p(θ)`, `θ² = n` for the smallest non-residue `n`.
///
/// Only the smoothness and divisor oracles use this type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fp2 {
    pub a: Fp,
    pub b: Fp,
    nr: Fp,
}

impl Fp2 {
    pub fn new(a: Fp, b: Fp) -> Self {
        let nr = a.field().non_residue();
        Self { a, b, nr }
    }

    pub fn from_base(a: Fp) -> Self {
        Self::new(a, a.field().zero())
    }

    /// Construct with a precomputed non-residue (hot loops).
    pub fn with_nr(a: Fp, b: Fp, nr: Fp) -> Self {
        Self { a, b, nr }
    }

    pub fn nr(self) -> Fp {
        self.nr
    }

    pub fn zero_like(self) -> Self {
        let z = self.a.field().zero();
        Self { a: z, b: z, nr: self.nr }
    }

    pub fn one_like(self) -> Self {
        let f = self.a.field();
        Self { a: f.one(), b: f.zero(), nr: self.nr }
    }

    pub fn lift(self, c: Fp) -> Self {
        Self { a: c, b: c.field().zero(), nr: self.nr }
    }

    pub fn is_zero(self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_base(self) -> bool {
        self.b.is_zero()
    }

    pub fn norm(self) -> Fp {
        self.a * self.a - self.nr * self.b * self.b
    }

    pub fn conj(self) -> Self {
        Self { a: self.a, b: -self.b, nr: self.nr }
    }

    pub fn pow(self, e: u128) -> Self {
        let mut base = self;
        let mut acc = self.one_like();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    pub fn inv(self) -> Option<Self> {
        let n = self.norm().inv()?;
        let c = self.conj();
        Some(Self { a: c.a * n, b: c.b * n, nr: self.nr })
    }

    pub fn is_square(self) -> bool {
        if self.is_zero() {
            return true;
        }
        // x is a square in F_{p^2} iff its norm is a square in F_p.
        self.norm().is_square()
    }

    /// Tonelli-Shanks in the multiplicative group of order `p² − 1`.
    pub fn sqrt(self) -> Option<Self> {
        if self.is_zero() {
            return Some(self);
        }
        if !self.is_square() {
            return None;
        }
        let p = self.a.field().p() as u128;
        let order = p * p - 1;
        let mut q = order;
        let mut s = 0u32;
        while q.is_multiple_of(2) {
            q /= 2;
            s += 1;
        }
        let f = self.a.field();
        let mut z = None;
        'outer: for a in f.elements() {
            for b in f.elements().skip(1) {
                let c = Self { a, b, nr: self.nr };
                if !c.is_square() {
                    z = Some(c);
                    break 'outer;
                }
            }
        }
        let z = z.expect("F_{p^2} has non-squares");
        let one = self.one_like();
        let mut m = s;
        let mut c = z.pow(q);
        let mut t = self.pow(q);
        let mut r = self.pow(q.div_ceil(2));
        while t != one {
            let mut i = 0;
            let mut t2 = t;
            while t2 != one {
                t2 = t2 * t2;
                i += 1;
            }
            let mut b = c;
            for _ in 0..(m - i - 1) {
                b = b * b;
            }
            m = i;
            c = b * b;
            t = t * c;
            r = r * b;
        }
        Some(r)
    }
}

impl Add for Fp2 {
    type Output = Fp2;
    fn add(self, o: Fp2) -> Fp2 {
        Fp2 { a: self.a + o.a, b: self.b + o.b, nr: self.nr }
    }
}

impl Sub for Fp2 {
    type Output = Fp2;
    fn sub(self, o: Fp2) -> Fp2 {
        Fp2 { a: self.a - o.a, b: self.b - o.b, nr: self.nr }
    }
}

impl Mul for Fp2 {
    type Output = Fp2;
    fn mul(self, o: Fp2) -> Fp2 {
        Fp2 {
            a: self.a * o.a + self.nr * self.b * o.b,
            b: self.a * o.b + self.b * o.a,
            nr: self.nr,
        }
    }
}

impl Neg for Fp2 {
    type Output = Fp2;
    fn neg(self) -> Fp2 {
        Fp2 { a: -self.a, b: -self.b, nr: self.nr }
    }
}
