//! Dense univariate polynomials over `F_p`, lowest degree first.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::fp::{Fp, PrimeField};

/// Dense polynomial; the coefficient vector never ends in a zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    field: PrimeField,
    coeffs: Vec<Fp>,
}

impl Poly {
    pub fn new(field: PrimeField, mut coeffs: Vec<Fp>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { field, coeffs }
    }

    pub fn from_i64(field: PrimeField, coeffs: &[i64]) -> Self {
        Self::new(field, coeffs.iter().map(|&c| field.from_i64(c)).collect())
    }

    pub fn zero(field: PrimeField) -> Self {
        Self { field, coeffs: Vec::new() }
    }

    pub fn one(field: PrimeField) -> Self {
        Self::constant(field.one())
    }

    pub fn constant(c: Fp) -> Self {
        Self::new(c.field(), vec![c])
    }

    pub fn x(field: PrimeField) -> Self {
        Self::monomial(field.one(), 1)
    }

    pub fn monomial(c: Fp, k: usize) -> Self {
        let f = c.field();
        let mut coeffs = vec![f.zero(); k + 1];
        coeffs[k] = c;
        Self::new(f, coeffs)
    }

    /// `x - a`.
    pub fn linear(a: Fp) -> Self {
        Self::new(a.field(), vec![-a, a.field().one()])
    }

    pub fn from_roots(field: PrimeField, roots: &[Fp]) -> Self {
        roots.iter().fold(Self::one(field), |acc, &r| &acc * &Self::linear(r))
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        self.field
    }

    #[inline]
    pub fn coeffs(&self) -> &[Fp] {
        &self.coeffs
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    #[inline]
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with `-1` for zero; convenient in bound arithmetic.
    pub fn deg_i64(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn coeff(&self, i: usize) -> Fp {
        self.coeffs.get(i).copied().unwrap_or(self.field.zero())
    }

    pub fn lc(&self) -> Fp {
        self.coeffs.last().copied().unwrap_or(self.field.zero())
    }

    pub fn is_monic(&self) -> bool {
        self.lc().is_one()
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(self.lc().inv().unwrap())
    }

    pub fn scale(&self, c: Fp) -> Self {
        Self::new(self.field, self.coeffs.iter().map(|&a| a * c).collect())
    }

    /// Multiply by `x^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![self.field.zero(); k];
        coeffs.extend_from_slice(&self.coeffs);
        Self { field: self.field, coeffs }
    }

    /// Lowest exponent with nonzero coefficient.
    pub fn low_degree(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn eval(&self, x: Fp) -> Fp {
        self.coeffs.iter().rev().fold(self.field.zero(), |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        let f = self.field;
        Self::new(
            f,
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * f.elem(i as u64))
                .collect(),
        )
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.field);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let f = self.field;
        let dd = d.degree().unwrap();
        if self.deg_i64() < dd as i64 {
            return (Poly::zero(f), self.clone());
        }
        let inv = d.lc().inv().unwrap();
        let mut r = self.coeffs.clone();
        let mut q = vec![f.zero(); r.len() - dd];
        for i in (0..q.len()).rev() {
            let c = r[i + dd] * inv;
            q[i] = c;
            if c.is_zero() {
                continue;
            }
            for (j, &dc) in d.coeffs.iter().enumerate() {
                r[i + j] -= c * dc;
            }
        }
        r.truncate(dd);
        (Poly::new(f, q), Poly::new(f, r))
    }

    pub fn rem(&self, d: &Poly) -> Poly {
        self.div_rem(d).1
    }

    /// Exact division; `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (q, r) = self.div_rem(d);
        r.is_zero().then_some(q)
    }

    /// Monic gcd (zero if both are zero).
    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Extended gcd: returns `(g, s, t)` with `s·self + t·other = g`, `g` monic.
    pub fn xgcd(&self, other: &Poly) -> (Poly, Poly, Poly) {
        let f = self.field;
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (Poly::one(f), Poly::zero(f));
        let (mut t0, mut t1) = (Poly::zero(f), Poly::one(f));
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            r0 = std::mem::replace(&mut r1, r);
            let s = &s0 - &(&q * &s1);
            s0 = std::mem::replace(&mut s1, s);
            let t = &t0 - &(&q * &t1);
            t0 = std::mem::replace(&mut t1, t);
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let inv = r0.lc().inv().unwrap();
        (r0.scale(inv), s0.scale(inv), t0.scale(inv))
    }

    pub fn pow_mod(&self, mut e: u128, m: &Poly) -> Poly {
        let mut base = self.rem(m);
        let mut acc = Poly::one(self.field).rem(m);
        while e > 0 {
            if e & 1 == 1 {
                acc = (&acc * &base).rem(m);
            }
            base = (&base * &base).rem(m);
            e >>= 1;
        }
        acc
    }

    /// Multiplicity of the root `a`.
    pub fn root_multiplicity(&self, a: Fp) -> usize {
        if self.is_zero() {
            return usize::MAX;
        }
        let lin = Poly::linear(a);
        let mut p = self.clone();
        let mut m = 0;
        while let Some(q) = p.div_exact(&lin) {
            p = q;
            m += 1;
        }
        m
    }

    pub fn is_squarefree(&self) -> bool {
        if self.is_zero() {
            return false;
        }
        self.gcd(&self.derivative()).degree() == Some(0)
    }

    /// Distinct roots in `F_p`, sorted by canonical value.
    pub fn roots(&self) -> Vec<Fp> {
        if self.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        let f = self.field;
        let x = Poly::x(f);
        let xp = x.pow_mod(f.p() as u128, self);
        let g = self.gcd(&(&xp - &x));
        let mut out = Vec::new();
        split_linear_product(&g, &mut out, 0);
        out.sort_by_key(|r| r.value());
        out
    }

    /// A monic irreducible factor of least degree (Cantor-Zassenhaus).
    pub fn smallest_irreducible_factor(&self) -> Option<Poly> {
        let deg = self.degree()?;
        if deg == 0 {
            return None;
        }
        let f = self.field;
        let x = Poly::x(f);
        let mut xq = x.clone();
        let rest = self.monic();
        for d in 1..=deg {
            xq = xq.pow_mod(f.p() as u128, &rest);
            let g = rest.gcd(&(&xq - &x));
            if g.degree().unwrap_or(0) > 0 {
                return Some(equal_degree_factor(&g, d));
            }
            if rest.degree() == Some(0) {
                break;
            }
        }
        Some(rest)
    }

    /// Substitute `x -> a·x + b`.
    pub fn affine_substitute(&self, a: Fp, b: Fp) -> Poly {
        let lin = Poly::new(self.field, vec![b, a]);
        self.coeffs
            .iter()
            .rev()
            .fold(Poly::zero(self.field), |acc, &c| &(&acc * &lin) + &Poly::constant(c))
    }

    /// Reverse with respect to degree `n`: `x^n · p(1/x)`.
    pub fn reverse(&self, n: usize) -> Poly {
        assert!(self.deg_i64() <= n as i64);
        let mut c = vec![self.field.zero(); n + 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            c[n - i] = a;
        }
        Poly::new(self.field, c)
    }
}

fn split_linear_product(g: &Poly, out: &mut Vec<Fp>, mut delta: u64) {
    let f = g.field();
    match g.degree() {
        None | Some(0) => {}
        Some(1) => out.push(-g.coeff(0) / g.coeff(1)),
        Some(_) => {
            let e = (f.p() - 1) / 2;
            loop {
                let shift = Poly::new(f, vec![f.elem(delta), f.one()]);
                delta += 1;
                let h = &shift.pow_mod(e as u128, g) - &Poly::one(f);
                let d = g.gcd(&h);
                let dd = d.degree().unwrap_or(0);
                if dd > 0 && dd < g.degree().unwrap() {
                    let other = g.div_exact(&d).unwrap();
                    split_linear_product(&d, out, delta);
                    split_linear_product(&other, out, delta);
                    return;
                }
                // Guard against pathological inputs; every δ in F_p fails
                // only when g is a single linear factor.
                if delta > 4 * f.p() + 64 {
                    panic!("root splitting failed to converge");
                }
            }
        }
    }
}

fn equal_degree_factor(g: &Poly, d: usize) -> Poly {
    let f = g.field();
    let n = g.degree().unwrap();
    if n == d {
        return g.monic();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ n as u64);
    let qd = (f.p() as u128).pow(d as u32);
    let e = (qd - 1) / 2;
    loop {
        let a = Poly::new(f, (0..n).map(|_| f.random(&mut rng)).collect());
        if a.degree().unwrap_or(0) == 0 {
            continue;
        }
        let h = &a.pow_mod(e, g) - &Poly::one(f);
        let c = g.gcd(&h);
        let cd = c.degree().unwrap_or(0);
        if cd > 0 && cd < n {
            let smaller = if cd <= n - cd { c } else { g.div_exact(&c).unwrap() };
            return equal_degree_factor(&smaller, d);
        }
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 if c.is_one() => write!(f, "x")?,
                1 => write!(f, "{c}*x")?,
                _ if c.is_one() => write!(f, "x^{i}")?,
                _ => write!(f, "{c}*x^{i}")?,
            }
        }
        Ok(())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let f = self.field;
        Poly::new(f, (0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let f = self.field;
        Poly::new(f, (0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        let f = self.field;
        if self.is_zero() || o.is_zero() {
            return Poly::zero(f);
        }
        let mut c = vec![f.zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(f, c)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.field, self.coeffs.iter().map(|&c| -c).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $m(self, o: Poly) -> Poly {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

#[cfg(test)]
mod tests {
    use super::*;

    fn f131() -> PrimeField {
        PrimeField::new(131).unwrap()
    }

    #[test]
    fn canonical_form_drops_trailing_zeros() {
        let p = Poly::from_i64(f131(), &[1, 2, 0, 0]);
        assert_eq!(p.degree(), Some(1));
        assert_eq!(Poly::from_i64(f131(), &[0, 0]).degree(), None);
    }

    #[test]
    fn x5_plus_1_is_squarefree_and_x5_is_not() {
        let f = f131();
        assert!(Poly::from_i64(f, &[1, 0, 0, 0, 0, 1]).is_squarefree());
        assert!(!Poly::from_i64(f, &[0, 0, 0, 0, 0, 1]).is_squarefree());
    }

    #[test]
    fn roots_of_product_of_linears() {
        let f = f131();
        let rs = [f.elem(3), f.elem(17), f.elem(100)];
        let p = &Poly::from_roots(f, &rs) * &Poly::from_i64(f, &[1, 0, 1]);
        let mut expect: Vec<_> = rs.to_vec();
        // x^2 + 1 splits iff -1 is a square; 131 ≡ 3 mod 4 so it does not.
        expect.sort_by_key(|r| r.value());
        assert_eq!(p.roots(), expect);
    }

    #[test]
    fn div_rem_reconstructs() {
        let f = f131();
        let a = Poly::from_i64(f, &[5, 0, 3, 7, 1, 9]);
        let b = Poly::from_i64(f, &[2, 1, 4]);
        let (q, r) = a.div_rem(&b);
        assert_eq!(&(&q * &b) + &r, a);
        assert!(r.deg_i64() < 2);
    }

    #[test]
    fn xgcd_bezout() {
        let f = f131();
        let a = Poly::from_i64(f, &[1, 2, 3, 4]);
        let b = Poly::from_i64(f, &[7, 0, 1]);
        let (g, s, t) = a.xgcd(&b);
        assert_eq!(&(&s * &a) + &(&t * &b), g);
    }

    #[test]
    fn smallest_factor_of_irreducible_quadratic() {
        let f = f131();
        // x^2 + 1 is irreducible mod 131.
        let p = &Poly::from_i64(f, &[1, 0, 1]) * &Poly::from_i64(f, &[2, 0, 0, 1, 0, 1]);
        let fac = p.smallest_irreducible_factor().unwrap();
        assert!(p.div_exact(&fac).is_some());
        assert!(fac.roots().is_empty() || fac.degree() == Some(1));
    }
}
