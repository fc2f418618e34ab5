//! Truncated Laurent series in a local uniformizer.
//!
//! A series stores its valuation, the coefficients from the valuation
//! upward, and an absolute precision `prec`: every coefficient of exponent
//! `< prec` is known exactly, nothing beyond is claimed. Arithmetic tracks
//! precision loss so callers can detect when a result is indeterminate.

use std::fmt;

use super::fp::{Fp, PrimeField};
use super::poly::Poly;
use crate::error::{Result, WobblyError};

#[derive(Clone, PartialEq, Eq)]
pub struct Series {
    field: PrimeField,
    /// Exponent of `coeffs[0]`; equals `prec` when no nonzero term is known.
    val: i64,
    coeffs: Vec<Fp>,
    prec: i64,
}

impl Series {
    fn normalize(field: PrimeField, mut val: i64, mut coeffs: Vec<Fp>, prec: i64) -> Self {
        let keep = (prec - val).max(0) as usize;
        coeffs.truncate(keep);
        let lead = coeffs.iter().position(|c| !c.is_zero());
        match lead {
            None => Self { field, val: prec, coeffs: Vec::new(), prec },
            Some(k) => {
                coeffs.drain(..k);
                val += k as i64;
                while coeffs.last().is_some_and(|c| c.is_zero()) {
                    coeffs.pop();
                }
                Self { field, val, coeffs, prec }
            }
        }
    }

    /// Build from explicit coefficients starting at exponent `val`.
    pub fn from_coeffs(field: PrimeField, val: i64, coeffs: Vec<Fp>, prec: i64) -> Self {
        Self::normalize(field, val, coeffs, prec)
    }

    pub fn zero(field: PrimeField, prec: i64) -> Self {
        Self { field, val: prec, coeffs: Vec::new(), prec }
    }

    pub fn one(field: PrimeField, prec: i64) -> Self {
        Self::monomial(field.one(), 0, prec)
    }

    pub fn monomial(c: Fp, k: i64, prec: i64) -> Self {
        Self::normalize(c.field(), k, vec![c], prec)
    }

    pub fn from_poly(p: &Poly, prec: i64) -> Self {
        Self::normalize(p.field(), 0, p.coeffs().to_vec(), prec)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    /// Valuation if a nonzero term is known, else `None` (zero to precision).
    pub fn valuation(&self) -> Option<i64> {
        (!self.coeffs.is_empty()).then_some(self.val)
    }

    /// Lower bound on the valuation (equals it when known).
    pub fn val_bound(&self) -> i64 {
        self.val
    }

    pub fn is_zero_to_prec(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `t^k`; panics if `k` is beyond the known precision.
    pub fn coeff(&self, k: i64) -> Fp {
        assert!(k < self.prec, "coefficient t^{k} beyond precision {}", self.prec);
        if k < self.val {
            return self.field.zero();
        }
        self.coeffs.get((k - self.val) as usize).copied().unwrap_or(self.field.zero())
    }

    pub fn lead(&self) -> Option<Fp> {
        self.coeffs.first().copied()
    }

    /// Relative precision (number of coefficients known past the valuation).
    pub fn rel_prec(&self) -> i64 {
        self.prec - self.val
    }

    pub fn truncate(&self, prec: i64) -> Self {
        Self::normalize(self.field, self.val, self.coeffs.clone(), prec.min(self.prec))
    }

    pub fn scale(&self, c: Fp) -> Self {
        Self::normalize(self.field, self.val, self.coeffs.iter().map(|&a| a * c).collect(), self.prec)
    }

    /// Multiply by `t^k`.
    pub fn shift(&self, k: i64) -> Self {
        Self { field: self.field, val: self.val + k, coeffs: self.coeffs.clone(), prec: self.prec + k }
    }

    pub fn add(&self, o: &Series) -> Self {
        let prec = self.prec.min(o.prec);
        let lo = self.val.min(o.val);
        if lo >= prec {
            return Self::zero(self.field, prec);
        }
        let end = |x: &Series| if x.coeffs.is_empty() { lo } else { x.val + x.coeffs.len() as i64 };
        let ext = end(self).max(end(o));
        let n = (prec.min(ext) - lo).max(0) as usize;
        let mut c = vec![self.field.zero(); n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            let k = (self.val - lo) as usize + i;
            if k < n {
                c[k] += a;
            }
        }
        for (i, &a) in o.coeffs.iter().enumerate() {
            let k = (o.val - lo) as usize + i;
            if k < n {
                c[k] += a;
            }
        }
        Self::normalize(self.field, lo, c, prec)
    }

    pub fn neg(&self) -> Self {
        self.scale(-self.field.one())
    }

    pub fn sub(&self, o: &Series) -> Self {
        self.add(&o.neg())
    }

    pub fn add_const(&self, c: Fp) -> Self {
        self.add(&Series::monomial(c, 0, self.prec.max(1)))
    }

    pub fn mul(&self, o: &Series) -> Self {
        let val = self.val + o.val;
        let prec = (self.val + o.prec).min(o.val + self.prec);
        if self.coeffs.is_empty() || o.coeffs.is_empty() {
            return Self::zero(self.field, prec);
        }
        let n = ((prec - val).max(0) as usize).min(self.coeffs.len() + o.coeffs.len() - 1);
        let mut c = vec![self.field.zero(); n];
        for (i, &a) in self.coeffs.iter().enumerate().take(n) {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in o.coeffs.iter().enumerate().take(n - i) {
                c[i + j] += a * b;
            }
        }
        Self::normalize(self.field, val, c, prec)
    }

    /// Multiplicative inverse; `None` if no nonzero term is known.
    pub fn inv(&self) -> Option<Self> {
        let lead = self.lead()?;
        assert!(self.rel_prec() < 1 << 24, "inverting a series of unbounded precision; truncate first");
        let rel = self.rel_prec() as usize;
        let li = lead.inv().unwrap();
        let mut r = vec![self.field.zero(); rel];
        if rel > 0 {
            r[0] = li;
        }
        for k in 1..rel {
            let mut s = self.field.zero();
            for i in 1..=k.min(self.coeffs.len() - 1) {
                s += self.coeffs[i] * r[k - i];
            }
            r[k] = -s * li;
        }
        Some(Self::normalize(self.field, -self.val, r, -self.val + rel as i64))
    }

    pub fn pow(&self, e: i64) -> Option<Self> {
        if e < 0 {
            return self.inv()?.pow(-e);
        }
        if e == 0 {
            return Some(Series::one(self.field, self.rel_prec().max(1)));
        }
        let mut acc: Option<Series> = None;
        let mut base = self.clone();
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base),
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Square root whose leading coefficient is `root_lead`.
    pub fn sqrt_with_lead(&self, root_lead: Fp) -> Result<Self> {
        let lead = self.lead().ok_or(WobblyError::NonSquareLeading)?;
        if self.val % 2 != 0 || root_lead * root_lead != lead {
            return Err(WobblyError::NonSquareLeading);
        }
        let rel = self.rel_prec() as usize;
        let two_r0_inv = (root_lead + root_lead).inv().unwrap();
        let mut r = vec![self.field.zero(); rel];
        if rel > 0 {
            r[0] = root_lead;
        }
        for k in 1..rel {
            let mut s = self.coeffs.get(k).copied().unwrap_or(self.field.zero());
            for i in 1..k {
                s -= r[i] * r[k - i];
            }
            r[k] = s * two_r0_inv;
        }
        let v = self.val / 2;
        Ok(Self::normalize(self.field, v, r, v + rel as i64))
    }

    /// Square root with the canonical root of the leading coefficient.
    pub fn sqrt(&self) -> Result<Self> {
        let lead = self.lead().ok_or(WobblyError::NonSquareLeading)?;
        if self.val % 2 != 0 {
            return Err(WobblyError::NonSquareLeading);
        }
        let r0 = lead.sqrt().ok_or(WobblyError::NonSquareLeading)?;
        self.sqrt_with_lead(r0)
    }

    /// Substitute `t = inner(s)`; `inner` must have positive valuation.
    pub fn compose(&self, inner: &Series) -> Self {
        let vi = inner.valuation().expect("substituting a series that is zero to precision");
        assert!(vi >= 1, "inner series must have positive valuation");
        let rel = self.rel_prec();
        if self.coeffs.is_empty() {
            return Self::zero(self.field, self.prec.saturating_mul(vi).max(inner.prec));
        }
        // Horner on the power-series part t^{-val}·self.
        let cap = vi * rel;
        let mut acc = Series::zero(self.field, cap);
        for k in (0..self.coeffs.len()).rev() {
            acc = acc.mul(inner).add_const(self.coeffs[k]).truncate(cap);
        }
        let acc = acc.truncate(cap);
        let factor = inner.pow(self.val).expect("nonzero inner");
        acc.mul(&factor)
    }

    /// Reversion helper: given `h(t) = c₁t + …` (valuation exactly 1), find
    /// `t(s)` with `h(t(s)) = s²`, to absolute precision `prec` in `s`.
    pub fn solve_square_reversion(h: &Series, prec: i64) -> Result<Self> {
        if h.valuation() != Some(1) {
            return Err(WobblyError::Invariant("reversion needs a simple zero".into()));
        }
        let f = h.field;
        let c1 = h.lead().unwrap();
        let c1_inv = c1.inv().unwrap();
        let rest = h.sub(&Series::monomial(c1, 1, h.prec));
        let s2 = Series::monomial(f.one(), 2, prec);
        let mut t = s2.scale(c1_inv);
        // Each pass fixes at least one more coefficient of t.
        for _ in 0..prec.max(2) {
            let next = s2.sub(&rest.compose(&t)).scale(c1_inv).truncate(prec);
            if next == t {
                break;
            }
            t = next;
        }
        Ok(t.truncate(prec))
    }
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}t^{}", c, self.val + i as i64)?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(t^{})", self.prec)
    }
}

/// Square root of `s` to absolute order `n`, canonical leading root.
pub fn series_sqrt(s: &Series, n: i64) -> Result<Series> {
    let lead = s.lead().ok_or(WobblyError::NonSquareLeading)?;
    if s.val_bound() % 2 != 0 || !lead.is_square() {
        return Err(WobblyError::NonSquareLeading);
    }
    let r = s.sqrt()?;
    Ok(r.truncate(n.min(r.prec())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f() -> PrimeField {
        PrimeField::new(131).unwrap()
    }

    #[test]
    fn sqrt_of_one() {
        let s = Series::one(f(), 6);
        let r = series_sqrt(&s, 6).unwrap();
        assert_eq!(r, Series::one(f(), 6));
    }

    #[test]
    fn sqrt_of_one_plus_t() {
        let fld = f();
        let s = Series::from_poly(&Poly::from_i64(fld, &[1, 1]), 4);
        let r = series_sqrt(&s, 4).unwrap();
        let half = fld.elem(2).inv().unwrap();
        let expect = [fld.one(), half, -fld.elem(8).inv().unwrap(), fld.elem(16).inv().unwrap()];
        for (k, e) in expect.iter().enumerate() {
            assert_eq!(r.coeff(k as i64), *e);
        }
        let sq = r.mul(&r);
        assert!(sq.sub(&s).val_bound() >= 4);
    }

    #[test]
    fn sqrt_rejects_non_residue() {
        let fld = f();
        let nr = fld.non_residue();
        let s = Series::monomial(nr, 0, 5);
        assert_eq!(series_sqrt(&s, 5), Err(WobblyError::NonSquareLeading));
        let odd = Series::monomial(fld.one(), 1, 5);
        assert_eq!(series_sqrt(&odd, 5), Err(WobblyError::NonSquareLeading));
    }

    #[test]
    fn inverse_times_self_is_one() {
        let fld = f();
        let s = Series::from_coeffs(fld, -2, vec![fld.elem(3), fld.elem(5), fld.elem(7)], 6);
        let i = s.inv().unwrap();
        let one = s.mul(&i);
        assert_eq!(one.valuation(), Some(0));
        assert_eq!(one.coeff(0), fld.one());
        for k in 1..one.prec() {
            assert!(one.coeff(k).is_zero());
        }
    }

    #[test]
    fn reversion_of_quadratic() {
        let fld = f();
        // h(t) = 2t + t^2 + 5t^3
        let h = Series::from_coeffs(fld, 1, vec![fld.elem(2), fld.elem(1), fld.elem(5)], 30);
        let t = Series::solve_square_reversion(&h, 20).unwrap();
        let back = h.compose(&t);
        let target = Series::monomial(fld.one(), 2, 20);
        assert!(back.sub(&target).val_bound() >= 20);
    }

    proptest! {
        #[test]
        fn sqrt_squares_back(c in proptest::collection::vec(0u64..131, 1..8), r0 in 1u64..131, n in 3i64..12) {
            let fld = f();
            let mut coeffs = vec![fld.elem(r0) * fld.elem(r0)];
            coeffs.extend(c.iter().map(|&v| fld.elem(v)));
            let s = Series::from_coeffs(fld, 0, coeffs, n);
            let r = series_sqrt(&s, n).unwrap();
            prop_assert!(r.mul(&r).sub(&s).val_bound() >= n);
        }
    }
}
