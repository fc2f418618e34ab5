//! The curve `y² = f(x)` with `f` monic squarefree of odd degree, its
//! degree-1 places and local expansions.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WobblyError};
use crate::exactalg::{Fp, Poly, PrimeField, Series};

/// Stand-in for "exact": a precision no computation reaches.
pub(crate) const EXACT: i64 = 1 << 40;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HyperellipticCurve {
    field: PrimeField,
    genus: usize,
    f: Poly,
}

impl HyperellipticCurve {
    /// Check and build. `f` is given lowest coefficient first.
    pub fn validate(p: u64, genus: usize, f: &[i64]) -> Result<Self> {
        let field = PrimeField::new(p)?;
        Self::new(field, genus, Poly::from_i64(field, f))
    }

    pub fn new(field: PrimeField, genus: usize, f: Poly) -> Result<Self> {
        if genus < 2 {
            return Err(WobblyError::InvalidCurve(format!("genus {genus} < 2")));
        }
        if f.degree() != Some(2 * genus + 1) {
            return Err(WobblyError::InvalidCurve(format!(
                "deg f = {} but genus {genus} needs degree {}",
                f.deg_i64(),
                2 * genus + 1
            )));
        }
        if !f.is_monic() {
            return Err(WobblyError::InvalidCurve("f is not monic".into()));
        }
        if !f.is_squarefree() {
            return Err(WobblyError::InvalidCurve(format!("f = {f} is not squarefree")));
        }
        Ok(Self { field, genus, f })
    }

    /// The fixed test curves: `x⁵ + 1` in genus 2, `x⁷ + 2x + 1` in genus 3.
    pub fn standard(p: u64, genus: usize) -> Result<Self> {
        match genus {
            2 => Self::validate(p, 2, &[1, 0, 0, 0, 0, 1]),
            3 => Self::validate(p, 3, &[1, 2, 0, 0, 0, 0, 0, 1]),
            _ => Err(WobblyError::InvalidCurve(format!("no standard curve in genus {genus}"))),
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn f(&self) -> &Poly {
        &self.f
    }

    /// Degree `2g − 2` of the canonical class `(2g−2)·∞`.
    pub fn canonical_degree(&self) -> i64 {
        2 * self.genus as i64 - 2
    }

    /// Default truncation order for local expansions.
    pub fn default_precision(&self) -> i64 {
        4 * self.genus as i64 + 8
    }

    /// Places lying over the affine point `x = a`, if rational.
    pub fn places_over(&self, a: Fp) -> Option<Vec<PlaceC>> {
        let v = self.f.eval(a);
        if v.is_zero() {
            return Some(vec![PlaceC::Weierstrass { x: a }]);
        }
        let b = v.sqrt()?;
        Some(vec![PlaceC::Finite { x: a, y: b }, PlaceC::Finite { x: a, y: -b }])
    }

    /// Every degree-1 place, sorted.
    pub fn rational_places(&self) -> Vec<PlaceC> {
        let mut out: Vec<PlaceC> = self
            .field
            .elements()
            .filter_map(|a| self.places_over(a))
            .flatten()
            .collect();
        out.push(PlaceC::Infinity);
        out.sort();
        out
    }

    /// Uniformly random rational place, deterministic in `seed`.
    pub fn sample_place(&self, seed: u64) -> PlaceC {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_place_rng(&mut rng)
    }

    pub fn sample_place_rng<R: Rng + ?Sized>(&self, rng: &mut R) -> PlaceC {
        // Rejection sampling over x ∈ F_p ∪ {∞} with a branch bit keeps the
        // distribution uniform over places without building the list.
        let p = self.field.p();
        loop {
            let k = rng.gen_range(0..=p);
            let sign: bool = rng.gen();
            if k == p {
                if sign {
                    return PlaceC::Infinity;
                }
                continue;
            }
            let a = self.field.elem(k);
            match self.places_over(a) {
                None => continue,
                Some(v) if v.len() == 1 => {
                    if sign {
                        return v[0];
                    }
                }
                Some(v) => return v[usize::from(sign)],
            }
        }
    }

    pub fn check_place(&self, pl: &PlaceC) -> Result<()> {
        match *pl {
            PlaceC::Infinity => Ok(()),
            PlaceC::Weierstrass { x } => {
                if self.f.eval(x).is_zero() {
                    Ok(())
                } else {
                    Err(WobblyError::InvalidInput(format!("x = {x} is not a branch point")))
                }
            }
            PlaceC::Finite { x, y } => {
                if y.is_zero() || y * y != self.f.eval(x) {
                    Err(WobblyError::InvalidInput(format!("({x}, {y}) is not a non-branch point of the curve")))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Expansions of `x` and `y` in the canonical uniformizer at `pl`,
    /// each correct to relative order `n`.
    pub fn local_xy(&self, pl: &PlaceC, n: i64) -> (Series, Series) {
        let f = self.field;
        let g = self.genus as i64;
        match *pl {
            PlaceC::Finite { x: a, y: b } => {
                let x = Series::from_coeffs(f, 0, vec![a, f.one()], EXACT);
                let fa = Series::from_poly(&self.f.affine_substitute(f.one(), a), n);
                let y = fa.sqrt_with_lead(b).expect("f(a) = b² at a finite place");
                (x, y)
            }
            PlaceC::Weierstrass { x: a } => {
                let fz = Series::from_poly(&self.f.affine_substitute(f.one(), a), n + 2);
                let z = Series::solve_square_reversion(&fz, n + 2).expect("simple root of f");
                (z.add_const(a), Series::monomial(f.one(), 1, EXACT))
            }
            PlaceC::Infinity => {
                let x = Series::monomial(f.one(), -2, EXACT);
                // t^{4g+2} f(t^{-2}) = rev(f)(t²)
                let rev = self.f.reverse(2 * self.genus + 1);
                let mut c = vec![f.zero(); 2 * rev.coeffs().len()];
                for (i, &v) in rev.coeffs().iter().enumerate() {
                    c[2 * i] = v;
                }
                let s = Series::from_coeffs(f, 0, c, n).sqrt_with_lead(f.one()).unwrap();
                (x, s.shift(-(2 * g + 1)))
            }
        }
    }
}

/// Evaluate a polynomial at a series by Horner's rule.
pub fn eval_poly_series(p: &Poly, x: &Series) -> Series {
    let f = p.field();
    let mut acc = Series::zero(f, EXACT);
    for &c in p.coeffs().iter().rev() {
        acc = acc.mul(x).add(&Series::monomial(c, 0, EXACT));
    }
    acc
}

/// A degree-1 place of the base curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlaceC {
    Finite { x: Fp, y: Fp },
    Weierstrass { x: Fp },
    Infinity,
}

impl PlaceC {
    pub fn x(&self) -> Option<Fp> {
        match *self {
            PlaceC::Finite { x, .. } | PlaceC::Weierstrass { x } => Some(x),
            PlaceC::Infinity => None,
        }
    }

    pub fn is_branch(&self) -> bool {
        !matches!(self, PlaceC::Finite { .. })
    }

    /// The hyperelliptic involution `y ↦ −y`.
    pub fn conjugate(&self) -> PlaceC {
        match *self {
            PlaceC::Finite { x, y } => PlaceC::Finite { x, y: -y },
            other => other,
        }
    }

    /// `ord_P(x − a)` for the `x`-coordinate of `P`.
    pub fn ramification(&self) -> i64 {
        if self.is_branch() {
            2
        } else {
            1
        }
    }
}

impl fmt::Display for PlaceC {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlaceC::Finite { x, y } => write!(f, "({x},{y})"),
            PlaceC::Weierstrass { x } => write!(f, "W({x})"),
            PlaceC::Infinity => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveFile {
    pub p: u64,
    pub genus: usize,
    pub f: Vec<i64>,
}

impl CurveFile {
    pub fn to_curve(&self) -> Result<HyperellipticCurve> {
        if self.f.last() != Some(&1) {
            return Err(WobblyError::InvalidCurve("leading coefficient of f must be 1".into()));
        }
        HyperellipticCurve::validate(self.p, self.genus, &self.f)
    }

    pub fn from_curve(c: &HyperellipticCurve) -> Self {
        Self { p: c.field.p(), genus: c.genus, f: c.f.coeffs().iter().map(|v| v.value() as i64).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c2() -> HyperellipticCurve {
        HyperellipticCurve::standard(131, 2).unwrap()
    }

    #[test]
    fn validation() {
        assert!(HyperellipticCurve::validate(131, 2, &[1, 0, 0, 0, 0, 1]).is_ok());
        assert!(matches!(
            HyperellipticCurve::validate(131, 2, &[0, 0, 0, 0, 0, 1]),
            Err(WobblyError::InvalidCurve(_))
        ));
        assert!(matches!(HyperellipticCurve::validate(131, 1, &[1, 0, 1, 1]), Err(WobblyError::InvalidCurve(_))));
        assert!(matches!(HyperellipticCurve::validate(2, 2, &[1, 0, 0, 0, 0, 1]), Err(WobblyError::InvalidCurve(_))));
        assert!(matches!(HyperellipticCurve::validate(131, 2, &[1, 0, 0, 0, 1]), Err(WobblyError::InvalidCurve(_))));
        assert!(HyperellipticCurve::standard(131, 3).is_ok());
        for p in [131, 139, 151] {
            assert!(HyperellipticCurve::standard(p, 2).is_ok());
            assert!(HyperellipticCurve::standard(p, 3).is_ok());
        }
    }

    #[test]
    fn local_expansions_satisfy_curve_equation() {
        let c = c2();
        let n = 12;
        for pl in c.rational_places().into_iter().step_by(7) {
            let (x, y) = c.local_xy(&pl, n);
            let lhs = y.mul(&y);
            let rhs = eval_poly_series(c.f(), &x);
            let d = lhs.sub(&rhs);
            assert!(d.is_zero_to_prec(), "{pl}: {d:?}");
            assert!(d.prec() >= lhs.val_bound() + n - 1, "{pl}: precision {}", d.prec());
        }
    }

    #[test]
    fn place_count_within_weil_bound() {
        for p in [131u64, 139, 151] {
            let c = HyperellipticCurve::standard(p, 2).unwrap();
            // independent count: Σ (1 + legendre(f(x))) + 1
            let fld = c.field();
            let brute: i64 = fld.elements().map(|a| 1 + c.f().eval(a).legendre() as i64).sum::<i64>() + 1;
            let n = c.rational_places().len() as i64;
            assert_eq!(n, brute);
            let bound = 2.0 * 2.0 * (p as f64).sqrt();
            assert!(((n - p as i64 - 1) as f64).abs() <= bound);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_roughly_uniform() {
        let c = HyperellipticCurve::standard(13, 2).unwrap();
        assert_eq!(c.sample_place(5), c.sample_place(5));
        let places = c.rational_places();
        let mut counts = std::collections::BTreeMap::new();
        let trials = 200 * places.len();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..trials {
            *counts.entry(c.sample_place_rng(&mut rng)).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), places.len());
        let e = 200.0;
        let chi2: f64 = counts.values().map(|&k| (k as f64 - e).powi(2) / e).sum();
        // df = places − 1; generous cutoff
        assert!(chi2 < 3.0 * places.len() as f64, "chi2 = {chi2}");
    }
}
