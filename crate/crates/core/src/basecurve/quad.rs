//! Quadratic differentials `q = (A + B·y)(dx/y)²` and Q-speciality.

use serde::{Deserialize, Serialize};

use super::curve::{HyperellipticCurve, PlaceC};
use super::divisor::DivisorC;
use super::function::{rational_fibers, FnC};
use super::linsys::Ansatz;
use crate::error::{Result, WobblyError};
use crate::exactalg::{Fp, Poly};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadDifferential {
    a: Poly,
    b: Poly,
}

impl QuadDifferential {
    pub fn new(curve: &HyperellipticCurve, a: Poly, b: Poly) -> Result<Self> {
        let g = curve.genus() as i64;
        if a.deg_i64() > 2 * g - 2 {
            return Err(WobblyError::InvalidInput(format!("deg A = {} exceeds 2g-2 = {}", a.deg_i64(), 2 * g - 2)));
        }
        if b.deg_i64() > g - 3 {
            return Err(WobblyError::InvalidInput(format!("deg B = {} exceeds g-3 = {}", b.deg_i64(), g - 3)));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &Poly {
        &self.a
    }

    pub fn b(&self) -> &Poly {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// `A + B·y` as a function.
    pub fn branch_function(&self) -> FnC {
        let f = self.a.field();
        FnC::new(self.a.clone(), self.b.clone(), Poly::one(f))
    }

    pub fn scale(&self, c: Fp) -> Self {
        Self { a: self.a.scale(c), b: self.b.scale(c) }
    }

    /// Dimension `3g − 3` of the space of quadratic differentials.
    pub fn space_dimension(curve: &HyperellipticCurve) -> usize {
        3 * curve.genus() - 3
    }

    /// Coordinates against `{xⁱ}_{i ≤ 2g−2} ∪ {xʲ y}_{j ≤ g−3}`.
    pub fn coordinates(&self, curve: &HyperellipticCurve) -> Vec<Fp> {
        let g = curve.genus();
        let mut v: Vec<Fp> = (0..=2 * g - 2).map(|i| self.a.coeff(i)).collect();
        v.extend((0..g.saturating_sub(2)).map(|j| self.b.coeff(j)));
        v
    }

    pub fn from_coordinates(curve: &HyperellipticCurve, v: &[Fp]) -> Self {
        let g = curve.genus();
        let f = curve.field();
        Self { a: Poly::new(f, v[..2 * g - 1].to_vec()), b: Poly::new(f, v[2 * g - 1..].to_vec()) }
    }

    /// `q′ = c·q` for some scalar `c ≠ 0`.
    pub fn proportional_to(&self, o: &Self) -> bool {
        if self.is_zero() || o.is_zero() {
            return false;
        }
        let (s, t) = (self.lead_coord(), o.lead_coord());
        let c = s / t;
        self.a == o.a.scale(c) && self.b == o.b.scale(c)
    }

    fn lead_coord(&self) -> Fp {
        if !self.a.is_zero() {
            self.a.lc()
        } else {
            self.b.lc()
        }
    }

    /// `ord_∞(A + B·y)`; the two parts have orders of different parity.
    pub fn branch_ord_inf(&self, curve: &HyperellipticCurve) -> i64 {
        let g = curve.genus() as i64;
        let oa = if self.a.is_zero() { i64::MAX } else { -2 * self.a.deg_i64() };
        let ob = if self.b.is_zero() { i64::MAX } else { -2 * self.b.deg_i64() - 2 * g - 1 };
        oa.min(ob)
    }
}

/// `div(q)`: zeros of `A + B·y` plus the pole-corrected order at infinity.
pub fn divisor_of_quaddiff(curve: &HyperellipticCurve, q: &QuadDifferential) -> Result<DivisorC> {
    if q.is_zero() {
        return Err(WobblyError::InvalidInput("zero quadratic differential".into()));
    }
    let h = q.branch_function();
    let n = h.numerator_norm(curve);
    let mut d = DivisorC::zero();
    if n.degree() != Some(0) {
        for pl in rational_fibers(curve, &n)? {
            let m = h.ord_at(curve, &pl);
            if m != 0 {
                d.add_place(pl, m);
            }
        }
    }
    d.add_place(PlaceC::Infinity, 2 * curve.canonical_degree() + q.branch_ord_inf(curve));
    if d.degree() != 2 * curve.canonical_degree() || !d.iter().all(|(_, &m)| m > 0) {
        return Err(WobblyError::Invariant(format!("div(q) = {d} is not effective of degree 4g-4")));
    }
    Ok(d)
}

/// Basis of `{q : div(q) − D ≥ 0}`.
pub fn qspecial_system(curve: &HyperellipticCurve, d: &DivisorC) -> Vec<QuadDifferential> {
    let g = curve.genus() as i64;
    let m_inf = d.mult(&PlaceC::Infinity).max(0);
    let ans = Ansatz {
        da: (2 * g - 2).min((4 * g - 4 - m_inf).div_euclid(2)),
        db: (g - 3).min((2 * g - 5 - m_inf).div_euclid(2)),
    };
    let conds: Vec<(PlaceC, i64)> =
        d.iter().filter(|(p, &m)| **p != PlaceC::Infinity && m > 0).map(|(p, &m)| (*p, m)).collect();
    ans.solve(curve, &conds).into_iter().map(|(a, b)| QuadDifferential { a, b }).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadFile {
    #[serde(rename = "A")]
    pub a: Vec<i64>,
    #[serde(rename = "B", default)]
    pub b: Vec<i64>,
}

impl QuadFile {
    pub fn to_quad(&self, curve: &HyperellipticCurve) -> Result<QuadDifferential> {
        let f = curve.field();
        let q = QuadDifferential::new(curve, Poly::from_i64(f, &self.a), Poly::from_i64(f, &self.b))?;
        if q.is_zero() {
            return Err(WobblyError::InvalidInput("q = 0".into()));
        }
        Ok(q)
    }

    pub fn from_quad(q: &QuadDifferential) -> Self {
        let conv = |p: &Poly| p.coeffs().iter().map(|c| c.value() as i64).collect();
        Self { a: conv(&q.a), b: conv(&q.b) }
    }
}
