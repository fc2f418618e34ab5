//! Linear conditions on numerators `A + B·y` with bounded degrees.

use super::curve::{HyperellipticCurve, PlaceC};
#[cfg(test)]
use super::curve::eval_poly_series;
use crate::exactalg::{linalg::Matrix, Fp, Poly, Series};

/// Unknowns `[a_0 … a_da, b_0 … b_db]`; a negative bound drops that part.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Ansatz {
    pub da: i64,
    pub db: i64,
}

impl Ansatz {
    pub fn len_a(&self) -> usize {
        (self.da + 1).max(0) as usize
    }

    pub fn len(&self) -> usize {
        self.len_a() + (self.db + 1).max(0) as usize
    }

    pub fn split(&self, curve: &HyperellipticCurve, v: &[Fp]) -> (Poly, Poly) {
        let f = curve.field();
        let na = self.len_a();
        (Poly::new(f, v[..na].to_vec()), Poly::new(f, v[na..].to_vec()))
    }

    /// Rows forcing the coefficients of `t^0 … t^{r−1}` of `A + B·y` at the
    /// finite place `pl` to vanish.
    pub fn vanishing_rows(&self, curve: &HyperellipticCurve, pl: &PlaceC, r: i64) -> Vec<Vec<Fp>> {
        assert!(!matches!(pl, PlaceC::Infinity));
        if r <= 0 || self.len() == 0 {
            return Vec::new();
        }
        let f = curve.field();
        let (x, y) = curve.local_xy(pl, r + 2);
        let mut monos: Vec<Series> = Vec::with_capacity(self.len());
        let mut xp = Series::one(f, super::curve::EXACT);
        let top = self.da.max(self.db).max(0);
        let mut powers = Vec::new();
        for _ in 0..=top {
            powers.push(xp.clone());
            xp = xp.mul(&x);
        }
        for i in 0..self.len_a() {
            monos.push(powers[i].clone());
        }
        for j in 0..(self.db + 1).max(0) as usize {
            monos.push(powers[j].mul(&y));
        }
        (0..r)
            .map(|k| {
                monos
                    .iter()
                    .map(|s| {
                        assert!(s.prec() > k, "expansion too short at {pl}");
                        s.coeff(k)
                    })
                    .collect()
            })
            .collect()
    }

    /// Basis of numerators satisfying `ord_P(A + B·y) ≥ r_P` at each listed
    /// finite place.
    pub fn solve(&self, curve: &HyperellipticCurve, conds: &[(PlaceC, i64)]) -> Vec<(Poly, Poly)> {
        let n = self.len();
        if n == 0 {
            return Vec::new();
        }
        let mut m = Matrix::zeros(curve.field(), 0, n);
        for (pl, r) in conds {
            for row in self.vanishing_rows(curve, pl, *r) {
                m.push_row(row);
            }
        }
        m.kernel_basis().iter().map(|v| self.split(curve, v)).collect()
    }
}

/// Evaluate `A + B·y` at a place as a series (used by tests and checks).
#[cfg(test)]
pub(crate) fn numerator_series(curve: &HyperellipticCurve, a: &Poly, b: &Poly, pl: &PlaceC, n: i64) -> Series {
    let (x, y) = curve.local_xy(pl, n);
    eval_poly_series(a, &x).add(&eval_poly_series(b, &x).mul(&y))
}
