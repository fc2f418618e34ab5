//! Polynomial matrices: column reduction to weak Popov form, Laurent
//! matrices, and Gauss-Jordan over `F_p(x)`.

use std::fmt;

use super::fp::{Fp, PrimeField};
use super::poly::Poly;
use super::ratfn::RatFn;
use crate::error::{Result, WobblyError};

#[derive(Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<Poly>,
}

impl PolyMatrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self { field, rows, cols, data: vec![Poly::zero(field); rows * cols] }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, Poly::one(field));
        }
        m
    }

    pub fn from_columns(field: PrimeField, rows: usize, cols: Vec<Vec<Poly>>) -> Self {
        let mut m = Self::zeros(field, rows, cols.len());
        for (j, c) in cols.into_iter().enumerate() {
            assert_eq!(c.len(), rows);
            for (i, p) in c.into_iter().enumerate() {
                m.set(i, j, p);
            }
        }
        m
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Poly) {
        self.data[i * self.cols + j] = p;
    }

    pub fn column(&self, j: usize) -> Vec<Poly> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<Poly>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn mul(&self, o: &PolyMatrix) -> PolyMatrix {
        assert_eq!(self.cols, o.rows);
        let mut m = PolyMatrix::zeros(self.field, self.rows, o.cols);
        for i in 0..self.rows {
            for j in 0..o.cols {
                let mut acc = Poly::zero(self.field);
                for k in 0..self.cols {
                    acc = &acc + &(self.get(i, k) * o.get(k, j));
                }
                m.set(i, j, acc);
            }
        }
        m
    }

    pub fn eval(&self, x: Fp) -> super::linalg::Matrix {
        let mut m = super::linalg::Matrix::zeros(self.field, self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j).eval(x));
            }
        }
        m
    }

    /// Degree of column `j` (`-1` for a zero column).
    pub fn col_degree(&self, j: usize) -> i64 {
        (0..self.rows).map(|i| self.get(i, j).deg_i64()).max().unwrap_or(-1)
    }

    /// Row index of the last entry attaining the column degree.
    pub fn leading_position(&self, j: usize) -> Option<usize> {
        let d = self.col_degree(j);
        if d < 0 {
            return None;
        }
        (0..self.rows).rev().find(|&i| self.get(i, j).deg_i64() == d)
    }

    pub fn to_ratmat(&self) -> Vec<Vec<RatFn>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| RatFn::from_poly(self.get(i, j).clone())).collect())
            .collect()
    }

    /// Determinant via elimination over `F_p(x)`.
    pub fn determinant(&self) -> Poly {
        assert_eq!(self.rows, self.cols);
        let d = ratmat_det(&self.to_ratmat());
        d.as_poly().expect("determinant of a polynomial matrix is a polynomial")
    }

    pub fn is_column_reduced(&self) -> bool {
        let mut seen = vec![false; self.rows];
        for j in 0..self.cols {
            match self.leading_position(j) {
                None => return false,
                Some(lp) if seen[lp] => return false,
                Some(lp) => seen[lp] = true,
            }
        }
        true
    }
}

impl fmt::Debug for PolyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| format!("{}", self.get(i, j))).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Output of [`weak_popov_reduce`].
#[derive(Clone, Debug)]
pub struct ReducedBasis {
    /// `r × r` column-reduced basis of the column module.
    pub basis: PolyMatrix,
    /// Cofactors: `generators · cofactors = basis`.
    pub cofactors: PolyMatrix,
}

/// Column reduction (Mulders-Storjohann) of a generating set to a basis in
/// weak Popov form. Only unimodular column operations are applied.
pub fn weak_popov_reduce(g: &PolyMatrix, r: usize) -> Result<ReducedBasis> {
    let f = g.field();
    let n = g.cols();
    let mut m = g.clone();
    let mut u = PolyMatrix::identity(f, n);
    loop {
        let mut by_pos: Vec<Option<usize>> = vec![None; m.rows()];
        let mut clash = None;
        for j in 0..n {
            if let Some(lp) = m.leading_position(j) {
                match by_pos[lp] {
                    None => by_pos[lp] = Some(j),
                    Some(k) => {
                        clash = Some((k, j));
                        break;
                    }
                }
            }
        }
        let Some((a, b)) = clash else { break };
        // Reduce the column of higher degree by the other.
        let (hi, lo) = if m.col_degree(a) >= m.col_degree(b) { (a, b) } else { (b, a) };
        let lp = m.leading_position(hi).unwrap();
        let shift = (m.col_degree(hi) - m.col_degree(lo)) as usize;
        let c = m.get(lp, hi).lc() / m.get(lp, lo).lc();
        let factor = Poly::monomial(c, shift);
        for i in 0..m.rows() {
            let v = m.get(i, hi) - &(&factor * m.get(i, lo));
            m.set(i, hi, v);
        }
        for i in 0..u.rows() {
            let v = u.get(i, hi) - &(&factor * u.get(i, lo));
            u.set(i, hi, v);
        }
    }
    let mut keep: Vec<usize> = (0..n).filter(|&j| m.col_degree(j) >= 0).collect();
    if keep.len() != r {
        return Err(WobblyError::RankDeficient { expected: r, found: keep.len() });
    }
    keep.sort_by_key(|&j| m.leading_position(j).unwrap());
    let basis = PolyMatrix::from_columns(f, m.rows(), keep.iter().map(|&j| m.column(j)).collect());
    let cofactors = PolyMatrix::from_columns(f, n, keep.iter().map(|&j| u.column(j)).collect());
    Ok(ReducedBasis { basis, cofactors })
}

/// A matrix over `F_p[x, 1/x]`, stored as `mat / x^den_exp`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentMatrix {
    pub mat: PolyMatrix,
    pub den_exp: i64,
}

impl LaurentMatrix {
    /// Convert an `F_p(x)` matrix whose denominators are all powers of `x`.
    pub fn from_ratmat(field: PrimeField, m: &[Vec<RatFn>]) -> Option<Self> {
        let rows = m.len();
        let cols = m.first().map_or(0, |r| r.len());
        let mut den_exp = 0i64;
        for row in m {
            for e in row {
                let d = e.den();
                let low = d.low_degree()?;
                if d.degree() != Some(low) {
                    return None;
                }
                den_exp = den_exp.max(low as i64);
            }
        }
        let mut mat = PolyMatrix::zeros(field, rows, cols);
        for (i, row) in m.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                let d = e.den();
                let low = d.degree().unwrap() as i64;
                let num = e.num().scale(d.lc().inv().unwrap()).shift((den_exp - low) as usize);
                mat.set(i, j, num);
            }
        }
        Some(Self { mat, den_exp }.normalized())
    }

    fn normalized(mut self) -> Self {
        let low = (0..self.mat.rows())
            .flat_map(|i| (0..self.mat.cols()).map(move |j| (i, j)))
            .filter_map(|(i, j)| self.mat.get(i, j).low_degree())
            .min();
        if let Some(k) = low {
            if k > 0 {
                for i in 0..self.mat.rows() {
                    for j in 0..self.mat.cols() {
                        let p = self.mat.get(i, j);
                        let c = p.coeffs().get(k..).map(|s| s.to_vec()).unwrap_or_default();
                        let np = Poly::new(self.mat.field(), c);
                        self.mat.set(i, j, np);
                    }
                }
                self.den_exp -= k as i64;
            }
        }
        self
    }

    /// Entry as `(coefficients, lowest exponent)`.
    pub fn entry_exponents(&self, i: usize, j: usize) -> Vec<(i64, Fp)> {
        self.mat
            .get(i, j)
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, &c)| (k as i64 - self.den_exp, c))
            .collect()
    }

    /// Smallest and largest exponent among nonzero entries.
    pub fn exponent_range(&self) -> Option<(i64, i64)> {
        let mut lo = None::<i64>;
        let mut hi = None::<i64>;
        for i in 0..self.mat.rows() {
            for j in 0..self.mat.cols() {
                for (e, _) in self.entry_exponents(i, j) {
                    lo = Some(lo.map_or(e, |v| v.min(e)));
                    hi = Some(hi.map_or(e, |v| v.max(e)));
                }
            }
        }
        Some((lo?, hi?))
    }

    pub fn to_ratmat(&self) -> Vec<Vec<RatFn>> {
        let f = self.mat.field();
        let den = if self.den_exp >= 0 {
            Poly::monomial(f.one(), self.den_exp as usize)
        } else {
            Poly::one(f)
        };
        let mul = if self.den_exp < 0 {
            Poly::monomial(f.one(), (-self.den_exp) as usize)
        } else {
            Poly::one(f)
        };
        (0..self.mat.rows())
            .map(|i| {
                (0..self.mat.cols())
                    .map(|j| RatFn::new(self.mat.get(i, j) * &mul, den.clone()))
                    .collect()
            })
            .collect()
    }

    /// Determinant as `(c, e)` meaning `c·x^e`, or `None` if not a monomial.
    pub fn det_monomial(&self) -> Option<(Fp, i64)> {
        ratmat_det(&self.to_ratmat()).as_monomial()
    }
}

pub fn ratmat_mul(a: &[Vec<RatFn>], b: &[Vec<RatFn>]) -> Vec<Vec<RatFn>> {
    let f = a[0][0].field();
    let n = a.len();
    let k = b.len();
    let m = b[0].len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).fold(RatFn::zero(f), |acc, t| &acc + &(&a[i][t] * &b[t][j])))
                .collect()
        })
        .collect()
}

pub fn ratmat_vec(a: &[Vec<RatFn>], v: &[RatFn]) -> Vec<RatFn> {
    let f = v[0].field();
    a.iter().map(|row| row.iter().zip(v).fold(RatFn::zero(f), |acc, (x, y)| &acc + &(x * y))).collect()
}

pub fn ratmat_det(m: &[Vec<RatFn>]) -> RatFn {
    let n = m.len();
    let f = m[0][0].field();
    let mut a: Vec<Vec<RatFn>> = m.to_vec();
    let mut det = RatFn::one(f);
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return RatFn::zero(f);
        };
        if p != c {
            a.swap(p, c);
            det = -&det;
        }
        det = &det * &a[c][c];
        let inv = a[c][c].inv().unwrap();
        for i in c + 1..n {
            if a[i][c].is_zero() {
                continue;
            }
            let fac = &a[i][c] * &inv;
            for j in c..n {
                let v = &a[i][j] - &(&fac * &a[c][j]);
                a[i][j] = v;
            }
        }
    }
    det
}

/// Inverse over `F_p(x)` by Gauss-Jordan; `None` if singular.
pub fn ratmat_inverse(m: &[Vec<RatFn>]) -> Option<Vec<Vec<RatFn>>> {
    let n = m.len();
    let f = m[0][0].field();
    let mut a: Vec<Vec<RatFn>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { RatFn::one(f) } else { RatFn::zero(f) }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !a[i][c].is_zero())?;
        a.swap(p, c);
        let inv = a[c][c].inv().unwrap();
        for j in 0..2 * n {
            a[c][j] = &a[c][j] * &inv;
        }
        for i in 0..n {
            if i == c || a[i][c].is_zero() {
                continue;
            }
            let fac = a[i][c].clone();
            for j in 0..2 * n {
                let v = &a[i][j] - &(&fac * &a[c][j]);
                a[i][j] = v;
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f() -> PrimeField {
        PrimeField::new(131).unwrap()
    }

    fn p(c: &[i64]) -> Poly {
        Poly::from_i64(f(), c)
    }

    fn check_cofactors(g: &PolyMatrix, red: &ReducedBasis) {
        assert_eq!(g.mul(&red.cofactors), red.basis);
    }

    #[test]
    fn reduced_basis_is_fixed_point() {
        let g = PolyMatrix::from_columns(f(), 2, vec![vec![p(&[0, 1]), p(&[1])], vec![p(&[0]), p(&[0, 0, 1])]]);
        let red = weak_popov_reduce(&g, 2).unwrap();
        check_cofactors(&g, &red);
        assert!(red.basis.is_column_reduced());
        assert_eq!(red.basis.determinant().degree(), g.determinant().degree());
    }

    #[test]
    fn redundant_generators_recover_basis() {
        let fld = f();
        let b = PolyMatrix::from_columns(fld, 2, vec![vec![p(&[1, 1]), p(&[2])], vec![p(&[0, 3]), p(&[1, 0, 1])]]);
        let x = p(&[0, 1]);
        let mut cols = b.columns();
        cols.extend(b.columns().into_iter().map(|c| c.iter().map(|e| e * &x).collect()));
        let g = PolyMatrix::from_columns(fld, 2, cols);
        let red = weak_popov_reduce(&g, 2).unwrap();
        check_cofactors(&g, &red);
        // same module: determinants agree up to a unit
        assert_eq!(red.basis.determinant().monic(), b.determinant().monic());
    }

    #[test]
    fn module_u0_eq_v0() {
        // {(u,v) : u(0) = v(0)} generated redundantly.
        let g = PolyMatrix::from_columns(f(), 2, vec![
            vec![p(&[1]), p(&[1])],
            vec![p(&[0, 1]), p(&[0])],
            vec![p(&[0]), p(&[0, 1])],
            vec![p(&[0, 0, 1]), p(&[0, 1])],
        ]);
        let red = weak_popov_reduce(&g, 2).unwrap();
        check_cofactors(&g, &red);
        assert!(red.basis.is_column_reduced());
        assert_eq!(red.basis.determinant().degree(), Some(1));
    }

    #[test]
    fn rank_deficient_is_reported() {
        let g = PolyMatrix::from_columns(f(), 2, vec![vec![p(&[1]), p(&[2])], vec![p(&[0, 1]), p(&[0, 2])]]);
        assert_eq!(
            weak_popov_reduce(&g, 2).unwrap_err(),
            WobblyError::RankDeficient { expected: 2, found: 1 }
        );
    }

    #[test]
    fn ratmat_inverse_roundtrip() {
        let fld = f();
        let m = vec![
            vec![RatFn::from_poly(p(&[1, 1])), RatFn::from_poly(p(&[0, 1]))],
            vec![RatFn::from_poly(p(&[2])), RatFn::from_poly(p(&[0, 0, 1]))],
        ];
        let inv = ratmat_inverse(&m).unwrap();
        let id = ratmat_mul(&m, &inv);
        for i in 0..2 {
            for j in 0..2 {
                let e = if i == j { RatFn::one(fld) } else { RatFn::zero(fld) };
                assert_eq!(id[i][j], e);
            }
        }
    }

    #[test]
    fn laurent_roundtrip() {
        let fld = f();
        let x = Poly::x(fld);
        let m = vec![vec![
            RatFn::new(Poly::one(fld), &x * &x),
            RatFn::from_poly(&x * &x),
        ]];
        let l = LaurentMatrix::from_ratmat(fld, &m).unwrap();
        assert_eq!(l.exponent_range(), Some((-2, 2)));
        assert_eq!(l.to_ratmat(), m);
    }
}
