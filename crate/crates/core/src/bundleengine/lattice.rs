//! Line bundles on the base or spectral curve pushed to the projective
//! line, as a pair of free modules over the two affine charts.

use std::collections::BTreeSet;

use crate::basecurve::curve::EXACT;
use crate::basecurve::{DivisorC, FnC, HyperellipticCurve, PlaceC};
use crate::error::{Result, WobblyError};
use crate::exactalg::linalg::Matrix;
use crate::exactalg::polymat::{ratmat_inverse, ratmat_mul, weak_popov_reduce, LaurentMatrix};
use crate::exactalg::{Fp, Poly, PolyMatrix, PrimeField, RatFn, Series};
use crate::spectral::{DivisorCt, FnCt, PlaceCt, SpectralCurve};

/// Which curve the lattice lives on.
#[derive(Clone, Copy, Debug)]
pub enum Cover<'a> {
    Base(&'a HyperellipticCurve),
    Spectral(&'a SpectralCurve),
}

impl<'a> Cover<'a> {
    pub fn base(&self) -> &'a HyperellipticCurve {
        match self {
            Cover::Base(c) => c,
            Cover::Spectral(s) => s.base(),
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            Cover::Base(_) => 2,
            Cover::Spectral(_) => 4,
        }
    }

    pub fn genus(&self) -> i64 {
        match self {
            Cover::Base(c) => c.genus() as i64,
            Cover::Spectral(s) => s.genus() as i64,
        }
    }

    /// Powers of `u = 1/x` turning `{1, y, w, yw}` into the integral basis
    /// at infinity.
    pub fn inf_shifts(&self) -> Vec<i64> {
        let g = self.base().genus() as i64;
        match self {
            Cover::Base(_) => vec![0, g + 1],
            Cover::Spectral(_) => vec![0, g + 1, g - 1, 2 * g],
        }
    }
}

/// A place imposing conditions; inert places are handled through the two
/// parts `N₀ + N₁·w` over their base place.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum CondPlace {
    C(PlaceC),
    Ct(PlaceCt),
    Inert(PlaceC),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Chart {
    Finite,
    Infinite,
}

/// Pushforward of `O(D)` to the line.
#[derive(Clone, Debug)]
pub struct LatticePair {
    field: PrimeField,
    rank: usize,
    /// Columns: basis of the finite-chart module in `{1, y, w, yw}`, over `x`.
    pub b0: PolyMatrix,
    pub den0: Poly,
    /// Columns: basis of the infinite-chart module in the integral basis at
    /// infinity, over `u`.
    pub binf: PolyMatrix,
    pub deninf: Poly,
    /// `B∞ = B₀·T`.
    pub t: LaurentMatrix,
    t_inv: LaurentMatrix,
    shifts: Vec<i64>,
    /// Degree of the divisor and genus of the curve carrying it.
    pub degree: i64,
    pub genus: i64,
}

/// `p(1/x)` as a rational function of `x`.
fn at_inverse(p: &Poly) -> RatFn {
    let f = p.field();
    match p.degree() {
        None => RatFn::zero(f),
        Some(d) => RatFn::new(p.reverse(d), Poly::monomial(f.one(), d)),
    }
}

fn x_pow(f: PrimeField, k: i64) -> RatFn {
    if k >= 0 {
        RatFn::from_poly(Poly::monomial(f.one(), k as usize))
    } else {
        RatFn::new(Poly::one(f), Poly::monomial(f.one(), (-k) as usize))
    }
}

fn coeffs_below(s: &Series, r: i64) -> Option<Vec<Fp>> {
    (s.prec() >= r).then(|| (0..r).map(|k| s.coeff(k)).collect())
}

struct Builder<'a> {
    cover: Cover<'a>,
    mult: &'a dyn Fn(&CondPlace) -> i64,
}

impl Builder<'_> {
    fn field(&self) -> PrimeField {
        self.cover.base().field()
    }

    /// Every place over the affine point `x = a` (or infinity).
    fn fiber(&self, a: Option<Fp>) -> Result<Vec<CondPlace>> {
        let c = self.cover.base();
        let base = match a {
            None => vec![PlaceC::Infinity],
            Some(a) => c.places_over(a).ok_or_else(|| WobblyError::IrrationalSupport(format!("x = {a}")))?,
        };
        match self.cover {
            Cover::Base(_) => Ok(base.into_iter().map(CondPlace::C).collect()),
            Cover::Spectral(s) => {
                let mut out = Vec::new();
                for p in base {
                    match s.fiber(&p) {
                        Ok(v) => out.extend(v.into_iter().map(|q| match q {
                            PlaceCt::InertInfinity => CondPlace::Inert(PlaceC::Infinity),
                            q => CondPlace::Ct(q),
                        })),
                        Err(WobblyError::InertPlace(_)) => out.push(CondPlace::Inert(p)),
                        Err(e) => return Err(e),
                    }
                }
                Ok(out)
            }
        }
    }

    /// `ord_Q(x − a)` or `ord_Q(1/x)`.
    fn line_e(&self, q: &CondPlace) -> i64 {
        match (q, self.cover) {
            (CondPlace::C(p), _) | (CondPlace::Inert(p), _) => p.ramification(),
            (CondPlace::Ct(p), Cover::Spectral(s)) => s.line_ramification(p),
            _ => unreachable!(),
        }
    }

    /// Chart variable and component series at `q`; each component comes
    /// with the order shift its condition carries.
    fn local(&self, q: &CondPlace, chart: Chart, n: i64) -> (Series, Vec<(Vec<Series>, i64)>) {
        let fld = self.field();
        let c = self.cover.base();
        let one = Series::one(fld, EXACT);
        let (x, comps) = match (q, self.cover) {
            (CondPlace::C(p), _) => {
                let (x, y) = c.local_xy(p, n);
                (x, vec![(vec![one, y], 0)])
            }
            (CondPlace::Ct(p), Cover::Spectral(s)) => {
                let l = s.local(p, n);
                let yw = l.y.mul(&l.w);
                (l.x, vec![(vec![one, l.y, l.w, yw], 0)])
            }
            (CondPlace::Inert(p), Cover::Spectral(s)) => {
                let (x, y) = c.local_xy(p, n);
                let z = Series::zero(fld, EXACT);
                let hp = if *p == PlaceC::Infinity { s.h_ord_inf() } else { 0 };
                (x, vec![(vec![one.clone(), y.clone(), z.clone(), z.clone()], 0), (vec![z.clone(), z, one, y], hp / 2)])
            }
            _ => unreachable!(),
        };
        match chart {
            Chart::Finite => (x, comps),
            Chart::Infinite => {
                let u = x.truncate(x.val_bound() + n).inv().expect("x is a unit or pole");
                let shifts = self.cover.inf_shifts();
                let comps = comps
                    .into_iter()
                    .map(|(v, sh)| {
                        let v = v
                            .iter()
                            .zip(&shifts)
                            .map(|(s, &k)| if s.is_zero_to_prec() && s.prec() >= EXACT { s.clone() } else { s.mul(&u.pow(k).unwrap()) })
                            .collect();
                        (v, sh)
                    })
                    .collect();
                (u, comps)
            }
        }
    }

    /// Rows forcing `ord_q(Σ aᵢ(z)·Eᵢ) ≥ target`, unknowns the coefficients
    /// of `aᵢ` below degree `deg`.
    fn rows(&self, q: &CondPlace, chart: Chart, target: i64, deg: usize) -> Vec<Vec<Fp>> {
        let r = self.cover.rank();
        let mut n = target + 4 * self.cover.base().genus() as i64 + 8;
        'retry: loop {
            let (z, comps) = self.local(q, chart, n);
            let mut out = Vec::new();
            for (elems, sh) in comps {
                let need = target - sh;
                if need <= 0 {
                    continue;
                }
                let z = z.truncate(need);
                let mut zp = Series::one(self.field(), need);
                let mut cols = vec![Vec::new(); r * deg];
                for k in 0..deg {
                    for (i, e) in elems.iter().enumerate() {
                        match coeffs_below(&zp.mul(e), need) {
                            Some(v) => cols[i * deg + k] = v,
                            None => {
                                n *= 2;
                                continue 'retry;
                            }
                        }
                    }
                    zp = zp.mul(&z);
                }
                for j in 0..need as usize {
                    out.push(cols.iter().map(|c| c[j]).collect());
                }
            }
            return out;
        }
    }

    /// Basis of `{φ : ord_Q φ ≥ −D(Q)}` over the chart, as numerator columns
    /// and a common denominator.
    fn module(&self, chart: Chart, points: &[Option<Fp>]) -> Result<(PolyMatrix, Poly)> {
        let fld = self.field();
        let r = self.cover.rank();
        let mut den = Poly::one(fld);
        let mut modulus = Poly::one(fld);
        let mut conds: Vec<(CondPlace, i64, Fp)> = Vec::new();
        for &a in points {
            let z0 = match (chart, a) {
                (Chart::Finite, Some(a)) => a,
                (Chart::Infinite, Some(a)) => a.inv().expect("x = 0 lies outside the chart"),
                (Chart::Infinite, None) => fld.zero(),
                (Chart::Finite, None) => unreachable!(),
            };
            let fib = self.fiber(a)?;
            let k = fib
                .iter()
                .map(|q| {
                    let (m, e) = ((self.mult)(q), self.line_e(q));
                    if m > 0 { (m + e - 1) / e } else { 0 }
                })
                .max()
                .unwrap_or(0);
            let mut nmax = 0;
            for q in fib {
                let e = self.line_e(&q);
                let target = k * e - (self.mult)(&q);
                if target > 0 {
                    nmax = nmax.max((target + e - 1) / e);
                    conds.push((q, target, z0));
                }
            }
            let lin = Poly::linear(z0);
            for _ in 0..k {
                den = &den * &lin;
            }
            for _ in 0..nmax {
                modulus = &modulus * &lin;
            }
        }
        let deg = modulus.degree().unwrap();
        let mut gens: Vec<Vec<Poly>> = (0..r)
            .map(|i| (0..r).map(|j| if i == j { modulus.clone() } else { Poly::zero(fld) }).collect())
            .collect();
        if deg > 0 {
            let mut m = Matrix::zeros(fld, 0, r * deg);
            for (q, target, _) in &conds {
                for row in self.rows(q, chart, *target, deg) {
                    m.push_row(row);
                }
            }
            for v in m.kernel_basis() {
                gens.push((0..r).map(|i| Poly::new(fld, v[i * deg..(i + 1) * deg].to_vec())).collect());
            }
        }
        let g = PolyMatrix::from_columns(fld, r, gens);
        let red = weak_popov_reduce(&g, r)?;
        Ok((red.basis, den))
    }
}

impl LatticePair {
    fn build(cover: Cover, mult: &dyn Fn(&CondPlace) -> i64, xs: &BTreeSet<Option<Fp>>, degree: i64) -> Result<Self> {
        let fld = cover.base().field();
        let r = cover.rank();
        let b = Builder { cover, mult };
        let fin: Vec<Option<Fp>> = xs.iter().copied().filter(|a| a.is_some()).collect();
        let inf: Vec<Option<Fp>> = xs.iter().copied().filter(|a| *a != Some(fld.zero())).collect();
        let (b0, den0) = b.module(Chart::Finite, &fin)?;
        let (binf, deninf) = b.module(Chart::Infinite, &inf)?;
        let shifts = cover.inf_shifts();
        let d0 = RatFn::from_poly(den0.clone());
        let r0: Vec<Vec<RatFn>> =
            (0..r).map(|i| (0..r).map(|j| &RatFn::from_poly(b0.get(i, j).clone()) / &d0).collect()).collect();
        let dinf = at_inverse(&deninf);
        let rinf: Vec<Vec<RatFn>> = (0..r)
            .map(|i| (0..r).map(|j| &(&at_inverse(binf.get(i, j)) * &x_pow(fld, -shifts[i])) / &dinf).collect())
            .collect();
        let inv0 = ratmat_inverse(&r0).ok_or_else(|| WobblyError::Invariant("singular finite basis".into()))?;
        let t = ratmat_mul(&inv0, &rinf);
        let t_inv = ratmat_inverse(&t).ok_or_else(|| WobblyError::Invariant("singular transition".into()))?;
        let lt = LaurentMatrix::from_ratmat(fld, &t)
            .ok_or_else(|| WobblyError::Invariant("transition matrix is not Laurent".into()))?;
        let lti = LaurentMatrix::from_ratmat(fld, &t_inv)
            .ok_or_else(|| WobblyError::Invariant("inverse transition is not Laurent".into()))?;
        Ok(Self { field: fld, rank: r, b0, den0, binf, deninf, t: lt, t_inv: lti, shifts, degree, genus: cover.genus() })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Replace the transition matrix (fault injection in self-checks).
    pub fn with_transition(&self, t: LaurentMatrix) -> Option<Self> {
        let t_inv = LaurentMatrix::from_ratmat(self.field, &ratmat_inverse(&t.to_ratmat())?)?;
        Some(Self { t, t_inv, ..self.clone() })
    }

    /// Lowest exponent of `T⁻¹`, bounding section coordinates.
    fn low_inv(&self) -> i64 {
        self.t_inv.exponent_range().map_or(0, |r| r.0)
    }

    /// Sections of the twist by `O(n)` on the line, as coordinate vectors
    /// over `F_p[x]` in the finite basis.
    pub fn sections(&self, n: i64) -> Vec<Vec<Poly>> {
        let (kernel, span) = self.section_kernel(n);
        let r = self.rank;
        kernel
            .iter()
            .map(|v| {
                // coordinates in the infinite basis: cᵢ = Σ_k v[i,k] x^{n−k}
                let c: Vec<RatFn> = (0..r)
                    .map(|i| {
                        (0..span).fold(RatFn::zero(self.field), |acc, k| {
                            &acc + &(&RatFn::constant(v[i * span + k]) * &x_pow(self.field, n - k as i64))
                        })
                    })
                    .collect();
                let t = self.t.to_ratmat();
                (0..r)
                    .map(|j| {
                        let e = (0..r).fold(RatFn::zero(self.field), |acc, i| &acc + &(&t[j][i] * &c[i]));
                        e.as_poly().expect("section coordinates are polynomial")
                    })
                    .collect()
            })
            .collect()
    }

    fn section_kernel(&self, n: i64) -> (Vec<Vec<Fp>>, usize) {
        let r = self.rank;
        let top = n - self.low_inv();
        if top < 0 {
            return (Vec::new(), 0);
        }
        let span = (top + 1) as usize;
        let (tlo, _) = self.t.exponent_range().unwrap_or((0, 0));
        // exponents below zero that can occur: tlo + n − top ..= −1
        let lowest = tlo + n - top;
        let neg = if lowest < 0 { (-lowest) as usize } else { 0 };
        let mut m = Matrix::zeros(self.field, r * neg, r * span);
        for j in 0..r {
            for i in 0..r {
                for (e, c) in self.t.entry_exponents(j, i) {
                    for k in 0..span {
                        let ex = e + n - k as i64;
                        if ex < 0 {
                            let row = j * neg + (-ex - 1) as usize;
                            let col = i * span + k;
                            let v = m.get(row, col) + c;
                            m.set(row, col, v);
                        }
                    }
                }
            }
        }
        (m.kernel_basis(), span)
    }

    /// `h⁰` of the twist by `O(n)` on the line.
    pub fn h(&self, n: i64) -> usize {
        self.section_kernel(n).0.len()
    }

    pub fn h0(&self) -> usize {
        self.h(0)
    }

    pub fn h_sequence(&self, ns: std::ops::RangeInclusive<i64>) -> Vec<(i64, usize)> {
        ns.map(|n| (n, self.h(n))).collect()
    }

    /// Splitting type, largest first, decoded from jumps of `h`.
    pub fn splitting_type(&self) -> SplittingType {
        let r = self.rank;
        let mut lo = 0;
        while self.h(lo) > 0 {
            lo -= 1;
        }
        let mut out = Vec::new();
        let mut prev_jump = 0usize;
        let mut prev_h = 0usize;
        let mut n = lo + 1;
        while out.len() < r {
            let hn = self.h(n);
            let jump = hn - prev_h;
            for _ in prev_jump..jump {
                out.push(-n);
            }
            prev_jump = jump;
            prev_h = hn;
            n += 1;
        }
        SplittingType(out)
    }

    /// `Σ aᵢ + r` from the transition determinant.
    pub fn chi_from_det(&self) -> Option<i64> {
        self.t.det_monomial().map(|(_, e)| e + self.rank as i64)
    }

    /// Expected `χ = deg + 1 − genus` on the curve.
    pub fn chi_expected(&self) -> i64 {
        self.degree + 1 - self.genus
    }

    /// Finite-basis column `j` as a function on the spectral curve.
    pub fn basis_fn_ct(&self, j: usize) -> FnCt {
        assert_eq!(self.rank, 4);
        FnCt::new(std::array::from_fn(|i| self.b0.get(i, j).clone()), self.den0.clone())
    }

    pub fn basis_fn_c(&self, j: usize) -> FnC {
        assert_eq!(self.rank, 2);
        FnC::new(self.b0.get(0, j).clone(), self.b0.get(1, j).clone(), self.den0.clone())
    }

    /// Infinite-basis columns in `{1, y, w, yw}` coordinates over `F_p(x)`.
    pub fn inf_basis_rat(&self) -> Vec<Vec<RatFn>> {
        let r = self.rank;
        let dinf = at_inverse(&self.deninf);
        (0..r)
            .map(|i| {
                (0..r)
                    .map(|j| &(&at_inverse(self.binf.get(i, j)) * &x_pow(self.field, -self.shifts[i])) / &dinf)
                    .collect()
            })
            .collect()
    }

    pub fn fin_basis_rat(&self) -> Vec<Vec<RatFn>> {
        let d0 = RatFn::from_poly(self.den0.clone());
        (0..self.rank)
            .map(|i| (0..self.rank).map(|j| &RatFn::from_poly(self.b0.get(i, j).clone()) / &d0).collect())
            .collect()
    }

    /// Polynomial coordinate vector (finite basis) to its function.
    pub fn coords_to_rat(&self, a: &[Poly]) -> Vec<RatFn> {
        let b = self.fin_basis_rat();
        (0..self.rank)
            .map(|i| (0..self.rank).fold(RatFn::zero(self.field), |acc, j| &acc + &(&b[i][j] * &RatFn::from_poly(a[j].clone()))))
            .collect()
    }
}

/// Grothendieck splitting type, largest first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplittingType(pub Vec<i64>);

impl SplittingType {
    pub fn h(&self, n: i64) -> usize {
        self.0.iter().map(|&a| (a + n + 1).max(0) as usize).sum()
    }

    pub fn chi(&self) -> i64 {
        self.0.iter().sum::<i64>() + self.0.len() as i64
    }
}

/// `{(1/den)·Σ cᵢ eᵢ}` from rational coordinates over `{1, y, w, yw}`.
pub fn fn_ct_from_rat(v: &[RatFn]) -> FnCt {
    let f = v[0].field();
    let den = v.iter().fold(Poly::one(f), |acc, e| {
        let g = acc.gcd(e.den());
        &acc.div_exact(&g).unwrap() * e.den()
    });
    FnCt::new(std::array::from_fn(|i| v[i].num() * &den.div_exact(v[i].den()).unwrap()), den)
}

pub fn fn_c_from_rat(v: &[RatFn]) -> FnC {
    let f = v[0].field();
    let den = v.iter().fold(Poly::one(f), |acc, e| {
        let g = acc.gcd(e.den());
        &acc.div_exact(&g).unwrap() * e.den()
    });
    FnC::new(v[0].num() * &den.div_exact(v[0].den()).unwrap(), v[1].num() * &den.div_exact(v[1].den()).unwrap(), den)
}

/// `O(D)` on the base curve pushed to the line.
pub fn lattice_of_c(c: &HyperellipticCurve, d: &DivisorC) -> Result<LatticePair> {
    d.check(c)?;
    let mult = |q: &CondPlace| match q {
        CondPlace::C(p) => d.mult(p),
        _ => 0,
    };
    let xs: BTreeSet<Option<Fp>> = d.support().iter().map(|p| p.x()).collect();
    LatticePair::build(Cover::Base(c), &mult, &xs, d.degree())
}

/// `O(D̃)` on the spectral curve pushed to the line (rank 4).
pub fn lattice_of_ct(s: &SpectralCurve, d: &DivisorCt) -> Result<LatticePair> {
    d.check(s)?;
    let mult = |q: &CondPlace| match q {
        CondPlace::Ct(p) => d.mult(p),
        CondPlace::Inert(PlaceC::Infinity) => d.mult(&PlaceCt::InertInfinity),
        _ => 0,
    };
    let xs: BTreeSet<Option<Fp>> = d.support().iter().map(|p| p.base().x()).collect();
    LatticePair::build(Cover::Spectral(s), &mult, &xs, d.degree())
}
