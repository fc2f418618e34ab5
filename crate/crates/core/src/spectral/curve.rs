//! The double cover `w² = h`, `h = A + B·y`, of the base curve.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basecurve::curve::{eval_poly_series, EXACT};
use crate::basecurve::{FnC, HyperellipticCurve, PlaceC, QuadDifferential};
use crate::error::{Result, WobblyError};
use crate::exactalg::{Fp, Poly, Series};

/// How the fiber over the base place at infinity looks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InfinityFiber {
    /// Two places; carries the root `w₀` with `w₀² = lc(A)`.
    Split(Fp),
    Ramified,
    /// A single place of degree 2.
    Inert,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectralCurve {
    base: HyperellipticCurve,
    q: QuadDifferential,
    h: FnC,
    inf: InfinityFiber,
}

/// Local expansions of the coordinates in the uniformizer of a place.
#[derive(Clone, Debug)]
pub struct LocalCt {
    pub x: Series,
    pub y: Series,
    pub w: Series,
}

/// Certify smoothness of `w² = A + B·y` symbolically; on failure report the
/// minimal polynomial of an offending `x`-coordinate (or infinity).
pub fn smoothness_obstruction(curve: &HyperellipticCurve, q: &QuadDifferential) -> Option<String> {
    obstruction(curve, q).map(|o| match o {
        Some(m) => format!("{m}"),
        None => "infinity".into(),
    })
}

/// `Some(Some(m))`: singular over a root of `m`; `Some(None)`: at infinity.
pub(crate) fn obstruction(curve: &HyperellipticCurve, q: &QuadDifferential) -> Option<Option<Poly>> {
    let g = curve.genus() as i64;
    let (a, b) = (q.a(), q.b());
    let f = curve.f();
    let c = if b.is_zero() { a.monic() } else { a.gcd(b) };
    let a0 = a.div_exact(&c).unwrap();
    let b0 = b.div_exact(&c).unwrap();
    let n0 = &(&a0 * &a0) - &(&(&b0 * &b0) * f);
    // a repeated common factor of A and B is a double zero of h
    let cc = c.gcd(&c.derivative());
    for bad in [cc, c.gcd(f), c.gcd(&n0), n0.gcd(&n0.derivative())] {
        if bad.degree().is_some_and(|d| d > 0) {
            return Some(bad.smallest_irreducible_factor());
        }
    }
    if 4 * g - 4 + q.branch_ord_inf(curve) > 1 {
        return Some(None);
    }
    None
}

impl SpectralCurve {
    pub fn build(base: &HyperellipticCurve, q: &QuadDifferential) -> Result<Self> {
        if q.is_zero() {
            return Err(WobblyError::InvalidInput("q = 0".into()));
        }
        if let Some(m) = smoothness_obstruction(base, q) {
            return Err(WobblyError::SingularSpectral(m));
        }
        let g = base.genus() as i64;
        let ord_inf = q.branch_ord_inf(base);
        let inf = if ord_inf == -(4 * g - 4) {
            match q.a().lc().sqrt() {
                Some(w0) => InfinityFiber::Split(w0),
                None => InfinityFiber::Inert,
            }
        } else {
            InfinityFiber::Ramified
        };
        Ok(Self { base: base.clone(), q: q.clone(), h: q.branch_function(), inf })
    }

    pub fn base(&self) -> &HyperellipticCurve {
        &self.base
    }

    pub fn q(&self) -> &QuadDifferential {
        &self.q
    }

    /// `h = A + B·y` with `w² = h`.
    pub fn h(&self) -> &FnC {
        &self.h
    }

    pub fn infinity_fiber(&self) -> InfinityFiber {
        self.inf
    }

    /// Genus `4g − 3`, always derived from the base genus.
    pub fn genus(&self) -> usize {
        4 * self.base.genus() - 3
    }

    /// `ord_∞(w)` in the base uniformizer, doubled (i.e. `ord_∞ h`).
    pub fn h_ord_inf(&self) -> i64 {
        self.q.branch_ord_inf(&self.base)
    }

    /// Value of `h` at a finite base place.
    pub fn h_at(&self, p: &PlaceC) -> Fp {
        let (x, y) = match *p {
            PlaceC::Finite { x, y } => (x, y),
            PlaceC::Weierstrass { x } => (x, x.field().zero()),
            PlaceC::Infinity => panic!("h has a pole at infinity"),
        };
        self.q.a().eval(x) + self.q.b().eval(x) * y
    }

    /// Degree-1 places over `p`; `InertPlace` for a finite inert fiber.
    /// Over an inert infinity the degree-2 place is returned.
    pub fn fiber(&self, p: &PlaceC) -> Result<Vec<PlaceCt>> {
        if *p == PlaceC::Infinity {
            return Ok(match self.inf {
                InfinityFiber::Split(w0) => vec![
                    PlaceCt::Split { base: *p, w: w0 },
                    PlaceCt::Split { base: *p, w: -w0 },
                ],
                InfinityFiber::Ramified => vec![PlaceCt::Ramified { base: *p }],
                InfinityFiber::Inert => vec![PlaceCt::InertInfinity],
            });
        }
        let v = self.h_at(p);
        if v.is_zero() {
            return Ok(vec![PlaceCt::Ramified { base: *p }]);
        }
        match v.sqrt() {
            Some(w) => Ok(vec![PlaceCt::Split { base: *p, w }, PlaceCt::Split { base: *p, w: -w }]),
            None => Err(WobblyError::InertPlace(format!("{p}"))),
        }
    }

    pub fn check_place(&self, pl: &PlaceCt) -> Result<()> {
        let bp = pl.base();
        self.base.check_place(&bp)?;
        let fib = self.fiber(&bp)?;
        if fib.contains(pl) {
            Ok(())
        } else {
            Err(WobblyError::InvalidInput(format!("{pl} is not a place of the spectral curve")))
        }
    }

    /// Every degree-1 place, sorted.
    pub fn rational_places(&self) -> Vec<PlaceCt> {
        let mut out: Vec<PlaceCt> = self
            .base
            .rational_places()
            .iter()
            .filter_map(|p| self.fiber(p).ok())
            .flatten()
            .filter(|q| q.degree() == 1)
            .collect();
        out.sort();
        out
    }

    /// Uniform random degree-1 place, deterministic in `seed`.
    pub fn sample_place(&self, seed: u64) -> PlaceCt {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_place_rng(&mut rng)
    }

    pub fn sample_place_rng<R: Rng + ?Sized>(&self, rng: &mut R) -> PlaceCt {
        // base places are uniform; each fiber point is accepted with probability 1/2
        loop {
            let p = self.base.sample_place_rng(rng);
            let fib = match self.fiber(&p) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let k: usize = rng.gen_range(0..2);
            let pick = match fib.len() {
                2 => Some(fib[k]),
                _ if fib[0].degree() == 1 => (k == 0).then_some(fib[0]),
                _ => None,
            };
            if let Some(q) = pick {
                return q;
            }
        }
    }

    /// `ord_Q(x − a)` (or `ord_Q(1/x)` over infinity).
    pub fn line_ramification(&self, pl: &PlaceCt) -> i64 {
        let e0 = pl.base().ramification();
        match pl {
            PlaceCt::Ramified { .. } => 2 * e0,
            _ => e0,
        }
    }

    /// Expansions of `x`, `y`, `w` at a degree-1 place to relative order
    /// about `n`.
    pub fn local(&self, pl: &PlaceCt, n: i64) -> LocalCt {
        let f = self.base.field();
        let g = self.base.genus() as i64;
        match *pl {
            PlaceCt::InertInfinity => panic!("no local uniformizer expansion over F_p at an inert place"),
            PlaceCt::Split { base, w } => {
                let (x, y) = self.base.local_xy(&base, n + 4 * g);
                let hs = eval_poly_series(self.q.a(), &x).add(&eval_poly_series(self.q.b(), &x).mul(&y));
                let hs = hs.truncate(hs.val_bound() + n);
                let ws = hs.sqrt_with_lead(w).expect("fiber value squares to h");
                LocalCt { x, y, w: ws }
            }
            PlaceCt::Ramified { base } => {
                let (x, y) = self.base.local_xy(&base, 2 * n + 4 * g);
                let hs = eval_poly_series(self.q.a(), &x).add(&eval_poly_series(self.q.b(), &x).mul(&y));
                if base == PlaceC::Infinity {
                    // s = t^{2g−2}·w satisfies s² = t·U(t)
                    let tu = hs.shift(4 * g - 4);
                    let ts = Series::solve_square_reversion(&tu, n + 2).expect("simple zero");
                    let w = Series::monomial(f.one(), 1, EXACT).mul(&ts.pow(-(2 * g - 2)).unwrap());
                    LocalCt { x: x.compose(&ts), y: y.compose(&ts), w }
                } else {
                    let ts = Series::solve_square_reversion(&hs, n + 2).expect("simple zero");
                    LocalCt { x: x.compose(&ts), y: y.compose(&ts), w: Series::monomial(f.one(), 1, EXACT) }
                }
            }
        }
    }
}

/// A place of the spectral curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlaceCt {
    /// Over a base place where `h` is a nonzero square; `w` is the fiber
    /// value (the leading coefficient over infinity).
    Split { base: PlaceC, w: Fp },
    Ramified { base: PlaceC },
    /// The degree-2 place over an inert infinity.
    InertInfinity,
}

impl PlaceCt {
    pub fn base(&self) -> PlaceC {
        match *self {
            PlaceCt::Split { base, .. } | PlaceCt::Ramified { base } => base,
            PlaceCt::InertInfinity => PlaceC::Infinity,
        }
    }

    pub fn degree(&self) -> i64 {
        match self {
            PlaceCt::InertInfinity => 2,
            _ => 1,
        }
    }

    /// The sheet swap `w ↦ −w`.
    pub fn involution(&self) -> PlaceCt {
        match *self {
            PlaceCt::Split { base, w } => PlaceCt::Split { base, w: -w },
            other => other,
        }
    }
}

impl fmt::Display for PlaceCt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlaceCt::Split { base, w } => write!(f, "{base}[w={w}]"),
            PlaceCt::Ramified { base } => write!(f, "R{base}"),
            PlaceCt::InertInfinity => write!(f, "inf2"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c2() -> HyperellipticCurve {
        HyperellipticCurve::standard(131, 2).unwrap()
    }

    fn quad(c: &HyperellipticCurve, a: &[i64], b: &[i64]) -> QuadDifferential {
        QuadDifferential::new(c, Poly::from_i64(c.field(), a), Poly::from_i64(c.field(), b)).unwrap()
    }

    #[test]
    fn smoothness_examples() {
        let c = c2();
        let s = SpectralCurve::build(&c, &quad(&c, &[0, -2, 1], &[])).unwrap();
        assert_eq!(s.genus(), 5);
        match SpectralCurve::build(&c, &quad(&c, &[0, 0, 1], &[])) {
            Err(WobblyError::SingularSpectral(m)) => assert_eq!(m, format!("{}", Poly::x(c.field()))),
            other => panic!("{other:?}"),
        }
        match SpectralCurve::build(&c, &quad(&c, &[1, 1], &[])) {
            Err(WobblyError::SingularSpectral(m)) => assert_eq!(m, format!("{}", Poly::from_i64(c.field(), &[1, 1]))),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn local_expansions_satisfy_both_equations() {
        let c = HyperellipticCurve::standard(131, 3).unwrap();
        let f = c.field();
        // deg A = 3 < 4 and deg B = 0 makes infinity ramified
        for (a, b) in [(vec![5, 1, 0, 7], vec![1]), (vec![3, 0, 1, 0, 2], vec![1]), (vec![1, 4, 0, 0, 1], vec![])] {
            let q = quad(&c, &a, &b);
            let Ok(s) = SpectralCurve::build(&c, &q) else { continue };
            let mut places = s.rational_places();
            places.retain(|p| p.base() == PlaceC::Infinity || matches!(p, PlaceCt::Ramified { .. }) || p.base().x() == Some(f.elem(3)));
            for pl in places {
                let l = s.local(&pl, 10);
                let e1 = l.y.mul(&l.y).sub(&eval_poly_series(c.f(), &l.x));
                let hs = eval_poly_series(q.a(), &l.x).add(&eval_poly_series(q.b(), &l.x).mul(&l.y));
                let e2 = l.w.mul(&l.w).sub(&hs);
                assert!(e1.is_zero_to_prec() && e2.is_zero_to_prec(), "{pl}");
                assert!(e2.prec() > l.w.val_bound() * 2 + 4, "{pl}: {}", e2.prec());
            }
        }
    }

    #[test]
    fn place_count_and_sampling() {
        let c = HyperellipticCurve::standard(131, 2).unwrap();
        let s = SpectralCurve::build(&c, &quad(&c, &[0, -2, 1], &[])).unwrap();
        let places = s.rational_places();
        // brute force: Σ over base points of the fiber size
        let fld = c.field();
        let mut brute = 0i64;
        for a in fld.elements() {
            let fa = c.f().eval(a);
            let ys: Vec<Fp> = fld.elements().filter(|&y| y * y == fa).collect();
            for y in ys {
                let hv = q_eval(&s, a, y);
                brute += fld.elements().filter(|&w| w * w == hv).count() as i64;
            }
        }
        brute += match s.infinity_fiber() {
            InfinityFiber::Split(_) => 2,
            InfinityFiber::Ramified => 1,
            InfinityFiber::Inert => 0,
        };
        assert_eq!(places.len() as i64, brute);
        let gt = s.genus() as f64;
        assert!(((brute - 132) as f64).abs() <= 2.0 * gt * 131f64.sqrt());
        for seed in 0..20 {
            let pl = s.sample_place(seed);
            assert_eq!(pl, s.sample_place(seed));
            if let PlaceCt::Split { base, w } = pl {
                if base != PlaceC::Infinity {
                    assert_eq!(w * w, s.h_at(&base));
                }
            }
        }
    }

    fn q_eval(s: &SpectralCurve, a: Fp, y: Fp) -> Fp {
        s.q().a().eval(a) + s.q().b().eval(a) * y
    }
}
