//! Divisors on the spectral curve, norm, pullback and the sheet swap.

use std::collections::BTreeMap;
use std::fmt;

use super::curve::{InfinityFiber, PlaceCt, SpectralCurve};
use crate::basecurve::{qspecial_system, DivisorC, DivisorFile, PlaceC, PlaceEntry, PlaceKind, QuadDifferential};
use crate::error::{Result, WobblyError};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DivisorCt {
    mults: BTreeMap<PlaceCt, i64>,
}

impl DivisorCt {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(p: PlaceCt, m: i64) -> Self {
        let mut d = Self::zero();
        d.add_place(p, m);
        d
    }

    pub fn from_places<I: IntoIterator<Item = PlaceCt>>(it: I) -> Self {
        let mut d = Self::zero();
        for p in it {
            d.add_place(p, 1);
        }
        d
    }

    pub fn add_place(&mut self, p: PlaceCt, m: i64) {
        let e = self.mults.entry(p).or_insert(0);
        *e += m;
        if *e == 0 {
            self.mults.remove(&p);
        }
    }

    pub fn mult(&self, p: &PlaceCt) -> i64 {
        self.mults.get(p).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PlaceCt, &i64)> {
        self.mults.iter()
    }

    pub fn support(&self) -> Vec<PlaceCt> {
        self.mults.keys().copied().collect()
    }

    pub fn degree(&self) -> i64 {
        self.mults.iter().map(|(p, m)| p.degree() * m).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.mults.is_empty()
    }

    pub fn is_effective(&self) -> bool {
        self.mults.values().all(|&m| m > 0)
    }

    pub fn is_reduced(&self) -> bool {
        self.mults.values().all(|&m| m == 1)
    }

    pub fn scale(&self, k: i64) -> Self {
        if k == 0 {
            return Self::zero();
        }
        Self { mults: self.mults.iter().map(|(&p, &m)| (p, m * k)).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut d = self.clone();
        for (&p, &m) in &o.mults {
            d.add_place(p, m);
        }
        d
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1))
    }

    pub fn dominates(&self, o: &Self) -> bool {
        self.sub(o).mults.values().all(|&m| m > 0)
    }

    pub fn positive_part(&self) -> Self {
        Self { mults: self.mults.iter().filter(|(_, &m)| m > 0).map(|(&p, &m)| (p, m)).collect() }
    }

    /// Base places under the support.
    pub fn base_support(&self) -> Vec<PlaceC> {
        let mut v: Vec<PlaceC> = self.mults.keys().map(|p| p.base()).collect();
        v.dedup();
        v
    }

    pub fn check(&self, s: &SpectralCurve) -> Result<()> {
        self.mults.keys().try_for_each(|p| s.check_place(p))
    }
}

impl fmt::Display for DivisorCt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.mults.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .mults
            .iter()
            .map(|(p, &m)| if m == 1 { format!("{p}") } else { format!("{m}*{p}") })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Push a divisor down to the base curve.
pub fn norm_divisor(d: &DivisorCt) -> DivisorC {
    let mut out = DivisorC::zero();
    for (p, &m) in d.iter() {
        out.add_place(p.base(), p.degree() * m);
    }
    out
}

pub fn pullback_divisor(s: &SpectralCurve, d: &DivisorC) -> Result<DivisorCt> {
    let mut out = DivisorCt::zero();
    for (p, &m) in d.iter() {
        let fib = s.fiber(p)?;
        let each = if fib.len() == 1 && matches!(fib[0], PlaceCt::Ramified { .. }) { 2 * m } else { m };
        for q in fib {
            out.add_place(q, each);
        }
    }
    Ok(out)
}

/// Split an effective `D̃` as `π*P + D̃′` with `P` maximal.
pub fn pullback_summand(s: &SpectralCurve, d: &DivisorCt) -> Result<(DivisorC, DivisorCt)> {
    let mut p = DivisorC::zero();
    for bp in d.base_support() {
        let fib = s.fiber(&bp)?;
        let k = match fib.as_slice() {
            [a, b] => d.mult(a).min(d.mult(b)),
            [PlaceCt::Ramified { .. }] => d.mult(&fib[0]).div_euclid(2),
            [one] => d.mult(one),
            _ => 0,
        };
        if k > 0 {
            p.add_place(bp, k);
        }
    }
    let rest = d.sub(&pullback_divisor(s, &p)?);
    Ok((p, rest))
}

pub fn involution_divisor(d: &DivisorCt) -> DivisorCt {
    let mut out = DivisorCt::zero();
    for (p, &m) in d.iter() {
        out.add_place(p.involution(), m);
    }
    out
}

/// Q-speciality of `D̃` via its norm.
pub fn is_qspecial_spectral(s: &SpectralCurve, d: &DivisorCt) -> (bool, Vec<QuadDifferential>) {
    let sys = qspecial_system(s.base(), &norm_divisor(d));
    (!sys.is_empty(), sys)
}

/// File format helpers: spectral places carry `w` or have kind `ramified`.
pub fn divisor_ct_from_file(s: &SpectralCurve, file: &DivisorFile) -> Result<DivisorCt> {
    let f = s.base().field();
    let mut d = DivisorCt::zero();
    for e in &file.places {
        let bp = e.base_place(s.base())?;
        let pl = match (e.kind.clone(), e.w) {
            (PlaceKind::Ramified, _) => PlaceCt::Ramified { base: bp },
            (_, Some(w)) => PlaceCt::Split { base: bp, w: f.from_i64(w) },
            (PlaceKind::Infinity, None) if s.infinity_fiber() == InfinityFiber::Inert => PlaceCt::InertInfinity,
            (_, None) => {
                return Err(WobblyError::InvalidInput(format!("spectral place over {bp} needs \"w\" or kind \"ramified\"")))
            }
        };
        s.check_place(&pl)?;
        d.add_place(pl, e.mult);
    }
    Ok(d)
}

pub fn divisor_ct_to_file(d: &DivisorCt) -> DivisorFile {
    let places = d
        .iter()
        .map(|(p, &m)| match *p {
            PlaceCt::Split { base, w } => {
                let mut e = PlaceEntry::from_base(&base, m);
                e.w = Some(w.value() as i64);
                e
            }
            PlaceCt::Ramified { base } => {
                let mut e = PlaceEntry::from_base(&base, m);
                e.kind = PlaceKind::Ramified;
                e
            }
            PlaceCt::InertInfinity => PlaceEntry::from_base(&PlaceC::Infinity, m),
        })
        .collect();
    DivisorFile { places }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basecurve::HyperellipticCurve;
    use crate::exactalg::Poly;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup() -> SpectralCurve {
        let c = HyperellipticCurve::standard(131, 2).unwrap();
        let q = QuadDifferential::new(&c, Poly::from_i64(c.field(), &[0, -2, 1]), Poly::zero(c.field())).unwrap();
        SpectralCurve::build(&c, &q).unwrap()
    }

    #[test]
    fn inert_infinity_file_round_trip() {
        let c = HyperellipticCurve::standard(131, 2).unwrap();
        let f = c.field();
        let q = QuadDifferential::new(&c, Poly::new(f, vec![f.elem(5), f.elem(1), f.non_residue()]), Poly::zero(f)).unwrap();
        let s = SpectralCurve::build(&c, &q).unwrap();
        let mut d = DivisorCt::single(PlaceCt::InertInfinity, 2);
        d.add_place(s.sample_place(3), 1);
        assert_eq!(divisor_ct_from_file(&s, &divisor_ct_to_file(&d)).unwrap(), d);
        // without "w" the same entry is rejected when the fiber splits
        assert!(divisor_ct_from_file(&setup(), &divisor_ct_to_file(&DivisorCt::single(PlaceCt::InertInfinity, 1))).is_err());
    }

    fn random_divisor(s: &SpectralCurve, rng: &mut ChaCha8Rng, n: usize) -> DivisorCt {
        DivisorCt::from_places((0..n).map(|_| s.sample_place_rng(rng)))
    }

    #[test]
    fn norm_pullback_involution_laws() {
        let s = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let n = rng.gen_range(0..7);
            let d = random_divisor(&s, &mut rng, n);
            let nd = norm_divisor(&d);
            assert_eq!(nd.degree(), d.degree());
            assert_eq!(norm_divisor(&involution_divisor(&d)), nd);
            assert_eq!(involution_divisor(&involution_divisor(&d)), d);
            assert_eq!(d.add(&involution_divisor(&d)), pullback_divisor(&s, &nd).unwrap());
            let base = DivisorC::from_places((0..n).map(|_| s.sample_place_rng(&mut rng).base()));
            assert_eq!(norm_divisor(&pullback_divisor(&s, &base).unwrap()), base.scale(2));
            let (p, rest) = pullback_summand(&s, &d).unwrap();
            assert_eq!(norm_divisor(&rest).add(&p.scale(2)), nd);
            assert!(pullback_summand(&s, &rest).unwrap().0.is_zero());
        }
    }

    #[test]
    fn summand_examples() {
        let s = setup();
        let places = s.rational_places();
        let split: Vec<PlaceCt> = places.iter().copied().filter(|p| matches!(p, PlaceCt::Split { .. })).collect();
        let ram = places.iter().copied().find(|p| matches!(p, PlaceCt::Ramified { .. })).unwrap();
        let a = split[0];
        let other = split.iter().copied().find(|p| p.base() != a.base()).unwrap();
        let d = DivisorCt::from_places([a, a.involution(), other]);
        let (p, rest) = pullback_summand(&s, &d).unwrap();
        assert_eq!(p, DivisorC::place(a.base()));
        assert_eq!(rest, DivisorCt::from_places([other]));
        let (p, rest) = pullback_summand(&s, &DivisorCt::single(ram, 2)).unwrap();
        assert_eq!(p, DivisorC::place(ram.base()));
        assert!(rest.is_zero());
        assert!(ram.involution() == ram);
        assert_eq!(norm_divisor(&DivisorCt::single(ram, 1)), DivisorC::place(ram.base()));
        assert_eq!(pullback_divisor(&s, &DivisorC::place(ram.base())).unwrap(), DivisorCt::single(ram, 2));
    }

    #[test]
    fn qspecial_spectral_examples() {
        let s = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        // degree ≤ 3g − 4 = 2: always Q-special
        for _ in 0..20 {
            let d = random_divisor(&s, &mut rng, 2);
            assert!(is_qspecial_spectral(&s, &d).0);
        }
        // generic degree 4 with distinct base x-values: not Q-special
        let mut seen = 0;
        while seen < 10 {
            let d = random_divisor(&s, &mut rng, 4);
            let xs: Vec<_> = d.support().iter().map(|p| p.base().x()).collect();
            let mut uniq = xs.clone();
            uniq.sort();
            uniq.dedup();
            if uniq.len() < 4 || xs.contains(&None) {
                continue;
            }
            assert!(!is_qspecial_spectral(&s, &d).0, "{d}");
            seen += 1;
        }
    }

    #[test]
    fn file_roundtrip() {
        let s = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = random_divisor(&s, &mut rng, 5);
        let file = divisor_ct_to_file(&d);
        let text = serde_json::to_string(&file).unwrap();
        let back: DivisorFile = serde_json::from_str(&text).unwrap();
        assert_eq!(divisor_ct_from_file(&s, &back).unwrap(), d);
    }
}
