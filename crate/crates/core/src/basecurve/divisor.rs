//! Divisors on the base curve supported at degree-1 places.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::curve::{HyperellipticCurve, PlaceC};
use crate::error::{Result, WobblyError};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DivisorC {
    mults: BTreeMap<PlaceC, i64>,
}

impl DivisorC {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn place(p: PlaceC) -> Self {
        Self::single(p, 1)
    }

    pub fn single(p: PlaceC, m: i64) -> Self {
        let mut d = Self::zero();
        d.add_place(p, m);
        d
    }

    pub fn from_places<I: IntoIterator<Item = PlaceC>>(it: I) -> Self {
        let mut d = Self::zero();
        for p in it {
            d.add_place(p, 1);
        }
        d
    }

    pub fn add_place(&mut self, p: PlaceC, m: i64) {
        let e = self.mults.entry(p).or_insert(0);
        *e += m;
        if *e == 0 {
            self.mults.remove(&p);
        }
    }

    pub fn mult(&self, p: &PlaceC) -> i64 {
        self.mults.get(p).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PlaceC, &i64)> {
        self.mults.iter()
    }

    pub fn support(&self) -> Vec<PlaceC> {
        self.mults.keys().copied().collect()
    }

    pub fn degree(&self) -> i64 {
        self.mults.values().sum()
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

    /// `self − o` is effective (or zero).
    pub fn dominates(&self, o: &Self) -> bool {
        self.sub(o).mults.values().all(|&m| m > 0)
    }

    pub fn positive_part(&self) -> Self {
        Self { mults: self.mults.iter().filter(|(_, &m)| m > 0).map(|(&p, &m)| (p, m)).collect() }
    }

    pub fn negative_part(&self) -> Self {
        Self { mults: self.mults.iter().filter(|(_, &m)| m < 0).map(|(&p, &m)| (p, -m)).collect() }
    }

    /// Image under the hyperelliptic involution.
    pub fn conjugate(&self) -> Self {
        let mut d = Self::zero();
        for (p, &m) in &self.mults {
            d.add_place(p.conjugate(), m);
        }
        d
    }

    pub fn check(&self, curve: &HyperellipticCurve) -> Result<()> {
        self.mults.keys().try_for_each(|p| curve.check_place(p))
    }
}

impl fmt::Display for DivisorC {
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

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlaceKind {
    Finite,
    Weierstrass,
    Infinity,
    Ramified,
}

/// One entry of a divisor file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceEntry {
    pub kind: PlaceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<i64>,
    /// Fiber coordinate; present only for places on the spectral curve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<i64>,
    pub mult: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisorFile {
    pub places: Vec<PlaceEntry>,
}

impl PlaceEntry {
    /// The base place named by this entry (ignoring any fiber data).
    pub fn base_place(&self, curve: &HyperellipticCurve) -> Result<PlaceC> {
        let f = curve.field();
        let need_x = || self.x.ok_or_else(|| WobblyError::InvalidInput("place entry needs \"x\"".into()));
        let pl = match self.kind {
            PlaceKind::Infinity => PlaceC::Infinity,
            PlaceKind::Weierstrass => PlaceC::Weierstrass { x: f.from_i64(need_x()?) },
            PlaceKind::Finite => {
                let y = self.y.ok_or_else(|| WobblyError::InvalidInput("finite place needs \"y\"".into()))?;
                PlaceC::Finite { x: f.from_i64(need_x()?), y: f.from_i64(y) }
            }
            PlaceKind::Ramified => match self.x {
                None => PlaceC::Infinity,
                Some(x) => {
                    let a = f.from_i64(x);
                    if curve.f().eval(a).is_zero() {
                        PlaceC::Weierstrass { x: a }
                    } else {
                        let y = self.y.ok_or_else(|| WobblyError::InvalidInput("ramified place needs \"y\"".into()))?;
                        PlaceC::Finite { x: a, y: f.from_i64(y) }
                    }
                }
            },
        };
        curve.check_place(&pl)?;
        Ok(pl)
    }

    pub fn from_base(p: &PlaceC, mult: i64) -> Self {
        let (kind, x, y) = match *p {
            PlaceC::Finite { x, y } => (PlaceKind::Finite, Some(x.value() as i64), Some(y.value() as i64)),
            PlaceC::Weierstrass { x } => (PlaceKind::Weierstrass, Some(x.value() as i64), None),
            PlaceC::Infinity => (PlaceKind::Infinity, None, None),
        };
        Self { kind, x, y, w: None, mult }
    }
}

impl DivisorFile {
    pub fn to_divisor(&self, curve: &HyperellipticCurve) -> Result<DivisorC> {
        let mut d = DivisorC::zero();
        for e in &self.places {
            if e.w.is_some() || e.kind == PlaceKind::Ramified {
                return Err(WobblyError::InvalidInput("spectral place in a base-curve divisor".into()));
            }
            d.add_place(e.base_place(curve)?, e.mult);
        }
        Ok(d)
    }

    pub fn from_divisor(d: &DivisorC) -> Self {
        Self { places: d.iter().map(|(p, &m)| PlaceEntry::from_base(p, m)).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_flags() {
        let c = HyperellipticCurve::standard(131, 2).unwrap();
        let ps = c.rational_places();
        let d = DivisorC::from_places([ps[0], ps[1], ps[1]]);
        assert_eq!(d.degree(), 3);
        assert!(d.is_effective());
        assert!(!d.is_reduced());
        assert!(d.sub(&d).is_zero());
        assert!(d.dominates(&DivisorC::place(ps[1])));
        assert!(!DivisorC::place(ps[1]).dominates(&d));
        assert_eq!(d.conjugate().conjugate(), d);
    }

    #[test]
    fn json_roundtrip() {
        let c = HyperellipticCurve::standard(131, 2).unwrap();
        let d = DivisorC::from_places(c.rational_places().into_iter().take(4)).add(&DivisorC::single(PlaceC::Infinity, 3));
        let s = serde_json::to_string(&DivisorFile::from_divisor(&d)).unwrap();
        let back: DivisorFile = serde_json::from_str(&s).unwrap();
        assert_eq!(back.to_divisor(&c).unwrap(), d);
    }
}
