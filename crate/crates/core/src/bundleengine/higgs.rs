//! Direct images `E = π_*(π*L ⊗ O(D̃))` with their `y`- and `w`-actions,
//! determinant class, injections of line bundles and the maps attached to
//! them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lattice::{fn_ct_from_rat, lattice_of_ct, LatticePair};
use crate::basecurve::{rr_dimension, DivisorC, FnC, PlaceC};
use crate::error::{Result, WobblyError};
use crate::exactalg::polymat::{ratmat_inverse, ratmat_mul, ratmat_vec};
use crate::exactalg::{Fp, Poly, PolyMatrix, PrimeField, RatFn};
use crate::spectral::{pullback_divisor, pullback_summand, DivisorCt, FnCt, SpectralCurve};

type RatMat = Vec<Vec<RatFn>>;

/// An endomorphism (possibly twisted) written in both chart bases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChartMatrices {
    /// Over `x`, in the finite basis.
    pub fin: PolyMatrix,
    /// Over `u = 1/x`, in the infinite basis, after multiplying by `u^scale`.
    pub inf: PolyMatrix,
    pub scale: i64,
}

/// A marked map `O(G′) → E`, given by the function it multiplies by.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Injection {
    pub sub: DivisorC,
    pub psi: FnCt,
}

#[derive(Clone, Debug)]
pub struct HiggsBundleData {
    pub spectral: SpectralCurve,
    /// `L = O(G)`.
    pub line: DivisorC,
    pub divisor: DivisorCt,
    pub lattice: LatticePair,
    pub y_action: ChartMatrices,
    pub w_action: ChartMatrices,
    pub injection: Option<Injection>,
    r0: RatMat,
    r0_inv: RatMat,
    rinf: RatMat,
    rinf_inv: RatMat,
}

fn x_power(f: PrimeField, k: i64) -> RatFn {
    if k >= 0 {
        RatFn::from_poly(Poly::monomial(f.one(), k as usize))
    } else {
        RatFn::new(Poly::one(f), Poly::monomial(f.one(), (-k) as usize))
    }
}

/// `r(x)` as a polynomial in `u = 1/x`, if it is one.
fn poly_in_u(r: &RatFn) -> Option<Poly> {
    let f = r.field();
    if r.is_zero() {
        return Some(Poly::zero(f));
    }
    let k = r.den().degree()?;
    if r.den().low_degree() != Some(k) || r.num().deg_i64() > k as i64 {
        return None;
    }
    Some(r.num().reverse(k))
}

fn to_ratmat(f: PrimeField, m: &PolyMatrix, in_u: bool) -> RatMat {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| {
                    let p = m.get(i, j);
                    if !in_u {
                        return RatFn::from_poly(p.clone());
                    }
                    match p.degree() {
                        None => RatFn::zero(f),
                        Some(d) => RatFn::new(p.reverse(d), Poly::monomial(f.one(), d)),
                    }
                })
                .collect()
        })
        .collect()
}

/// Coordinates over `{1, y, w, yw}`.
pub fn e_coords(phi: &FnCt) -> Vec<RatFn> {
    phi.coeffs().iter().map(|p| RatFn::new(p.clone(), phi.den().clone())).collect()
}

/// `ξ ∧ η` in the frame `1 ∧ w`.
pub fn wedge(xi: &FnCt, eta: &FnCt, s: &SpectralCurve) -> FnC {
    let c = s.base();
    let (a, b) = xi.parts();
    let (a2, b2) = eta.parts();
    a.mul(&b2, c).sub(&b.mul(&a2, c))
}

impl HiggsBundleData {
    pub fn field(&self) -> PrimeField {
        self.spectral.base().field()
    }

    /// `deg E = 2·deg L + deg D̃ − (2g − 2)`.
    pub fn degree(&self) -> i64 {
        2 * self.line.degree() + self.divisor.degree() - self.spectral.base().canonical_degree()
    }

    /// Total divisor `π*G + D̃` whose sections make up `E`.
    pub fn total_divisor(&self) -> Result<DivisorCt> {
        Ok(pullback_divisor(&self.spectral, &self.line)?.add(&self.divisor))
    }

    /// Matrices of a `F_p(x)`-linear map given on `{1, y, w, yw}`.
    pub fn chart_matrices(&self, m: &RatMat, scale: i64) -> Result<ChartMatrices> {
        let f = self.field();
        let fin_r = ratmat_mul(&self.r0_inv, &ratmat_mul(m, &self.r0));
        let inf_r = ratmat_mul(&self.rinf_inv, &ratmat_mul(m, &self.rinf));
        let s = x_power(f, -scale);
        let n = fin_r.len();
        let mut fin = PolyMatrix::zeros(f, n, n);
        let mut inf = PolyMatrix::zeros(f, n, n);
        for i in 0..n {
            for j in 0..n {
                let a = fin_r[i][j]
                    .as_poly()
                    .ok_or_else(|| WobblyError::Invariant(format!("finite chart entry {:?} has poles", fin_r[i][j])))?;
                let b = poly_in_u(&(&inf_r[i][j] * &s))
                    .ok_or_else(|| WobblyError::Invariant(format!("infinite chart entry {:?} has poles", inf_r[i][j])))?;
                fin.set(i, j, a);
                inf.set(i, j, b);
            }
        }
        Ok(ChartMatrices { fin, inf, scale })
    }

    /// Finite-chart coordinates of a function.
    pub fn coords(&self, phi: &FnCt) -> Vec<RatFn> {
        ratmat_vec(&self.r0_inv, &e_coords(phi))
    }

    pub fn from_coords(&self, v: &[RatFn]) -> FnCt {
        fn_ct_from_rat(&ratmat_vec(&self.r0, v))
    }

    /// Apply chart matrices (finite chart) to a function.
    pub fn apply(&self, m: &ChartMatrices, phi: &FnCt) -> FnCt {
        let fm = to_ratmat(self.field(), &m.fin, false);
        self.from_coords(&ratmat_vec(&fm, &self.coords(phi)))
    }

    /// `Λ_div = −Σ δ_P·P` with `δ_P` the order of the local determinant of
    /// `E` in the frame `1 ∧ w`.
    pub fn det_divisor(&self) -> Result<DivisorC> {
        let s = &self.spectral;
        let c = s.base();
        let r = self.lattice.rank();
        let mut places: Vec<PlaceC> = Vec::new();
        for p in self.total_divisor()?.base_support() {
            if let Some(a) = p.x() {
                places.extend(c.places_over(a).unwrap_or_default());
            }
        }
        places.sort();
        places.dedup();
        let fin: Vec<FnCt> = (0..r).map(|j| self.lattice.basis_fn_ct(j)).collect();
        let rinf = &self.rinf;
        let inf: Vec<FnCt> = (0..r).map(|j| fn_ct_from_rat(&(0..r).map(|i| rinf[i][j].clone()).collect::<Vec<_>>())).collect();
        let delta = |gens: &[FnCt], p: &PlaceC| -> i64 {
            let mut best = i64::MAX;
            for j in 0..gens.len() {
                for k in j + 1..gens.len() {
                    let m = wedge(&gens[j], &gens[k], s);
                    if !m.is_zero() {
                        best = best.min(m.ord_at(c, p));
                    }
                }
            }
            best
        };
        let mut out = DivisorC::zero();
        for p in places {
            out.add_place(p, -delta(&fin, &p));
        }
        out.add_place(PlaceC::Infinity, -delta(&inf, &PlaceC::Infinity));
        Ok(out)
    }

    pub fn with_injection(mut self, inj: Injection) -> Self {
        self.injection = Some(inj);
        self
    }

    fn injection_ref(&self) -> Result<&Injection> {
        self.injection.as_ref().ok_or_else(|| WobblyError::InvalidInput("no marked injection".into()))
    }
}

/// `E = π_*(π*O(G) ⊗ O(D̃))` with the canonical injection `O(G) → E`.
pub fn direct_image(s: &SpectralCurve, line: &DivisorC, d: &DivisorCt) -> Result<HiggsBundleData> {
    line.check(s.base())?;
    d.check(s)?;
    let total = pullback_divisor(s, line)?.add(d);
    let lattice = lattice_of_ct(s, &total)?;
    let f = s.base().field();
    let r0 = lattice.fin_basis_rat();
    let rinf = lattice.inf_basis_rat();
    let r0_inv = ratmat_inverse(&r0).ok_or_else(|| WobblyError::Invariant("singular basis".into()))?;
    let rinf_inv = ratmat_inverse(&rinf).ok_or_else(|| WobblyError::Invariant("singular basis".into()))?;
    let mut data = HiggsBundleData {
        spectral: s.clone(),
        line: line.clone(),
        divisor: d.clone(),
        lattice,
        y_action: ChartMatrices { fin: PolyMatrix::zeros(f, 0, 0), inf: PolyMatrix::zeros(f, 0, 0), scale: 0 },
        w_action: ChartMatrices { fin: PolyMatrix::zeros(f, 0, 0), inf: PolyMatrix::zeros(f, 0, 0), scale: 0 },
        injection: Some(Injection { sub: line.clone(), psi: FnCt::one(s) }),
        r0,
        r0_inv,
        rinf,
        rinf_inv,
    };
    let g = s.base().genus() as i64;
    let y = FnCt::from_base(&FnC::y(s.base()));
    data.y_action = data.chart_matrices(&multiplication(&y, s), g + 1)?;
    data.w_action = data.chart_matrices(&multiplication(&FnCt::w(s), s), g - 1)?;
    Ok(data)
}

/// Matrix of multiplication by `φ` on `{1, y, w, yw}`.
pub fn multiplication(phi: &FnCt, s: &SpectralCurve) -> RatMat {
    let cols: Vec<Vec<RatFn>> = e_basis(s).iter().map(|b| e_coords(&phi.mul(b, s))).collect();
    transpose(&cols)
}

fn e_basis(s: &SpectralCurve) -> [FnCt; 4] {
    let y = FnCt::from_base(&FnC::y(s.base()));
    [FnCt::one(s), y.clone(), FnCt::w(s), y.mul(&FnCt::w(s), s)]
}

fn transpose(cols: &[Vec<RatFn>]) -> RatMat {
    (0..cols[0].len()).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect()
}

/// Structural identities `Y² = f`, `W² = h`, `YW = WY` on both charts.
pub fn check_higgs_structure(data: &HiggsBundleData) -> Result<()> {
    let s = &data.spectral;
    let h = FnCt::from_base(s.h());
    let fy = FnCt::from_base(&FnC::from_poly(s.base().f().clone()));
    let g = s.base().genus() as i64;
    let expect_y2 = data.chart_matrices(&multiplication(&fy, s), 2 * g + 2)?;
    let expect_w2 = data.chart_matrices(&multiplication(&h, s), 2 * g - 2)?;
    let (y, w) = (&data.y_action, &data.w_action);
    let ok = y.fin.mul(&y.fin) == expect_y2.fin
        && y.inf.mul(&y.inf) == expect_y2.inf
        && w.fin.mul(&w.fin) == expect_w2.fin
        && w.inf.mul(&w.inf) == expect_w2.inf
        && y.fin.mul(&w.fin) == w.fin.mul(&y.fin)
        && y.inf.mul(&w.inf) == w.inf.mul(&y.inf);
    if ok {
        Ok(())
    } else {
        Err(WobblyError::Invariant("Higgs structure identities fail".into()))
    }
}

/// Class triviality: degree zero and a nonzero section.
pub fn iso_trivial(s: &crate::basecurve::HyperellipticCurve, d: &DivisorC) -> bool {
    d.degree() == 0 && rr_dimension(s, d) == 1
}

/// `Hom(O(G′), E) = H⁰(C̃, π*(G − G′) + D̃)`; returns the dimension and the
/// multipliers realizing each map.
pub fn hom_line_to_e(data: &HiggsBundleData, sub: &DivisorC) -> Result<(usize, Vec<FnCt>)> {
    let s = &data.spectral;
    let twist = pullback_divisor(s, &data.line.sub(sub))?.add(&data.divisor);
    let l = lattice_of_ct(s, &twist)?;
    let secs: Vec<FnCt> = l.sections(0).iter().map(|a| fn_ct_from_rat(&l.coords_to_rat(a))).collect();
    Ok((secs.len(), secs))
}

/// Check `div(ψ) + D ≥ 0` place by place over the possible poles.
pub fn verify_section(s: &SpectralCurve, psi: &FnCt, d: &DivisorCt) -> Result<bool> {
    if psi.is_zero() {
        return Ok(false);
    }
    let c = s.base();
    let mut base: Vec<PlaceC> = d.base_support();
    base.push(PlaceC::Infinity);
    let roots = psi.den().roots();
    if psi.den().degree().unwrap_or(0) > roots.iter().map(|&a| psi.den().root_multiplicity(a)).sum::<usize>() {
        return Err(WobblyError::IrrationalSupport(format!("{}", psi.den())));
    }
    for a in roots {
        base.extend(c.places_over(a).ok_or_else(|| WobblyError::IrrationalSupport(format!("x = {a}")))?);
    }
    base.sort();
    base.dedup();
    for p in base {
        let fib = match s.fiber(&p) {
            Ok(v) => v,
            Err(WobblyError::InertPlace(_)) => {
                // inert: both parts must be regular
                let (n0, n1) = psi.parts();
                let o = [n0, n1].iter().filter(|x| !x.is_zero()).map(|x| x.ord_at(c, &p)).min().unwrap();
                if o < 0 {
                    return Ok(false);
                }
                continue;
            }
            Err(e) => return Err(e),
        };
        for q in fib {
            if psi.ord_at(s, &q) < -d.mult(&q) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Which inequality counts as destabilizing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StabilityTest {
    /// `2·deg G′ > deg E`.
    Semistable,
    /// `2·deg G′ ≥ deg E`.
    Stable,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DestabilizerResult {
    Destabilized { sub: DivisorC, witness: FnCt },
    /// No violating sub-line bundle among `tried` candidates; not a proof.
    NoneFound { tried: usize },
}

/// Randomized search for a sub-line bundle violating the slope inequality.
pub fn destabilizer_search(
    data: &HiggsBundleData,
    test: StabilityTest,
    effort: usize,
    seed: u64,
) -> Result<DestabilizerResult> {
    let s = &data.spectral;
    let deg_e = data.degree();
    let violates = |d: i64| match test {
        StabilityTest::Semistable => 2 * d > deg_e,
        StabilityTest::Stable => 2 * d >= deg_e,
    };
    let mut cands: Vec<DivisorC> = vec![data.line.clone()];
    let (p, _) = pullback_summand(s, &data.divisor)?;
    if !p.is_zero() {
        cands.push(data.line.add(&p));
    }
    cands.push(DivisorC::zero());
    // the largest degree for which Hom can be nonzero
    let top = data.line.degree() + data.divisor.degree() / 2;
    for k in -1..=top {
        cands.push(DivisorC::single(PlaceC::Infinity, k));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = deg_e.div_euclid(2);
    for _ in 0..effort {
        let m = rng.gen_range(lo..=top.max(lo));
        let mut g2 = data.line.clone();
        let extra = m - g2.degree();
        for _ in 0..extra.abs() {
            g2.add_place(sample_split_base(s, &mut rng), extra.signum());
        }
        cands.push(g2);
    }
    let mut tried = 0;
    for g2 in cands {
        if !violates(g2.degree()) {
            continue;
        }
        tried += 1;
        let (n, secs) = match hom_line_to_e(data, &g2) {
            Ok(v) => v,
            Err(WobblyError::InertPlace(_)) => continue,
            Err(e) => return Err(e),
        };
        if n > 0 {
            let twist = pullback_divisor(s, &data.line.sub(&g2))?.add(&data.divisor);
            let w = secs[0].clone();
            if !verify_section(s, &w, &twist)? {
                return Err(WobblyError::Invariant("destabilizing witness fails verification".into()));
            }
            return Ok(DestabilizerResult::Destabilized { sub: g2, witness: w });
        }
    }
    Ok(DestabilizerResult::NoneFound { tried })
}

/// A base place whose spectral fiber is rational.
pub(crate) fn sample_split_base<R: Rng>(s: &SpectralCurve, rng: &mut R) -> PlaceC {
    loop {
        let p = s.base().sample_place_rng(rng);
        if s.fiber(&p).is_ok() {
            return p;
        }
    }
}

/// Vanishing divisor of `π*O(G′) → π*E → 𝓛`: `div ψ + π*(G − G′) + D̃`.
pub fn baker_akhiezer_divisor(data: &HiggsBundleData) -> Result<DivisorCt> {
    let inj = data.injection_ref()?;
    let s = &data.spectral;
    let d = inj.psi.divisor(s)?.add(&pullback_divisor(s, &data.line.sub(&inj.sub))?).add(&data.divisor);
    if !d.is_effective() && !d.is_zero() {
        return Err(WobblyError::Invariant(format!("Baker-Akhiezer divisor {d} is not effective")));
    }
    Ok(d)
}

/// The section `c_i(φ)` of `K_C L⁻² Λ` for `φ = w`, as its value in the
/// standard frames together with its divisor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CSection {
    pub value: FnC,
    pub divisor: DivisorC,
}

/// `ℓ ↦ i(ℓ) ∧ φ(i(ℓ))` for a Higgs field given in chart matrices.
pub fn c_value(data: &HiggsBundleData, phi: &ChartMatrices) -> Result<FnC> {
    let inj = data.injection_ref()?;
    Ok(wedge(&inj.psi, &data.apply(phi, &inj.psi), &data.spectral))
}

pub fn c_section(data: &HiggsBundleData) -> Result<CSection> {
    let inj = data.injection_ref()?;
    let s = &data.spectral;
    let ba = baker_akhiezer_divisor(data)?;
    if !pullback_summand(s, &ba)?.0.is_zero() {
        return Err(WobblyError::DegenerateInjection(format!("injection vanishes along {}", pullback_summand(s, &ba)?.0)));
    }
    let value = c_value(data, &data.w_action)?;
    let k = DivisorC::single(PlaceC::Infinity, s.base().canonical_degree());
    let divisor = value.divisor(s.base())?.sub(&inj.sub.scale(2)).add(&data.det_divisor()?).add(&k);
    Ok(CSection { value, divisor })
}

/// `φ_n(ξ) = σ·(ψ ∧ ξ)·ψ`; `σ` must be a section of `K_C L² Λ⁻¹`, which
/// is confirmed by the chart matrices being polynomial.
pub fn construct_nilpotent(data: &HiggsBundleData, sigma: &FnC) -> Result<ChartMatrices> {
    let inj = data.injection_ref()?;
    let s = &data.spectral;
    let ba = baker_akhiezer_divisor(data)?;
    let (p, _) = pullback_summand(s, &ba)?;
    if !p.is_zero() {
        return Err(WobblyError::DegenerateInjection(format!("injection vanishes along {p}")));
    }
    if sigma.is_zero() {
        return Err(WobblyError::InvalidInput("zero section".into()));
    }
    let cols: Vec<Vec<RatFn>> = e_basis(s)
        .iter()
        .map(|b| {
            let v = FnCt::from_base(&sigma.mul(&wedge(&inj.psi, b, s), s.base())).mul(&inj.psi, s);
            e_coords(&v)
        })
        .collect();
    let m = transpose(&cols);
    let g = s.base().genus() as i64;
    data.chart_matrices(&m, g - 1).map_err(|e| match e {
        WobblyError::Invariant(m) => WobblyError::InvalidInput(format!("section is not holomorphic: {m}")),
        e => e,
    })
}

/// Forward map `q ↦ φ_n` with `σ = q / c_i(φ)`.
pub fn nilpotent_from_quad(data: &HiggsBundleData, q: &crate::basecurve::QuadDifferential) -> Result<ChartMatrices> {
    let s = &data.spectral;
    let c = s.base();
    let cs = c_section(data)?;
    let sys = crate::basecurve::qspecial_system(c, &cs.divisor);
    let mut rows: Vec<Vec<Fp>> = sys.iter().map(|b| b.coordinates(c)).collect();
    let base_rank = crate::exactalg::linalg::span_rank(c.field(), &rows);
    rows.push(q.coordinates(c));
    if q.is_zero() || crate::exactalg::linalg::span_rank(c.field(), &rows) != base_rank {
        return Err(WobblyError::NotQSpecial);
    }
    let sigma = q.branch_function().mul(&cs.value.inv(c).expect("nonzero c-section"), c);
    construct_nilpotent(data, &sigma)
}

/// Backward map: `φ_n(wψ) = q·ψ`.
pub fn quad_from_nilpotent(data: &HiggsBundleData, phi: &ChartMatrices) -> Result<crate::basecurve::QuadDifferential> {
    let inj = data.injection_ref()?;
    let s = &data.spectral;
    let c = s.base();
    let img = data.apply(phi, &FnCt::w(s).mul(&inj.psi, s));
    let kappa = img.mul(&inj.psi.inv(s).expect("nonzero injection"), s);
    let (k0, k1) = kappa.parts();
    if !k1.is_zero() || k0.c().degree() != Some(0) {
        return Err(WobblyError::Invariant(format!("φ_n(wψ)/ψ = {kappa:?} is not a quadratic differential")));
    }
    let inv = k0.c().lc().inv().unwrap();
    crate::basecurve::QuadDifferential::new(c, k0.a().scale(inv), k0.b().scale(inv))
}

/// Verdict for a limit of the `C*`-flow in the unstable regime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum HhLimit {
    VeryStableLimit,
    WobblyLimit,
}

#[derive(Clone, Debug)]
pub struct HhLimitReport {
    pub verdict: HhLimit,
    pub destabilizer: DestabilizerResult,
}

/// For `deg D̃ < 2g − 2` the pushforward is destabilized by `L_E`; the limit
/// is very stable exactly when `D̃` is reduced.
pub fn hh_limit_status(s: &SpectralCurve, l_e: &DivisorC, d: &DivisorCt, effort: usize, seed: u64) -> Result<HhLimitReport> {
    let kdeg = s.base().canonical_degree();
    if d.degree() >= kdeg {
        return Err(WobblyError::RegimeError(format!("deg D̃ = {} is not below 2g − 2 = {kdeg}", d.degree())));
    }
    let data = direct_image(s, l_e, d)?;
    let destabilizer = destabilizer_search(&data, StabilityTest::Semistable, effort, seed)?;
    let verdict = if d.is_reduced() { HhLimit::VeryStableLimit } else { HhLimit::WobblyLimit };
    Ok(HhLimitReport { verdict, destabilizer })
}
