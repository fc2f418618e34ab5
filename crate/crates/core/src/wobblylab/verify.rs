use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{bn_numbers, classify, component_spectrum, default_quad, trial_seed, SCHEMA, VERSION};
use crate::basecurve::{qspecial_system, CurveFile, DivisorC, DivisorFile, HyperellipticCurve, PlaceC, QuadDifferential, QuadFile};
use crate::bundleengine::{
    baker_akhiezer_divisor, c_section, c_value, check_higgs_structure, direct_image, hh_limit_status, iso_trivial, lattice_of_c,
    lattice_of_ct, nilpotent_from_quad, quad_from_nilpotent, DestabilizerResult, HhLimit, LatticePair,
};
use crate::exactalg::polymat::{ratmat_mul, LaurentMatrix};
use crate::exactalg::{PolyMatrix, RatFn};
use crate::spectral::{build_spectral, divisor_ct_to_file, is_qspecial_spectral, norm_divisor, pullback_divisor, pullback_summand, DivisorCt, SpectralCurve};
use crate::{Result, WobblyError};

/// Deliberate corruption for exercising the failure path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fault {
    /// Replace the transition matrix `T` by `T·diag(x, 1, …, 1)` in the
    /// Riemann-Roch check.
    CorruptTransition,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reproducer {
    pub curve: CurveFile,
    pub q: QuadFile,
    pub divisor: DivisorFile,
    pub line: DivisorFile,
    pub seed: u64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    pub instances: usize,
    pub passed: usize,
    /// Instances with support the engine cannot represent (irrational or inert places).
    pub skipped: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reproducer: Option<Reproducer>,
}

impl CheckEntry {
    pub fn ok(&self) -> bool {
        self.passed + self.skipped == self.instances && self.passed > 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyLedger {
    pub schema: String,
    pub version: String,
    pub curve: CurveFile,
    pub q: QuadFile,
    pub trials: usize,
    pub seed: u64,
    pub checks: Vec<CheckEntry>,
    pub all_passed: bool,
}

impl VerifyLedger {
    /// Names with pass flags; equal across primes when the suite is healthy.
    pub fn outcome(&self) -> Vec<(String, bool)> {
        self.checks.iter().map(|c| (c.name.clone(), c.ok())).collect()
    }
}

#[derive(Clone, Debug)]
struct Instance {
    divisor: DivisorCt,
    line: DivisorC,
    seed: u64,
}

struct Ctx {
    s: SpectralCurve,
    fault: Option<Fault>,
}

impl Ctx {
    fn c(&self) -> &HyperellipticCurve {
        self.s.base()
    }

    fn g(&self) -> i64 {
        self.c().genus() as i64
    }

    fn canonical(&self) -> DivisorC {
        DivisorC::single(PlaceC::Infinity, self.c().canonical_degree())
    }

    fn lattice(&self, d: &DivisorCt) -> Result<LatticePair> {
        let l = lattice_of_ct(&self.s, d)?;
        match self.fault {
            None => Ok(l),
            Some(Fault::CorruptTransition) => {
                let f = l.field();
                let n = l.rank();
                let diag: Vec<Vec<RatFn>> = (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| match (i, j) {
                                (0, 0) => RatFn::from_poly(crate::exactalg::Poly::x(f)),
                                _ if i == j => RatFn::from_poly(crate::exactalg::Poly::one(f)),
                                _ => RatFn::zero(f),
                            })
                            .collect()
                    })
                    .collect();
                let t = LaurentMatrix::from_ratmat(f, &ratmat_mul(&l.t.to_ratmat(), &diag))
                    .ok_or_else(|| WobblyError::Invariant("corrupted transition is not Laurent".into()))?;
                l.with_transition(t).ok_or_else(|| WobblyError::Invariant("corrupted transition is singular".into()))
            }
        }
    }
}

type Gen = fn(&Ctx, &mut ChaCha8Rng) -> (DivisorCt, DivisorC);
type Pred = fn(&Ctx, &Instance) -> Result<std::result::Result<(), String>>;

fn random_ct(s: &SpectralCurve, rng: &mut ChaCha8Rng, n: i64) -> DivisorCt {
    DivisorCt::from_places((0..n).map(|_| s.sample_place_rng(rng)))
}

fn random_line(s: &SpectralCurve, rng: &mut ChaCha8Rng) -> DivisorC {
    let mut g = DivisorC::zero();
    for _ in 0..rng.gen_range(0..3) {
        g.add_place(crate::bundleengine::higgs::sample_split_base(s, rng), 1);
    }
    if rng.gen_bool(0.3) {
        g.add_place(crate::bundleengine::higgs::sample_split_base(s, rng), -1);
    }
    g
}

fn expect(ok: bool, msg: impl FnOnce() -> String) -> Result<std::result::Result<(), String>> {
    Ok(if ok { Ok(()) } else { Err(msg()) })
}

fn gen_any(ctx: &Ctx, rng: &mut ChaCha8Rng) -> (DivisorCt, DivisorC) {
    let gt = ctx.s.genus() as i64;
    let n = rng.gen_range(0..=gt + 2);
    let mut d = random_ct(&ctx.s, rng, n);
    if rng.gen_bool(0.25) {
        d.add_place(ctx.s.sample_place_rng(rng), -1);
    }
    (d, DivisorC::zero())
}

fn gen_effective_line(ctx: &Ctx, rng: &mut ChaCha8Rng) -> (DivisorCt, DivisorC) {
    let n = rng.gen_range(0..=4 * ctx.g() - 3);
    (random_ct(&ctx.s, rng, n), random_line(&ctx.s, rng))
}

fn gen_no_pullback(ctx: &Ctx, rng: &mut ChaCha8Rng) -> (DivisorCt, DivisorC) {
    let n = rng.gen_range(1..=3 * ctx.g() - 4);
    let d = random_ct(&ctx.s, rng, n);
    let rest = pullback_summand(&ctx.s, &d).map(|(_, r)| r).unwrap_or(d);
    (rest, random_line(&ctx.s, rng))
}

fn gen_low(ctx: &Ctx, rng: &mut ChaCha8Rng) -> (DivisorCt, DivisorC) {
    let n = rng.gen_range(1..=3 * ctx.g() - 4);
    (random_ct(&ctx.s, rng, n), DivisorC::zero())
}

fn gen_unstable(ctx: &Ctx, rng: &mut ChaCha8Rng) -> (DivisorCt, DivisorC) {
    let top = 2 * ctx.g() - 3;
    let d = if top >= 2 && rng.gen_bool(0.5) {
        DivisorCt::single(ctx.s.sample_place_rng(rng), 2)
    } else {
        let n = rng.gen_range(1..=top);
        random_ct(&ctx.s, rng, n)
    };
    (d, random_line(&ctx.s, rng))
}

fn rr(ctx: &Ctx, i: &Instance) -> Result<std::result::Result<(), String>> {
    let gt = ctx.s.genus() as i64;
    let kt = pullback_divisor(&ctx.s, &DivisorC::single(PlaceC::Infinity, 4 * ctx.g() - 4))?;
    let a = ctx.lattice(&i.divisor)?.h0() as i64;
    let b = ctx.lattice(&kt.sub(&i.divisor))?.h0() as i64;
    let want = i.divisor.degree() - gt + 1;
    expect(a - b == want, || format!("h0(D) - h0(K-D) = {a} - {b}, expected {want}"))
}

fn splitting(ctx: &Ctx, i: &Instance) -> Result<std::result::Result<(), String>> {
    let l = lattice_of_ct(&ctx.s, &i.divisor)?;
    let st = l.splitting_type();
    for n in -2..=2 {
        if st.h(n) != l.h(n) {
            return expect(false, || format!("h({n}): type gives {}, lattice gives {}", st.h(n), l.h(n)));
        }
    }
    expect(st.chi() == l.chi_expected() && l.chi_from_det() == Some(l.chi_expected()), || {
        format!("chi: type {}, det {:?}, expected {}", st.chi(), l.chi_from_det(), l.chi_expected())
    })
}

fn determinant(ctx: &Ctx, i: &Instance) -> Result<std::result::Result<(), String>> {
    let data = direct_image(&ctx.s, &i.line, &i.divisor)?;
    let lam = data.det_divisor()?;
    let want = i.line.scale(2).add(&norm_divisor(&i.divisor)).sub(&ctx.canonical());
    expect(lam == want && iso_trivial(ctx.c(), &lam.sub(&want)), || format!("det = {lam}, expected {want}"))
}

fn higgs_structure(ctx: &Ctx, i: &Instance) -> Result<std::result::Result<(), String>> {
    let data = direct_image(&ctx.s, &i.line, &i.divisor)?;
    Ok(check_higgs_structure(&data).map_err(|e| e.to_string()))
}

fn check_qspecial_dimension(ctx: &Ctx, i: &Instance) -> Result<std::result::Result<(), String>> {
    let data = direct_image(&ctx.s, &i.line, &i.divisor)?;
    let target = ctx.canonical().add(&i.line.scale(2)).sub(&data.det_divisor()?);
    let a = lattice_of_c(ctx.c(), &target)?.h0();
    let b = qspecial_system(ctx.c(), &norm_divisor(&i.divisor)).len();
    expect(a == b, || format!("h0 of the twist {a}, Q-special system {b}"))
}

fn norm_identity(ctx: &Ctx, i: &Instance) -> Result<std::result::Result<(), String>> {
    let data = direct_image(&ctx.s, &i.line, &i.divisor)?;
    let ba = baker_akhiezer_divisor(&data)?;
    let cs = c_section(&data)?;
    expect(ba == i.divisor && cs.divisor == norm_divisor(&ba), || format!("Nm(BA) = {}, c-divisor {}", norm_divisor(&ba), cs.divisor))
}

fn nilpotent(ctx: &Ctx, i: &Instance) -> Result<std::result::Result<(), String>> {
    let c = ctx.c();
    let data = direct_image(&ctx.s, &i.line, &i.divisor)?;
    let sys = qspecial_system(c, &norm_divisor(&i.divisor));
    let mut rng = ChaCha8Rng::seed_from_u64(i.seed);
    let mut v = vec![c.field().zero(); QuadDifferential::space_dimension(c)];
    for b in &sys {
        let k = c.field().random_nonzero(&mut rng);
        for (x, y) in v.iter_mut().zip(b.coordinates(c)) {
            *x += y * k;
        }
    }
    let q = QuadDifferential::from_coordinates(c, &v);
    if q.is_zero() {
        return expect(false, || "Q-special system is empty".into());
    }
    let phi = nilpotent_from_quad(&data, &q)?;
    let zero = PolyMatrix::zeros(c.field(), phi.fin.rows(), phi.fin.cols());
    let square_zero = phi.fin.mul(&phi.fin) == zero && phi.inf.mul(&phi.inf) == zero;
    let kills = c_value(&data, &phi)?.is_zero();
    let back = quad_from_nilpotent(&data, &phi)?;
    expect(square_zero && kills && back.proportional_to(&q), || format!("square zero {square_zero}, c = 0 {kills}, round trip {}", back.proportional_to(&q)))
}

fn saturation(ctx: &Ctx, i: &Instance) -> Result<std::result::Result<(), String>> {
    expect(is_qspecial_spectral(&ctx.s, &i.divisor).0, || "not Q-special".into())
}

fn check_unstable_limit(ctx: &Ctx, i: &Instance) -> Result<std::result::Result<(), String>> {
    let r = hh_limit_status(&ctx.s, &i.line, &i.divisor, 4, i.seed)?;
    let want = if i.divisor.is_reduced() { HhLimit::VeryStableLimit } else { HhLimit::WobblyLimit };
    let found = matches!(r.destabilizer, DestabilizerResult::Destabilized { .. });
    expect(r.verdict == want && found, || format!("verdict {:?}, destabilizer found {found}", r.verdict))
}

fn determinism(ctx: &Ctx, i: &Instance) -> Result<std::result::Result<(), String>> {
    let a = serde_json::to_string(&classify(ctx.c(), ctx.s.q(), &i.divisor, 2, i.seed)?).map_err(|e| WobblyError::Invariant(e.to_string()))?;
    let b = serde_json::to_string(&classify(ctx.c(), ctx.s.q(), &i.divisor, 2, i.seed)?).map_err(|e| WobblyError::Invariant(e.to_string()))?;
    expect(a == b, || "reports differ".into())
}

fn classify_bound(ctx: &Ctx, i: &Instance) -> Result<std::result::Result<(), String>> {
    let r = classify(ctx.c(), ctx.s.q(), &i.divisor, 2, i.seed)?;
    let g = ctx.g();
    let m = &r.membership;
    let parity = (m.k - r.lambda).rem_euclid(2) == 0;
    let wobbly = matches!(r.verdict, super::Verdict::Wobbly | super::Verdict::WobblyIfSemistable);
    expect(parity && (!wobbly || (r.lambda <= m.k && m.k <= 2 * g - 2 - r.lambda)), || format!("k = {} with verdict {:?}", m.k, r.verdict))
}

const CHECKS: &[(&str, Gen, Pred)] = &[
    ("riemann_roch_serre_duality", gen_any, rr),
    ("splitting_type_reconstruction", gen_any, splitting),
    ("determinant_identity", gen_effective_line, determinant),
    ("higgs_field_structure", gen_effective_line, higgs_structure),
    ("qspecial_dimension_equality", gen_effective_line, check_qspecial_dimension),
    ("norm_identity", gen_no_pullback, norm_identity),
    ("nilpotent_round_trip", gen_no_pullback, nilpotent),
    ("qspecial_saturation", gen_low, saturation),
    ("unstable_limit_predicate", gen_unstable, check_unstable_limit),
    ("classify_determinism", gen_low, determinism),
    ("component_label_bounds", gen_effective_line, classify_bound),
];

fn is_skip(e: &WobblyError) -> bool {
    matches!(e, WobblyError::IrrationalSupport(_) | WobblyError::InertPlace(_))
}

/// `None` for skipped instances.
fn run(ctx: &Ctx, pred: Pred, inst: &Instance) -> Option<std::result::Result<(), String>> {
    match pred(ctx, inst) {
        Ok(r) => Some(r),
        Err(e) if is_skip(&e) => None,
        Err(e) => Some(Err(e.to_string())),
    }
}

/// Greedily drop places while the failure persists.
fn minimize(ctx: &Ctx, pred: Pred, mut inst: Instance, mut detail: String) -> (Instance, String) {
    if !inst.line.is_zero() {
        let mut t = inst.clone();
        t.line = DivisorC::zero();
        if let Some(Err(m)) = run(ctx, pred, &t) {
            inst = t;
            detail = m;
        }
    }
    loop {
        let mut shrunk = false;
        for p in inst.divisor.support() {
            let mut t = inst.clone();
            let m = t.divisor.mult(&p);
            t.divisor.add_place(p, -m.signum());
            if let Some(Err(msg)) = run(ctx, pred, &t) {
                inst = t;
                detail = msg;
                shrunk = true;
                break;
            }
        }
        if !shrunk {
            return (inst, detail);
        }
    }
}

pub fn verify_suite(c: &HyperellipticCurve, q: &QuadDifferential, trials: usize, seed: u64) -> Result<VerifyLedger> {
    verify_suite_with(c, q, trials, seed, None)
}

/// Run every invariant on `trials` instances each.
pub fn verify_suite_with(c: &HyperellipticCurve, q: &QuadDifferential, trials: usize, seed: u64, fault: Option<Fault>) -> Result<VerifyLedger> {
    let ctx = Ctx { s: build_spectral(c, q)?, fault };
    let mut checks = Vec::new();
    for (ci, &(name, gen, pred)) in CHECKS.iter().enumerate() {
        let insts: Vec<Instance> = (0..trials as u64)
            .map(|t| {
                let ts = trial_seed(seed ^ ((ci as u64) << 48), t);
                let (divisor, line) = gen(&ctx, &mut ChaCha8Rng::seed_from_u64(ts));
                Instance { divisor, line, seed: ts }
            })
            .collect();
        let results: Vec<_> = insts.par_iter().map(|i| run(&ctx, pred, i)).collect();
        let passed = results.iter().filter(|r| matches!(r, Some(Ok(())))).count();
        let skipped = results.iter().filter(|r| r.is_none()).count();
        let reproducer = results.iter().zip(&insts).find_map(|(r, i)| match r {
            Some(Err(m)) => Some((i.clone(), m.clone())),
            _ => None,
        });
        let reproducer = reproducer.map(|(i, m)| {
            let (i, detail) = minimize(&ctx, pred, i, m);
            Reproducer {
                curve: CurveFile::from_curve(c),
                q: QuadFile::from_quad(q),
                divisor: divisor_ct_to_file(&i.divisor),
                line: DivisorFile::from_divisor(&i.line),
                seed: i.seed,
                detail,
            }
        });
        checks.push(CheckEntry { name: name.into(), instances: trials, passed, skipped, reproducer });
    }
    checks.push(closed_forms(c.genus()));
    let all_passed = checks.iter().all(CheckEntry::ok);
    Ok(VerifyLedger {
        schema: SCHEMA.into(),
        version: VERSION.into(),
        curve: CurveFile::from_curve(c),
        q: QuadFile::from_quad(q),
        trials,
        seed,
        checks,
        all_passed,
    })
}

/// Closed-form identities: Brill-Noether numbers and component spectra.
fn closed_forms(g: usize) -> CheckEntry {
    let gi = g as i64;
    let mut n = 0;
    let mut passed = 0;
    for d in 0..=8 * gi {
        n += 1;
        let b = bn_numbers(g, 2, d);
        let mono = (1..6).all(|r| d > 4 * gi - 4 || bn_numbers(g, r + 1, d).rho <= bn_numbers(g, r, d).rho);
        passed += (Some(b.rho) == b.rho_rank_two && b.rho_qspecial == Some(d - gi - 3) && mono) as usize;
    }
    for lambda in 0..2 {
        n += 1;
        let ks = component_spectrum(g, lambda);
        let ok = ks.iter().all(|e| (e.k - lambda) % 2 == 0 && lambda <= e.k && e.k <= 2 * gi - 2 - lambda)
            && ks.len() as i64 == (2 * gi - 2 - 2 * lambda) / 2 + 1;
        passed += ok as usize;
    }
    CheckEntry { name: "closed_form_numbers".into(), instances: n, passed, skipped: 0, reproducer: None }
}

pub const CHECK_PRIMES: [u64; 3] = [131, 139, 151];

/// The suite on the standard curves of genus 2 and 3 over each prime.
pub fn check_all(trials: usize, seed: u64) -> Result<Vec<VerifyLedger>> {
    let mut out = Vec::new();
    for p in CHECK_PRIMES {
        for g in [2, 3] {
            let c = HyperellipticCurve::standard(p, g)?;
            out.push(verify_suite(&c, &default_quad(&c)?, trials, seed)?);
        }
    }
    Ok(out)
}
