use wobbly_core::basecurve::{CurveFile, DivisorC, HyperellipticCurve, PlaceC, QuadFile};
use wobbly_core::spectral::{build_spectral, divisor_ct_from_file, divisor_ct_to_file, pullback_divisor, DivisorCt};
use wobbly_core::wobblylab::{classify, default_quad, detect_singular, survey, ClassificationReport, SurveyReport, Verdict};

fn setup(g: usize) -> (HyperellipticCurve, wobbly_core::basecurve::QuadDifferential) {
    let c = HyperellipticCurve::standard(131, g).unwrap();
    let q = default_quad(&c).unwrap();
    (c, q)
}

#[test]
fn files_round_trip_through_json() {
    let (c, q) = setup(3);
    let s = build_spectral(&c, &q).unwrap();
    let cf: CurveFile = serde_json::from_str(&serde_json::to_string(&CurveFile::from_curve(&c)).unwrap()).unwrap();
    let c2 = cf.to_curve().unwrap();
    let qf: QuadFile = serde_json::from_str(&serde_json::to_string(&QuadFile::from_quad(&q)).unwrap()).unwrap();
    let q2 = qf.to_quad(&c2).unwrap();
    let s2 = build_spectral(&c2, &q2).unwrap();
    let d = DivisorCt::from_places((0..5).map(|i| s.sample_place(i)));
    let back = divisor_ct_from_file(&s2, &divisor_ct_to_file(&d)).unwrap();
    assert_eq!(back, d);
}

#[test]
fn reports_deserialize_to_themselves() {
    let (c, q) = setup(2);
    let s = build_spectral(&c, &q).unwrap();
    let d = DivisorCt::from_places((0..3).map(|i| s.sample_place(i)));
    let r = classify(&c, &q, &d, 4, 1).unwrap();
    let text = serde_json::to_string(&r).unwrap();
    let back: ClassificationReport = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string(&back).unwrap(), text);

    let r = survey(&c, &q, 2, 8, 3, 1).unwrap();
    let back: SurveyReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(back, r);
}

#[test]
fn low_degree_divisor_is_unstable_with_limit() {
    let (c, q) = setup(3);
    let s = build_spectral(&c, &q).unwrap();
    let d = DivisorCt::from_places((0..2).map(|i| s.sample_place(i)));
    let r = classify(&c, &q, &d, 4, 0).unwrap();
    assert_eq!(r.verdict, Verdict::Unstable);
    assert!(r.hh_limit.is_some());
    assert!(r.qspecial);
}

#[test]
fn pulled_back_pencil_is_brill_noether() {
    let (c, q) = setup(3);
    let s = build_spectral(&c, &q).unwrap();
    let d = pullback_divisor(&s, &DivisorC::single(PlaceC::Infinity, 2))
        .unwrap()
        .add(&DivisorCt::from_places((0..2).map(|i| s.sample_place(i))));
    let cls = classify(&c, &q, &d, 4, 0).unwrap();
    assert!(cls.h0 >= 2);
    assert!(cls.pullback_summand.places.iter().any(|e| e.mult > 0));
    let sing = detect_singular(&c, &q, &d, 4).unwrap();
    assert!(serde_json::to_value(&sing).unwrap().is_object());
}
