use std::f64::consts::PI;

use poincare_korn::constants::{base_constant, corollary_constants, paper_norm_estimate, Family};
use poincare_korn::geometry::{diameter, measure, unit_square};
use poincare_korn::{
    build_projection, meyers_compose, operator_norm, paper_bound, sharp_constant, BoundCase, BoundInputs,
    BoundaryPortion, ConstantKind, Domain, Error, NormKind, PolySpace, ProjKind, Region,
};

fn q_at(d: &Domain, degree: usize) -> f64 {
    let s = PolySpace::build(d, degree, 1).unwrap();
    sharp_constant(&s, ConstantKind::PoincareQ, None).unwrap().value
}

#[test]
fn poincare_constant_converges_from_below() {
    let d = Domain::mesh(unit_square(2)).unwrap();
    let values: Vec<f64> = [2, 4, 6, 8].iter().map(|&k| q_at(&d, k)).collect();
    for w in values.windows(2) {
        assert!(w[1] >= w[0] - 1e-10, "{values:?}");
    }
    let q8 = values[3];
    assert!(q8 >= 1.0 / PI - 1e-3 && q8 <= 1.0 / PI + 1e-8, "{q8}");
}

#[test]
fn poincare_constant_scales_with_the_domain() {
    let d = Domain::mesh(unit_square(2)).unwrap();
    let q = q_at(&d, 6);
    for s in [0.5, 2.0] {
        let qs = q_at(&d.scaled(s).unwrap(), 6);
        assert!((qs - s * q).abs() <= 1e-8 * s * q, "s = {s}: {qs} vs {}", s * q);
    }
}

#[test]
fn lower_bound_constants_grow_with_degree() {
    let d = Domain::mesh(unit_square(2)).unwrap();
    let g = BoundaryPortion::from_tags(&d, &["bottom", "right"]).unwrap();
    let mut last_c = 0.0;
    let mut last_k = 0.0;
    for k in 2..=6 {
        let s = PolySpace::build(&d, k, 1).unwrap();
        let c = sharp_constant(&s, ConstantKind::TraceC, Some(&g)).unwrap();
        assert!(c.lower_bound && c.degree == k);
        assert!(c.value >= last_c - 1e-10);
        last_c = c.value;
        let v = PolySpace::build(&d, k, 2).unwrap();
        let kk = sharp_constant(&v, ConstantKind::KornK, None).unwrap().value;
        assert!(kk >= last_k - 1e-10);
        last_k = kk;
    }
}

#[test]
fn korn_constant_on_ball_is_deflated_and_finite() {
    let b = Domain::unit_ball(3).unwrap();
    let v = PolySpace::build(&b, 3, 3).unwrap();
    let k = sharp_constant(&v, ConstantKind::KornK, None).unwrap();
    assert!(k.value.is_finite() && k.value >= 1.0 - 1e-10);
    let s = PolySpace::build(&b, 3, 1).unwrap();
    assert!(matches!(sharp_constant(&s, ConstantKind::KornK, None), Err(Error::KindMismatch(_))));
    assert!(matches!(sharp_constant(&v, ConstantKind::PoincareQ, None), Err(Error::KindMismatch(_))));
}

#[test]
fn e_norm_estimates_are_exact_kinds() {
    let d = Domain::mesh(unit_square(2)).unwrap();
    let s = PolySpace::build(&d, 2, 1).unwrap();
    let g = BoundaryPortion::whole_boundary(&d).unwrap();
    let e = sharp_constant(&s, ConstantKind::ENormAffine, Some(&g)).unwrap();
    assert!(!e.lower_bound);
    let bottom = BoundaryPortion::from_tags(&d, &["bottom"]).unwrap();
    assert_eq!(
        sharp_constant(&s, ConstantKind::ENormAffine, Some(&bottom)).unwrap_err(),
        Error::FlatPortion
    );
}

#[test]
fn explicit_bounds_dominate_compositions_with_computed_norms() {
    let d = Domain::mesh(unit_square(4)).unwrap();
    let s = PolySpace::build(&d, 6, 1).unwrap();
    let v = PolySpace::build(&d, 4, 2).unwrap();
    let q = sharp_constant(&s, ConstantKind::PoincareQ, None).unwrap().value;
    let q_vec = sharp_constant(&PolySpace::build(&d, 4, 1).unwrap(), ConstantKind::PoincareQ, None)
        .unwrap()
        .value;
    let k = sharp_constant(&v, ConstantKind::KornK, None).unwrap().value;
    for (lo, hi) in [([0.0, 0.0], [0.5, 0.5]), ([0.0, 0.0], [1.0, 0.25]), ([0.25, 0.25], [0.75, 0.75])] {
        let e = Region::centroid_box(&d, lo, hi).unwrap();
        let inputs = BoundInputs {
            omega_measure: Some(measure(&d).unwrap()),
            region_measure: Some(measure(&e).unwrap()),
            diameter: Some(diameter(&d)),
            q: Some(q),
            korn_k: Some(k),
            ..Default::default()
        };
        let t = build_projection(&s, ProjKind::AvgRegion, &e).unwrap();
        let composed = meyers_compose(base_constant(Family::Poincare, &inputs).unwrap(), operator_norm(&t, NormKind::W12, &s).unwrap(), None);
        assert!(paper_bound(BoundCase::PoincareE, &inputs).unwrap() >= composed - 1e-9);

        let t = build_projection(&s, ProjKind::AffineRegion, &e).unwrap();
        let composed = meyers_compose(base_constant(Family::H2, &inputs).unwrap(), operator_norm(&t, NormKind::W22, &s).unwrap(), None);
        assert!(paper_bound(BoundCase::H2E, &inputs).unwrap() >= composed - 1e-9);

        let korn_inputs = BoundInputs { q: Some(q_vec), ..inputs };
        let t = build_projection(&v, ProjKind::RigidRegion, &e).unwrap();
        let composed = meyers_compose(base_constant(Family::Korn, &korn_inputs).unwrap(), operator_norm(&t, NormKind::W12, &v).unwrap(), None);
        assert!(paper_bound(BoundCase::KornE, &korn_inputs).unwrap() >= composed - 1e-9);
    }
}

#[test]
fn generic_cases_use_the_supplied_norms() {
    let inputs = BoundInputs {
        omega_measure: Some(4.0),
        q: Some(1.0),
        korn_k: Some(2.0),
        ..Default::default()
    };
    let v = paper_bound(BoundCase::PoincareGeneric { phi_norm: 0.5 }, &inputs).unwrap();
    assert!((v - 2.0 * 2f64.sqrt()).abs() < 1e-14);
    let v = paper_bound(BoundCase::H2Generic { norm_t: 2.0 }, &inputs).unwrap();
    assert!((v - 3.0 * 3f64.sqrt()).abs() < 1e-14);
    let v = paper_bound(BoundCase::KornGeneric { norm_t: 1.0 }, &inputs).unwrap();
    assert!((v - 2.0 * 2.0 * 2f64.sqrt()).abs() < 1e-14);
    assert!(matches!(
        paper_bound(BoundCase::H2Generic { norm_t: -1.0 }, &inputs),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn ball_estimates_follow_the_formula() {
    for n in [2usize, 3] {
        for rho in [0.3, 0.5, 0.7] {
            let est = paper_norm_estimate(BoundCase::H2Balls { n, rho }, &BoundInputs::default()).unwrap();
            let nf = n as f64;
            assert!((est - ((nf + 3.0) / (nf + 2.0)).sqrt() * (1.0 / rho).powf(nf / 2.0)).abs() < 1e-14);
            let korn = paper_norm_estimate(BoundCase::KornBalls { n, rho }, &BoundInputs::default()).unwrap();
            assert_eq!(est, korn);
        }
    }
    assert!(paper_norm_estimate(BoundCase::H2Balls { n: 2, rho: 1.5 }, &BoundInputs::default()).is_err());
}

#[test]
fn korn_corollary_pair() {
    let inputs = BoundInputs {
        q: Some(0.0),
        korn_k: Some(3.0),
        trace_c: Some(2.0),
        e_norm_rigid: Some(0.5),
        ..Default::default()
    };
    assert_eq!(corollary_constants(BoundCase::KornCorollary, &inputs).unwrap(), (6.0, 0.5));
    assert!(corollary_constants(BoundCase::PoincareE, &inputs).is_err());
}
