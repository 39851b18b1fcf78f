use nalgebra::{DMatrix, DVector};
use poincare_korn::geometry::{l_shape, unit_square};
use poincare_korn::linalg::{numerical_kernel_dim, sorted_eigenvalues};
use poincare_korn::{BoundaryPortion, Domain, Form, NullKind, PolySpace, Region};
use proptest::prelude::*;

fn spaces() -> Vec<PolySpace> {
    let sq = Domain::mesh(unit_square(3)).unwrap();
    let l = Domain::mesh(l_shape(2)).unwrap();
    let b2 = Domain::unit_ball(2).unwrap();
    let b3 = Domain::ball(3, 0.7, vec![0.1, 0.2, -0.3]).unwrap();
    vec![
        PolySpace::build(&sq, 6, 1).unwrap(),
        PolySpace::build(&l, 5, 1).unwrap(),
        PolySpace::build(&b2, 6, 1).unwrap(),
        PolySpace::build(&b3, 4, 1).unwrap(),
        PolySpace::build(&sq, 4, 2).unwrap(),
        PolySpace::build(&l, 3, 2).unwrap(),
        PolySpace::build(&b3, 3, 3).unwrap(),
    ]
}

#[test]
fn dimension_examples() {
    let sq = Domain::mesh(unit_square(2)).unwrap();
    assert_eq!(PolySpace::build(&sq, 1, 1).unwrap().dim(), 3);
    assert_eq!(PolySpace::build(&sq, 2, 2).unwrap().dim(), 12);
    let b3 = Domain::unit_ball(3).unwrap();
    assert_eq!(PolySpace::build(&b3, 2, 1).unwrap().dim(), 10);
}

#[test]
fn kernel_dimensions_match_null_spaces() {
    for s in spaces() {
        let n = s.spatial_dim();
        let forms: Vec<(Form, NullKind)> = if s.is_vector() {
            vec![(Form::SymGrad, NullKind::Rigid)]
        } else {
            vec![(Form::Grad, NullKind::Constants), (Form::Hessian, NullKind::Affine)]
        };
        for (form, kind) in forms {
            let g = s.assemble_gram(form).unwrap();
            assert_eq!(numerical_kernel_dim(&g.matrix), kind.dimension(n), "{form:?} on n = {n}");
            let z = s.nullspace_basis(kind).unwrap();
            assert_eq!(z.dim(), kind.dimension(n));
            for k in 0..z.dim() {
                let v = z.vectors.column(k).into_owned();
                assert!(g.quadratic_form(&v) <= 1e-10 * v.norm_squared());
            }
        }
    }
}

#[test]
fn grams_are_symmetric_psd_and_consistent() {
    for s in spaces() {
        let l2 = s.assemble_gram(Form::L2Omega).unwrap().matrix;
        assert!((&l2 - DMatrix::identity(s.dim(), s.dim())).amax() < 1e-10);
        let w12 = s.assemble_gram(Form::W12).unwrap().matrix;
        let w22 = s.assemble_gram(Form::W22).unwrap().matrix;
        let grad = s.assemble_gram(Form::Grad).unwrap().matrix;
        let hess = s.assemble_gram(Form::Hessian).unwrap().matrix;
        assert!((&w12 - &l2 - &grad).amax() < 1e-12 * w12.amax());
        assert!((&w22 - &w12 - &hess).amax() < 1e-12 * w22.amax());
        for g in [&w12, &w22, &grad, &hess] {
            assert!((g - g.transpose()).amax() <= 1e-12 * g.amax());
            let ev = sorted_eigenvalues(g);
            assert!(ev[0] >= -1e-10 * ev[ev.len() - 1]);
        }
    }
}

#[test]
fn degree_one_hessian_vanishes() {
    let sq = Domain::mesh(unit_square(2)).unwrap();
    let s = PolySpace::build(&sq, 1, 1).unwrap();
    assert!(s.assemble_gram(Form::Hessian).unwrap().matrix.amax() < 1e-14);
}

#[test]
fn rigid_directions_have_zero_symmetric_gradient() {
    let b = Domain::unit_ball(3).unwrap();
    let v = PolySpace::build(&b, 2, 3).unwrap();
    let g = v.assemble_gram(Form::SymGrad).unwrap();
    let z = v.nullspace_basis(NullKind::Rigid).unwrap();
    for k in 0..z.dim() {
        assert!(g.quadratic_form(&z.vectors.column(k).into_owned()) < 1e-12);
    }
}

#[test]
fn trace_gram_integrates_squares_on_the_portion() {
    // ||x||^2 on the right edge of the unit square is 1
    let sq = Domain::mesh(unit_square(2)).unwrap();
    let s = PolySpace::build(&sq, 3, 1).unwrap();
    let right = BoundaryPortion::from_tags(&sq, &["right"]).unwrap();
    let x = s.affine_coefficients(0.0, &[1.0, 0.0]);
    let g = s.assemble_gram(Form::L2Trace(&right)).unwrap();
    assert!((g.quadratic_form(&x) - 1.0).abs() < 1e-13);
    let quarter = Region::centroid_box(&sq, [0.0, 0.0], [0.5, 0.5]).unwrap();
    let gr = s.assemble_gram(Form::L2Region(&quarter)).unwrap();
    // int_{[0,1/2]^2} x^2 = 1/48
    assert!((gr.quadratic_form(&x) - 1.0 / 48.0).abs() < 1e-14);
}

#[test]
fn basis_derivatives_match_finite_differences() {
    let l = Domain::mesh(l_shape(1)).unwrap();
    let s = PolySpace::build(&l, 5, 1).unwrap();
    let h = 1e-5 * 2.0;
    let points = [[0.3, 0.4], [1.5, 0.25], [0.8, 1.7], [0.05, 0.95]];
    for p in points {
        let b = s.eval_basis(&p);
        let shifted = |dx: f64, dy: f64| s.eval_basis(&[p[0] + dx, p[1] + dy]).values;
        for axis in 0..2 {
            let (ex, ey) = if axis == 0 { (h, 0.0) } else { (0.0, h) };
            let fd = (shifted(ex, ey) - shifted(-ex, -ey)) / (2.0 * h);
            let scale = b.gradients[axis].amax().max(1.0);
            assert!((&fd - &b.gradients[axis]).amax() <= 1e-6 * scale, "gradient axis {axis} at {p:?}");
            for axis2 in 0..2 {
                let (fx, fy) = if axis2 == 0 { (h, 0.0) } else { (0.0, h) };
                let plus = s.eval_basis(&[p[0] + fx, p[1] + fy]).gradients[axis].clone();
                let minus = s.eval_basis(&[p[0] - fx, p[1] - fy]).gradients[axis].clone();
                let fd2 = (plus - minus) / (2.0 * h);
                let exact = &b.hessians[axis * 2 + axis2];
                assert!((&fd2 - exact).amax() <= 1e-6 * exact.amax().max(1.0), "hessian at {p:?}");
            }
        }
    }
}

#[test]
fn affine_function_evaluates_exactly() {
    let b = Domain::ball(2, 2.0, vec![1.0, -1.0]).unwrap();
    let s = PolySpace::build(&b, 4, 1).unwrap();
    let u = s.affine_coefficients(0.5, &[2.0, -3.0]);
    let (v, g, h) = s.eval_function(&u, 0, &[1.5, 0.0]);
    assert!((v - (0.5 + 3.0)).abs() < 1e-12);
    assert!((g[0] - 2.0).abs() < 1e-12 && (g[1] + 3.0).abs() < 1e-12);
    assert!(h.iter().all(|x| x.abs() < 1e-12));
}

fn eigen_lists(d: &Domain) -> Vec<Vec<f64>> {
    let s = PolySpace::build(d, 4, 1).unwrap();
    let v = PolySpace::build(d, 3, 2).unwrap();
    let p = BoundaryPortion::from_tags(d, &["bottom", "left"]).unwrap();
    vec![
        sorted_eigenvalues(&s.assemble_gram(Form::Grad).unwrap().matrix),
        sorted_eigenvalues(&s.assemble_gram(Form::Hessian).unwrap().matrix),
        sorted_eigenvalues(&s.assemble_gram(Form::L2Trace(&p)).unwrap().matrix),
        sorted_eigenvalues(&v.assemble_gram(Form::SymGrad).unwrap().matrix),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn gram_spectra_are_invariant_under_rigid_motions(
        angle in 0.0f64..(2.0 * std::f64::consts::PI),
        dx in -3.0f64..3.0,
        dy in -3.0f64..3.0,
    ) {
        let d = Domain::mesh(unit_square(2)).unwrap();
        let moved = d.rigidly_moved(angle, &[dx, dy]).unwrap();
        for (a, b) in eigen_lists(&d).iter().zip(eigen_lists(&moved)) {
            let top = a[a.len() - 1];
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-9 * top, "{} vs {}", x, y);
            }
        }
    }

    #[test]
    fn l2_norm_of_random_polynomial_matches_pointwise_quadrature(seed in 0u64..1000) {
        use poincare_korn::geometry::quadrature_points;
        let d = Domain::mesh(l_shape(1)).unwrap();
        let s = PolySpace::build(&d, 4, 1).unwrap();
        let c = DVector::from_fn(s.dim(), |i, _| ((seed as f64 + 1.0) * (i as f64 + 0.5)).sin());
        let pointwise: f64 = quadrature_points(&d, 8)
            .unwrap()
            .iter()
            .map(|(x, w)| w * s.eval_function(&c, 0, x).0.powi(2))
            .sum();
        prop_assert!((pointwise - c.norm_squared()).abs() <= 1e-10 * c.norm_squared());
    }
}
