use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use pseudoherm::field::FieldAlong;
use pseudoherm::geodesics::*;
use pseudoherm::jacobi::*;
use pseudoherm::variation::*;
use pseudoherm::*;

fn geodesic(m: &Model, x0: &Vector, c: &[f64], t_max: f64) -> CurveSolution {
    let v0 = horizontal_vector(m.as_ref(), x0, c);
    integrate_tw_geodesic(m, x0, &v0, t_max, 1e-2).unwrap()
}

/// (1 − u²)³ on |u| < 1, zero outside: C² with compact support.
fn bump(t: f64, center: f64, width: f64) -> f64 {
    let u = (t - center) / width;
    if u.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - u * u).powi(3)
    }
}

fn corner_curve() -> BrokenCurve {
    let m = heisenberg(1).unwrap();
    let s1 = geodesic(&m, &m.origin(), &[1.0, 0.0], 1.0);
    let x1 = s1.point(1.0);
    let s2 = geodesic(&m, &x1, &[0.6, 0.8], 1.0).shifted(1.0);
    BrokenCurve::new(vec![s1, s2]).unwrap()
}

#[test]
fn segments_must_join() {
    let m = heisenberg(1).unwrap();
    let s1 = geodesic(&m, &m.origin(), &[1.0, 0.0], 1.0);
    let s2 = geodesic(&m, &m.origin(), &[0.0, 1.0], 1.0).shifted(1.0);
    assert!(matches!(BrokenCurve::new(vec![s1, s2]), Err(GeomError::Contract(_))));
}

#[test]
fn zero_speed_curve_is_rejected() {
    let m = heisenberg(1).unwrap();
    let sol = integrate_tw_geodesic(&m, &m.origin(), &Vector::zeros(3), 1.0, 0.1).unwrap();
    let fam = CurveFamily::new(BrokenCurve::smooth(sol), VariationField::zero(3));
    assert!(matches!(first_variation_formula(&fam), Err(GeomError::Domain(_))));
}

#[test]
fn family_is_a_variation_of_the_curve() {
    let m = sphere(2).unwrap();
    let curve = BrokenCurve::smooth(geodesic(&m, &m.origin(), &[0.0, 1.0, 0.0, 0.0], 1.0));
    let field = VariationField::model_frame(&curve, |t| Vector::from_vec(vec![0.2, t, -0.3, 0.5 * t * t, 0.1]));
    let fam = CurveFamily::new(curve, field);
    assert!(fam.base_residual() < 1e-14);
    assert!(fam.tangent_residual() < 1e-7);
    for s in [-0.2, 0.1] {
        let x = fam.point(0, 0.4, s);
        assert!(m.point_residual(&x) < 1e-10);
    }
}

#[test]
fn fixed_endpoint_fields_keep_endpoints() {
    let m = sphere(1).unwrap();
    let curve = BrokenCurve::smooth(geodesic(&m, &m.origin(), &[1.0, 0.0], 1.0));
    let field = VariationField::model_frame(&curve, |t| Vector::from_vec(vec![0.0, t * (1.0 - t), (PI * t).sin()]));
    let fam = CurveFamily::new(curve, field);
    assert!(fam.endpoint_drift() < 1e-12);
}

#[test]
fn sasakian_geodesics_are_critical() {
    for m in [heisenberg(2).unwrap(), sphere(1).unwrap()] {
        let x0 = m.sample_points(1, 0.5, 3).remove(0);
        let mut c = vec![0.0; 2 * m.n()];
        c[1] = 1.0;
        let curve = BrokenCurve::smooth(geodesic(&m, &x0, &c, 1.2));
        let dim = m.dim();
        let field = VariationField::model_frame(&curve, move |t| Vector::from_fn(dim, |i, _| (i as f64 + 1.0) * t * (1.2 - t)));
        let fam = CurveFamily::new(curve, field);
        let fv = first_variation_formula(&fam).unwrap();
        assert!(fv.total.abs() < 1e-8, "{}: {:?}", m.id(), fv);
        assert!(first_variation_fd(&fam).abs() < 1e-7);
    }
}

#[test]
fn zero_field_gives_zero_variations() {
    let m = sphere(1).unwrap();
    let fam = CurveFamily::new(BrokenCurve::smooth(geodesic(&m, &m.origin(), &[1.0, 0.0], 1.0)), VariationField::zero(4));
    assert_eq!(first_variation_fd(&fam), 0.0);
    assert!(second_variation_fd(&fam).abs() < 1e-10);
    assert_eq!(first_variation_formula(&fam).unwrap().total, 0.0);
}

#[test]
fn torsion_term_on_scaled_heisenberg() {
    let m = scaled_heisenberg(1, 0.3).unwrap();
    let x0 = Vector::from_vec(vec![0.4, -0.2, 0.1]);
    let curve = BrokenCurve::smooth(geodesic(&m, &x0, &[0.6, 0.8], 1.5));
    let field = VariationField::model_frame(&curve, |t| Vector::from_vec(vec![0.0, 0.0, (PI * t / 1.5).sin()]));
    let fam = CurveFamily::new(curve, field);
    let v3 = torsion_integral(&fam).unwrap();
    assert!(v3.abs() > 1e-3);
    assert!((first_variation_formula(&fam).unwrap().total - v3).abs() < 1e-8);
    assert!((first_variation_fd(&fam) - v3).abs() < 1e-6);
}

#[test]
fn corner_term_from_localized_field() {
    let curve = corner_curve();
    let field = VariationField::model_frame(&curve, |t| Vector::from_vec(vec![0.05, -0.1, 0.02]) * bump(t, 1.0, 0.3));
    let field = VariationField::from_fn(vec![0.7, 1.3], move |k, t| field.at(k, t));
    let fam = CurveFamily::new(curve, field);
    let fv = first_variation_formula(&fam).unwrap();
    assert!((fv.corners - 0.1).abs() < 1e-12);
    assert!(fv.boundary.abs() < 1e-14 && fv.acceleration.abs() < 1e-10 && fv.torsion.abs() < 1e-10);
    let fd = first_variation_fd(&fam);
    assert!((fd - fv.corners).abs() < 1e-6, "{fd} vs {fv:?}");
}

#[test]
fn heisenberg_reeb_second_variation() {
    let l = 1.5;
    let m = heisenberg(1).unwrap();
    let curve = BrokenCurve::smooth(geodesic(&m, &m.origin(), &[1.0, 0.0], l));
    let field = VariationField::model_frame(&curve, move |t| Vector::from_vec(vec![0.0, 0.0, (PI * t / l).sin()]));
    let d2 = second_variation_fd(&CurveFamily::new(curve, field));
    assert!((d2 - PI * PI / (2.0 * l)).abs() < 1e-3, "{d2}");
}

fn tent(m: usize, i: usize, a: f64, c: f64, b: f64) -> FieldAlong {
    let up = FieldAlong::along_axis(m, i, a, c, move |t| ((t - a) / (c - a), 1.0 / (c - a), 0.0));
    let down = FieldAlong::along_axis(m, i, c, b, move |t| ((b - t) / (b - c), -1.0 / (b - c), 0.0));
    FieldAlong::concat(vec![up, down]).unwrap()
}

#[test]
fn broken_fields_integrate_by_parts() {
    let sys = JacobiSystem::new(&geodesic(&sphere(2).unwrap(), &sphere(2).unwrap().origin(), &[1.0, 0.0, 0.0, 0.0], 1.4)).unwrap();
    let x = tent(5, 1, 0.0, 0.6, 1.4).add(&tent(5, 4, 0.0, 0.9, 1.4).scaled(0.5));
    let w = PI / 1.4;
    let y = FieldAlong::smooth(5, 0.0, 1.4, move |t| {
        let d = Vector::from_vec(vec![0.0, 1.0, 0.3, -1.0, 0.7]);
        let (s, c) = (w * t).sin_cos();
        (&d * s, &d * (w * c), &d * (-w * w * s))
    });
    let i1 = index_form(&sys, &x, &y, 0.0, 1.4).unwrap();
    let i2 = index_form_by_parts(&sys, &x, &y, 0.0, 1.4).unwrap();
    assert!((i1 - i2).abs() < 1e-6, "{i1} vs {i2}");
}

#[test]
fn five_sphere_arc_is_not_minimizing() {
    let s5 = sphere(2).unwrap();
    let sys: Arc<JacobiSystem> = JacobiSystem::new(&integrate_tw_geodesic(&s5, &s5.origin(), &horizontal_vector(s5.as_ref(), &s5.origin(), &[1.0, 0.0, 0.0, 0.0]), 4.2, 1e-3).unwrap()).unwrap();
    let r = nonminimality_demo(&sys, 0.0, PI, 4.0, 0.5).unwrap();
    assert!(r.pass, "{r:?}");
    assert!(r.varied_length.unwrap() - r.length < -1e-8);
    assert!(r.first_variation.abs() < 1e-6);
    assert!(r.second_variation_rel_error < 1e-2);
    assert!(r.window_reeb_sup < 1e-7);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn analytic_first_variation_matches_fd(seed in 0u64..500, c in prop::collection::vec(-1.0f64..1.0, 9), kappa in 0.05f64..0.4) {
        let m = scaled_heisenberg(1, kappa).unwrap();
        let x0 = m.sample_points(1, 0.5, seed).remove(0);
        let v0 = horizontal_vector(m.as_ref(), &x0, &[c[0], c[1]]) + Vector::from_vec(vec![0.0, 0.0, 0.2 * c[2]]);
        prop_assume!(v0.amax() > 0.1);
        let sol = integrate_tw_geodesic(&m, &x0, &v0, 1.0, 1e-2).unwrap();
        let curve = BrokenCurve::smooth(sol);
        let k = [c[3], c[4], c[5], c[6], c[7], c[8]];
        let field = VariationField::model_frame(&curve, move |t| Vector::from_vec(vec![k[0] + k[1] * t, k[2] + k[3] * t, k[4] + k[5] * t * t]));
        let fam = CurveFamily::new(curve, field);
        let analytic = first_variation_formula(&fam).unwrap().total;
        let fd = first_variation_fd(&fam);
        prop_assert!((analytic - fd).abs() <= 1e-6 * analytic.abs().max(fd.abs()).max(1e-3));
    }

    #[test]
    fn first_variation_is_linear_in_the_field(alpha in -3.0f64..3.0) {
        let m = scaled_heisenberg(1, 0.3).unwrap();
        let curve = BrokenCurve::smooth(geodesic(&m, &Vector::from_vec(vec![0.1, 0.2, 0.0]), &[0.8, 0.6], 1.0));
        let base = |t: f64| Vector::from_vec(vec![t, 0.3, (2.0 * t).cos()]);
        let f1 = VariationField::model_frame(&curve, base);
        let f2 = VariationField::model_frame(&curve, move |t| base(t) * alpha);
        let a = first_variation_formula(&CurveFamily::new(curve.clone(), f1)).unwrap().total;
        let b = first_variation_formula(&CurveFamily::new(curve, f2)).unwrap().total;
        prop_assert!((b - alpha * a).abs() < 1e-12 * a.abs().max(1.0) * alpha.abs().max(1.0));
    }
}
