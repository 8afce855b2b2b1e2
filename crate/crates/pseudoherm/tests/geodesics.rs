use std::f64::consts::PI;

use proptest::prelude::*;
use pseudoherm::geodesics::*;
use pseudoherm::manifold::theta_at;
use pseudoherm::*;

fn v(c: &[f64]) -> Vector {
    Vector::from_vec(c.to_vec())
}

#[test]
fn heisenberg_line_matches_closed_form() {
    // From (0, y0, 0) along e1 = ∂x + y∂t: x = s, y = y0, t = y0 s.
    let m = heisenberg(1).unwrap();
    let x0 = v(&[0.0, 0.5, 0.0]);
    let v0 = horizontal_vector(m.as_ref(), &x0, &[1.0, 0.0]);
    let sol = integrate_tw_geodesic(&m, &x0, &v0, 1.0, 1e-3).unwrap();
    assert!((sol.point(1.0) - v(&[1.0, 0.5, 0.5])).amax() < 1e-9);
    assert!((sol.point(0.37) - v(&[0.37, 0.5, 0.185])).amax() < 1e-9);
}

#[test]
fn sphere_horizontal_geodesic_is_a_great_circle() {
    let m = sphere(1).unwrap();
    let x0 = m.sample_points(1, 1.0, 4).remove(0);
    let v0 = horizontal_vector(m.as_ref(), &x0, &[0.6, -0.8]);
    let sol = integrate_tw_geodesic(&m, &x0, &v0, 2.0 * PI, 1e-3).unwrap();
    assert!(sol.speed_drift() < 1e-8);
    for t in [0.3, 1.7, 4.0, 2.0 * PI] {
        let expect = &x0 * t.cos() + &v0 * t.sin();
        assert!((sol.point(t) - expect).amax() < 1e-9, "t = {t}");
    }
}

#[test]
fn zero_b_sub_riemannian_equals_tw_on_heisenberg() {
    let m = heisenberg(1).unwrap();
    let x0 = v(&[0.2, -0.1, 0.3]);
    let v0 = horizontal_vector(m.as_ref(), &x0, &[0.8, 0.6]);
    let tw = integrate_tw_geodesic(&m, &x0, &v0, 2.0, 1e-3).unwrap();
    let sr = integrate_sr_geodesic(&m, &x0, &v0, 0.0, 2.0, 1e-3).unwrap();
    assert!(tw.sup_distance(&sr) < 1e-10);
}

#[test]
fn scaled_heisenberg_b_follows_torsion() {
    let m = scaled_heisenberg(1, 0.3).unwrap();
    let x0 = v(&[0.4, -0.2, 0.1]);
    let v0 = horizontal_vector(m.as_ref(), &x0, &[0.6, 0.8]);
    let sol = integrate_sr_geodesic(&m, &x0, &v0, 0.0, 2.0, 1e-3).unwrap();
    let b = sol.b.as_ref().unwrap();
    let spread = b.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    assert!(spread > 1e-4, "b stays constant");
    assert!(b_equation_residual(&sol).unwrap() < 1e-7);
    assert!(sr_equation_residual(&sol).unwrap() < 1e-7);
}

#[test]
fn sasakian_b_is_constant() {
    for m in [heisenberg(2).unwrap(), sphere(1).unwrap(), sphere(2).unwrap()] {
        let x0 = m.sample_points(1, 1.0, 2).remove(0);
        let mut c = vec![0.0; 2 * m.n()];
        c[1] = 1.0;
        let v0 = horizontal_vector(m.as_ref(), &x0, &c);
        let sol = integrate_sr_geodesic(&m, &x0, &v0, 0.7, 3.0, 1e-3).unwrap();
        let drift = sol.b.as_ref().unwrap().iter().fold(0.0f64, |a, b| a.max((b - 0.7).abs()));
        assert!(drift < 1e-9, "{}: {drift:e}", m.id());
    }
}

#[test]
fn scaled_heisenberg_tw_geodesic_sees_torsion() {
    let m = scaled_heisenberg(1, 0.3).unwrap();
    let x0 = v(&[0.4, -0.2, 0.1]);
    let v0 = horizontal_vector(m.as_ref(), &x0, &[0.6, 0.8]);
    let sol = integrate_tw_geodesic(&m, &x0, &v0, 2.0, 1e-3).unwrap();
    assert!(max_torsion_along(&sol) > 1e-4);
}

#[test]
fn lengthy_geodesics_stay_lengthy_with_constant_speed() {
    for m in [heisenberg(1).unwrap(), sphere(2).unwrap(), scaled_heisenberg(2, 0.2).unwrap()] {
        let x0 = m.sample_points(1, 0.5, 6).remove(0);
        let mut c = vec![0.3; 2 * m.n()];
        c[0] = 1.0;
        let v0 = horizontal_vector(m.as_ref(), &x0, &c);
        for sol in [
            integrate_tw_geodesic(&m, &x0, &v0, 10.0, 1e-3).unwrap(),
            integrate_sr_geodesic(&m, &x0, &v0, 0.4, 10.0, 1e-3).unwrap(),
        ] {
            assert!(sol.theta_drift() < 1e-7, "{}: θ drift {:e}", m.id(), sol.theta_drift());
            assert!(sol.speed_drift() < 1e-7, "{}: speed drift {:e}", m.id(), sol.speed_drift());
        }
    }
}

#[test]
fn hamiltonian_is_conserved() {
    for m in [heisenberg(1).unwrap(), scaled_heisenberg(1, 0.3).unwrap()] {
        let x0 = v(&[0.1, 0.2, -0.3]);
        let v0 = horizontal_vector(m.as_ref(), &x0, &[0.6, 0.8]);
        let xi0 = hamiltonian_initial_covector(m.as_ref(), &x0, &v0, 0.5);
        let sol = integrate_hamiltonian(&m, &x0, &xi0, 10.0, 1e-3).unwrap();
        let xi = sol.xi.as_ref().unwrap();
        let h0 = hamiltonian(m.as_ref(), &sol.x[0], &xi[0]);
        let drift = sol.x.iter().zip(xi).map(|(x, p)| (hamiltonian(m.as_ref(), x, p) - h0).abs() / h0).fold(0.0, f64::max);
        assert!(drift < 1e-7, "{drift:e}");
    }
}

#[test]
fn vertical_covector_gives_stationary_point() {
    let m = heisenberg(1).unwrap();
    let x0 = v(&[0.3, -0.4, 0.2]);
    let xi0 = m.theta(&x0);
    let sol = integrate_hamiltonian(&m, &x0, &xi0, 1.0, 1e-2).unwrap();
    assert!(sol.x.iter().all(|x| (x - &x0).amax() < 1e-14));
}

#[test]
fn canonical_lift_reconstructs_velocity() {
    let m = heisenberg(1).unwrap();
    let x0 = v(&[0.3, -0.4, 0.2]);
    let v0 = horizontal_vector(m.as_ref(), &x0, &[0.6, 0.8]);
    let sol = integrate_sr_geodesic(&m, &x0, &v0, 0.3, 2.0, 1e-3).unwrap();
    let lift = canonical_lift(&sol).unwrap();
    assert!(lift.reconstruction_residual < 1e-8);
    for (k, xi) in lift.xi.iter().enumerate() {
        let xi = Vector::from_vec(xi.clone());
        let t = pseudoherm::manifold::reeb_at(m.as_ref(), &sol.x[k]);
        assert!((xi.dot(&t) - 1.0).abs() < 1e-10);
    }
}

#[test]
fn canonical_lift_of_constant_curve_is_theta() {
    let m = heisenberg(1).unwrap();
    let x0 = v(&[0.3, -0.4, 0.2]);
    let sol = integrate_tw_geodesic(&m, &x0, &Vector::zeros(3), 1.0, 0.1).unwrap();
    let lift = canonical_lift(&sol).unwrap();
    for xi in &lift.xi {
        assert!((Vector::from_vec(xi.clone()) - m.theta(&x0)).amax() < 1e-15);
    }
}

#[test]
fn canonical_lift_rejects_transverse_curves() {
    let m = heisenberg(1).unwrap();
    let sol = integrate_tw_geodesic(&m, &m.origin(), &v(&[0.0, 0.0, 1.0]), 1.0, 0.1).unwrap();
    assert!(matches!(canonical_lift(&sol), Err(GeomError::Domain(_))));
}

#[test]
fn strichartz_a_values() {
    let m = heisenberg(1).unwrap();
    let v0 = horizontal_vector(m.as_ref(), &m.origin(), &[1.0, 0.0]);
    let tw = integrate_tw_geodesic(&m, &m.origin(), &v0, 2.0, 1e-3).unwrap();
    let beta = 0.6;
    let sr = integrate_sr_geodesic(&m, &m.origin(), &v0, beta, 2.0, 1e-3).unwrap();
    for t in [0.3, 1.0, 1.7] {
        assert!((strichartz_a(&tw, t).unwrap() + 1.0).abs() < 1e-8);
        assert!((strichartz_a(&sr, t).unwrap() - (beta - 1.0)).abs() < 1e-7);
    }
}

#[test]
fn lengths() {
    let m = heisenberg(1).unwrap();
    let v0 = horizontal_vector(m.as_ref(), &m.origin(), &[1.0, 0.0]);
    let tw = integrate_tw_geodesic(&m, &m.origin(), &v0, 2.0, 1e-3).unwrap();
    assert!((length(&tw, 0.0, 1.3).unwrap() - 1.3).abs() < 1e-9);
    let beta = 0.8;
    let period = PI / beta;
    let sr = integrate_sr_geodesic(&m, &m.origin(), &v0, beta, period, 1e-3).unwrap();
    assert!((length(&sr, 0.0, period).unwrap() - period).abs() < 1e-6);
}

#[test]
fn csv_has_documented_columns() {
    let m = heisenberg(1).unwrap();
    let v0 = horizontal_vector(m.as_ref(), &m.origin(), &[1.0, 0.0]);
    let sol = integrate_sr_geodesic(&m, &m.origin(), &v0, 0.5, 0.1, 0.05).unwrap();
    let mut buf = Vec::new();
    sol.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,x0,x1,x2,v0,v1,v2,b");
    assert_eq!(lines.count(), sol.len());
}

#[test]
fn integration_is_deterministic() {
    let m = sphere(2).unwrap();
    let x0 = m.sample_points(1, 1.0, 1).remove(0);
    let v0 = horizontal_vector(m.as_ref(), &x0, &[0.0, 1.0, 0.0, 0.0]);
    let a = integrate_sr_geodesic(&m, &x0, &v0, 0.2, 1.0, 1e-2).unwrap();
    let b = integrate_sr_geodesic(&m, &x0, &v0, 0.2, 1.0, 1e-2).unwrap();
    assert_eq!(a.x, b.x);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn tw_geodesics_are_reversible(seed in 0u64..1000, c0 in -1.0f64..1.0, c1 in -1.0f64..1.0) {
        prop_assume!(c0.abs() + c1.abs() > 0.1);
        let m = scaled_heisenberg(1, 0.25).unwrap();
        let x0 = m.sample_points(1, 1.0, seed).remove(0);
        let v0 = horizontal_vector(m.as_ref(), &x0, &[c0, c1]);
        let fwd = integrate_tw_geodesic(&m, &x0, &v0, 1.0, 1e-2).unwrap();
        let (x1, v1) = fwd.eval(1.0);
        let back = integrate_tw_geodesic(&m, &x1, &(-v1), 1.0, 1e-2).unwrap();
        prop_assert!((back.point(1.0) - &x0).amax() < 1e-8);
    }

    #[test]
    fn sr_geodesics_start_and_stay_horizontal(seed in 0u64..1000, b0 in -2.0f64..2.0, c in prop::collection::vec(-1.0f64..1.0, 4)) {
        prop_assume!(c.iter().map(|x| x.abs()).sum::<f64>() > 0.1);
        let m = sphere(2).unwrap();
        let x0 = m.sample_points(1, 1.0, seed).remove(0);
        let v0 = horizontal_vector(m.as_ref(), &x0, &c);
        prop_assert!(theta_at(m.as_ref(), &x0, &v0).abs() < 1e-12);
        let sol = integrate_sr_geodesic(&m, &x0, &v0, b0, 1.0, 1e-2).unwrap();
        prop_assert!(sol.theta_drift() < 1e-7);
        prop_assert!(sol.x.iter().all(|x| m.point_residual(x) < 1e-10));
    }

    #[test]
    fn hamiltonian_matches_connection_form(seed in 0u64..1000, b0 in -1.0f64..1.0, kappa in 0.0f64..0.4) {
        let m = scaled_heisenberg(1, kappa).unwrap();
        let x0 = m.sample_points(1, 1.0, seed).remove(0);
        let v0 = horizontal_vector(m.as_ref(), &x0, &[0.6, 0.8]);
        let sr = integrate_sr_geodesic(&m, &x0, &v0, b0, 1.0, 1e-2).unwrap();
        let xi0 = hamiltonian_initial_covector(m.as_ref(), &x0, &v0, b0);
        let ham = integrate_hamiltonian(&m, &x0, &xi0, 1.0, 1e-2).unwrap();
        prop_assert!(sr.sup_distance(&ham) < 1e-7);
    }
}
