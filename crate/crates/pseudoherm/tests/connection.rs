mod common;

use common::{tw_oracle, FdFrame};
use proptest::prelude::*;
use pseudoherm::connection::*;
use pseudoherm::linalg::Vector;
use pseudoherm::manifold::{dtheta_at, omega_at, webster_at, Model};
use pseudoherm::par::Exec;
use pseudoherm::*;

fn models() -> Vec<Model> {
    ["heisenberg:1", "heisenberg:2", "sphere:1", "sphere:2", "scaled-heisenberg:1:0.3", "scaled-heisenberg:2:0.2"]
        .iter()
        .map(|id| model_from_id(id).unwrap())
        .collect()
}

#[test]
fn oracle_system_has_a_unique_solution() {
    for m in models() {
        let x = m.sample_points(1, 0.7, 3).remove(0);
        let sol = tw_oracle(&FdFrame::new(m.as_ref(), &x));
        assert_eq!(sol.rank, sol.unknowns, "{}", m.id());
        assert!(sol.residual < 1e-8, "{}: {:e}", m.id(), sol.residual);
    }
}

#[test]
fn fast_path_matches_least_squares_oracle() {
    for m in models() {
        for x in m.sample_points(8, 0.8, 11) {
            let fast = tw_connection(m.as_ref(), &x).unwrap().gamma_tensor();
            let oracle = tw_oracle(&FdFrame::new(m.as_ref(), &x)).gamma;
            let d = fast.max_abs_diff(&oracle);
            assert!(d < 1e-7, "{}: {d:e}", m.id());
        }
    }
}

#[test]
fn axioms_hold_on_every_model() {
    for m in models() {
        let pts = m.sample_points(20, 1.0, 0);
        let rep = axiom_report(m.as_ref(), &pts, 1e-6, Exec::default());
        assert!(rep.all_pass(), "{}: {:?}", m.id(), rep.failures());
    }
}

#[test]
fn heisenberg_dtheta_example() {
    // dθ(∂x + y∂t, ∂y − x∂t) in the half-convention used throughout.
    let m = heisenberg(1).unwrap();
    let x = Vector::from_vec(vec![0.4, -0.3, 1.2]);
    let u = Vector::from_vec(vec![1.0, 0.0, x[1]]);
    let v = Vector::from_vec(vec![0.0, 1.0, -x[0]]);
    let d = dtheta_at(m.as_ref(), &x, &u, &v);
    assert!((d.abs() - 1.0).abs() < 1e-12, "{d}");
}

#[test]
fn omega_of_e1_je1_is_minus_one() {
    for m in models() {
        let x = m.sample_points(1, 0.5, 2).remove(0);
        let g = PointGeometry::at(m.as_ref(), &x);
        let je = m.j_apply(&x, &g.frame[0]);
        assert!((omega_at(m.as_ref(), &x, &g.frame[0], &je) + 1.0).abs() < 1e-10, "{}", m.id());
        assert!((webster_at(m.as_ref(), &x, &g.frame[0], &g.frame[0]) - 1.0).abs() < 1e-10);
    }
}

#[test]
fn sphere_ricci_and_sectional_values() {
    let s3 = sphere(1).unwrap();
    let s5 = sphere(2).unwrap();
    for (m, rho) in [(&s3, 4.0), (&s5, 6.0)] {
        for x in m.sample_points(5, 1.0, 1) {
            let c = CurvatureAt::new(m.as_ref(), &x, false);
            let mut u = Vector::zeros(c.m());
            u[0] = 1.0;
            assert!((ricci_from(&c, &u).unwrap() - rho).abs() < 1e-6);
        }
    }
    let x = s5.origin();
    let c = CurvatureAt::new(s5.as_ref(), &x, false);
    let mut u = Vector::zeros(5);
    let mut v = Vector::zeros(5);
    u[0] = 1.0;
    v[2] = 1.0;
    assert!((sectional_from(&c, &u, &v).unwrap() - 0.25).abs() < 1e-6);
}

#[test]
fn ricci_rejects_vertical_vectors() {
    let m = sphere(1).unwrap();
    let c = CurvatureAt::new(m.as_ref(), &m.origin(), false);
    let t = c.reeb();
    assert!(matches!(ricci_from(&c, &t), Err(GeomError::Domain(_))));
}

#[test]
fn heisenberg_curvature_vanishes() {
    for n in [1, 2] {
        let m = heisenberg(n).unwrap();
        for x in m.sample_points(10, 2.0, 5) {
            assert!(CurvatureAt::new(m.as_ref(), &x, false).r.max_abs() < 1e-8);
        }
    }
}

#[test]
fn sequential_and_parallel_suites_agree_bitwise() {
    let m = scaled_heisenberg(1, 0.3).unwrap();
    let pts = m.sample_points(6, 1.0, 9);
    let a = identity_suite_with(m.as_ref(), &pts, 5, 3, Exec::Sequential);
    let b = identity_suite_with(m.as_ref(), &pts, 5, 3, Exec::Parallel);
    assert_eq!(a, b);
}

fn coeffs(m: usize) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-1.0f64..1.0, m).prop_map(Vector::from_vec)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn curvature_is_antisymmetric(seed in 0u64..1000, x in coeffs(5), y in coeffs(5), z in coeffs(5), w in coeffs(5)) {
        let m = scaled_heisenberg(2, 0.2).unwrap();
        let p = m.sample_points(1, 0.8, seed).remove(0);
        let c = CurvatureAt::new(m.as_ref(), &p, false);
        let r = c.r4(&x, &y, &z, &w);
        prop_assert!((r + c.r4(&y, &x, &z, &w)).abs() < 1e-5);
        prop_assert!((r + c.r4(&x, &y, &w, &z)).abs() < 1e-5);
    }

    #[test]
    fn sasakian_curvature_has_pair_symmetry(seed in 0u64..1000, x in coeffs(3), y in coeffs(3), z in coeffs(3), w in coeffs(3)) {
        let m = sphere(1).unwrap();
        let p = m.sample_points(1, 1.0, seed).remove(0);
        let c = CurvatureAt::new(m.as_ref(), &p, false);
        prop_assert!((c.r4(&x, &y, &z, &w) - c.r4(&z, &w, &x, &y)).abs() < 1e-6);
    }

    #[test]
    fn torsion_anticommutes_with_j(seed in 0u64..1000, kappa in 0.05f64..0.5) {
        let m = scaled_heisenberg(1, kappa).unwrap();
        let p = m.sample_points(1, 1.0, seed).remove(0);
        let g = PointGeometry::at(m.as_ref(), &p);
        let tau = g.tau_full();
        prop_assert!((&tau * &g.jm + &g.jm * &tau).amax() < 1e-8);
        prop_assert!((&tau - tau.transpose()).amax() < 1e-8);
    }

    #[test]
    fn tw_axioms_at_random_points(seed in 0u64..10_000, which in 0usize..6) {
        let m = &models()[which];
        let p = m.sample_points(1, 1.0, seed).remove(0);
        let g = PointGeometry::at(m.as_ref(), &p);
        for (name, r) in g.tw_residuals() {
            prop_assert!(r < 1e-6, "{} {}: {:e}", m.id(), name, r);
        }
    }
}
