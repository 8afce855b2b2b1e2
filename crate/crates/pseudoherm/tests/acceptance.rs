//! End-to-end acceptance criteria. Runs without the libtest harness so
//! every criterion prints one PASS/FAIL line; exits nonzero on any failure.

mod common;

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use common::{tw_oracle, FdFrame};
use pseudoherm::connection::*;
use pseudoherm::fefferman::*;
use pseudoherm::field::FieldAlong;
use pseudoherm::geodesics::*;
use pseudoherm::jacobi::*;
use pseudoherm::par::Exec;
use pseudoherm::report::VariationReport;
use pseudoherm::variation::*;
use pseudoherm::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn all_models() -> Vec<Model> {
    ["heisenberg:1", "heisenberg:2", "sphere:1", "sphere:2", "scaled-heisenberg:1:0.3", "scaled-heisenberg:2:0.2"]
        .iter()
        .map(|id| model_from_id(id).unwrap())
        .collect()
}

fn unit_horizontal(m: &Model, x: &Vector, rng: &mut ChaCha8Rng) -> Vector {
    let c: Vec<f64> = (0..2 * m.n()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    let c: Vec<f64> = c.iter().map(|v| v / norm).collect();
    horizontal_vector(m.as_ref(), x, &c)
}

fn first_axis_geodesic(m: &Model, t_max: f64, h: f64) -> CurveSolution {
    let mut c = vec![0.0; 2 * m.n()];
    c[0] = 1.0;
    let v0 = horizontal_vector(m.as_ref(), &m.origin(), &c);
    integrate_tw_geodesic(m, &m.origin(), &v0, t_max, h).unwrap()
}

fn criterion_1() -> Outcome {
    let mut worst_axiom: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    let mut full_rank = true;
    let mut pass = true;
    for m in all_models() {
        let pts = m.sample_points(100, 1.0, 1);
        let rep = axiom_report(m.as_ref(), &pts, 1e-6, Exec::default());
        pass &= rep.all_pass();
        worst_axiom = rep.entries.iter().fold(worst_axiom, |a, e| a.max(e.residual));
        for x in &pts {
            let fast = tw_connection(m.as_ref(), x).unwrap().gamma_tensor();
            let sol = tw_oracle(&FdFrame::new(m.as_ref(), x));
            full_rank &= sol.rank == sol.unknowns;
            worst_oracle = worst_oracle.max(fast.max_abs_diff(&sol.gamma));
        }
    }
    pass &= full_rank && worst_oracle < 1e-7;
    outcome(pass, format!("max axiom residual {worst_axiom:.2e}, max |Γ − Γ_oracle| {worst_oracle:.2e}, oracle full rank {full_rank}"))
}

fn criterion_2() -> Outcome {
    let mut flat: f64 = 0.0;
    let mut space_form: f64 = 0.0;
    for n in [1, 2] {
        let m = heisenberg(n).unwrap();
        let pts = m.sample_points(100, 2.0, 2);
        let rep = identity_suite(m.as_ref(), &pts, 3);
        flat = flat.max(rep.max_residual("tw_flat"));
        space_form = space_form.max(rep.max_residual("space_form_c_minus_3"));
    }
    outcome(flat < 1e-8 && space_form < 1e-6, format!("max ‖R‖ {flat:.2e}, c = −3 space-form residual {space_form:.2e}"))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for n in [1, 2] {
        let m = sphere(n).unwrap();
        for x in m.sample_points(20, 1.0, 3) {
            let c = CurvatureAt::new(m.as_ref(), &x, false);
            let mut u = Vector::from_fn(c.m(), |_, _| rng.random_range(-1.0..1.0));
            u[c.m() - 1] = 0.0;
            let k = sectional_from(&c, &u, &c.j(&u)).unwrap();
            worst = worst.max((k - 1.0).abs());
        }
    }
    outcome(worst < 1e-6, format!("max |k_θ(X, JX) − 1| {worst:.2e} over 40 planes"))
}

fn hamiltonian_gap(m: &Model, x0: &Vector, v0: &Vector, b0: f64, h: f64) -> f64 {
    let sr = integrate_sr_geodesic(m, x0, v0, b0, 1.0, h).unwrap();
    let xi0 = hamiltonian_initial_covector(m.as_ref(), x0, v0, b0);
    let ham = integrate_hamiltonian(m, x0, &xi0, 1.0, h).unwrap();
    sr.sup_distance(&ham)
}

fn criterion_4() -> Outcome {
    let models = [heisenberg(1).unwrap(), heisenberg(2).unwrap(), scaled_heisenberg(1, 0.3).unwrap(), scaled_heisenberg(2, 0.2).unwrap()];
    let mut worst: f64 = 0.0;
    let mut worst_ratio = f64::INFINITY;
    for m in &models {
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x0 = m.sample_points(1, 1.0, seed).remove(0);
            let v0 = unit_horizontal(m, &x0, &mut rng);
            let b0 = rng.random_range(-1.0..1.0);
            worst = worst.max(hamiltonian_gap(m, &x0, &v0, b0, 1e-3));
            let coarse = hamiltonian_gap(m, &x0, &v0, b0, 0.1);
            let fine = hamiltonian_gap(m, &x0, &v0, b0, 0.05);
            if coarse > 1e-12 {
                worst_ratio = worst_ratio.min(coarse / fine);
            }
        }
    }
    outcome(worst < 1e-5 && worst_ratio >= 8.0, format!("max sup gap {worst:.2e} at h = 1e−3, min gap ratio {worst_ratio:.1} when halving h = 0.1"))
}

fn criterion_5() -> Outcome {
    let s3 = sphere(1).unwrap();
    let sys = JacobiSystem::new(&first_axis_geodesic(&s3, 2.0, 1e-2)).unwrap();
    let t_star = conjugate_points(&sys, 2.0).first().map(|c| c.t).unwrap_or(f64::NAN);
    let pts = s3.sample_points(20, 1.0, 5);
    let k0 = sampled_k0(s3.as_ref(), &pts, 5, 5).unwrap();
    let k0_ricci = sampled_ricci_k0(s3.as_ref(), &pts, 5, 5).unwrap();
    let bound1 = PI / (2.0 * k0.sqrt());
    let bound2 = PI / k0_ricci.sqrt();
    let sphere_ok = (t_star - FRAC_PI_2).abs() < 1e-6 && t_star <= bound1 + 1e-6 && t_star <= bound2 + 1e-6;
    let heis = heisenberg(1).unwrap();
    let hsys = JacobiSystem::new(&first_axis_geodesic(&heis, 100.0, 1e-2)).unwrap();
    let flat = conjugate_points(&hsys, 100.0);
    outcome(
        sphere_ok && flat.is_empty(),
        format!("S³ t* = {t_star:.10}, bounds {bound1:.6} / {bound2:.6}; Heisenberg conjugate points on [0,100]: {}", flat.len()),
    )
}

fn criterion_6() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [1usize, 2] {
        let m = heisenberg(n).unwrap();
        let sys = JacobiSystem::new(&first_axis_geodesic(&m, 2.0, 1e-2)).unwrap();
        let (dj, dh) = (sys.solution_space_dim(), horizontal_dim(&sys).unwrap());
        pass &= dj == 4 * n + 2 && dh == 4 * n;
        parts.push(format!("H{n}: dim J {dj} (want {}), dim H {dh} (want {})", 4 * n + 2, 4 * n));
    }
    for n in [1usize, 2] {
        let m = sphere(n).unwrap();
        let sys = JacobiSystem::new(&first_axis_geodesic(&m, 2.0, 1e-2)).unwrap();
        let (dj, dh) = (sys.solution_space_dim(), horizontal_dim(&sys).unwrap());
        pass &= dj == 4 * n + 2 && dh >= 2 * n + 1 && dh <= 4 * n;
        parts.push(format!("S{}: dim J {dj}, dim H {dh} (bounds [{}, {}])", 2 * n + 1, 2 * n + 1, 4 * n));
    }
    outcome(pass, parts.join("; "))
}

/// Random smooth coefficients Σ c_{ij} t^j, optionally times the bump
/// t(L − t) so the field vanishes at the ends.
fn random_coeffs(rng: &mut ChaCha8Rng, m: usize, length: f64, vanish: bool) -> impl Fn(f64) -> Vector + Send + Sync + 'static {
    let c: Vec<[f64; 3]> = (0..m).map(|_| [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)]).collect();
    move |t| {
        let bump = if vanish { t * (length - t) } else { 1.0 };
        Vector::from_fn(m, |i, _| bump * (c[i][0] + c[i][1] * t + c[i][2] * t * t))
    }
}

fn broken_case(rng: &mut ChaCha8Rng) -> (CurveFamily, String) {
    let m = heisenberg(1).unwrap();
    let x0 = m.origin();
    let v0 = horizontal_vector(m.as_ref(), &x0, &[1.0, 0.0]);
    let s1 = integrate_tw_geodesic(&m, &x0, &v0, 1.0, 1e-2).unwrap();
    let x1 = s1.point(1.0);
    let v1 = horizontal_vector(m.as_ref(), &x1, &[0.6, 0.8]);
    let s2 = integrate_tw_geodesic(&m, &x1, &v1, 1.0, 1e-2).unwrap().shifted(1.0);
    let curve = BrokenCurve::new(vec![s1, s2]).unwrap();
    let coeffs = random_coeffs(rng, 3, 2.0, false);
    let field = VariationField::model_frame(&curve, move |t| coeffs(t) + Vector::from_vec(vec![0.3, -0.7, 0.2]));
    (CurveFamily::new(curve, field), "heisenberg:1 broken".into())
}

fn criterion_7() -> Outcome {
    let models = all_models();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for i in 0..20 {
        let (family, name) = if i == 19 {
            broken_case(&mut rng)
        } else {
            let m = &models[i % models.len()];
            let x0 = m.sample_points(1, 0.5, i as u64).remove(0);
            let mut v0 = unit_horizontal(m, &x0, &mut rng);
            if i % 2 == 1 {
                v0 += m.frame(&x0, m.anchor(&x0))[2 * m.n()].clone() * 0.3;
            }
            let sol = integrate_tw_geodesic(m, &x0, &v0, 1.0, 1e-2).unwrap();
            let curve = BrokenCurve::smooth(sol);
            let field = VariationField::model_frame(&curve, random_coeffs(&mut rng, m.dim(), 1.0, false));
            (CurveFamily::new(curve, field), m.id())
        };
        let analytic = first_variation_formula(&family).unwrap().total;
        let fd = first_variation_fd(&family);
        let rep = VariationReport::new(&name, analytic, fd, 1e-6, 1e-3);
        pass &= rep.pass;
        worst = worst.max(rep.rel_error);
    }
    let mut sasaki: f64 = 0.0;
    for m in [heisenberg(1).unwrap(), sphere(1).unwrap(), sphere(2).unwrap()] {
        let sol = first_axis_geodesic(&m, 1.0, 1e-2);
        let curve = BrokenCurve::smooth(sol);
        let field = VariationField::model_frame(&curve, random_coeffs(&mut rng, m.dim(), 1.0, true));
        sasaki = sasaki.max(first_variation_fd(&CurveFamily::new(curve, field)).abs());
    }
    let scaled = scaled_heisenberg(1, 0.3).unwrap();
    let x0 = Vector::from_vec(vec![0.4, -0.2, 0.1]);
    let v0 = horizontal_vector(scaled.as_ref(), &x0, &[0.6, 0.8]);
    let sol = integrate_tw_geodesic(&scaled, &x0, &v0, 1.0, 1e-2).unwrap();
    let curve = BrokenCurve::smooth(sol);
    let field = VariationField::model_frame(&curve, |t| Vector::from_vec(vec![0.0, 0.0, (PI * t).sin()]));
    let family = CurveFamily::new(curve, field);
    let (v3, fd) = (torsion_integral(&family).unwrap(), first_variation_fd(&family));
    let v3_err = (v3 - fd).abs();
    pass &= sasaki < 1e-7 && v3_err < 1e-6;
    outcome(pass, format!("max rel error {worst:.2e} (20 cases incl. broken), Sasakian |dL/ds| {sasaki:.2e}, torsion integral {v3:.9} vs FD {fd:.9}"))
}

fn bump_field(rng: &mut ChaCha8Rng, m: usize, length: f64) -> FieldAlong {
    let mut c: Vec<[f64; 2]> = (0..m).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
    c[0] = [0.0, 0.0];
    let w = PI / length;
    FieldAlong::smooth(m, 0.0, length, move |t| {
        let (s, co) = ((w * t).sin(), (w * t).cos());
        let (s2, c2) = ((2.0 * w * t).sin(), (2.0 * w * t).cos());
        let x = Vector::from_fn(m, |i, _| c[i][0] * s + c[i][1] * s2);
        let xp = Vector::from_fn(m, |i, _| c[i][0] * w * co + c[i][1] * 2.0 * w * c2);
        let xpp = Vector::from_fn(m, |i, _| -c[i][0] * w * w * s - c[i][1] * 4.0 * w * w * s2);
        (x, xp, xpp)
    })
}

fn criterion_8() -> Outcome {
    let models = [heisenberg(1).unwrap(), heisenberg(2).unwrap(), sphere(1).unwrap(), sphere(2).unwrap()];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_fd: f64 = 0.0;
    let mut worst_parts: f64 = 0.0;
    let length = 1.2;
    for i in 0..10 {
        let m = &models[i % models.len()];
        let sys = JacobiSystem::new(&first_axis_geodesic(m, length, 1e-2)).unwrap();
        let x = bump_field(&mut rng, sys.m(), length);
        let y = bump_field(&mut rng, sys.m(), length);
        let i_xx = index_form(&sys, &x, &x, 0.0, length).unwrap();
        let family = CurveFamily::new(BrokenCurve::smooth(sys.sol.clone()), VariationField::from_parallel(&sys, x.clone()));
        let fd = second_variation_fd(&family) * sys.speed();
        worst_fd = worst_fd.max(VariationReport::new(&m.id(), i_xx, fd, 1e-3, 1e-6).rel_error);
        let i_xy = index_form(&sys, &x, &y, 0.0, length).unwrap();
        let i_xy_parts = index_form_by_parts(&sys, &x, &y, 0.0, length).unwrap();
        worst_parts = worst_parts.max((i_xy - i_xy_parts).abs());
    }
    let s3 = sphere(1).unwrap();
    let sys = JacobiSystem::new(&first_axis_geodesic(&s3, 2.0, 1e-3)).unwrap();
    let jf = sys.integrate(&Vector::zeros(3), &Vector::from_vec(vec![0.0, 2.0, -4.0 / PI])).unwrap();
    let field = jf.along(&sys, 0.0, FRAC_PI_2);
    let fixture = index_form(&sys, &field, &field, 0.0, FRAC_PI_2).unwrap();
    let fixture_err = (fixture - 8.0 / PI).abs();
    outcome(
        worst_fd < 1e-3 && worst_parts < 1e-6 && fixture_err < 1e-4,
        format!("max rel error vs FD {worst_fd:.2e}, max |I − I_parts| {worst_parts:.2e}, S³ fixture {fixture:.10} (8/π = {:.10})", 8.0 / PI),
    )
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut lift: f64 = 0.0;
    let mut proj: f64 = 0.0;
    let mut energy: f64 = 0.0;
    let mut identities = true;
    let mut worst_identity: f64 = 0.0;
    for n in [1, 2] {
        let m = heisenberg(n).unwrap();
        let f = FeffermanMetric::new(&m).unwrap();
        for seed in 0..3u64 {
            let x0 = m.sample_points(1, 1.0, seed).remove(0);
            let v0 = unit_horizontal(&m, &x0, &mut rng);
            let b0 = rng.random_range(-1.0..1.0);
            let sol = integrate_sr_geodesic(&m, &x0, &v0, b0, 2.0, 1e-3).unwrap();
            let rt = round_trip(&f, &sol, rng.random_range(0.0..6.0)).unwrap();
            lift = lift.max(rt.lift_distance);
            proj = proj.max(rt.projection_sr_residual).max(rt.projection_b_residual).max(rt.projection_theta);
            energy = energy.max(rt.lift_energy_drift).max(rt.projection_energy_drift);
            let mut zdot = f.lift(&unit_horizontal(&m, &x0, &mut rng));
            zdot[2 * n + 1] = rng.random_range(-1.0..1.0);
            let pc = projection_check(&f, &CirclePoint::new(x0.clone(), 0.5), &zdot, 2.0, 1e-3).unwrap();
            proj = proj.max(pc.projection_sr_residual).max(pc.projection_b_residual).max(pc.projection_theta);
            energy = energy.max(pc.projection_energy_drift);
        }
        let rep = lift_connection_report(&f, &m.sample_points(10, 1.0, 9), 1e-5, Exec::default());
        identities &= rep.all_pass();
        worst_identity = rep.entries.iter().fold(worst_identity, |a, e| a.max(e.residual));
    }
    outcome(
        lift < 1e-5 && proj < 1e-5 && energy < 1e-6 && identities,
        format!("lift distance {lift:.2e}, projection residual {proj:.2e}, F(ż,ż) drift {energy:.2e}, connection identities {worst_identity:.2e}"),
    )
}

fn criterion_10() -> Outcome {
    let s5 = sphere(2).unwrap();
    let sys = JacobiSystem::new(&first_axis_geodesic(&s5, 5.0, 1e-3)).unwrap();
    match nonminimality_demo(&sys, 0.0, PI, 4.0, 0.5) {
        Ok(r) => {
            let shorter = r.varied_length.map(|l| l < r.length).unwrap_or(false);
            outcome(
                r.index < -1e-6 && shorter,
                format!("I = {:.6e}, L(γ) = {:.10}, L(γ^s) = {:?} at s = {:?}", r.index, r.length, r.varied_length, r.s_star),
            )
        }
        Err(e) => outcome(false, format!("construction failed: {e}")),
    }
}

fn criterion_11() -> Outcome {
    let names = ["first_bianchi", "reeb_bianchi", "antisymmetry_xy", "antisymmetry_zw", "S_antisymmetry", "pair_interchange"];
    let mut worst: f64 = 0.0;
    for m in [scaled_heisenberg(1, 0.3).unwrap(), scaled_heisenberg(2, 0.2).unwrap()] {
        let rep = identity_suite_with(m.as_ref(), &m.sample_points(20, 1.0, 11), 10, 11, Exec::default());
        for name in names {
            worst = worst.max(rep.max_residual(name));
        }
    }
    let mut pair: f64 = 0.0;
    for m in [heisenberg(1).unwrap(), heisenberg(2).unwrap(), sphere(1).unwrap(), sphere(2).unwrap()] {
        let rep = identity_suite_with(m.as_ref(), &m.sample_points(20, 1.0, 11), 10, 11, Exec::default());
        pair = pair.max(rep.max_residual("pair_symmetry"));
    }
    outcome(worst < 1e-5 && pair < 1e-6, format!("torsionful identities max {worst:.2e} over 400 tuples, Sasakian pair symmetry {pair:.2e}"))
}

fn main() {
    let criteria: [(usize, fn() -> Outcome); 11] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
        (11, criterion_11),
    ];
    let filter: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (k, run) in criteria {
        if filter.is_some_and(|f| f != k) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {k}: {tag} ({:.1} s) {}", start.elapsed().as_secs_f64(), o.detail);
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
