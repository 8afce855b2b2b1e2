//! The experiment registry and one runner per experiment.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};

use pseudoherm::connection::{axiom_report, identity_suite_with};
use pseudoherm::fefferman::{lift_connection_report, lift_sr_geodesic, projection_check, round_trip, CirclePoint, FeffermanMetric};
use pseudoherm::field::FieldAlong;
use pseudoherm::geodesics::*;
use pseudoherm::jacobi::*;
use pseudoherm::par::Exec;
use pseudoherm::report::{ResidualReport, VariationReport};
use pseudoherm::variation::*;
use pseudoherm::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::report::Check;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelFamily {
    Heisenberg,
    Sphere,
    ScaledHeisenberg,
}

impl ModelFamily {
    pub fn of(model_id: &str) -> ModelFamily {
        match model_id.split(':').next() {
            Some("sphere") => ModelFamily::Sphere,
            Some("scaled-heisenberg") => ModelFamily::ScaledHeisenberg,
            _ => ModelFamily::Heisenberg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Axioms,
    Identities,
    SrEquivalence,
    Fefferman,
    JacobiDims,
    ConjugateSphere,
    NoConjugateFlat,
    Variation1,
    Variation2,
    Nonminimality,
}

/// Values used when neither the config file nor a flag sets them.
pub struct Defaults {
    pub model: &'static str,
    pub h: f64,
    pub tmax: f64,
    pub samples: usize,
    pub tolerance: f64,
}

/// Checks and written files.
#[derive(Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub artifacts: Vec<PathBuf>,
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    model: &'a Model,
    out: Outcome,
}

impl Ctx<'_> {
    fn check(&mut self, c: Check) {
        self.out.checks.push(c);
    }

    fn artifact_path(&mut self, suffix: &str) -> PathBuf {
        let name = format!("{}.{suffix}", self.cfg.experiment);
        self.out.artifacts.push(PathBuf::from(&name));
        self.cfg.out.join(name)
    }

    fn json<T: Serialize>(&mut self, suffix: &str, value: &T) -> Result<()> {
        let path = self.artifact_path(suffix);
        let text = serde_json::to_string_pretty(value).map_err(|e| GeomError::Numeric(e.to_string()))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.cfg.seed)
    }

    fn residual_checks(&mut self, rep: &ResidualReport) {
        for name in rep.names() {
            let tol = rep.entries.iter().filter(|e| e.identity_name == name).map(|e| e.tolerance).fold(f64::INFINITY, f64::min);
            self.check(Check::below(&name, rep.max_residual(&name), tol));
        }
    }
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::Axioms,
        Experiment::Identities,
        Experiment::SrEquivalence,
        Experiment::Fefferman,
        Experiment::JacobiDims,
        Experiment::ConjugateSphere,
        Experiment::NoConjugateFlat,
        Experiment::Variation1,
        Experiment::Variation2,
        Experiment::Nonminimality,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Experiment::Axioms => "axioms",
            Experiment::Identities => "identities",
            Experiment::SrEquivalence => "sr-equivalence",
            Experiment::Fefferman => "fefferman",
            Experiment::JacobiDims => "jacobi-dims",
            Experiment::ConjugateSphere => "conjugate-sphere",
            Experiment::NoConjugateFlat => "no-conjugate-flat",
            Experiment::Variation1 => "variation-1",
            Experiment::Variation2 => "variation-2",
            Experiment::Nonminimality => "nonminimality",
        }
    }

    pub fn from_id(id: &str) -> Option<Experiment> {
        Experiment::ALL.into_iter().find(|e| e.id() == id)
    }

    pub fn description(self) -> &'static str {
        match self {
            Experiment::Axioms => "Tanaka-Webster axiom residuals at sample points",
            Experiment::Identities => "curvature and torsion identity suite on random tuples",
            Experiment::SrEquivalence => "Hamiltonian vs connection-form sub-Riemannian geodesics",
            Experiment::Fefferman => "lift/projection of geodesics through the Fefferman metric",
            Experiment::JacobiDims => "dimensions of the Jacobi and horizontal Jacobi spaces",
            Experiment::ConjugateSphere => "first conjugate point on the sphere and its curvature bounds",
            Experiment::NoConjugateFlat => "absence of conjugate points on the Heisenberg group",
            Experiment::Variation1 => "first variation of length: formula vs finite differences",
            Experiment::Variation2 => "second variation: index form vs finite differences",
            Experiment::Nonminimality => "negative index and a shorter nearby curve past a conjugate point",
        }
    }

    pub fn model_requirement(self) -> &'static str {
        match self {
            Experiment::Axioms | Experiment::Identities | Experiment::Variation1 => "any model",
            Experiment::SrEquivalence => "heisenberg:n or scaled-heisenberg:n:kappa",
            Experiment::Fefferman | Experiment::NoConjugateFlat => "heisenberg:n",
            Experiment::JacobiDims => "heisenberg:n or sphere:n",
            Experiment::ConjugateSphere => "sphere:n",
            Experiment::Variation2 => "a Sasakian model (heisenberg:n or sphere:n)",
            Experiment::Nonminimality => "sphere:n with n ≥ 2",
        }
    }

    pub fn accepts(self, family: ModelFamily, n: usize) -> bool {
        use ModelFamily::*;
        match self {
            Experiment::Axioms | Experiment::Identities | Experiment::Variation1 => true,
            Experiment::SrEquivalence => family != Sphere,
            Experiment::Fefferman | Experiment::NoConjugateFlat => family == Heisenberg,
            Experiment::JacobiDims | Experiment::Variation2 => family != ScaledHeisenberg,
            Experiment::ConjugateSphere => family == Sphere,
            Experiment::Nonminimality => family == Sphere && n >= 2,
        }
    }

    pub fn defaults(self) -> Defaults {
        let d = |model, h, tmax, samples, tolerance| Defaults { model, h, tmax, samples, tolerance };
        match self {
            Experiment::Axioms => d("heisenberg:1", 1e-2, 1.0, 100, 1e-6),
            Experiment::Identities => d("heisenberg:1", 1e-2, 1.0, 20, 1e-5),
            Experiment::SrEquivalence => d("heisenberg:1", 1e-3, 1.0, 20, 1e-5),
            Experiment::Fefferman => d("heisenberg:1", 1e-3, 2.0, 3, 1e-5),
            Experiment::JacobiDims => d("heisenberg:1", 1e-2, 2.0, 1, 1e-12),
            Experiment::ConjugateSphere => d("sphere:1", 1e-2, 2.0, 20, 1e-6),
            Experiment::NoConjugateFlat => d("heisenberg:1", 1e-2, 100.0, 1, 1e-12),
            Experiment::Variation1 => d("scaled-heisenberg:1:0.3", 1e-2, 1.0, 10, 1e-6),
            Experiment::Variation2 => d("sphere:1", 1e-2, 1.2, 5, 1e-3),
            Experiment::Nonminimality => d("sphere:2", 1e-3, 5.0, 1, 1e-6),
        }
    }

    /// Runs the experiment; artifacts go to `cfg.out`, which must exist.
    pub fn run(self, cfg: &ExperimentConfig, model: &Model) -> Result<Outcome> {
        let mut ctx = Ctx { cfg, model, out: Outcome::default() };
        match self {
            Experiment::Axioms => axioms(&mut ctx)?,
            Experiment::Identities => identities(&mut ctx)?,
            Experiment::SrEquivalence => sr_equivalence(&mut ctx)?,
            Experiment::Fefferman => fefferman(&mut ctx)?,
            Experiment::JacobiDims => jacobi_dims(&mut ctx)?,
            Experiment::ConjugateSphere => conjugate_sphere(&mut ctx)?,
            Experiment::NoConjugateFlat => no_conjugate_flat(&mut ctx)?,
            Experiment::Variation1 => variation_1(&mut ctx)?,
            Experiment::Variation2 => variation_2(&mut ctx)?,
            Experiment::Nonminimality => nonminimality(&mut ctx)?,
        }
        Ok(ctx.out)
    }
}

fn unit_horizontal(m: &Model, x: &Vector, rng: &mut ChaCha8Rng) -> Vector {
    let c: Vec<f64> = (0..2 * m.n()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    let c: Vec<f64> = c.iter().map(|v| v / norm).collect();
    horizontal_vector(m.as_ref(), x, &c)
}

fn first_axis_geodesic(m: &Model, t_max: f64, h: f64) -> Result<CurveSolution> {
    let mut c = vec![0.0; 2 * m.n()];
    c[0] = 1.0;
    let v0 = horizontal_vector(m.as_ref(), &m.origin(), &c);
    integrate_tw_geodesic(m, &m.origin(), &v0, t_max, h)
}

fn axioms(ctx: &mut Ctx) -> Result<()> {
    let pts = ctx.model.sample_points(ctx.cfg.samples, 1.0, ctx.cfg.seed);
    let rep = axiom_report(ctx.model.as_ref(), &pts, ctx.cfg.tolerance, Exec::default());
    ctx.residual_checks(&rep);
    ctx.json("residuals.json", &rep)
}

fn identities(ctx: &mut Ctx) -> Result<()> {
    let pts = ctx.model.sample_points(ctx.cfg.samples, 1.0, ctx.cfg.seed);
    let rep = identity_suite_with(ctx.model.as_ref(), &pts, 10, ctx.cfg.seed, Exec::default());
    ctx.residual_checks(&rep);
    ctx.json("residuals.json", &rep)
}

fn sr_equivalence(ctx: &mut Ctx) -> Result<()> {
    let (m, cfg) = (ctx.model.clone(), ctx.cfg);
    let gap = |x0: &Vector, v0: &Vector, b0: f64, h: f64| -> Result<(f64, CurveSolution, CurveSolution)> {
        let sr = integrate_sr_geodesic(&m, x0, v0, b0, cfg.tmax, h)?;
        let xi0 = hamiltonian_initial_covector(m.as_ref(), x0, v0, b0);
        let ham = integrate_hamiltonian(&m, x0, &xi0, cfg.tmax, h)?;
        Ok((sr.sup_distance(&ham), sr, ham))
    };
    let mut gaps = Vec::new();
    let mut ratios = Vec::new();
    let mut first = None;
    for i in 0..cfg.samples as u64 {
        let seed = cfg.seed.wrapping_add(i);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x0 = m.sample_points(1, 1.0, seed).remove(0);
        let v0 = unit_horizontal(&m, &x0, &mut rng);
        let b0 = rng.random_range(-1.0..1.0);
        let (g, sr, ham) = gap(&x0, &v0, b0, cfg.h)?;
        gaps.push(g);
        let coarse = gap(&x0, &v0, b0, 0.1)?.0;
        let fine = gap(&x0, &v0, b0, 0.05)?.0;
        if coarse > 1e-12 {
            ratios.push(coarse / fine);
        }
        if first.is_none() {
            first = Some((sr, ham));
        }
    }
    ctx.check(Check::all_below("sup_gap", gaps, cfg.tolerance));
    ctx.check(Check::at_least("min_gap_ratio_halving_h", ratios.iter().copied().fold(f64::INFINITY, f64::min), 8.0));
    if let Some((sr, ham)) = first {
        sr.save_csv(&ctx.artifact_path("connection.csv"))?;
        ham.save_csv(&ctx.artifact_path("hamiltonian.csv"))?;
    }
    Ok(())
}

fn fefferman(ctx: &mut Ctx) -> Result<()> {
    let (m, cfg) = (ctx.model.clone(), ctx.cfg);
    let f = FeffermanMetric::new(&m)?;
    let mut rng = ctx.rng();
    let (mut lift, mut proj, mut energy) = (0.0f64, 0.0f64, 0.0f64);
    let mut first_lift = None;
    for i in 0..cfg.samples as u64 {
        let x0 = m.sample_points(1, 1.0, cfg.seed.wrapping_add(i)).remove(0);
        let v0 = unit_horizontal(&m, &x0, &mut rng);
        let b0 = rng.random_range(-1.0..1.0);
        let sol = integrate_sr_geodesic(&m, &x0, &v0, b0, cfg.tmax, cfg.h)?;
        let r0 = rng.random_range(0.0..6.0);
        let rt = round_trip(&f, &sol, r0)?;
        lift = lift.max(rt.lift_distance);
        proj = proj.max(rt.projection_sr_residual).max(rt.projection_b_residual).max(rt.projection_theta);
        energy = energy.max(rt.lift_energy_drift).max(rt.projection_energy_drift);
        let mut zdot = f.lift(&unit_horizontal(&m, &x0, &mut rng));
        zdot[2 * m.n() + 1] = rng.random_range(-1.0..1.0);
        let pc = projection_check(&f, &CirclePoint::new(x0, 0.5), &zdot, cfg.tmax, cfg.h)?;
        proj = proj.max(pc.projection_sr_residual).max(pc.projection_b_residual).max(pc.projection_theta);
        energy = energy.max(pc.projection_energy_drift);
        if first_lift.is_none() {
            first_lift = Some(lift_sr_geodesic(&sol, r0)?);
        }
    }
    ctx.check(Check::below("lift_distance", lift, cfg.tolerance));
    ctx.check(Check::below("projection_residual", proj, cfg.tolerance));
    ctx.check(Check::below("energy_drift", energy, 0.1 * cfg.tolerance));
    let rep = lift_connection_report(&f, &m.sample_points(10, 1.0, cfg.seed), cfg.tolerance, Exec::default());
    ctx.residual_checks(&rep);
    ctx.json("identities.json", &rep)?;
    if let Some(c) = first_lift {
        c.save_csv(&ctx.artifact_path("lift.csv"))?;
    }
    Ok(())
}

fn jacobi_dims(ctx: &mut Ctx) -> Result<()> {
    let (m, cfg) = (ctx.model.clone(), ctx.cfg);
    let n = m.n();
    let sys = JacobiSystem::new(&first_axis_geodesic(&m, cfg.tmax, cfg.h)?)?;
    let (dj, dh) = (sys.solution_space_dim() as f64, horizontal_dim(&sys)? as f64);
    ctx.check(Check::equal("dim_jacobi", dj, (4 * n + 2) as f64));
    if ModelFamily::of(&cfg.model) == ModelFamily::Sphere {
        ctx.check(Check::at_least("dim_horizontal_lower", dh, (2 * n + 1) as f64));
        ctx.check(Check::at_least("dim_horizontal_upper_slack", (4 * n) as f64 - dh, 0.0));
    } else {
        ctx.check(Check::equal("dim_horizontal", dh, (4 * n) as f64));
    }
    Ok(())
}

#[derive(Serialize)]
struct ConjugateSummary {
    t_max: f64,
    conjugate_points: Vec<ConjugatePoint>,
    k0_sectional: Option<f64>,
    k0_ricci: Option<f64>,
}

fn conjugate_sphere(ctx: &mut Ctx) -> Result<()> {
    let (m, cfg) = (ctx.model.clone(), ctx.cfg);
    let sys = JacobiSystem::new(&first_axis_geodesic(&m, cfg.tmax, cfg.h)?)?;
    let cps = conjugate_points(&sys, cfg.tmax);
    let t_star = cps.first().map(|c| c.t).unwrap_or(f64::NAN);
    let pts = m.sample_points(cfg.samples, 1.0, cfg.seed);
    let k0 = sampled_k0(m.as_ref(), &pts, 5, cfg.seed)?;
    let k0_ricci = sampled_ricci_k0(m.as_ref(), &pts, 5, cfg.seed)?;
    ctx.check(Check::near("first_conjugate_t", t_star, FRAC_PI_2, cfg.tolerance));
    ctx.check(Check::at_least("slack_sectional_bound", PI / (2.0 * k0.sqrt()) - t_star, -cfg.tolerance));
    ctx.check(Check::at_least("slack_ricci_bound", PI / k0_ricci.sqrt() - t_star, -cfg.tolerance));
    ctx.json("conjugate.json", &ConjugateSummary { t_max: cfg.tmax, conjugate_points: cps, k0_sectional: Some(k0), k0_ricci: Some(k0_ricci) })?;
    let mut xp = Vector::zeros(sys.m());
    xp[1] = 1.0;
    sys.integrate(&Vector::zeros(sys.m()), &xp)?.save_csv(&ctx.artifact_path("jacobi.csv"))?;
    Ok(())
}

fn no_conjugate_flat(ctx: &mut Ctx) -> Result<()> {
    let (m, cfg) = (ctx.model.clone(), ctx.cfg);
    let sys = JacobiSystem::new(&first_axis_geodesic(&m, cfg.tmax, cfg.h)?)?;
    let cps = conjugate_points(&sys, cfg.tmax);
    ctx.check(Check::equal("conjugate_points", cps.len() as f64, 0.0));
    ctx.json("conjugate.json", &ConjugateSummary { t_max: cfg.tmax, conjugate_points: cps, k0_sectional: None, k0_ricci: None })
}

/// Σ_j c_ij t^j, times t(L − t) when `vanish`.
fn random_coeffs(rng: &mut ChaCha8Rng, m: usize, length: f64, vanish: bool) -> impl Fn(f64) -> Vector + Send + Sync + 'static {
    let c: Vec<[f64; 3]> = (0..m).map(|_| [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)]).collect();
    move |t| {
        let bump = if vanish { t * (length - t) } else { 1.0 };
        Vector::from_fn(m, |i, _| bump * (c[i][0] + c[i][1] * t + c[i][2] * t * t))
    }
}

fn broken_family(m: &Model, length: f64, h: f64, rng: &mut ChaCha8Rng) -> Result<CurveFamily> {
    let half = 0.5 * length;
    let x0 = m.origin();
    let mut c = vec![0.0; 2 * m.n()];
    c[0] = 1.0;
    let s1 = integrate_tw_geodesic(m, &x0, &horizontal_vector(m.as_ref(), &x0, &c), half, h)?;
    let x1 = s1.point(half);
    c[0] = 0.6;
    c[1] = 0.8;
    let s2 = integrate_tw_geodesic(m, &x1, &horizontal_vector(m.as_ref(), &x1, &c), half, h)?.shifted(half);
    let curve = BrokenCurve::new(vec![s1, s2])?;
    let coeffs = random_coeffs(rng, m.dim(), length, false);
    Ok(CurveFamily::new(curve.clone(), VariationField::model_frame(&curve, coeffs)))
}

fn variation_1(ctx: &mut Ctx) -> Result<()> {
    let (m, cfg) = (ctx.model.clone(), ctx.cfg);
    let mut rng = ctx.rng();
    let mut reports = Vec::new();
    for i in 0..cfg.samples {
        let x0 = m.sample_points(1, 0.5, cfg.seed.wrapping_add(i as u64)).remove(0);
        let mut v0 = unit_horizontal(&m, &x0, &mut rng);
        if i % 2 == 1 {
            v0 += m.frame(&x0, m.anchor(&x0))[2 * m.n()].clone() * 0.3;
        }
        let curve = BrokenCurve::smooth(integrate_tw_geodesic(&m, &x0, &v0, cfg.tmax, cfg.h)?);
        let field = VariationField::model_frame(&curve, random_coeffs(&mut rng, m.dim(), cfg.tmax, false));
        let family = CurveFamily::new(curve, field);
        let analytic = first_variation_formula(&family)?.total;
        reports.push(VariationReport::new(&format!("{} #{i}", m.id()), analytic, first_variation_fd(&family), cfg.tolerance, 1e-3));
    }
    let broken = broken_family(&m, 2.0 * cfg.tmax, cfg.h, &mut rng)?;
    let analytic = first_variation_formula(&broken)?.total;
    reports.push(VariationReport::new(&format!("{} broken", m.id()), analytic, first_variation_fd(&broken), cfg.tolerance, 1e-3));
    ctx.check(Check::all_below("rel_error", reports.iter().map(|r| r.rel_error).collect(), cfg.tolerance));
    let sol = first_axis_geodesic(&m, cfg.tmax, cfg.h)?;
    let curve = BrokenCurve::smooth(sol);
    if m.is_sasakian() {
        let field = VariationField::model_frame(&curve, random_coeffs(&mut rng, m.dim(), cfg.tmax, true));
        ctx.check(Check::below("sasakian_first_variation", first_variation_fd(&CurveFamily::new(curve, field)).abs(), 0.1 * cfg.tolerance));
    } else {
        let t_idx = m.dim() - 1;
        let len = cfg.tmax;
        let field = VariationField::model_frame(&curve, move |t| {
            let mut v = Vector::zeros(t_idx + 1);
            v[t_idx] = (PI * t / len).sin();
            v
        });
        let family = CurveFamily::new(curve, field);
        let v3 = torsion_integral(&family)?;
        let fd = first_variation_fd(&family);
        reports.push(VariationReport::new(&format!("{} torsion integral", m.id()), v3, fd, cfg.tolerance, 1e-3));
        ctx.check(Check::below("torsion_integral_abs_error", (v3 - fd).abs(), cfg.tolerance));
    }
    ctx.json("variations.json", &reports)
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

fn variation_2(ctx: &mut Ctx) -> Result<()> {
    let (m, cfg) = (ctx.model.clone(), ctx.cfg);
    let mut rng = ctx.rng();
    let length = cfg.tmax;
    let sys = JacobiSystem::new(&first_axis_geodesic(&m, length, cfg.h)?)?;
    let mut reports = Vec::new();
    let mut by_parts = Vec::new();
    for i in 0..cfg.samples {
        let x = bump_field(&mut rng, sys.m(), length);
        let y = bump_field(&mut rng, sys.m(), length);
        let i_xx = index_form(&sys, &x, &x, 0.0, length)?;
        let family = CurveFamily::new(BrokenCurve::smooth(sys.sol.clone()), VariationField::from_parallel(&sys, x.clone()));
        let fd = second_variation_fd(&family) * sys.speed();
        reports.push(VariationReport::new(&format!("{} #{i}", m.id()), i_xx, fd, cfg.tolerance, 1e-6));
        by_parts.push((index_form(&sys, &x, &y, 0.0, length)? - index_form_by_parts(&sys, &x, &y, 0.0, length)?).abs());
    }
    ctx.check(Check::all_below("index_vs_fd_rel_error", reports.iter().map(|r| r.rel_error).collect(), cfg.tolerance));
    ctx.check(Check::all_below("index_vs_by_parts", by_parts, 1e-6));
    if ModelFamily::of(&cfg.model) == ModelFamily::Sphere && m.n() == 1 {
        let fsys = JacobiSystem::new(&first_axis_geodesic(&m, 2.0, 1e-3)?)?;
        let jf = fsys.integrate(&Vector::zeros(3), &Vector::from_vec(vec![0.0, 2.0, -4.0 / PI]))?;
        let field = jf.along(&fsys, 0.0, FRAC_PI_2);
        let fixture = index_form(&fsys, &field, &field, 0.0, FRAC_PI_2)?;
        ctx.check(Check::near("sphere_fixture_index", fixture, 8.0 / PI, 1e-4));
    }
    ctx.json("variations.json", &reports)
}

fn nonminimality(ctx: &mut Ctx) -> Result<()> {
    let (m, cfg) = (ctx.model.clone(), ctx.cfg);
    let sys = JacobiSystem::new(&first_axis_geodesic(&m, cfg.tmax, cfg.h)?)?;
    let r = nonminimality_demo(&sys, 0.0, PI, 4.0, 0.5)?;
    ctx.check(Check::below("index", r.index, -cfg.tolerance));
    ctx.check(Check::below("first_variation_abs", r.first_variation.abs(), cfg.tolerance));
    ctx.check(Check::below("length_change", r.varied_length.map(|l| l - r.length).unwrap_or(f64::NAN), -1e-8));
    ctx.json("demo.json", &r)
}

pub fn ensure_dir(dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)
}
