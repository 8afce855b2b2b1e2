//! Tanaka-Webster geodesics, sub-Riemannian geodesics in connection form
//! (∇_γ̇γ̇ = −2b Jγ̇, b′ = A(γ̇,γ̇)) and in Hamiltonian form, with cotangent
//! lifts, the function a(t) and curve length.
//!
//! All integrators use fixed-step RK4 on a uniform grid and keep cubic
//! Hermite dense output of positions (from velocities) and velocities
//! (from accelerations).

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::connection::PointGeometry;
use crate::error::{GeomError, Result};
use crate::linalg::{hermite, hermite_vec, simpson_fn, Vector};
use crate::manifold::{frame_derivative, theta_at, Model, ModelManifold};

/// Default RK4 step.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Which equation produced a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CurveKind {
    TanakaWebster,
    SubRiemannian,
    Hamiltonian,
}

/// A densely sampled integrated curve.
#[derive(Debug, Clone)]
pub struct CurveSolution {
    pub model: Model,
    pub kind: CurveKind,
    pub t: Vec<f64>,
    pub x: Vec<Vector>,
    pub v: Vec<Vector>,
    /// Ambient accelerations, used by the velocity interpolant.
    pub acc: Vec<Vector>,
    pub b: Option<Vec<f64>>,
    pub bdot: Option<Vec<f64>>,
    /// Covector trajectory of the Hamiltonian integrator.
    pub xi: Option<Vec<Vector>>,
    pub h: f64,
}

impl CurveSolution {
    pub fn t0(&self) -> f64 {
        self.t[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.t.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Same curve with the parameter shifted by `dt`.
    pub fn shifted(&self, dt: f64) -> CurveSolution {
        let mut out = self.clone();
        out.t.iter_mut().for_each(|t| *t += dt);
        out
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let last = self.t.len() - 1;
        if last == 0 {
            return (0, 0.0);
        }
        let k = (((t - self.t0()) / self.h).floor().max(0.0) as usize).min(last - 1);
        (k, t - self.t[k])
    }

    /// Position and velocity at `t` from the Hermite interpolant.
    pub fn eval(&self, t: f64) -> (Vector, Vector) {
        let (k, s) = self.locate(t);
        if self.t.len() == 1 {
            return (self.x[0].clone(), self.v[0].clone());
        }
        let h = self.t[k + 1] - self.t[k];
        let (x, _) = hermite_vec(&self.x[k], &self.v[k], &self.x[k + 1], &self.v[k + 1], h, s);
        let (v, _) = hermite_vec(&self.v[k], &self.acc[k], &self.v[k + 1], &self.acc[k + 1], h, s);
        (x, v)
    }

    pub fn point(&self, t: f64) -> Vector {
        self.eval(t).0
    }

    pub fn velocity(&self, t: f64) -> Vector {
        self.eval(t).1
    }

    /// b(t), when the curve carries it.
    pub fn b_at(&self, t: f64) -> Option<f64> {
        let b = self.b.as_ref()?;
        if self.t.len() == 1 {
            return Some(b[0]);
        }
        let bd = self.bdot.as_ref()?;
        let (k, s) = self.locate(t);
        let h = self.t[k + 1] - self.t[k];
        Some(hermite(b[k], bd[k], b[k + 1], bd[k + 1], h, s).0)
    }

    /// Ambient acceleration at `t`, recomputed from the governing ODE.
    pub fn acceleration(&self, t: f64) -> Vector {
        let (x, v) = self.eval(t);
        match self.kind {
            CurveKind::TanakaWebster => geodesic_rhs(self.model.as_ref(), &x, &v, None).0,
            CurveKind::SubRiemannian => {
                let b = self.b_at(t).unwrap_or(0.0);
                geodesic_rhs(self.model.as_ref(), &x, &v, Some(b)).0
            }
            CurveKind::Hamiltonian => {
                let (k, s) = self.locate(t);
                if self.t.len() == 1 {
                    return self.acc[0].clone();
                }
                let h = self.t[k + 1] - self.t[k];
                let u = s / h;
                &self.acc[k] * (1.0 - u) + &self.acc[k + 1] * u
            }
        }
    }

    /// Largest |θ(γ̇)| over the nodes.
    pub fn theta_drift(&self) -> f64 {
        let m = self.model.as_ref();
        self.x.iter().zip(&self.v).map(|(x, v)| theta_at(m, x, v).abs()).fold(0.0, f64::max)
    }

    /// Webster norm of the velocity at each node.
    pub fn speeds(&self) -> Vec<f64> {
        self.x.iter().zip(&self.v).map(|(x, v)| webster_norm(self.model.as_ref(), x, v)).collect()
    }

    /// Relative drift of |γ̇| from its initial value.
    pub fn speed_drift(&self) -> f64 {
        let s = self.speeds();
        let s0 = s[0].max(1e-300);
        s.iter().map(|v| (v - s[0]).abs() / s0).fold(0.0, f64::max)
    }

    /// Sup distance between this curve's nodes and `other`'s interpolant.
    pub fn sup_distance(&self, other: &CurveSolution) -> f64 {
        self.t
            .iter()
            .zip(&self.x)
            .filter(|(t, _)| **t >= other.t0() - 1e-12 && **t <= other.t_end() + 1e-12)
            .map(|(t, x)| (x - other.point(*t)).amax())
            .fold(0.0, f64::max)
    }

    /// CSV with header `t, x0.., v0.., b`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let n = self.x[0].len();
        let mut header = vec!["t".to_string()];
        header.extend((0..n).map(|i| format!("x{i}")));
        header.extend((0..n).map(|i| format!("v{i}")));
        header.push("b".into());
        wr.write_record(&header)?;
        for k in 0..self.t.len() {
            let mut row = vec![format!("{:.17e}", self.t[k])];
            row.extend(self.x[k].iter().map(|c| format!("{c:.17e}")));
            row.extend(self.v[k].iter().map(|c| format!("{c:.17e}")));
            row.push(self.b.as_ref().map(|b| format!("{:.17e}", b[k])).unwrap_or_default());
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// |v| in the Webster metric (the frame is g_θ-orthonormal).
pub fn webster_norm(model: &dyn ModelManifold, x: &Vector, v: &Vector) -> f64 {
    PointGeometry::at(model, x).coeffs(v).norm()
}

/// Acceleration of a curve with velocity `v` satisfying
/// ∇_v v = −2b Jv (or 0 when `b` is `None`), and b′ = A(v,v).
pub fn geodesic_rhs(model: &dyn ModelManifold, x: &Vector, v: &Vector, b: Option<f64>) -> (Vector, f64) {
    let g = PointGeometry::at(model, x);
    let w = g.coeffs(v);
    let m = g.m;
    let mut f = match b {
        Some(b) => (&g.jm * &w) * (-2.0 * b),
        None => Vector::zeros(m),
    };
    for a in 0..m {
        for bb in 0..m {
            let ww = w[a] * w[bb];
            if ww == 0.0 {
                continue;
            }
            for c in 0..m {
                f[c] -= g.gamma.get(a, bb, c) * ww;
            }
        }
    }
    let acc = g.ambient(&f) + g.frame_field_derivative(&w, &w);
    let n2 = m - 1;
    let wh = w.rows(0, n2);
    let bdot = wh.dot(&(&g.a_mat * wh));
    (acc, bdot)
}

/// Covariant acceleration ∇_γ̇γ̇ (or D_γ̇γ̇ with `levi_civita`) in frame
/// coefficients, from position, velocity and ambient acceleration.
pub fn covariant_acceleration(model: &dyn ModelManifold, x: &Vector, v: &Vector, acc: &Vector, levi_civita: bool) -> Vector {
    let g = PointGeometry::at(model, x);
    let w = g.coeffs(v);
    let wdot = g.coefficient_rate(&w, &w, acc);
    g.covariant(&w, &w, &wdot, levi_civita)
}

fn check_point(model: &dyn ModelManifold, x: &Vector) -> Result<()> {
    if x.len() != model.ambient_dim() {
        return Err(GeomError::DimensionMismatch { expected: model.ambient_dim(), got: x.len() });
    }
    let r = model.point_residual(x);
    if r > 1e-10 {
        return Err(GeomError::Contract(format!("point off the model by {r:e}")));
    }
    Ok(())
}

fn check_vector(model: &dyn ModelManifold, x: &Vector, v: &Vector) -> Result<()> {
    if v.len() != model.ambient_dim() {
        return Err(GeomError::DimensionMismatch { expected: model.ambient_dim(), got: v.len() });
    }
    let r = model.tangent_residual(x, v);
    if r > 1e-8 {
        return Err(GeomError::Contract(format!("vector not tangent (normal part {r:e})")));
    }
    Ok(())
}

fn grid(t_max: f64, h: f64) -> Result<(usize, f64)> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(GeomError::Contract(format!("step must be positive, got {h}")));
    }
    if !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(GeomError::Contract(format!("t_max must be non-negative, got {t_max}")));
    }
    let n = (t_max / h - 1e-9).ceil().max(0.0) as usize;
    if n == 0 {
        return Ok((0, h));
    }
    Ok((n, t_max / n as f64))
}

/// State of the connection-form integrators.
#[derive(Clone)]
struct State {
    x: Vector,
    v: Vector,
    b: f64,
}

fn rk4_connection(model: &dyn ModelManifold, s0: State, t_max: f64, h: f64, sr: bool) -> Result<CurveSolution0> {
    let (steps, h) = grid(t_max, h)?;
    let rhs = |s: &State| -> (Vector, Vector, f64) {
        let (acc, bd) = geodesic_rhs(model, &s.x, &s.v, sr.then_some(s.b));
        (s.v.clone(), acc, if sr { bd } else { 0.0 })
    };
    let mut out = CurveSolution0::default();
    let mut s = s0;
    let mut k1 = rhs(&s);
    for i in 0..=steps {
        let t = i as f64 * h;
        out.push(t, &s, &k1.1, k1.2);
        if i == steps {
            break;
        }
        let adv = |s: &State, k: &(Vector, Vector, f64), c: f64| State {
            x: &s.x + &k.0 * c,
            v: &s.v + &k.1 * c,
            b: s.b + k.2 * c,
        };
        let k2 = rhs(&adv(&s, &k1, 0.5 * h));
        let k3 = rhs(&adv(&s, &k2, 0.5 * h));
        let k4 = rhs(&adv(&s, &k3, h));
        let x = &s.x + (&k1.0 + &k2.0 * 2.0 + &k3.0 * 2.0 + &k4.0) * (h / 6.0);
        let v = &s.v + (&k1.1 + &k2.1 * 2.0 + &k3.1 * 2.0 + &k4.1) * (h / 6.0);
        let b = s.b + (k1.2 + 2.0 * k2.2 + 2.0 * k3.2 + k4.2) * (h / 6.0);
        let x = model.normalize_point(&x);
        let v = model.project_tangent(&x, &v);
        if x.iter().chain(v.iter()).any(|c| !c.is_finite()) || !b.is_finite() {
            return Err(GeomError::Integration { t, reason: "non-finite state".into() });
        }
        s = State { x, v, b };
        k1 = rhs(&s);
    }
    out.h = h;
    Ok(out)
}

#[derive(Default)]
struct CurveSolution0 {
    t: Vec<f64>,
    x: Vec<Vector>,
    v: Vec<Vector>,
    acc: Vec<Vector>,
    b: Vec<f64>,
    bdot: Vec<f64>,
    h: f64,
}

impl CurveSolution0 {
    fn push(&mut self, t: f64, s: &State, acc: &Vector, bdot: f64) {
        self.t.push(t);
        self.x.push(s.x.clone());
        self.v.push(s.v.clone());
        self.acc.push(acc.clone());
        self.b.push(s.b);
        self.bdot.push(bdot);
    }
}

/// Integrates ∇_γ̇γ̇ = 0 from `(x0, v0)` over `[0, t_max]`.
pub fn integrate_tw_geodesic(model: &Model, x0: &Vector, v0: &Vector, t_max: f64, h: f64) -> Result<CurveSolution> {
    let m = model.as_ref();
    check_point(m, x0)?;
    check_vector(m, x0, v0)?;
    let r = rk4_connection(m, State { x: x0.clone(), v: v0.clone(), b: 0.0 }, t_max, h, false)?;
    Ok(CurveSolution {
        model: model.clone(),
        kind: CurveKind::TanakaWebster,
        t: r.t,
        x: r.x,
        v: r.v,
        acc: r.acc,
        b: None,
        bdot: None,
        xi: None,
        h: r.h,
    })
}

/// Integrates the sub-Riemannian geodesic system ∇_γ̇γ̇ = −2b Jγ̇,
/// b′ = A(γ̇,γ̇) from `(x0, v0, b0)`.
pub fn integrate_sr_geodesic(model: &Model, x0: &Vector, v0: &Vector, b0: f64, t_max: f64, h: f64) -> Result<CurveSolution> {
    let m = model.as_ref();
    check_point(m, x0)?;
    check_vector(m, x0, v0)?;
    let speed = webster_norm(m, x0, v0);
    if speed < 1e-14 {
        return Err(GeomError::Domain("initial velocity must be nonzero".into()));
    }
    if theta_at(m, x0, v0).abs() > 1e-10 * speed.max(1.0) {
        return Err(GeomError::Domain("initial velocity must be horizontal".into()));
    }
    let r = rk4_connection(m, State { x: x0.clone(), v: v0.clone(), b: b0 }, t_max, h, true)?;
    Ok(CurveSolution {
        model: model.clone(),
        kind: CurveKind::SubRiemannian,
        t: r.t,
        x: r.x,
        v: r.v,
        acc: r.acc,
        b: Some(r.b),
        bdot: Some(r.bdot),
        xi: None,
        h: r.h,
    })
}

/// H(x,ξ) = ½ g^{ij}ξ_iξ_j with the sub-Riemannian cometric.
pub fn hamiltonian(model: &dyn ModelManifold, x: &Vector, xi: &Vector) -> f64 {
    let f = model.frame(x, model.anchor(x));
    let n2 = f.len() - 1;
    0.5 * f[..n2].iter().map(|e| xi.dot(e).powi(2)).sum::<f64>()
}

/// ẋ = g(ξ) and ξ̇ = −∂H/∂x.
fn hamiltonian_rhs(model: &dyn ModelManifold, x: &Vector, xi: &Vector) -> (Vector, Vector) {
    let anchor = model.anchor(x);
    let f = model.frame(x, anchor);
    let n2 = f.len() - 1;
    let dim = x.len();
    let mut xdot = Vector::zeros(dim);
    let p: Vec<f64> = f[..n2].iter().map(|e| xi.dot(e)).collect();
    for a in 0..n2 {
        xdot += &f[a] * p[a];
    }
    let mut xidot = Vector::zeros(dim);
    for i in 0..dim {
        let mut ei = Vector::zeros(dim);
        ei[i] = 1.0;
        let d = frame_derivative(model, x, anchor, &ei);
        xidot[i] = -(0..n2).map(|a| p[a] * xi.dot(&d[a])).sum::<f64>();
    }
    (xdot, xidot)
}

/// d/dt of ẋ = Σ (ξ·e_a) e_a along the flow.
fn hamiltonian_acc(model: &dyn ModelManifold, x: &Vector, xi: &Vector, xdot: &Vector, xidot: &Vector) -> Vector {
    let anchor = model.anchor(x);
    let f = model.frame(x, anchor);
    let d = frame_derivative(model, x, anchor, xdot);
    let n2 = f.len() - 1;
    let mut acc = Vector::zeros(x.len());
    for a in 0..n2 {
        let p = xi.dot(&f[a]);
        let pdot = xidot.dot(&f[a]) + xi.dot(&d[a]);
        acc += &f[a] * pdot + &d[a] * p;
    }
    acc
}

/// Integrates Hamilton's equations for H = ½g^{ij}ξ_iξ_j (chart models).
pub fn integrate_hamiltonian(model: &Model, x0: &Vector, xi0: &Vector, t_max: f64, h: f64) -> Result<CurveSolution> {
    let m = model.as_ref();
    check_point(m, x0)?;
    if m.ambient_dim() != m.dim() {
        return Err(GeomError::UnsupportedModel(format!("Hamiltonian integration needs a chart model, got {}", m.id())));
    }
    if xi0.len() != m.ambient_dim() {
        return Err(GeomError::DimensionMismatch { expected: m.ambient_dim(), got: xi0.len() });
    }
    let (steps, h) = grid(t_max, h)?;
    let mut t = Vec::with_capacity(steps + 1);
    let mut xs = Vec::with_capacity(steps + 1);
    let mut vs = Vec::with_capacity(steps + 1);
    let mut accs = Vec::with_capacity(steps + 1);
    let mut xis = Vec::with_capacity(steps + 1);
    let mut bs = Vec::with_capacity(steps + 1);
    let mut bds = Vec::with_capacity(steps + 1);
    let (mut x, mut xi) = (x0.clone(), xi0.clone());
    let mut k1 = hamiltonian_rhs(m, &x, &xi);
    for i in 0..=steps {
        let ti = i as f64 * h;
        let acc = hamiltonian_acc(m, &x, &xi, &k1.0, &k1.1);
        let reeb = &m.frame(&x, m.anchor(&x))[m.dim() - 1];
        let dreeb = frame_derivative(m, &x, m.anchor(&x), &k1.0);
        t.push(ti);
        bs.push(xi.dot(reeb));
        bds.push(k1.1.dot(reeb) + xi.dot(&dreeb[m.dim() - 1]));
        xs.push(x.clone());
        vs.push(k1.0.clone());
        accs.push(acc);
        xis.push(xi.clone());
        if i == steps {
            break;
        }
        let k2 = hamiltonian_rhs(m, &(&x + &k1.0 * (0.5 * h)), &(&xi + &k1.1 * (0.5 * h)));
        let k3 = hamiltonian_rhs(m, &(&x + &k2.0 * (0.5 * h)), &(&xi + &k2.1 * (0.5 * h)));
        let k4 = hamiltonian_rhs(m, &(&x + &k3.0 * h), &(&xi + &k3.1 * h));
        x += (&k1.0 + &k2.0 * 2.0 + &k3.0 * 2.0 + &k4.0) * (h / 6.0);
        xi += (&k1.1 + &k2.1 * 2.0 + &k3.1 * 2.0 + &k4.1) * (h / 6.0);
        if x.iter().chain(xi.iter()).any(|c| !c.is_finite()) {
            return Err(GeomError::Integration { t: ti, reason: "non-finite state".into() });
        }
        k1 = hamiltonian_rhs(m, &x, &xi);
    }
    Ok(CurveSolution {
        model: model.clone(),
        kind: CurveKind::Hamiltonian,
        t,
        x: xs,
        v: vs,
        acc: accs,
        b: Some(bs),
        bdot: Some(bds),
        xi: Some(xis),
        h,
    })
}

/// Covector ξ with ξ(X) = g_θ(v, X) on H(M) and ξ(T) = `reeb_value`.
pub fn lift_covector(model: &dyn ModelManifold, x: &Vector, v: &Vector, reeb_value: f64) -> Vector {
    let g = PointGeometry::at(model, x);
    let w = g.coeffs(v);
    let t = g.t();
    let mut xi = Vector::zeros(x.len());
    for a in 0..t {
        xi += g.coframe.row(a).transpose() * w[a];
    }
    xi += g.coframe.row(t).transpose() * reeb_value;
    xi
}

/// Initial covector for [`integrate_hamiltonian`] matching the
/// connection-form data `(v0, b0)`: the canonical lift shifted by
/// `a(0)θ` with `b = a + 1`.
pub fn hamiltonian_initial_covector(model: &dyn ModelManifold, x0: &Vector, v0: &Vector, b0: f64) -> Vector {
    lift_covector(model, x0, v0, b0)
}

/// Covector trajectory along a curve.
#[derive(Debug, Clone, Serialize)]
pub struct CotangentLift {
    pub t: Vec<f64>,
    pub xi: Vec<Vec<f64>>,
    /// a(t) at interior nodes (endpoints excluded); absent for curves that
    /// stop somewhere.
    pub a: Option<Vec<f64>>,
    /// max over nodes of |g(ξ) − γ̇|.
    pub reconstruction_residual: f64,
}

/// ξ(X) evaluated by the sub-Riemannian cometric: g(ξ) = Σ ξ(e_a) e_a.
pub fn sharp(model: &dyn ModelManifold, x: &Vector, xi: &Vector) -> Vector {
    let f = model.frame(x, model.anchor(x));
    let n2 = f.len() - 1;
    let mut out = Vector::zeros(x.len());
    for e in &f[..n2] {
        out += e * xi.dot(e);
    }
    out
}

/// The canonical lift ξ_j = G_{ij}ẋ^i + θ_j of a lengthy curve.
pub fn canonical_lift(sol: &CurveSolution) -> Result<CotangentLift> {
    let m = sol.model.as_ref();
    let mut xi = Vec::with_capacity(sol.len());
    let mut res: f64 = 0.0;
    for (x, v) in sol.x.iter().zip(&sol.v) {
        let speed = webster_norm(m, x, v).max(1.0);
        if theta_at(m, x, v).abs() > 1e-7 * speed {
            return Err(GeomError::Domain("canonical lift needs a lengthy curve".into()));
        }
        let c = lift_covector(m, x, v, 1.0);
        res = res.max((sharp(m, x, &c) - v).amax());
        xi.push(c.iter().copied().collect());
    }
    let moving = sol.speeds().iter().all(|s| *s > 1e-14);
    let a = if moving && sol.len() > 2 && sol.kind != CurveKind::Hamiltonian {
        Some(sol.t[1..sol.len() - 1].iter().map(|t| strichartz_a(sol, *t)).collect::<Result<Vec<_>>>()?)
    } else {
        None
    };
    Ok(CotangentLift { t: sol.t.clone(), xi, a, reconstruction_residual: res })
}

/// a(t) = −½|γ̇|⁻² g_θ(D_γ̇γ̇, Jγ̇) − 1 at an interior parameter.
pub fn strichartz_a(sol: &CurveSolution, t: f64) -> Result<f64> {
    let eps = 1e-12 * sol.t_end().abs().max(1.0);
    if t <= sol.t0() + eps || t >= sol.t_end() - eps {
        return Err(GeomError::Domain(format!("a(t) needs an interior parameter, got {t}")));
    }
    let m = sol.model.as_ref();
    let (x, v) = sol.eval(t);
    let acc = sol.acceleration(t);
    let d = covariant_acceleration(m, &x, &v, &acc, true);
    let g = PointGeometry::at(m, &x);
    let w = g.coeffs(&v);
    let s2 = w.norm_squared();
    if s2 < 1e-28 {
        return Err(GeomError::Domain("a(t) undefined for zero velocity".into()));
    }
    let jw = &g.jm * &w;
    Ok(-0.5 * d.dot(&jw) / s2 - 1.0)
}

/// ∫_a^b |γ̇| dt by composite Simpson on the dense output.
pub fn length(sol: &CurveSolution, a: f64, b: f64) -> Result<f64> {
    if b < a {
        return Err(GeomError::Domain(format!("reversed interval [{a}, {b}]")));
    }
    let tol = 1e-9 * sol.t_end().abs().max(1.0);
    if a < sol.t0() - tol || b > sol.t_end() + tol {
        return Err(GeomError::Domain(format!("[{a}, {b}] outside [{}, {}]", sol.t0(), sol.t_end())));
    }
    if b == a {
        return Ok(0.0);
    }
    let m = sol.model.as_ref();
    let intervals = (2.0 * (b - a) / sol.h).ceil().max(2.0) as usize;
    Ok(simpson_fn(a, b, intervals, |t| {
        let (x, v) = sol.eval(t);
        webster_norm(m, &x, &v)
    }))
}

/// Max over grid nodes of |b′ − A(γ̇,γ̇)| recomputed along the curve.
pub fn b_equation_residual(sol: &CurveSolution) -> Option<f64> {
    let b = sol.b.as_ref()?;
    let m = sol.model.as_ref();
    let mut worst: f64 = 0.0;
    for k in 1..sol.len().saturating_sub(1) {
        let db = (b[k + 1] - b[k - 1]) / (sol.t[k + 1] - sol.t[k - 1]);
        let g = PointGeometry::at(m, &sol.x[k]);
        let w = g.coeffs(&sol.v[k]);
        let n2 = g.m - 1;
        let wh = w.rows(0, n2);
        worst = worst.max((db - wh.dot(&(&g.a_mat * wh))).abs());
    }
    Some(worst)
}

/// Max over interior nodes of |∇_γ̇γ̇ + 2b Jγ̇| (b from the curve).
pub fn sr_equation_residual(sol: &CurveSolution) -> Result<f64> {
    let b = sol.b.as_ref().ok_or_else(|| GeomError::Domain("curve carries no b(t)".into()))?;
    let m = sol.model.as_ref();
    let mut worst: f64 = 0.0;
    for k in 0..sol.len() {
        let g = PointGeometry::at(m, &sol.x[k]);
        let acc = &sol.acc[k];
        let nabla = covariant_acceleration(m, &sol.x[k], &sol.v[k], acc, false);
        let jw = &g.jm * g.coeffs(&sol.v[k]);
        worst = worst.max((nabla + jw * (2.0 * b[k])).amax());
    }
    Ok(worst)
}

/// Max over nodes of |A(γ̇,γ̇)|.
pub fn max_torsion_along(sol: &CurveSolution) -> f64 {
    let m = sol.model.as_ref();
    let mut worst: f64 = 0.0;
    for (x, v) in sol.x.iter().zip(&sol.v) {
        let g = PointGeometry::at(m, x);
        let w = g.coeffs(v);
        let n2 = g.m - 1;
        let wh = w.rows(0, n2);
        worst = worst.max(wh.dot(&(&g.a_mat * wh)).abs());
    }
    worst
}

/// Unit horizontal vector at `x` built from frame coefficients.
pub fn horizontal_vector(model: &dyn ModelManifold, x: &Vector, coeffs: &[f64]) -> Vector {
    let f = model.frame(x, model.anchor(x));
    let mut v = Vector::zeros(x.len());
    for (c, e) in coeffs.iter().zip(&f[..f.len() - 1]) {
        v += e * *c;
    }
    v
}
