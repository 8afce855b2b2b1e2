//! One-parameter families of curves and the first and second variation
//! of length, analytic and by finite differences.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::connection::PointGeometry;
use crate::error::{GeomError, Result};
use crate::field::FieldAlong;
use crate::geodesics::{covariant_acceleration, geodesic_rhs, webster_norm, CurveSolution};
use crate::jacobi::{negative_index_field, JacobiSystem};
use crate::linalg::{richardson, simpson, Vector};
use crate::manifold::{ModelManifold, Model};
use crate::par::{self, Exec};

/// Consecutive curve segments sharing endpoints.
#[derive(Debug, Clone)]
pub struct BrokenCurve {
    pub segments: Vec<CurveSolution>,
}

impl BrokenCurve {
    pub fn new(segments: Vec<CurveSolution>) -> Result<Self> {
        if segments.is_empty() {
            return Err(GeomError::Contract("a curve needs at least one segment".into()));
        }
        for w in segments.windows(2) {
            let gap_t = (w[0].t_end() - w[1].t0()).abs();
            let gap_x = (w[0].x.last().unwrap() - &w[1].x[0]).amax();
            if gap_t > 1e-12 || gap_x > 1e-9 {
                return Err(GeomError::Contract(format!("segments do not join (Δt = {gap_t:e}, Δx = {gap_x:e})")));
            }
        }
        Ok(BrokenCurve { segments })
    }

    pub fn smooth(sol: CurveSolution) -> Self {
        BrokenCurve { segments: vec![sol] }
    }

    pub fn model(&self) -> &Model {
        &self.segments[0].model
    }

    pub fn t0(&self) -> f64 {
        self.segments[0].t0()
    }

    pub fn t_end(&self) -> f64 {
        self.segments.last().unwrap().t_end()
    }

    pub fn corners(&self) -> Vec<f64> {
        self.segments[1..].iter().map(|s| s.t0()).collect()
    }

    /// Webster speed at the start, which must be nonzero.
    pub fn speed(&self) -> Result<f64> {
        let s = &self.segments[0];
        let r = webster_norm(s.model.as_ref(), &s.x[0], &s.v[0]);
        if r < 1e-12 {
            return Err(GeomError::Domain("zero-speed curve".into()));
        }
        Ok(r)
    }
}

type AmbientFn = Arc<dyn Fn(usize, f64) -> Vector + Send + Sync>;

/// A continuous, piecewise-smooth variation field in ambient components,
/// evaluated per segment so corners may use either side.
#[derive(Clone)]
pub struct VariationField {
    pub breaks: Vec<f64>,
    f: AmbientFn,
}

impl fmt::Debug for VariationField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VariationField").field("breaks", &self.breaks).finish()
    }
}

impl VariationField {
    /// `f(segment, t)` gives the ambient vector.
    pub fn from_fn<F>(breaks: Vec<f64>, f: F) -> Self
    where
        F: Fn(usize, f64) -> Vector + Send + Sync + 'static,
    {
        VariationField { breaks, f: Arc::new(f) }
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_fn(Vec::new(), move |_, _| Vector::zeros(dim))
    }

    /// `Σ c_i(t) e_i(γ(t))` in the model frame anchored at the start point.
    pub fn model_frame<F>(curve: &BrokenCurve, coeffs: F) -> Self
    where
        F: Fn(f64) -> Vector + Send + Sync + 'static,
    {
        let model = curve.model().clone();
        let anchor = model.anchor(&curve.segments[0].x[0]);
        let segs = curve.segments.clone();
        Self::from_fn(Vec::new(), move |k, t| {
            let x = segs[k].point(t);
            let frame = model.frame(&x, anchor);
            let c = coeffs(t);
            let mut out = Vector::zeros(x.len());
            for (ci, e) in c.iter().zip(&frame) {
                out += e * *ci;
            }
            out
        })
    }

    /// Field with parallel-frame components `x`, zero outside its domain.
    pub fn from_parallel(sys: &Arc<JacobiSystem>, x: FieldAlong) -> Self {
        let sys = sys.clone();
        let dim = sys.sol.x[0].len();
        let breaks = x.breaks.clone();
        Self::from_fn(breaks, move |_, t| {
            if t < x.a - 1e-12 || t > x.b + 1e-12 {
                return Vector::zeros(dim);
            }
            let comps = x.value(t.clamp(x.a, x.b));
            let frame = sys.frame.frame_at(t);
            let mut out = Vector::zeros(dim);
            for (c, e) in comps.iter().zip(&frame) {
                out += e * *c;
            }
            out
        })
    }

    pub fn at(&self, segment: usize, t: f64) -> Vector {
        (self.f)(segment, t)
    }
}

/// `exp(v)` at `x` for the Tanaka-Webster connection, by RK4 on [0, 1].
pub fn tw_exponential(model: &dyn ModelManifold, x: &Vector, v: &Vector) -> Vector {
    let steps = (v.amax() / 1e-2).ceil().max(1.0) as usize;
    let h = 1.0 / steps as f64;
    let mut x = x.clone();
    let mut u = v.clone();
    for _ in 0..steps {
        let f = |x: &Vector, u: &Vector| geodesic_rhs(model, x, u, None).0;
        let a1 = f(&x, &u);
        let (x2, u2) = (&x + &u * (0.5 * h), &u + &a1 * (0.5 * h));
        let a2 = f(&x2, &u2);
        let (x3, u3) = (&x + &u2 * (0.5 * h), &u + &a2 * (0.5 * h));
        let a3 = f(&x3, &u3);
        let (x4, u4) = (&x + &u3 * h, &u + &a3 * h);
        let a4 = f(&x4, &u4);
        let xn = &x + (&u + &u2 * 2.0 + &u3 * 2.0 + &u4) * (h / 6.0);
        let un = &u + (&a1 + &a2 * 2.0 + &a3 * 2.0 + &a4) * (h / 6.0);
        x = model.normalize_point(&xn);
        u = model.project_tangent(&x, &un);
    }
    x
}

/// Stencil spacing for ∂_t of family members.
pub const STENCIL_DELTA: f64 = 1e-3;

/// γ^s(t) = exp_{γ(t)}(s X(t)).
#[derive(Debug, Clone)]
pub struct CurveFamily {
    pub curve: BrokenCurve,
    pub field: VariationField,
    /// Target Simpson spacing for the length functional.
    pub quad_dx: f64,
    pub exec: Exec,
}

impl CurveFamily {
    pub fn new(curve: BrokenCurve, field: VariationField) -> Self {
        let h = curve.segments[0].h;
        CurveFamily { curve, field, quad_dx: h.max(2.5e-3), exec: Exec::default() }
    }

    pub fn point(&self, segment: usize, t: f64, s: f64) -> Vector {
        let sol = &self.curve.segments[segment];
        let x = sol.point(t);
        if s == 0.0 {
            return x;
        }
        let v = self.field.at(segment, t) * s;
        if v.amax() == 0.0 {
            return x;
        }
        tw_exponential(sol.model.as_ref(), &x, &v)
    }

    /// ∂_t γ^s by a five-point stencil kept inside `[lo, hi]`.
    fn velocity(&self, segment: usize, t: f64, s: f64, lo: f64, hi: f64) -> Vector {
        let d = STENCIL_DELTA.min(0.25 * (hi - lo));
        let p = |k: f64| self.point(segment, t + k * d, s);
        if t - 2.0 * d >= lo - 1e-14 && t + 2.0 * d <= hi + 1e-14 {
            (p(-2.0) - p(-1.0) * 8.0 + p(1.0) * 8.0 - p(2.0)) / (12.0 * d)
        } else if t - 2.0 * d < lo {
            (p(0.0) * -25.0 + p(1.0) * 48.0 - p(2.0) * 36.0 + p(3.0) * 16.0 - p(4.0) * 3.0) / (12.0 * d)
        } else {
            (p(0.0) * 25.0 - p(-1.0) * 48.0 + p(-2.0) * 36.0 - p(-3.0) * 16.0 + p(-4.0) * 3.0) / (12.0 * d)
        }
    }

    fn pieces(&self) -> Vec<(usize, f64, f64)> {
        let mut out = Vec::new();
        for (k, seg) in self.curve.segments.iter().enumerate() {
            let (a, b) = (seg.t0(), seg.t_end());
            let mut cuts = vec![a, b];
            cuts.extend(self.field.breaks.iter().copied().filter(|c| *c > a + 1e-9 && *c < b - 1e-9));
            cuts.sort_by(f64::total_cmp);
            out.extend(cuts.windows(2).map(|w| (k, w[0], w[1])));
        }
        out
    }

    /// L(γ^s) with the full Webster norm.
    pub fn length(&self, s: f64) -> f64 {
        let model = self.curve.model().as_ref();
        let mut total = 0.0;
        for (k, lo, hi) in self.pieces() {
            let n = ((hi - lo) / self.quad_dx).ceil().max(2.0) as usize;
            let n = n + n % 2;
            let dx = (hi - lo) / n as f64;
            let vals = par::map(self.exec, n + 1, |i| {
                let t = if i == n { hi } else { lo + dx * i as f64 };
                let x = self.point(k, t, s);
                let v = self.velocity(k, t, s, lo, hi);
                webster_norm(model, &x, &v)
            });
            total += simpson(&vals, dx);
        }
        total
    }

    /// max |γ^0 − γ| over the segment nodes.
    pub fn base_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, seg) in self.curve.segments.iter().enumerate() {
            for (t, x) in seg.t.iter().zip(&seg.x).step_by(10) {
                worst = worst.max((self.point(k, *t, 0.0) - x).amax());
            }
        }
        worst
    }

    /// max |∂_s γ^s(t)|_{s=0} − X(t)| at sampled parameters.
    pub fn tangent_residual(&self) -> f64 {
        let ds = 1e-4;
        let mut worst: f64 = 0.0;
        for (k, seg) in self.curve.segments.iter().enumerate() {
            for i in 0..=20 {
                let t = seg.t0() + (seg.t_end() - seg.t0()) * i as f64 / 20.0;
                let d = (self.point(k, t, ds) - self.point(k, t, -ds)) / (2.0 * ds);
                worst = worst.max((d - self.field.at(k, t)).amax());
            }
        }
        worst
    }

    /// Movement of the endpoints over s ∈ [−0.1, 0.1].
    pub fn endpoint_drift(&self) -> f64 {
        let last = self.curve.segments.len() - 1;
        let (a, b) = (self.curve.t0(), self.curve.t_end());
        [-0.1, -0.01, 0.01, 0.1]
            .iter()
            .map(|s| (self.point(0, a, *s) - self.point(0, a, 0.0)).amax().max((self.point(last, b, *s) - self.point(last, b, 0.0)).amax()))
            .fold(0.0, f64::max)
    }
}

/// Step of the first-variation difference quotient.
pub const FIRST_VARIATION_STEP: f64 = 1e-4;
/// Step of the second-variation difference quotient.
pub const SECOND_VARIATION_STEP: f64 = 1e-3;

/// dL(γ^s)/ds at 0: central differences at s₀ and s₀/2, one Richardson level.
pub fn first_variation_fd(family: &CurveFamily) -> f64 {
    let s0 = FIRST_VARIATION_STEP;
    let d = |s: f64| (family.length(s) - family.length(-s)) / (2.0 * s);
    richardson(d(s0), d(0.5 * s0))
}

/// d²L(γ^s)/ds² at 0: second differences at s₀ and s₀/2, one Richardson level.
pub fn second_variation_fd(family: &CurveFamily) -> f64 {
    let s0 = SECOND_VARIATION_STEP;
    let l0 = family.length(0.0);
    let d = |s: f64| (family.length(s) - 2.0 * l0 + family.length(-s)) / (s * s);
    richardson(d(s0), d(0.5 * s0))
}

/// Terms of the first variation formula.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FirstVariation {
    /// (1/r)[g(X,γ̇)] at the two ends.
    pub boundary: f64,
    /// (1/r)Σ g(X(c), γ̇(c⁻) − γ̇(c⁺)).
    pub corners: f64,
    /// −(1/r)∫ g(X, ∇_γ̇γ̇).
    pub acceleration: f64,
    /// (1/r)∫ g(T_∇(X,γ̇), γ̇).
    pub torsion: f64,
    pub total: f64,
}

fn torsion_coeffs(g: &PointGeometry, x: &Vector, y: &Vector) -> Vector {
    let m = g.m;
    let mut out = Vector::zeros(m);
    for a in 0..m {
        for b in 0..m {
            let xy = x[a] * y[b];
            if xy == 0.0 {
                continue;
            }
            for c in 0..m {
                out[c] += (g.gamma.get(a, b, c) - g.gamma.get(b, a, c) - g.bracket.get(a, b, c)) * xy;
            }
        }
    }
    out
}

fn segment_quad<F>(family_pieces: &[(usize, f64, f64)], seg: usize, dx: f64, exec: Exec, f: F) -> f64
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    let mut total = 0.0;
    for (_, lo, hi) in family_pieces.iter().filter(|p| p.0 == seg) {
        let n = ((hi - lo) / dx).ceil().max(2.0) as usize;
        let n = n + n % 2;
        let step = (hi - lo) / n as f64;
        let vals = par::map(exec, n + 1, |i| f(if i == n { *hi } else { lo + step * i as f64 }));
        total += simpson(&vals, step);
    }
    total
}

/// (1/r){[g(X,γ̇)] + Σ g(X, γ̇(c⁻) − γ̇(c⁺)) − ∫ g(X,∇_γ̇γ̇) + ∫ g(T_∇(X,γ̇),γ̇)}.
pub fn first_variation_formula(family: &CurveFamily) -> Result<FirstVariation> {
    let curve = &family.curve;
    let r = curve.speed()?;
    let model = curve.model().as_ref();
    let g_xv = |k: usize, t: f64, v: &Vector| {
        let x = curve.segments[k].point(t);
        let g = PointGeometry::at(model, &x);
        g.coeffs(&family.field.at(k, t)).dot(&g.coeffs(v))
    };
    let last = curve.segments.len() - 1;
    let (a, b) = (curve.t0(), curve.t_end());
    let boundary = g_xv(last, b, &curve.segments[last].velocity(b)) - g_xv(0, a, &curve.segments[0].velocity(a));
    let mut corners = 0.0;
    for k in 1..curve.segments.len() {
        let c = curve.segments[k].t0();
        let vm = curve.segments[k - 1].velocity(c);
        let vp = curve.segments[k].velocity(c);
        corners += g_xv(k, c, &(vm - vp));
    }
    let pieces = family.pieces();
    let mut acceleration = 0.0;
    let mut torsion = 0.0;
    for (k, seg) in curve.segments.iter().enumerate() {
        acceleration -= segment_quad(&pieces, k, family.quad_dx, family.exec, |t| {
            let (x, v) = seg.eval(t);
            let nabla = covariant_acceleration(model, &x, &v, &seg.acceleration(t), false);
            PointGeometry::at(model, &x).coeffs(&family.field.at(k, t)).dot(&nabla)
        });
        torsion += segment_quad(&pieces, k, family.quad_dx, family.exec, |t| {
            let (x, v) = seg.eval(t);
            let g = PointGeometry::at(model, &x);
            let w = g.coeffs(&v);
            torsion_coeffs(&g, &g.coeffs(&family.field.at(k, t)), &w).dot(&w)
        });
    }
    let (boundary, corners, acceleration, torsion) = (boundary / r, corners / r, acceleration / r, torsion / r);
    Ok(FirstVariation { boundary, corners, acceleration, torsion, total: boundary + corners + acceleration + torsion })
}

/// (1/r)∫ θ(X) A(γ̇,γ̇) dt.
pub fn torsion_integral(family: &CurveFamily) -> Result<f64> {
    let curve = &family.curve;
    let r = curve.speed()?;
    let model = curve.model().as_ref();
    let pieces = family.pieces();
    let mut total = 0.0;
    for (k, seg) in curve.segments.iter().enumerate() {
        total += segment_quad(&pieces, k, family.quad_dx, family.exec, |t| {
            let (x, v) = seg.eval(t);
            let theta = model.theta(&x).dot(&family.field.at(k, t));
            let g = PointGeometry::at(model, &x);
            let w = g.coeffs(&v);
            let n2 = g.m - 1;
            let wh = w.rows(0, n2);
            theta * wh.dot(&(&g.a_mat * wh))
        });
    }
    Ok(total / r)
}

/// Outcome of the length-decreasing construction past a horizontally
/// conjugate point.
#[derive(Debug, Clone, Serialize)]
pub struct NonminimalityReport {
    pub index: f64,
    pub first_variation: f64,
    pub second_variation: f64,
    pub second_variation_rel_error: f64,
    pub s_star: Option<f64>,
    pub length: f64,
    pub varied_length: Option<f64>,
    pub bvp_residual: f64,
    pub window_reeb_sup: f64,
    pub window_horizontal_dim: usize,
    pub conjugate_t: f64,
    pub pass: bool,
}

/// Builds the negative-index field on [a, b] and exhibits a shorter
/// nearby curve in the family it generates.
pub fn nonminimality_demo(sys: &Arc<JacobiSystem>, a: f64, c: f64, b: f64, delta: f64) -> Result<NonminimalityReport> {
    let nif = negative_index_field(sys, a, c, b, delta)?;
    let field = VariationField::from_parallel(sys, nif.field.clone());
    let family = CurveFamily::new(BrokenCurve::smooth(sys.sol.clone()), field);
    let r = sys.speed();
    let length = family.length(0.0);
    let mut s_star = None;
    let mut varied_length = None;
    for s in [1e-2, 2e-2, 5e-2, 0.1, 0.2] {
        let l = family.length(s);
        if l < length - 1e-8 {
            s_star = Some(s);
            varied_length = Some(l);
            break;
        }
    }
    let first_variation = first_variation_fd(&family);
    let second_variation = second_variation_fd(&family);
    let expected = nif.i_ab / r;
    let second_variation_rel_error = (second_variation - expected).abs() / expected.abs().max(1e-12);
    let pass = nif.i_ab < -1e-6 && s_star.is_some() && first_variation.abs() < 1e-6 && second_variation_rel_error < 1e-2;
    Ok(NonminimalityReport {
        index: nif.i_ab,
        first_variation,
        second_variation,
        second_variation_rel_error,
        s_star,
        length,
        varied_length,
        bvp_residual: nif.bvp_residual,
        window_reeb_sup: nif.window_reeb_sup,
        window_horizontal_dim: nif.window_horizontal_dim,
        conjugate_t: nif.conjugate_t,
        pass,
    })
}
