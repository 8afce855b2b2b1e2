//! Charts, tangent vectors and the pseudohermitian primitives θ, dθ, J,
//! the Levi form G_θ and the Webster metric g_θ.
//!
//! dθ follows the convention dθ(X,Y) = ½(X θ(Y) − Y θ(X) − θ([X,Y])),
//! which in coordinates reads ½ Σ (∂_iθ_j − ∂_jθ_i) u^i v^j.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::linalg::{pinv, Matrix, Vector};

/// A chartable CR model. Points and tangent vectors are arrays of
/// `ambient_dim()` coordinates (the chart itself for Heisenberg-type
/// models, the embedding `R^{2n+2}` for spheres).
///
/// `frame` returns `2n+1` vectors: a G_θ-orthonormal horizontal frame
/// with `e_{2k+1} = J e_{2k}`, followed by the Reeb field `T`.
pub trait ModelManifold: Send + Sync + fmt::Debug {
    fn id(&self) -> String;
    fn n(&self) -> usize;
    fn dim(&self) -> usize {
        2 * self.n() + 1
    }
    fn ambient_dim(&self) -> usize;
    fn is_sasakian(&self) -> bool;
    /// True for the Heisenberg group itself (flat, Tanaka-Webster R = 0).
    fn is_heisenberg(&self) -> bool {
        false
    }
    /// Whether frame derivatives are exact (closed form or forward-mode AD).
    fn closed_form_derivatives(&self) -> bool;
    fn tolerance(&self) -> f64 {
        if self.closed_form_derivatives() {
            1e-8
        } else {
            1e-6
        }
    }
    fn origin(&self) -> Vector;
    /// Contact form components `θ_i`.
    fn theta(&self, x: &Vector) -> Vector;
    /// `∂_i θ_j` as `m[(i, j)]`, when available in closed form.
    fn theta_jacobian(&self, _x: &Vector) -> Option<Matrix> {
        None
    }
    /// Frame anchor (chart-local frames on the sphere).
    fn anchor(&self, _x: &Vector) -> usize {
        0
    }
    fn frame(&self, x: &Vector, anchor: usize) -> Vec<Vector>;
    /// Directional derivative of every frame vector along `u`.
    fn frame_derivative(&self, _x: &Vector, _anchor: usize, _u: &Vector) -> Option<Vec<Vector>> {
        None
    }
    /// The complex structure on tangent vectors, extended by `JT = 0`.
    fn j_apply(&self, x: &Vector, v: &Vector) -> Vector;
    fn normalize_point(&self, x: &Vector) -> Vector {
        x.clone()
    }
    fn project_tangent(&self, _x: &Vector, v: &Vector) -> Vector {
        v.clone()
    }
    fn retract(&self, x: &Vector, v: &Vector) -> Vector {
        self.normalize_point(&(x + v))
    }
    /// Distance of `x` from the model (zero for charts).
    fn point_residual(&self, _x: &Vector) -> f64 {
        0.0
    }
    /// Normal component of `v` at `x` (zero for charts).
    fn tangent_residual(&self, _x: &Vector, _v: &Vector) -> f64 {
        0.0
    }
    fn sample_points(&self, count: usize, radius: f64, seed: u64) -> Vec<Vector>;
    /// Central-difference step for frame and θ derivatives.
    fn fd_step(&self, x: &Vector) -> f64 {
        1e-5 * x.amax().max(1.0)
    }
}

pub type Model = Arc<dyn ModelManifold>;

/// `∂_iθ_j`, closed form when the model has one, central differences otherwise.
pub fn theta_jacobian(model: &dyn ModelManifold, x: &Vector) -> Matrix {
    if let Some(m) = model.theta_jacobian(x) {
        return m;
    }
    let n = model.ambient_dim();
    let h = model.fd_step(x);
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        let d = (model.theta(&xp) - model.theta(&xm)) / (2.0 * h);
        for j in 0..n {
            m[(i, j)] = d[j];
        }
    }
    m
}

/// Frame derivative along `u`: model-supplied or central differences.
pub fn frame_derivative(model: &dyn ModelManifold, x: &Vector, anchor: usize, u: &Vector) -> Vec<Vector> {
    if let Some(d) = model.frame_derivative(x, anchor, u) {
        return d;
    }
    frame_derivative_fd(model, x, anchor, u)
}

/// Central-difference frame derivative (fallback and cross-check).
pub fn frame_derivative_fd(model: &dyn ModelManifold, x: &Vector, anchor: usize, u: &Vector) -> Vec<Vector> {
    let h = model.fd_step(x);
    let fp = model.frame(&(x + u * h), anchor);
    let fm = model.frame(&(x - u * h), anchor);
    fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect()
}

/// Coordinate dθ(u,v) at x.
pub fn dtheta_at(model: &dyn ModelManifold, x: &Vector, u: &Vector, v: &Vector) -> f64 {
    let d = theta_jacobian(model, x);
    let anti = &d - d.transpose();
    0.5 * u.dot(&(&anti * v))
}

pub fn theta_at(model: &dyn ModelManifold, x: &Vector, v: &Vector) -> f64 {
    model.theta(x).dot(v)
}

/// Levi form G_θ(u,v) = dθ(u, Jv), evaluated on horizontal parts.
pub fn levi_at(model: &dyn ModelManifold, x: &Vector, u: &Vector, v: &Vector) -> f64 {
    let jv = model.j_apply(x, v);
    dtheta_at(model, x, u, &jv)
}

/// Reeb field read from the model frame.
pub fn reeb_at(model: &dyn ModelManifold, x: &Vector) -> Vector {
    let a = model.anchor(x);
    model.frame(x, a).pop().expect("frame has a Reeb entry")
}

/// Horizontal projection X_H = X − θ(X) T.
pub fn horizontal_part(model: &dyn ModelManifold, x: &Vector, v: &Vector) -> Vector {
    let t = reeb_at(model, x);
    v - &t * theta_at(model, x, v)
}

/// Webster metric g_θ(u,v) = G_θ(u_H, v_H) + θ(u)θ(v), built from dθ and J.
pub fn webster_at(model: &dyn ModelManifold, x: &Vector, u: &Vector, v: &Vector) -> f64 {
    let uh = horizontal_part(model, x, u);
    let vh = horizontal_part(model, x, v);
    levi_at(model, x, &uh, &vh) + theta_at(model, x, u) * theta_at(model, x, v)
}

/// Ω(u,v) = g_θ(u, Jv).
pub fn omega_at(model: &dyn ModelManifold, x: &Vector, u: &Vector, v: &Vector) -> f64 {
    let jv = model.j_apply(x, v);
    webster_at(model, x, u, &jv)
}

/// A point of a model, tagged with the model id.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartPoint {
    pub coords: Vec<f64>,
    pub model_id: String,
}

impl ChartPoint {
    pub fn new(model: &dyn ModelManifold, coords: Vector) -> Result<Self> {
        if coords.len() != model.ambient_dim() {
            return Err(GeomError::DimensionMismatch { expected: model.ambient_dim(), got: coords.len() });
        }
        let r = model.point_residual(&coords);
        if r > 1e-12 {
            return Err(GeomError::Contract(format!("point off the model by {r:e}")));
        }
        Ok(ChartPoint { coords: coords.iter().copied().collect(), model_id: model.id() })
    }

    pub fn vector(&self) -> Vector {
        Vector::from_vec(self.coords.clone())
    }
}

/// A tangent vector with its base point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tangent {
    pub base: ChartPoint,
    pub components: Vec<f64>,
}

impl Tangent {
    pub fn new(model: &dyn ModelManifold, base: &ChartPoint, components: Vector) -> Result<Self> {
        if components.len() != model.ambient_dim() {
            return Err(GeomError::DimensionMismatch { expected: model.ambient_dim(), got: components.len() });
        }
        if base.model_id != model.id() {
            return Err(GeomError::Contract(format!("point belongs to {}, not {}", base.model_id, model.id())));
        }
        let r = model.tangent_residual(&base.vector(), &components);
        if r > 1e-8 {
            return Err(GeomError::Contract(format!("vector not tangent (normal part {r:e})")));
        }
        Ok(Tangent { base: base.clone(), components: components.iter().copied().collect() })
    }

    pub fn vector(&self) -> Vector {
        Vector::from_vec(self.components.clone())
    }
}

fn check_pair(model: &dyn ModelManifold, x: &ChartPoint, u: &Tangent, v: &Tangent) -> Result<()> {
    if x.coords.len() != model.ambient_dim() {
        return Err(GeomError::DimensionMismatch { expected: model.ambient_dim(), got: x.coords.len() });
    }
    for w in [u, v] {
        if w.components.len() != model.ambient_dim() {
            return Err(GeomError::DimensionMismatch { expected: model.ambient_dim(), got: w.components.len() });
        }
        if w.base != *x {
            return Err(GeomError::Contract("tangent vector is not based at the given point".into()));
        }
    }
    Ok(())
}

pub fn dtheta(model: &dyn ModelManifold, x: &ChartPoint, u: &Tangent, v: &Tangent) -> Result<f64> {
    check_pair(model, x, u, v)?;
    Ok(dtheta_at(model, &x.vector(), &u.vector(), &v.vector()))
}

pub fn omega(model: &dyn ModelManifold, x: &ChartPoint, u: &Tangent, v: &Tangent) -> Result<f64> {
    check_pair(model, x, u, v)?;
    Ok(omega_at(model, &x.vector(), &u.vector(), &v.vector()))
}

pub fn webster_metric(model: &dyn ModelManifold, x: &ChartPoint, u: &Tangent, v: &Tangent) -> Result<f64> {
    check_pair(model, x, u, v)?;
    Ok(webster_at(model, &x.vector(), &u.vector(), &v.vector()))
}

/// Max-norm residual of g^{ij} − (G^{ij} − T^iT^j), where g^{ij} comes from
/// solving G_θ(X, g dx^i) = dx^i(X) on H(M) and G^{ij} inverts the Webster
/// metric matrix (pseudo-inverse on the tangent space for embedded models).
pub fn metric_duality_residual(model: &dyn ModelManifold, x: &ChartPoint) -> Result<f64> {
    let xv = x.vector();
    let nn = model.ambient_dim();
    let n2 = 2 * model.n();
    let a = model.anchor(&xv);
    let frame = model.frame(&xv, a);
    let t = frame[n2].clone();
    let hor = &frame[..n2];
    let mut gm = Matrix::zeros(n2, n2);
    for i in 0..n2 {
        for j in 0..n2 {
            gm[(i, j)] = levi_at(model, &xv, &hor[i], &hor[j]);
        }
    }
    let ginv = gm
        .clone()
        .try_inverse()
        .ok_or_else(|| GeomError::DegenerateMetric("Levi form is singular".into()))?;
    // g dx^i = Σ_a c^i_a X_a with Σ_a c^i_a G(X_b, X_a) = dx^i(X_b).
    let mut g_up = Matrix::zeros(nn, nn);
    for i in 0..nn {
        let rhs = Vector::from_iterator(n2, hor.iter().map(|xb| xb[i]));
        let c = &ginv * rhs;
        let mut w = Vector::zeros(nn);
        for (ca, xa) in c.iter().zip(hor) {
            w += xa * *ca;
        }
        for j in 0..nn {
            g_up[(i, j)] = w[j];
        }
    }
    // Webster metric matrix on coordinate vectors, restricted to the tangent space.
    let mut basis = Vec::with_capacity(nn);
    for i in 0..nn {
        let mut e = Vector::zeros(nn);
        e[i] = 1.0;
        basis.push(model.project_tangent(&xv, &e));
    }
    let mut gw = Matrix::zeros(nn, nn);
    for i in 0..nn {
        for j in 0..nn {
            gw[(i, j)] = webster_at(model, &xv, &basis[i], &basis[j]);
        }
    }
    let gw_inv = if nn == model.dim() {
        gw.try_inverse().ok_or_else(|| GeomError::DegenerateMetric("Webster metric is singular".into()))?
    } else {
        pinv(&gw, 1e-10)
    };
    let rhs = gw_inv - &t * t.transpose();
    Ok((g_up - rhs).amax())
}

/// `Σ_j g^{ij} θ_j`, which must vanish.
pub fn cometric_theta_residual(model: &dyn ModelManifold, x: &Vector) -> f64 {
    let n2 = 2 * model.n();
    let frame = model.frame(x, model.anchor(x));
    let th = model.theta(x);
    let mut r = Vector::zeros(model.ambient_dim());
    for xa in &frame[..n2] {
        r += xa * xa.dot(&th);
    }
    r.amax()
}

/// Adapted frame at a point: horizontal entries, Reeb field, J and G_θ
/// in the frame. Construction applies a J-adapted Gram–Schmidt against
/// G_θ to the model frame, so `g_matrix` is the identity.
#[derive(Debug, Clone, Serialize)]
pub struct AdaptedFrame {
    pub base: ChartPoint,
    pub horizontal: Vec<Tangent>,
    pub reeb: Tangent,
    pub j_matrix: Vec<Vec<f64>>,
    pub g_matrix: Vec<Vec<f64>>,
}

impl AdaptedFrame {
    pub fn at(model: &dyn ModelManifold, x: &ChartPoint) -> Result<Self> {
        let xv = x.vector();
        let n2 = 2 * model.n();
        let raw = model.frame(&xv, model.anchor(&xv));
        if raw.len() != n2 + 1 {
            return Err(GeomError::Contract(format!("model frame has {} entries, expected {}", raw.len(), n2 + 1)));
        }
        let g = |u: &Vector, v: &Vector| levi_at(model, &xv, u, v);
        let mut hor: Vec<Vector> = Vec::with_capacity(n2);
        let mut k = 0;
        while hor.len() < n2 {
            if k >= n2 {
                return Err(GeomError::DegenerateMetric("horizontal frame is degenerate".into()));
            }
            let mut w = raw[k].clone();
            k += 1;
            for q in &hor {
                let c = g(q, &w);
                w -= q * c;
            }
            let nrm2 = g(&w, &w);
            if nrm2 <= 1e-14 {
                continue;
            }
            let e = w / nrm2.sqrt();
            let je = model.j_apply(&xv, &e);
            hor.push(e);
            hor.push(je);
        }
        let reeb = raw[n2].clone();
        let mut jm = vec![vec![0.0; n2]; n2];
        let mut gm = vec![vec![0.0; n2]; n2];
        for b in 0..n2 {
            let jb = model.j_apply(&xv, &hor[b]);
            for c in 0..n2 {
                jm[c][b] = g(&hor[c], &jb);
                gm[c][b] = g(&hor[c], &hor[b]);
            }
        }
        let horizontal = hor
            .into_iter()
            .map(|v| Tangent::new(model, x, v))
            .collect::<Result<Vec<_>>>()?;
        Ok(AdaptedFrame { base: x.clone(), horizontal, reeb: Tangent::new(model, x, reeb)?, j_matrix: jm, g_matrix: gm })
    }

    /// Named invariant residuals of the frame.
    pub fn residuals(&self, model: &dyn ModelManifold) -> Vec<(String, f64)> {
        let xv = self.base.vector();
        let th = model.theta(&xv);
        let t = self.reeb.vector();
        let n2 = self.horizontal.len();
        let hor: Vec<Vector> = self.horizontal.iter().map(|h| h.vector()).collect();
        let theta_h = hor.iter().fold(0.0f64, |m, h| m.max(th.dot(h).abs()));
        let theta_t = (th.dot(&t) - 1.0).abs();
        let mut probes = hor.clone();
        probes.push(t.clone());
        let reeb_dtheta = probes.iter().fold(0.0f64, |m, v| m.max(dtheta_at(model, &xv, &t, v).abs()));
        let j = Matrix::from_fn(n2, n2, |i, k| self.j_matrix[i][k]);
        let g = Matrix::from_fn(n2, n2, |i, k| self.g_matrix[i][k]);
        let j2 = (&j * &j + Matrix::identity(n2, n2)).amax();
        let gsym = (&g - g.transpose()).amax();
        let gmin = g.clone().symmetric_eigenvalues().min();
        let jinv = (j.transpose() * &g * &j - &g).amax();
        vec![
            ("theta_on_horizontal".into(), theta_h),
            ("theta_of_reeb_minus_one".into(), theta_t),
            ("reeb_contract_dtheta".into(), reeb_dtheta),
            ("j_squared_plus_identity".into(), j2),
            ("g_symmetry".into(), gsym),
            ("g_positive".into(), if gmin > 0.0 { 0.0 } else { 1.0 - gmin }),
            ("g_j_invariance".into(), jinv),
            ("g_identity".into(), (g - Matrix::identity(n2, n2)).amax()),
        ]
    }
}
