//! Levi-Civita and Tanaka-Webster connections in an adapted orthonormal
//! frame `{e_0..e_{2n-1}, T}`, curvature and the curvature identity suite.
//!
//! Storage convention: `gamma.get(i, j, k)` is the `k`-component of
//! `∇_{e_i} e_j`; `jm[(c, b)]` is the `c`-component of `J e_b`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::linalg::{pinv, Matrix, Tensor3, Tensor4, Vector};
use crate::manifold::{frame_derivative, ChartPoint, ModelManifold};
use crate::par::{self, Exec};
use crate::report::{ResidualEntry, ResidualReport};

/// Step for differentiating connection coefficients along the frame.
pub const CURVATURE_STEP: f64 = 1e-4;

/// Frame, coframe, brackets, Levi-Civita and Tanaka-Webster coefficients
/// at a point.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    pub x: Vector,
    pub anchor: usize,
    pub n: usize,
    pub m: usize,
    pub frame: Vec<Vector>,
    /// `m × N` matrix taking ambient tangent vectors to frame coefficients.
    pub coframe: Matrix,
    /// `de[b][a]` is the ambient derivative of `e_a` along `e_b`.
    pub de: Vec<Vec<Vector>>,
    /// `bracket.get(a, b, k)`: k-component of `[e_a, e_b]`.
    pub bracket: Tensor3,
    pub jm: Matrix,
    pub gamma_d: Tensor3,
    pub gamma: Tensor3,
    /// `A(e_a, e_b)` on the horizontal block.
    pub a_mat: Matrix,
}

impl PointGeometry {
    pub fn new(model: &dyn ModelManifold, x: &Vector, anchor: usize) -> Self {
        let n = model.n();
        let n2 = 2 * n;
        let m = n2 + 1;
        let t = n2;
        let frame = model.frame(x, anchor);
        let fmat = Matrix::from_columns(&frame);
        let coframe = if fmat.is_square() {
            fmat.clone().try_inverse().unwrap_or_else(|| pinv(&fmat, 1e-13))
        } else {
            pinv(&fmat, 1e-13)
        };
        let de: Vec<Vec<Vector>> = frame.iter().map(|eb| frame_derivative(model, x, anchor, eb)).collect();
        let mut bracket = Tensor3::zeros(m);
        for a in 0..m {
            for b in 0..m {
                if a == b {
                    continue;
                }
                let br = &coframe * (&de[a][b] - &de[b][a]);
                for k in 0..m {
                    bracket.set(a, b, k, br[k]);
                }
            }
        }
        let mut jm = Matrix::zeros(m, m);
        for b in 0..m {
            let jb = &coframe * model.j_apply(x, &frame[b]);
            for c in 0..m {
                jm[(c, b)] = jb[c];
            }
        }
        let mut gamma_d = Tensor3::zeros(m);
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    let v = 0.5 * (bracket.get(a, b, c) - bracket.get(b, c, a) + bracket.get(c, a, b));
                    gamma_d.set(a, b, c, v);
                }
            }
        }
        let mut a_mat = Matrix::zeros(n2, n2);
        for a in 0..n2 {
            for b in 0..n2 {
                a_mat[(a, b)] = jm[(a, b)] - gamma_d.get(a, b, t);
            }
        }
        let gamma = invert_denabla(&gamma_d, &jm, &a_mat, n2);
        PointGeometry { x: x.clone(), anchor, n, m, frame, coframe, de, bracket, jm, gamma_d, gamma, a_mat }
    }

    pub fn at(model: &dyn ModelManifold, x: &Vector) -> Self {
        Self::new(model, x, model.anchor(x))
    }

    #[inline]
    pub fn t(&self) -> usize {
        self.m - 1
    }

    /// Frame coefficients of an ambient tangent vector.
    pub fn coeffs(&self, v: &Vector) -> Vector {
        &self.coframe * v
    }

    /// Ambient vector from frame coefficients.
    pub fn ambient(&self, w: &Vector) -> Vector {
        let mut out = Vector::zeros(self.frame[0].len());
        for (wa, ea) in w.iter().zip(&self.frame) {
            out += ea * *wa;
        }
        out
    }

    /// τ as an `m × m` matrix (`tau[(c, b)]` = c-component of τ e_b).
    pub fn tau_full(&self) -> Matrix {
        let n2 = self.m - 1;
        let mut tau = Matrix::zeros(self.m, self.m);
        for b in 0..n2 {
            for c in 0..n2 {
                tau[(c, b)] = self.a_mat[(b, c)];
            }
        }
        tau
    }

    /// Covariant derivative `∇_u v` coefficients given `v`'s derivative
    /// `vdot` along `u` (all in frame coefficients).
    pub fn covariant(&self, u: &Vector, v: &Vector, vdot: &Vector, levi_civita: bool) -> Vector {
        let g = if levi_civita { &self.gamma_d } else { &self.gamma };
        let mut out = vdot.clone();
        for a in 0..self.m {
            if u[a] == 0.0 {
                continue;
            }
            for b in 0..self.m {
                let ub = u[a] * v[b];
                if ub == 0.0 {
                    continue;
                }
                for c in 0..self.m {
                    out[c] += g.get(a, b, c) * ub;
                }
            }
        }
        out
    }

    /// Ambient derivative of the frame field `Σ w^a e_a` (constant
    /// coefficients) along the ambient direction with frame coefficients `u`.
    pub fn frame_field_derivative(&self, w: &Vector, u: &Vector) -> Vector {
        let mut out = Vector::zeros(self.frame[0].len());
        for b in 0..self.m {
            if u[b] == 0.0 {
                continue;
            }
            for a in 0..self.m {
                if w[a] == 0.0 {
                    continue;
                }
                out += &self.de[b][a] * (u[b] * w[a]);
            }
        }
        out
    }

    /// Frame coefficients of the time derivative of coefficients of `v`
    /// along a curve with velocity `u` and ambient acceleration of `v`.
    pub fn coefficient_rate(&self, u: &Vector, v: &Vector, vdot_ambient: &Vector) -> Vector {
        let drift = self.frame_field_derivative(v, u);
        self.coeffs(&(vdot_ambient - drift))
    }

    /// Tanaka-Webster axiom residuals.
    pub fn tw_residuals(&self) -> Vec<(String, f64)> {
        tw_axiom_residuals(&self.gamma, &self.bracket, &self.jm, &self.a_mat)
    }

    /// Levi-Civita residuals (torsion and metric compatibility).
    pub fn lc_residuals(&self) -> Vec<(String, f64)> {
        let m = self.m;
        let mut tors: f64 = 0.0;
        let mut metric: f64 = 0.0;
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    let g = &self.gamma_d;
                    tors = tors.max((g.get(a, b, c) - g.get(b, a, c) - self.bracket.get(a, b, c)).abs());
                    metric = metric.max((g.get(a, b, c) + g.get(a, c, b)).abs());
                }
            }
        }
        vec![("lc_torsion".into(), tors), ("lc_metric".into(), metric)]
    }
}

/// Solves D = ∇ + (Ω − A)⊗T + τ⊗θ + 2θ⊙J for ∇, i.e.
/// D_X Y = ∇_X Y + (Ω − A)(X,Y) T + θ(Y) τX + θ(X) JY + θ(Y) JX.
fn invert_denabla(gd: &Tensor3, jm: &Matrix, a_mat: &Matrix, n2: usize) -> Tensor3 {
    let m = n2 + 1;
    let t = n2;
    let mut g = gd.clone();
    for a in 0..n2 {
        for b in 0..n2 {
            g.add(a, b, t, -(jm[(a, b)] - a_mat[(a, b)]));
        }
        for c in 0..m {
            let tau_ca = if c < n2 { a_mat[(a, c)] } else { 0.0 };
            g.add(a, t, c, -tau_ca - jm[(c, a)]);
        }
    }
    for b in 0..n2 {
        for c in 0..m {
            g.add(t, b, c, -jm[(c, b)]);
        }
    }
    g
}

/// Axiom residuals for a candidate Tanaka-Webster connection.
pub fn tw_axiom_residuals(g: &Tensor3, bracket: &Tensor3, jm: &Matrix, a_mat: &Matrix) -> Vec<(String, f64)> {
    let m = g.m;
    let t = m - 1;
    let n2 = t;
    let mut nabla_t: f64 = 0.0;
    let mut h_par: f64 = 0.0;
    let mut nabla_g: f64 = 0.0;
    let mut nabla_j: f64 = 0.0;
    for a in 0..m {
        for c in 0..m {
            nabla_t = nabla_t.max(g.get(a, t, c).abs());
        }
        for b in 0..n2 {
            h_par = h_par.max(g.get(a, b, t).abs());
        }
        for b in 0..m {
            for c in 0..m {
                nabla_g = nabla_g.max((g.get(a, b, c) + g.get(a, c, b)).abs());
                let mut s = 0.0;
                for d in 0..m {
                    s += jm[(d, b)] * g.get(a, d, c) - g.get(a, b, d) * jm[(c, d)];
                }
                nabla_j = nabla_j.max(s.abs());
            }
        }
    }
    let torsion = |a: usize, b: usize, c: usize| g.get(a, b, c) - g.get(b, a, c) - bracket.get(a, b, c);
    let mut purity_h: f64 = 0.0;
    let mut purity_t: f64 = 0.0;
    for a in 0..n2 {
        for b in 0..n2 {
            for c in 0..n2 {
                purity_h = purity_h.max(torsion(a, b, c).abs());
            }
            purity_t = purity_t.max((torsion(a, b, t) + 2.0 * jm[(a, b)]).abs());
        }
    }
    let mut tau_torsion: f64 = 0.0;
    for b in 0..m {
        for c in 0..m {
            let tau_cb = if b < n2 && c < n2 { a_mat[(b, c)] } else { 0.0 };
            tau_torsion = tau_torsion.max((torsion(t, b, c) - tau_cb).abs());
        }
    }
    let jh = jm.view((0, 0), (n2, n2)).into_owned();
    let tau = a_mat.transpose();
    let sym = (a_mat - a_mat.transpose()).amax();
    let anti = (&tau * &jh + &jh * &tau).amax();
    vec![
        ("nabla_T".into(), nabla_t),
        ("H_parallel".into(), h_par),
        ("nabla_g".into(), nabla_g),
        ("nabla_J".into(), nabla_j),
        ("nabla_theta".into(), h_par.max(nabla_t)),
        ("purity_horizontal".into(), purity_h),
        ("purity_reeb_component".into(), purity_t),
        ("tau_is_torsion".into(), tau_torsion),
        ("tau_symmetric".into(), sym),
        ("tau_j_anticommute".into(), anti),
    ]
}

/// Connection coefficients and diagnostics at a point.
#[derive(Debug, Clone, Serialize)]
pub struct ConnectionData {
    pub base: ChartPoint,
    /// `gamma[i][j][k]`: k-component of `∇_{e_i} e_j`.
    pub gamma: Vec<Vec<Vec<f64>>>,
    pub tau_matrix: Vec<Vec<f64>>,
    pub axiom_residuals: Vec<(String, f64)>,
}

impl ConnectionData {
    fn from_tensor(base: ChartPoint, g: &Tensor3, tau: Vec<Vec<f64>>, residuals: Vec<(String, f64)>) -> Self {
        let m = g.m;
        let gamma = (0..m)
            .map(|i| (0..m).map(|j| (0..m).map(|k| g.get(i, j, k)).collect()).collect())
            .collect();
        ConnectionData { base, gamma, tau_matrix: tau, axiom_residuals: residuals }
    }

    pub fn max_residual(&self) -> f64 {
        self.axiom_residuals.iter().fold(0.0, |m, (_, r)| m.max(*r))
    }

    pub fn residual(&self, name: &str) -> Option<f64> {
        self.axiom_residuals.iter().find(|(n, _)| n == name).map(|(_, r)| *r)
    }

    pub fn gamma_tensor(&self) -> Tensor3 {
        let m = self.gamma.len();
        let mut t = Tensor3::zeros(m);
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    t.set(i, j, k, self.gamma[i][j][k]);
                }
            }
        }
        t
    }
}

/// Levi-Civita connection of g_θ via the Koszul formula.
pub fn levi_civita(model: &dyn ModelManifold, x: &Vector) -> Result<ConnectionData> {
    let base = ChartPoint::new(model, x.clone())?;
    let geom = PointGeometry::at(model, x);
    check_frame(&geom)?;
    Ok(ConnectionData::from_tensor(base, &geom.gamma_d, Vec::new(), geom.lc_residuals()))
}

/// Tanaka-Webster connection obtained by inverting the D ↔ ∇ relation.
pub fn tw_connection(model: &dyn ModelManifold, x: &Vector) -> Result<ConnectionData> {
    let base = ChartPoint::new(model, x.clone())?;
    let geom = PointGeometry::at(model, x);
    check_frame(&geom)?;
    let res = geom.tw_residuals();
    let limit = 10.0 * model.tolerance();
    for (name, r) in &res {
        if !(*r <= limit) {
            return Err(GeomError::InconsistentModel { name: name.clone(), residual: *r, limit });
        }
    }
    let n2 = geom.m - 1;
    let tau = (0..n2).map(|i| (0..n2).map(|j| geom.a_mat[(i, j)]).collect()).collect();
    Ok(ConnectionData::from_tensor(base, &geom.gamma, tau, res))
}

fn check_frame(geom: &PointGeometry) -> Result<()> {
    if geom.coframe.iter().any(|v| !v.is_finite()) {
        return Err(GeomError::DegenerateMetric("frame matrix is singular".into()));
    }
    Ok(())
}

/// Curvature data at a point: Tanaka-Webster curvature, ∇τ, and
/// optionally the Riemannian curvature of g_θ.
#[derive(Debug, Clone)]
pub struct CurvatureAt {
    pub geom: PointGeometry,
    /// `r.get(a, b, c, d)`: d-component of `R(e_a, e_b) e_c`.
    pub r: Tensor4,
    /// `dtau.get(a, b, c)`: c-component of `(∇_{e_a} τ) e_b`.
    pub dtau: Tensor3,
    pub r_d: Option<Tensor4>,
}

struct Stencil {
    gamma: Vec<Tensor3>,
    gamma_d: Vec<Tensor3>,
    tau: Vec<Matrix>,
}

/// Richardson-extrapolated derivatives of Γ, Γ^D and τ along each frame
/// direction, from geometries at `retract(x, ±s e_a)` for `s = h, h/2`.
fn frame_derivatives(model: &dyn ModelManifold, geom: &PointGeometry, exec: Exec) -> Stencil {
    let m = geom.m;
    let h = CURVATURE_STEP;
    let steps = [h, -h, 0.5 * h, -0.5 * h];
    let neighbours: Vec<PointGeometry> = par::map(exec, 4 * m, |k| {
        let a = k / 4;
        let s = steps[k % 4];
        let y = model.retract(&geom.x, &(&geom.frame[a] * s));
        PointGeometry::new(model, &y, geom.anchor)
    });
    let diff3 = |f: &dyn Fn(&PointGeometry) -> &Tensor3, a: usize| {
        let p = &neighbours[4 * a..4 * a + 4];
        let mut out = Tensor3::zeros(m);
        for i in 0..out.data.len() {
            let d1 = (f(&p[0]).data[i] - f(&p[1]).data[i]) / (2.0 * h);
            let d2 = (f(&p[2]).data[i] - f(&p[3]).data[i]) / h;
            out.data[i] = crate::linalg::richardson(d1, d2);
        }
        out
    };
    let gamma = (0..m).map(|a| diff3(&|g: &PointGeometry| &g.gamma, a)).collect();
    let gamma_d = (0..m).map(|a| diff3(&|g: &PointGeometry| &g.gamma_d, a)).collect();
    let tau = (0..m)
        .map(|a| {
            let p = &neighbours[4 * a..4 * a + 4];
            let t: Vec<Matrix> = p.iter().map(|g| g.tau_full()).collect();
            let d1 = (&t[0] - &t[1]) / (2.0 * h);
            let d2 = (&t[2] - &t[3]) / h;
            (d2 * 4.0 - d1) / 3.0
        })
        .collect();
    Stencil { gamma, gamma_d, tau }
}

fn curvature_from(g: &Tensor3, dg: &[Tensor3], bracket: &Tensor3) -> Tensor4 {
    let m = g.m;
    let mut r = Tensor4::zeros(m);
    for a in 0..m {
        for b in 0..m {
            if a == b {
                continue;
            }
            for c in 0..m {
                for d in 0..m {
                    let mut v = dg[a].get(b, c, d) - dg[b].get(a, c, d);
                    for f in 0..m {
                        v += g.get(b, c, f) * g.get(a, f, d) - g.get(a, c, f) * g.get(b, f, d)
                            - bracket.get(a, b, f) * g.get(f, c, d);
                    }
                    r.set(a, b, c, d, v);
                }
            }
        }
    }
    r
}

impl CurvatureAt {
    pub fn new(model: &dyn ModelManifold, x: &Vector, with_riemann: bool) -> Self {
        Self::with_exec(model, x, with_riemann, Exec::Sequential)
    }

    pub fn with_exec(model: &dyn ModelManifold, x: &Vector, with_riemann: bool, exec: Exec) -> Self {
        let geom = PointGeometry::at(model, x);
        Self::from_geometry(model, geom, with_riemann, exec)
    }

    pub fn from_geometry(model: &dyn ModelManifold, geom: PointGeometry, with_riemann: bool, exec: Exec) -> Self {
        let st = frame_derivatives(model, &geom, exec);
        let m = geom.m;
        let r = curvature_from(&geom.gamma, &st.gamma, &geom.bracket);
        let r_d = with_riemann.then(|| curvature_from(&geom.gamma_d, &st.gamma_d, &geom.bracket));
        let tau = geom.tau_full();
        let mut dtau = Tensor3::zeros(m);
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    let mut v = st.tau[a][(c, b)];
                    for d in 0..m {
                        v += geom.gamma.get(a, d, c) * tau[(d, b)] - tau[(c, d)] * geom.gamma.get(a, b, d);
                    }
                    dtau.set(a, b, c, v);
                }
            }
        }
        CurvatureAt { geom, r, dtau, r_d }
    }

    pub fn m(&self) -> usize {
        self.geom.m
    }

    fn apply(t: &Tensor4, x: &Vector, y: &Vector, z: &Vector) -> Vector {
        let m = t.m;
        let mut out = Vector::zeros(m);
        for a in 0..m {
            if x[a] == 0.0 {
                continue;
            }
            for b in 0..m {
                let xy = x[a] * y[b];
                if xy == 0.0 {
                    continue;
                }
                for c in 0..m {
                    let xyz = xy * z[c];
                    if xyz == 0.0 {
                        continue;
                    }
                    for d in 0..m {
                        out[d] += t.get(a, b, c, d) * xyz;
                    }
                }
            }
        }
        out
    }

    /// R(X,Y)Z in frame coefficients.
    pub fn r_xyz(&self, x: &Vector, y: &Vector, z: &Vector) -> Vector {
        Self::apply(&self.r, x, y, z)
    }

    /// Riemannian curvature R^D(X,Y)Z in frame coefficients.
    pub fn rd_xyz(&self, x: &Vector, y: &Vector, z: &Vector) -> Option<Vector> {
        self.r_d.as_ref().map(|t| Self::apply(t, x, y, z))
    }

    /// R(X,Y,Z,W) = g(R(Z,W)Y, X).
    pub fn r4(&self, x: &Vector, y: &Vector, z: &Vector, w: &Vector) -> f64 {
        self.r_xyz(z, w, y).dot(x)
    }

    pub fn theta(&self, x: &Vector) -> f64 {
        x[self.geom.t()]
    }

    pub fn horizontal(&self, x: &Vector) -> Vector {
        let mut h = x.clone();
        h[self.geom.t()] = 0.0;
        h
    }

    pub fn j(&self, x: &Vector) -> Vector {
        &self.geom.jm * x
    }

    pub fn omega(&self, x: &Vector, y: &Vector) -> f64 {
        x.dot(&self.j(y))
    }

    pub fn tau(&self, x: &Vector) -> Vector {
        self.geom.tau_full() * x
    }

    pub fn a_form(&self, x: &Vector, y: &Vector) -> f64 {
        self.tau(x).dot(y)
    }

    /// (∇_U τ) W.
    pub fn dtau_uw(&self, u: &Vector, w: &Vector) -> Vector {
        let m = self.m();
        let mut out = Vector::zeros(m);
        for a in 0..m {
            for b in 0..m {
                let uw = u[a] * w[b];
                if uw == 0.0 {
                    continue;
                }
                for c in 0..m {
                    out[c] += self.dtau.get(a, b, c) * uw;
                }
            }
        }
        out
    }

    /// S(X,Y) = (∇_X τ)Y − (∇_Y τ)X.
    pub fn s_tensor(&self, x: &Vector, y: &Vector) -> Vector {
        self.dtau_uw(x, y) - self.dtau_uw(y, x)
    }

    /// Unit vector e_T in frame coefficients.
    pub fn reeb(&self) -> Vector {
        let mut t = Vector::zeros(self.m());
        t[self.geom.t()] = 1.0;
        t
    }
}

fn coeff_args(model: &dyn ModelManifold, geom: &PointGeometry, vs: &[&Vector]) -> Result<Vec<Vector>> {
    vs.iter()
        .map(|v| {
            if v.len() != model.ambient_dim() {
                return Err(GeomError::DimensionMismatch { expected: model.ambient_dim(), got: v.len() });
            }
            Ok(geom.coeffs(v))
        })
        .collect()
}

/// R(u,v)w as an ambient vector.
pub fn curvature(model: &dyn ModelManifold, x: &Vector, u: &Vector, v: &Vector, w: &Vector) -> Result<Vector> {
    let c = CurvatureAt::new(model, x, false);
    let args = coeff_args(model, &c.geom, &[u, v, w])?;
    let r = c.r_xyz(&args[0], &args[1], &args[2]);
    if r.iter().any(|z| !z.is_finite()) {
        return Err(GeomError::Numeric(format!("non-finite curvature at {:?}", x.as_slice())));
    }
    Ok(c.geom.ambient(&r))
}

/// Orthonormalizes `(u, v)` in frame coefficients.
fn orthonormal_pair(u: &Vector, v: &Vector) -> Result<(Vector, Vector)> {
    let nu = u.norm();
    if nu < 1e-14 {
        return Err(GeomError::DegeneratePlane);
    }
    let x = u / nu;
    let y0 = v - &x * x.dot(v);
    let ny = y0.norm();
    if ny < 1e-10 * v.norm().max(1e-300) || ny < 1e-14 {
        return Err(GeomError::DegeneratePlane);
    }
    Ok((x, y0 / ny))
}

/// Pseudohermitian sectional curvature from precomputed curvature data
/// (`u`, `v` in frame coefficients).
pub fn sectional_from(c: &CurvatureAt, u: &Vector, v: &Vector) -> Result<f64> {
    let (x, y) = orthonormal_pair(u, v)?;
    Ok(0.25 * c.r_xyz(&x, &y, &y).dot(&x))
}

/// k_θ(span{u,v}) = ¼ g(R(X,Y)Y, X) for an orthonormal basis X, Y.
pub fn sectional(model: &dyn ModelManifold, x: &Vector, u: &Vector, v: &Vector) -> Result<f64> {
    let c = CurvatureAt::new(model, x, false);
    let args = coeff_args(model, &c.geom, &[u, v])?;
    sectional_from(&c, &args[0], &args[1])
}

/// ρ(u,u) from precomputed curvature data (`u` in frame coefficients).
pub fn ricci_from(c: &CurvatureAt, u: &Vector) -> Result<f64> {
    let t = c.geom.t();
    if u[t].abs() > 1e-8 * u.norm().max(1.0) {
        return Err(GeomError::Domain("ricci requires a horizontal vector".into()));
    }
    let mut s = 0.0;
    for i in 0..t {
        let mut e = Vector::zeros(c.m());
        e[i] = 1.0;
        s += c.r_xyz(&e, u, u)[i];
    }
    Ok(s)
}

/// ρ(u,u) = Σ_i g(R(E_i, u)u, E_i) over an orthonormal frame of H(M).
pub fn ricci(model: &dyn ModelManifold, x: &Vector, u: &Vector) -> Result<f64> {
    let c = CurvatureAt::new(model, x, false);
    let args = coeff_args(model, &c.geom, &[u])?;
    ricci_from(&c, &args[0])
}

/// Tolerances used by the identity suite.
#[derive(Debug, Clone, Copy)]
pub struct IdentityTolerances {
    pub bianchi: f64,
    pub antisymmetry: f64,
    pub pair_symmetry: f64,
    pub space_form: f64,
    pub constant_curvature: f64,
}

impl IdentityTolerances {
    pub fn for_model(model: &dyn ModelManifold) -> Self {
        let fd = !model.closed_form_derivatives();
        IdentityTolerances {
            bianchi: if fd { 1e-5 } else { 1e-6 },
            antisymmetry: if fd { 1e-5 } else { 1e-6 },
            pair_symmetry: if fd { 1e-5 } else { 1e-6 },
            space_form: 1e-6,
            constant_curvature: 1e-8,
        }
    }
}

fn random_vec<R: Rng>(rng: &mut R, m: usize, horizontal: bool) -> Vector {
    let mut v = Vector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
    if horizontal {
        v[m - 1] = 0.0;
    }
    v
}

/// Riemannian curvature of the Heisenberg group as a Sasakian space form
/// with φ-sectional curvature c = −3.
pub fn heisenberg_riemann(c: &CurvatureAt, x: &Vector, y: &Vector, z: &Vector) -> Vector {
    let th = |v: &Vector| c.theta(v);
    let t = c.reeb();
    let term1 = (y * th(x) - x * th(y)) * th(z);
    let term2 = &t * (x.dot(z) * th(y) - y.dot(z) * th(x));
    let term3 = c.j(x) * c.omega(z, y) - c.j(y) * c.omega(z, x) + c.j(z) * (2.0 * c.omega(x, y));
    -(term1 + term2 + term3)
}

/// Curvature of a pseudohermitian space form of constant k (c = 0).
pub fn constant_curvature_form(c: &CurvatureAt, x: &Vector, y: &Vector, z: &Vector) -> Vector {
    c.tau(x) * c.omega(z, y) - c.tau(y) * c.omega(z, x) + c.j(x) * c.a_form(z, y) - c.j(y) * c.a_form(z, x)
}

/// Right-hand side of the pair-interchange identity with torsion terms.
pub fn pair_interchange_rhs(c: &CurvatureAt, x: &Vector, y: &Vector, z: &Vector, w: &Vector) -> f64 {
    let om = |a: &Vector, b: &Vector| c.omega(a, b);
    let af = |a: &Vector, b: &Vector| c.a_form(a, b);
    let h = |a: &Vector| c.horizontal(a);
    let s = |a: &Vector, b: &Vector| c.s_tensor(&h(a), &h(b));
    c.r4(z, w, x, y) - 2.0 * om(y, z) * af(x, w) + 2.0 * om(y, w) * af(x, z) - 2.0 * om(x, w) * af(y, z)
        + 2.0 * om(x, z) * af(y, w)
        + c.theta(x) * s(z, w).dot(y)
        + c.theta(y) * s(w, z).dot(x)
        + c.theta(z) * s(y, x).dot(w)
        + c.theta(w) * s(x, y).dot(z)
}

/// Residuals of the curvature identities at one point for `trials`
/// random vector tuples.
pub fn identity_residuals_at(
    model: &dyn ModelManifold,
    x: &Vector,
    trials: usize,
    seed: u64,
    tol: IdentityTolerances,
) -> ResidualReport {
    let with_riemann = model.is_heisenberg() || (model.is_sasakian() && model.ambient_dim() > model.dim());
    let c = CurvatureAt::new(model, x, with_riemann);
    let m = c.m();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = std::collections::BTreeMap::<&'static str, f64>::new();
    let mut bump = |k: &'static str, v: f64| {
        let e = worst.entry(k).or_insert(0.0);
        *e = e.max(v);
    };
    let t = c.reeb();
    for _ in 0..trials.max(1) {
        let xh = random_vec(&mut rng, m, true);
        let yh = random_vec(&mut rng, m, true);
        let zh = random_vec(&mut rng, m, true);
        let xa = random_vec(&mut rng, m, false);
        let ya = random_vec(&mut rng, m, false);
        let za = random_vec(&mut rng, m, false);
        let wa = random_vec(&mut rng, m, false);

        let cyc = c.r_xyz(&xh, &yh, &zh) + c.r_xyz(&yh, &zh, &xh) + c.r_xyz(&zh, &xh, &yh);
        let tors = c.tau(&zh) * c.omega(&xh, &yh) + c.tau(&xh) * c.omega(&yh, &zh) + c.tau(&yh) * c.omega(&zh, &xh);
        bump("first_bianchi", (cyc + tors * 2.0).amax());

        let a3 = c.r_xyz(&xh, &t, &yh) + c.r_xyz(&t, &yh, &xh) - c.s_tensor(&xh, &yh);
        bump("reeb_bianchi", a3.amax());

        let r = c.r4(&xa, &ya, &za, &wa);
        bump("antisymmetry_xy", (r + c.r4(&ya, &xa, &za, &wa)).abs());
        bump("antisymmetry_zw", (r + c.r4(&xa, &ya, &wa, &za)).abs());
        bump("pair_interchange", (r - pair_interchange_rhs(&c, &xa, &ya, &za, &wa)).abs());
        bump("S_antisymmetry", (c.s_tensor(&xa, &ya) + c.s_tensor(&ya, &xa)).amax());

        if model.is_sasakian() {
            bump("pair_symmetry", (r - c.r4(&za, &wa, &xa, &ya)).abs());
            bump("reeb_curvature_vanishes", c.r_xyz(&t, &xa, &xa).amax());
        }
        if model.is_heisenberg() {
            let rd = c.rd_xyz(&xa, &ya, &za).unwrap();
            bump("space_form_c_minus_3", (rd - heisenberg_riemann(&c, &xa, &ya, &za)).amax());
            let lhs = c.r_xyz(&xa, &ya, &za);
            bump("constant_curvature", (lhs - constant_curvature_form(&c, &xa, &ya, &za)).amax());
            bump("tw_flat", c.r.max_abs());
        } else if let Some(rd) = c.rd_xyz(&xa, &ya, &za) {
            // Round sphere: R^D(X,Y)Z = g(Y,Z)X − g(X,Z)Y.
            let round = &xa * ya.dot(&za) - &ya * xa.dot(&za);
            bump("round_sphere_riemann", (rd - round).amax());
        }
    }
    let mut rep = ResidualReport::default();
    for (name, v) in worst {
        let tl = match name {
            "first_bianchi" | "reeb_bianchi" => tol.bianchi,
            "antisymmetry_xy" | "antisymmetry_zw" | "S_antisymmetry" => tol.antisymmetry,
            "pair_interchange" | "pair_symmetry" | "reeb_curvature_vanishes" => tol.pair_symmetry,
            "space_form_c_minus_3" | "round_sphere_riemann" => tol.space_form,
            _ => tol.constant_curvature,
        };
        rep.push(ResidualEntry::new(name, x, v, tl));
    }
    rep
}

/// Curvature identity suite over sample points.
pub fn identity_suite(model: &dyn ModelManifold, points: &[Vector], trials: usize) -> ResidualReport {
    identity_suite_with(model, points, trials, 0, Exec::default())
}

pub fn identity_suite_with(
    model: &dyn ModelManifold,
    points: &[Vector],
    trials: usize,
    seed: u64,
    exec: Exec,
) -> ResidualReport {
    let tol = IdentityTolerances::for_model(model);
    let reps = par::map(exec, points.len(), |i| {
        identity_residuals_at(model, &points[i], trials, seed.wrapping_add(i as u64), tol)
    });
    let mut out = ResidualReport::default();
    for r in reps {
        out.extend(r);
    }
    out
}

/// Tanaka-Webster axiom residuals over sample points, as a report.
pub fn axiom_report(model: &dyn ModelManifold, points: &[Vector], tolerance: f64, exec: Exec) -> ResidualReport {
    let reps = par::map(exec, points.len(), |i| {
        let g = PointGeometry::at(model, &points[i]);
        let mut r = ResidualReport::default();
        for (name, v) in g.tw_residuals().into_iter().chain(g.lc_residuals()) {
            r.push(ResidualEntry::new(&name, &points[i], v, tolerance));
        }
        r
    });
    let mut out = ResidualReport::default();
    for r in reps {
        out.extend(r);
    }
    out
}
