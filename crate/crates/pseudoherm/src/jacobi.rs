//! Parallel transport, Jacobi fields, conjugate and horizontally conjugate
//! points, the decomposition X = aγ̇ + b·tγ̇ + Y and index forms.
//!
//! Jacobi fields are represented by components in a parallel orthonormal
//! frame `E_0 = γ̇/|γ̇|, E_1 = JE_0, …, E_{2n} = T`. In that frame the
//! Jacobi equation reads `x″ = M1 x′ + M0 x` with
//! `M1 = 2 e_T ωᵀ − (τγ̇) e_Tᵀ`, `M0 = −K − ((∇_γ̇τ)γ̇) e_Tᵀ`,
//! `K_ij = g(R(E_j,γ̇)γ̇, E_i)` and `ω_j = Ω(E_j, γ̇)`.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::connection::{ricci_from, sectional_from, CurvatureAt, PointGeometry};
use crate::error::{GeomError, Result};
use crate::field::{FieldAlong, Jet, Side};
use crate::geodesics::CurveSolution;
use crate::linalg::{hermite, hermite_vec, null_space, simpson, singular_values, Matrix, Vector};
use crate::manifold::ModelManifold;
use crate::par::{self, Exec};

/// Orthonormal frame transported along a curve with ∇_γ̇E = 0, sampled on
/// a grid of half the curve's step.
#[derive(Debug, Clone)]
pub struct ParallelFrame {
    pub t: Vec<f64>,
    /// `e[k][i]`: ambient components of `E_i` at `t[k]`.
    pub e: Vec<Vec<Vector>>,
    pub de: Vec<Vec<Vector>>,
    pub step: f64,
}

fn transport_rate(model: &dyn ModelManifold, x: &Vector, v: &Vector, frame: &[Vector]) -> Vec<Vector> {
    let g = PointGeometry::at(model, x);
    let w = g.coeffs(v);
    let m = g.m;
    frame
        .iter()
        .map(|e| {
            let u = g.coeffs(e);
            let mut ud = Vector::zeros(m);
            for a in 0..m {
                if w[a] == 0.0 {
                    continue;
                }
                for b in 0..m {
                    let wu = w[a] * u[b];
                    if wu == 0.0 {
                        continue;
                    }
                    for c in 0..m {
                        ud[c] -= g.gamma.get(a, b, c) * wu;
                    }
                }
            }
            g.ambient(&ud) + g.frame_field_derivative(&u, &w)
        })
        .collect()
}

/// `E_0 = v/|v|`, `E_1 = JE_0`, a J-adapted completion of H(M), then T.
pub fn adapted_initial_frame(model: &dyn ModelManifold, x: &Vector, v: &Vector) -> Result<Vec<Vector>> {
    let g = PointGeometry::at(model, x);
    let m = g.m;
    let t = g.t();
    let mut w = g.coeffs(v);
    w[t] = 0.0;
    let nw = w.norm();
    if nw < 1e-12 {
        return Err(GeomError::Domain("parallel frame needs a curve with nonzero horizontal velocity".into()));
    }
    let mut basis: Vec<Vector> = Vec::with_capacity(m);
    let e0 = w / nw;
    let e1 = &g.jm * &e0;
    basis.push(e0);
    basis.push(e1);
    for k in 0..t {
        if basis.len() >= t {
            break;
        }
        let mut c = Vector::zeros(m);
        c[k] = 1.0;
        for q in &basis {
            let d = q.dot(&c);
            c -= q * d;
        }
        let nc = c.norm();
        if nc < 1e-6 {
            continue;
        }
        let c = c / nc;
        let jc = &g.jm * &c;
        basis.push(c);
        basis.push(jc);
    }
    let mut tv = Vector::zeros(m);
    tv[t] = 1.0;
    basis.push(tv);
    Ok(basis.iter().map(|u| g.ambient(u)).collect())
}

impl ParallelFrame {
    /// Transports the adapted frame at the curve's start.
    pub fn new(sol: &CurveSolution) -> Result<Self> {
        let m = sol.model.as_ref();
        let init = adapted_initial_frame(m, &sol.x[0], &sol.v[0])?;
        Self::from_initial(sol, init)
    }

    /// Transports a given initial frame (ambient vectors).
    pub fn from_initial(sol: &CurveSolution, init: Vec<Vector>) -> Result<Self> {
        let model = sol.model.as_ref();
        let hf = 0.5 * sol.h;
        let steps = 2 * (sol.len() - 1);
        let mut t = Vec::with_capacity(steps + 1);
        let mut es = Vec::with_capacity(steps + 1);
        let mut des = Vec::with_capacity(steps + 1);
        let mut e = init;
        let at = |tt: f64| sol.eval(tt);
        let rate = |tt: f64, frame: &[Vector]| {
            let (x, v) = at(tt);
            transport_rate(model, &x, &v, frame)
        };
        let shift = |frame: &[Vector], k: &[Vector], c: f64| -> Vec<Vector> { frame.iter().zip(k).map(|(a, b)| a + b * c).collect() };
        for i in 0..=steps {
            let ti = sol.t0() + i as f64 * hf;
            let k1 = rate(ti, &e);
            t.push(ti);
            es.push(e.clone());
            des.push(k1.clone());
            if i == steps {
                break;
            }
            let k2 = rate(ti + 0.5 * hf, &shift(&e, &k1, 0.5 * hf));
            let k3 = rate(ti + 0.5 * hf, &shift(&e, &k2, 0.5 * hf));
            let k4 = rate(ti + hf, &shift(&e, &k3, hf));
            let x_next = sol.x[(i + 1) / 2].clone();
            let x_next = if (i + 1) % 2 == 0 { x_next } else { at(ti + hf).0 };
            e = e
                .iter()
                .enumerate()
                .map(|(j, ej)| {
                    let n = ej + (&k1[j] + &k2[j] * 2.0 + &k3[j] * 2.0 + &k4[j]) * (hf / 6.0);
                    model.project_tangent(&x_next, &n)
                })
                .collect();
            if e.iter().any(|v| v.iter().any(|c| !c.is_finite())) {
                return Err(GeomError::Numeric(format!("parallel transport diverged at t = {ti}")));
            }
        }
        Ok(ParallelFrame { t, e: es, de: des, step: hf })
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let last = self.t.len() - 1;
        if last == 0 {
            return (0, 0.0);
        }
        let k = (((t - self.t[0]) / self.step).floor().max(0.0) as usize).min(last - 1);
        (k, t - self.t[k])
    }

    /// Frame at `t` by Hermite interpolation.
    pub fn frame_at(&self, t: f64) -> Vec<Vector> {
        if self.t.len() == 1 {
            return self.e[0].clone();
        }
        let (k, s) = self.locate(t);
        if s.abs() < 1e-14 {
            return self.e[k].clone();
        }
        (0..self.e[k].len())
            .map(|i| hermite_vec(&self.e[k][i], &self.de[k][i], &self.e[k + 1][i], &self.de[k + 1][i], self.step, s).0)
            .collect()
    }

    /// Max deviation of the Webster Gram matrix from the identity.
    pub fn gram_drift(&self, model: &dyn ModelManifold, sol: &CurveSolution) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, t) in self.t.iter().enumerate() {
            let p = frame_matrix(model, &sol.point(*t), &self.e[k]);
            let d = p.transpose() * &p - Matrix::identity(p.ncols(), p.ncols());
            worst = worst.max(d.amax());
        }
        worst
    }

    /// Max deviation of the matrix of J in this frame from its initial value.
    pub fn j_drift(&self, model: &dyn ModelManifold, sol: &CurveSolution) -> f64 {
        let jmat = |k: usize| {
            let x = sol.point(self.t[k]);
            let g = PointGeometry::at(model, &x);
            let p = frame_matrix(model, &x, &self.e[k]);
            p.transpose() * &g.jm * &p
        };
        let j0 = jmat(0);
        (0..self.t.len()).map(|k| (jmat(k) - &j0).amax()).fold(0.0, f64::max)
    }
}

/// Columns: model-frame coefficients of the given ambient vectors.
fn frame_matrix(model: &dyn ModelManifold, x: &Vector, e: &[Vector]) -> Matrix {
    let g = PointGeometry::at(model, x);
    Matrix::from_columns(&e.iter().map(|v| g.coeffs(v)).collect::<Vec<_>>())
}

/// Coefficients of the Jacobi equation at one parameter.
#[derive(Debug, Clone)]
pub struct AlongCoeffs {
    pub k: Matrix,
    pub omega: Vector,
    pub tau_g: Vector,
    pub dtau_gg: Vector,
    /// γ̇ in parallel-frame components.
    pub gdot: Vector,
    pub a_gg: f64,
    pub speed: f64,
}

impl AlongCoeffs {
    pub fn m1(&self) -> Matrix {
        let m = self.omega.len();
        let t = m - 1;
        let mut out = Matrix::zeros(m, m);
        for j in 0..m {
            out[(t, j)] += 2.0 * self.omega[j];
            out[(j, t)] -= self.tau_g[j];
        }
        out
    }

    pub fn m0(&self) -> Matrix {
        let m = self.omega.len();
        let t = m - 1;
        let mut out = -&self.k;
        for j in 0..m {
            out[(j, t)] -= self.dtau_gg[j];
        }
        out
    }

    /// First-order system matrix for `(x, x′)`.
    pub fn system(&self) -> Matrix {
        let m = self.omega.len();
        let mut a = Matrix::zeros(2 * m, 2 * m);
        for i in 0..m {
            a[(i, m + i)] = 1.0;
        }
        a.view_mut((m, 0), (m, m)).copy_from(&self.m0());
        a.view_mut((m, m), (m, m)).copy_from(&self.m1());
        a
    }

    pub fn second_derivative(&self, x: &Vector, xp: &Vector) -> Vector {
        self.m1() * xp + self.m0() * x
    }
}

fn along_coeffs(model: &dyn ModelManifold, x: &Vector, v: &Vector, frame: &[Vector]) -> AlongCoeffs {
    let c = CurvatureAt::new(model, x, false);
    let p = Matrix::from_columns(&frame.iter().map(|e| c.geom.coeffs(e)).collect::<Vec<_>>());
    let w = c.geom.coeffs(v);
    let m = c.m();
    let mut k = Matrix::zeros(m, m);
    for j in 0..m {
        let rj = c.r_xyz(&p.column(j).into_owned(), &w, &w);
        for i in 0..m {
            k[(i, j)] = p.column(i).dot(&rj);
        }
    }
    let pt = p.transpose();
    let tau_w = c.tau(&w);
    AlongCoeffs {
        k,
        omega: &pt * (&c.geom.jm * &w),
        tau_g: &pt * &tau_w,
        dtau_gg: &pt * c.dtau_uw(&w, &w),
        gdot: &pt * &w,
        a_gg: tau_w.dot(&w),
        speed: w.norm(),
    }
}

/// Jacobi equation data along a geodesic: parallel frame, tabulated
/// coefficients and the fundamental matrix of `(x, x′)`.
#[derive(Debug)]
pub struct JacobiSystem {
    pub sol: CurveSolution,
    pub frame: ParallelFrame,
    /// Coefficients on the frame grid (half the curve step).
    pub coeffs: Vec<AlongCoeffs>,
    /// Fundamental matrices at the curve nodes.
    pub phi: Vec<Matrix>,
    cache: Mutex<HashMap<u64, AlongCoeffs>>,
}

impl JacobiSystem {
    pub fn new(sol: &CurveSolution) -> Result<Arc<Self>> {
        Self::with_exec(sol, Exec::default())
    }

    pub fn with_exec(sol: &CurveSolution, exec: Exec) -> Result<Arc<Self>> {
        if sol.len() < 2 {
            return Err(GeomError::Domain("Jacobi system needs a curve with at least two nodes".into()));
        }
        let frame = ParallelFrame::new(sol)?;
        Self::from_frame(sol, frame, exec)
    }

    pub fn from_frame(sol: &CurveSolution, frame: ParallelFrame, exec: Exec) -> Result<Arc<Self>> {
        let model = sol.model.as_ref();
        let coeffs = par::map(exec, frame.t.len(), |k| {
            let (x, v) = sol.eval(frame.t[k]);
            along_coeffs(model, &x, &v, &frame.e[k])
        });
        if coeffs.iter().any(|c| c.k.iter().any(|v| !v.is_finite())) {
            return Err(GeomError::Numeric("non-finite curvature along the curve".into()));
        }
        let m = model.dim();
        let h = sol.h;
        let mut phi = Vec::with_capacity(sol.len());
        let mut y = Matrix::identity(2 * m, 2 * m);
        phi.push(y.clone());
        for k in 0..sol.len() - 1 {
            let a1 = coeffs[2 * k].system();
            let a2 = coeffs[2 * k + 1].system();
            let a3 = coeffs[2 * k + 2].system();
            let k1 = &a1 * &y;
            let k2 = &a2 * (&y + &k1 * (0.5 * h));
            let k3 = &a2 * (&y + &k2 * (0.5 * h));
            let k4 = &a3 * (&y + &k3 * h);
            y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            phi.push(y.clone());
        }
        Ok(Arc::new(JacobiSystem { sol: sol.clone(), frame, coeffs, phi, cache: Mutex::new(HashMap::new()) }))
    }

    pub fn m(&self) -> usize {
        self.coeffs[0].omega.len()
    }

    pub fn t0(&self) -> f64 {
        self.sol.t0()
    }

    pub fn t_end(&self) -> f64 {
        self.sol.t_end()
    }

    pub fn speed(&self) -> f64 {
        self.coeffs[0].speed
    }

    /// Coefficients at any parameter (grid values reused, others cached).
    pub fn coeffs_at(&self, t: f64) -> AlongCoeffs {
        let pos = (t - self.frame.t[0]) / self.frame.step;
        let k = pos.round();
        if (pos - k).abs() < 1e-9 && k >= 0.0 && (k as usize) < self.coeffs.len() {
            return self.coeffs[k as usize].clone();
        }
        let key = t.to_bits();
        if let Some(c) = self.cache.lock().unwrap().get(&key) {
            return c.clone();
        }
        let (x, v) = self.sol.eval(t);
        let c = along_coeffs(self.sol.model.as_ref(), &x, &v, &self.frame.frame_at(t));
        self.cache.lock().unwrap().insert(key, c.clone());
        c
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let last = self.phi.len() - 1;
        let k = (((t - self.t0()) / self.sol.h).floor().max(0.0) as usize).min(last - 1);
        (k, t - self.sol.t[k])
    }

    /// Fundamental matrix at `t` (Hermite interpolation between nodes).
    pub fn phi_at(&self, t: f64) -> Matrix {
        let (k, s) = self.locate(t);
        if s.abs() < 1e-14 {
            return self.phi[k].clone();
        }
        if (s - self.sol.h).abs() < 1e-14 {
            return self.phi[k + 1].clone();
        }
        let d0 = self.coeffs[2 * k].system() * &self.phi[k];
        let d1 = self.coeffs[2 * k + 2].system() * &self.phi[k + 1];
        let (n, c) = self.phi[k].shape();
        Matrix::from_fn(n, c, |i, j| hermite(self.phi[k][(i, j)], d0[(i, j)], self.phi[k + 1][(i, j)], d1[(i, j)], self.sol.h, s).0)
    }

    /// `Φ(t) Φ(a)⁻¹`: propagator from `a` to `t`.
    pub fn propagator(&self, a: f64, t: f64) -> Result<Matrix> {
        let pa = self.phi_at(a);
        let inv = pa.try_inverse().ok_or_else(|| GeomError::Numeric("singular fundamental matrix".into()))?;
        Ok(self.phi_at(t) * inv)
    }

    fn check_time(&self, t: f64) -> Result<()> {
        let eps = 1e-9 * self.t_end().abs().max(1.0);
        if t < self.t0() - eps || t > self.t_end() + eps {
            return Err(GeomError::Domain(format!("t = {t} outside [{}, {}]", self.t0(), self.t_end())));
        }
        Ok(())
    }

    /// Jacobi field with `X(t0) = x0`, `X′(t0) = x0p`.
    pub fn integrate(&self, x0: &Vector, x0p: &Vector) -> Result<JacobiField> {
        self.field_from_state(self.t0(), x0, x0p)
    }

    /// Jacobi field with prescribed value and derivative at `ta`.
    pub fn field_from_state(&self, ta: f64, xa: &Vector, xpa: &Vector) -> Result<JacobiField> {
        let m = self.m();
        if xa.len() != m || xpa.len() != m {
            return Err(GeomError::DimensionMismatch { expected: m, got: xa.len().max(xpa.len()) });
        }
        self.check_time(ta)?;
        let mut y = Vector::zeros(2 * m);
        y.rows_mut(0, m).copy_from(xa);
        y.rows_mut(m, m).copy_from(xpa);
        let y0 = if (ta - self.t0()).abs() < 1e-15 {
            y
        } else {
            self.phi_at(ta).lu().solve(&y).ok_or_else(|| GeomError::Numeric("singular fundamental matrix".into()))?
        };
        Ok(self.field_from_seed(&y0))
    }

    /// Field with initial state `y0 = (x(t0), x′(t0))`.
    pub fn field_from_seed(&self, y0: &Vector) -> JacobiField {
        let m = self.m();
        let mut x = Vec::with_capacity(self.phi.len());
        let mut xp = Vec::with_capacity(self.phi.len());
        let mut xpp = Vec::with_capacity(self.phi.len());
        for (k, p) in self.phi.iter().enumerate() {
            let y = p * y0;
            let xv = y.rows(0, m).into_owned();
            let xd = y.rows(m, m).into_owned();
            xpp.push(self.coeffs[2 * k].second_derivative(&xv, &xd));
            x.push(xv);
            xp.push(xd);
        }
        JacobiField { t: self.sol.t.clone(), x, xp, xpp, h: self.sol.h }
    }

    /// Samples `f(t) = (x, x′)` on the curve nodes.
    pub fn field_from_fn<F: Fn(f64) -> (Vector, Vector)>(&self, f: F) -> JacobiField {
        let mut x = Vec::new();
        let mut xp = Vec::new();
        let mut xpp = Vec::new();
        for (k, t) in self.sol.t.iter().enumerate() {
            let (a, b) = f(*t);
            xpp.push(self.coeffs[2 * k].second_derivative(&a, &b));
            x.push(a);
            xp.push(b);
        }
        JacobiField { t: self.sol.t.clone(), x, xp, xpp, h: self.sol.h }
    }

    /// Max over interior nodes of |x″ − M1x′ − M0x| with x′, x″ taken
    /// from five-point differences of the sampled values.
    pub fn residual(&self, field: &JacobiField) -> f64 {
        let h = field.h;
        let n = field.x.len();
        let mut worst: f64 = 0.0;
        for k in 2..n.saturating_sub(2) {
            let (xm2, xm1, x0, xp1, xp2) = (&field.x[k - 2], &field.x[k - 1], &field.x[k], &field.x[k + 1], &field.x[k + 2]);
            let d1 = (xm2 - xm1 * 8.0 + xp1 * 8.0 - xp2) / (12.0 * h);
            let d2 = (-xm2 + xm1 * 16.0 - x0 * 30.0 + xp1 * 16.0 - xp2) / (12.0 * h * h);
            let r = d2 - self.coeffs[2 * k].second_derivative(x0, &d1);
            worst = worst.max(r.amax());
        }
        worst
    }

    /// Rank of the map from initial data to trajectories.
    pub fn solution_space_dim(&self) -> usize {
        let m = self.m();
        let stride = (self.phi.len() / 40).max(1);
        let rows: Vec<Matrix> = self.phi.iter().step_by(stride).map(|p| p.rows(0, m).into_owned()).collect();
        let mut big = Matrix::zeros(rows.len() * m, 2 * m);
        for (i, r) in rows.iter().enumerate() {
            big.view_mut((i * m, 0), (m, 2 * m)).copy_from(r);
        }
        crate::linalg::rank(&big, 1e-6)
    }

    /// Values `X(t)` of the fields with `X(a) = 0`, `X′(a) = e_i`.
    pub fn value_matrix(&self, a: f64, t: f64) -> Result<Matrix> {
        let m = self.m();
        Ok(self.propagator(a, t)?.view((0, m), (m, m)).into_owned())
    }

    /// Basis (columns of initial states at `a`) of Jacobi fields whose
    /// initial data are horizontal and which stay horizontal on `[a, b]`.
    pub fn horizontal_seeds(&self, a: f64, b: f64) -> Result<Matrix> {
        let m = self.m();
        let t = m - 1;
        let n2 = m - 1;
        let mut cand = Matrix::zeros(2 * m, 2 * n2);
        for i in 0..n2 {
            cand[(i, i)] = 1.0;
            cand[(m + i, n2 + i)] = 1.0;
        }
        let nodes: Vec<f64> = self.sol.t.iter().copied().filter(|s| *s >= a - 1e-12 && *s <= b + 1e-12).collect();
        let stride = (nodes.len() / 200).max(1);
        let mut sel: Vec<f64> = nodes.iter().step_by(stride).copied().collect();
        if let Some(last) = nodes.last() {
            if sel.last() != Some(last) {
                sel.push(*last);
            }
        }
        sel.push(b);
        let pa_inv = self.phi_at(a).try_inverse().ok_or_else(|| GeomError::Numeric("singular fundamental matrix".into()))?;
        let mut rows = Matrix::zeros(sel.len(), 2 * n2);
        for (r, s) in sel.iter().enumerate() {
            let prop = self.phi_at(*s) * &pa_inv;
            let row = prop.row(t) * &cand;
            rows.row_mut(r).copy_from(&row);
        }
        let ns = null_space(&rows, 1e-6);
        Ok(cand * ns)
    }

    /// Horizontal seeds at `a` with `X(a) = 0`.
    fn horizontal_zero_seeds(&self, a: f64, b: f64) -> Result<Matrix> {
        let m = self.m();
        let s = self.horizontal_seeds(a, b)?;
        if s.ncols() == 0 {
            return Ok(s);
        }
        let x0 = s.rows(0, m).into_owned();
        let ns = null_space(&x0, 1e-6);
        Ok(s * ns)
    }
}

/// Components of a field along the curve in the parallel frame.
#[derive(Debug, Clone)]
pub struct JacobiField {
    pub t: Vec<f64>,
    pub x: Vec<Vector>,
    pub xp: Vec<Vector>,
    pub xpp: Vec<Vector>,
    pub h: f64,
}

impl JacobiField {
    fn locate(&self, t: f64) -> (usize, f64) {
        let last = self.t.len() - 1;
        let k = (((t - self.t[0]) / self.h).floor().max(0.0) as usize).min(last - 1);
        (k, t - self.t[k])
    }

    /// (X, X′) at `t` by Hermite interpolation.
    pub fn eval(&self, t: f64) -> (Vector, Vector) {
        let (k, s) = self.locate(t);
        let (x, _) = hermite_vec(&self.x[k], &self.xp[k], &self.x[k + 1], &self.xp[k + 1], self.h, s);
        let (xp, _) = hermite_vec(&self.xp[k], &self.xpp[k], &self.xp[k + 1], &self.xpp[k + 1], self.h, s);
        (x, xp)
    }

    pub fn sup_norm(&self) -> f64 {
        self.x.iter().map(|v| v.amax()).fold(0.0, f64::max)
    }

    /// Max over nodes of |T-component|.
    pub fn reeb_sup(&self) -> f64 {
        let t = self.x[0].len() - 1;
        self.x.iter().map(|v| v[t].abs()).fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &JacobiField) -> f64 {
        self.x.iter().zip(&other.x).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max)
    }

    pub fn combine(&self, other: &JacobiField, alpha: f64, beta: f64) -> JacobiField {
        let lin = |a: &[Vector], b: &[Vector]| a.iter().zip(b).map(|(u, v)| u * alpha + v * beta).collect();
        JacobiField { t: self.t.clone(), x: lin(&self.x, &other.x), xp: lin(&self.xp, &other.xp), xpp: lin(&self.xpp, &other.xpp), h: self.h }
    }

    /// Field restricted to `[a, b]` with second derivatives from the system.
    pub fn along(&self, sys: &Arc<JacobiSystem>, a: f64, b: f64) -> FieldAlong {
        let f = self.clone();
        let sys = sys.clone();
        FieldAlong::smooth(sys.m(), a, b, move |t| {
            let (x, xp) = f.eval(t);
            let xpp = sys.coeffs_at(t).second_derivative(&x, &xp);
            (x, xp, xpp)
        })
    }

    /// CSV with header `t, X0.., Xp0..`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let m = self.x[0].len();
        let mut header = vec!["t".to_string()];
        header.extend((0..m).map(|i| format!("X{i}")));
        header.extend((0..m).map(|i| format!("Xp{i}")));
        wr.write_record(&header)?;
        for k in 0..self.t.len() {
            let mut row = vec![format!("{:.17e}", self.t[k])];
            row.extend(self.x[k].iter().map(|c| format!("{c:.17e}")));
            row.extend(self.xp[k].iter().map(|c| format!("{c:.17e}")));
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Parallel frame along a curve.
pub fn parallel_frame(sol: &CurveSolution) -> Result<ParallelFrame> {
    ParallelFrame::new(sol)
}

/// Jacobi field along `sol` with `X(0) = x0`, `X′(0) = x0p` (parallel-frame
/// components).
pub fn integrate_jacobi(sol: &CurveSolution, x0: &Vector, x0p: &Vector) -> Result<JacobiField> {
    JacobiSystem::new(sol)?.integrate(x0, x0p)
}

/// Result of splitting a Jacobi field as `aγ̇ + b·tγ̇ + Y`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub a: f64,
    pub b: f64,
    pub y: JacobiField,
    /// max_t |g(Y,γ̇)(t) + ∫_0^t θ(X)A(γ̇,γ̇)ds|.
    pub slant_residual: f64,
}

fn jacobi_gate(sys: &JacobiSystem, x: &JacobiField) -> Result<()> {
    let r = sys.residual(x);
    let scale = x.sup_norm().max(1.0);
    if r > 1e-6 * scale {
        return Err(GeomError::Domain(format!("not a Jacobi field (residual {r:e})")));
    }
    Ok(())
}

/// Unique decomposition X = aγ̇ + b·(t − t0)γ̇ + Y with the slant condition
/// g(Y,γ̇)(t) + ∫θ(X)A(γ̇,γ̇) = 0.
pub fn decompose(sys: &JacobiSystem, x: &JacobiField) -> Result<Decomposition> {
    jacobi_gate(sys, x)?;
    let m = sys.m();
    let t_idx = m - 1;
    let c0 = &sys.coeffs[0];
    let s = c0.speed;
    let s2 = s * s;
    let a = x.x[0].dot(&c0.gdot) / s2;
    let b = (x.xp[0].dot(&c0.gdot) + x.x[0][t_idx] * c0.a_gg) / s2;
    let t0 = sys.t0();
    let mut y = x.clone();
    for k in 0..y.t.len() {
        let tt = y.t[k] - t0;
        y.x[k][0] -= (a + b * tt) * s;
        y.xp[k][0] -= b * s;
    }
    let mut integral = 0.0;
    let mut worst: f64 = 0.0;
    let mut prev = x.x[0][t_idx] * sys.coeffs[0].a_gg;
    for k in 0..y.t.len() {
        if k > 0 {
            let mid = 0.5 * (x.x[k - 1][t_idx] + x.x[k][t_idx]);
            let (xm, _) = x.eval(0.5 * (x.t[k - 1] + x.t[k]));
            let mid = if xm.len() == m { xm[t_idx] } else { mid };
            let fm = mid * sys.coeffs[2 * k - 1].a_gg;
            let fk = x.x[k][t_idx] * sys.coeffs[2 * k].a_gg;
            integral += x.h / 6.0 * (prev + 4.0 * fm + fk);
            prev = fk;
        }
        let gy = y.x[k].dot(&sys.coeffs[2 * k].gdot);
        worst = worst.max((gy + integral).abs());
    }
    Ok(Decomposition { a, b, y, slant_residual: worst })
}

/// Mean and drift of a conserved quantity.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Conserved {
    pub mean: f64,
    pub drift: f64,
}

fn conserved(values: &[f64]) -> Conserved {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let drift = values.iter().map(|v| (v - values[0]).abs()).fold(0.0, f64::max);
    Conserved { mean, drift }
}

/// The two first integrals of a Jacobi field:
/// g(X′,γ̇) + θ(X)A(γ̇,γ̇) and θ(X)′ − 2Ω(X,γ̇).
pub fn jacobi_constants(sys: &JacobiSystem, x: &JacobiField) -> (Conserved, Conserved) {
    let t = sys.m() - 1;
    let mut l1 = Vec::with_capacity(x.t.len());
    let mut l2 = Vec::with_capacity(x.t.len());
    for k in 0..x.t.len() {
        let c = &sys.coeffs[2 * k];
        l1.push(x.xp[k].dot(&c.gdot) + x.x[k][t] * c.a_gg);
        l2.push(x.xp[k][t] - 2.0 * x.x[k].dot(&c.omega));
    }
    (conserved(&l1), conserved(&l2))
}

/// A conjugate parameter with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConjugatePoint {
    pub t: f64,
    pub multiplicity: usize,
}

fn sigma_ratio(m: &Matrix) -> (f64, f64) {
    let sv = singular_values(m);
    let max = sv.first().copied().unwrap_or(0.0);
    let min = sv.last().copied().unwrap_or(0.0);
    (min / max.max(1e-300), max)
}

fn multiplicity(m: &Matrix) -> usize {
    let sv = singular_values(m);
    let max = sv.first().copied().unwrap_or(0.0);
    sv.iter().filter(|s| **s < 1e-6 * max).count()
}

fn golden_min<F: Fn(f64) -> f64>(mut lo: f64, mut hi: f64, tol: f64, f: F) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

fn bisect<F: Fn(f64) -> f64>(mut lo: f64, mut hi: f64, tol: f64, f: F) -> f64 {
    let mut flo = f(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Zeros of a family `t ↦ V(t)` of value matrices on the nodes in `(a, b]`:
/// sign changes of det (square case) refined by bisection, plus minima
/// of σ_min/σ_max refined by golden-section search.
fn scan_zeros<F>(sys: &JacobiSystem, a: f64, b: f64, square: bool, vm: F) -> Vec<ConjugatePoint>
where
    F: Fn(f64) -> Matrix + Sync,
{
    let h = sys.sol.h;
    let nodes: Vec<f64> = sys.sol.t.iter().copied().filter(|t| *t > a + 0.5 * h && *t <= b + 1e-12).collect();
    if nodes.len() < 2 {
        return Vec::new();
    }
    let mats: Vec<Matrix> = par::map(Exec::default(), nodes.len(), |i| vm(nodes[i]));
    let mut found: Vec<f64> = Vec::new();
    if square {
        let dets: Vec<f64> = mats.iter().map(|m| m.determinant()).collect();
        for i in 0..nodes.len() - 1 {
            if dets[i] == 0.0 {
                found.push(nodes[i]);
            } else if dets[i] * dets[i + 1] < 0.0 {
                found.push(bisect(nodes[i], nodes[i + 1], 1e-10, |t| vm(t).determinant()));
            }
        }
    }
    let ratios: Vec<f64> = mats.iter().map(|m| sigma_ratio(m).0).collect();
    for i in 1..nodes.len() - 1 {
        if ratios[i] <= ratios[i - 1] && ratios[i] <= ratios[i + 1] && ratios[i] < 1e-2 {
            let t = golden_min(nodes[i - 1], nodes[i + 1], 1e-10, |t| sigma_ratio(&vm(t)).0);
            if sigma_ratio(&vm(t)).0 < 1e-6 && !found.iter().any(|f| (f - t).abs() < 1e-6) {
                found.push(t);
            }
        }
    }
    found.sort_by(f64::total_cmp);
    found
        .into_iter()
        .map(|t| ConjugatePoint { t, multiplicity: multiplicity(&vm(t)).max(1) })
        .collect()
}

/// Conjugate points of `γ(t0)` along the curve in `(t0, t_max]`.
pub fn conjugate_points(sys: &JacobiSystem, t_max: f64) -> Vec<ConjugatePoint> {
    conjugate_points_from(sys, sys.t0(), t_max)
}

/// Conjugate points of `γ(a)` in `(a, b]`.
pub fn conjugate_points_from(sys: &JacobiSystem, a: f64, b: f64) -> Vec<ConjugatePoint> {
    let b = b.min(sys.t_end());
    match sys.phi_at(a).try_inverse() {
        Some(inv) => {
            let m = sys.m();
            scan_zeros(sys, a, b, true, |t| (sys.phi_at(t) * &inv).view((0, m), (m, m)).into_owned())
        }
        None => Vec::new(),
    }
}

/// Horizontally conjugate points of `γ(t0)` in `(t0, t_max]`.
pub fn horizontally_conjugate(sys: &JacobiSystem, t_max: f64) -> Result<Vec<ConjugatePoint>> {
    horizontally_conjugate_from(sys, sys.t0(), t_max)
}

/// Horizontally conjugate points of `γ(a)` in `(a, b]`.
pub fn horizontally_conjugate_from(sys: &JacobiSystem, a: f64, b: f64) -> Result<Vec<ConjugatePoint>> {
    let b = b.min(sys.t_end());
    let seeds = sys.horizontal_zero_seeds(a, b)?;
    if seeds.ncols() == 0 {
        return Ok(Vec::new());
    }
    let m = sys.m();
    let inv = sys.phi_at(a).try_inverse().ok_or_else(|| GeomError::Numeric("singular fundamental matrix".into()))?;
    Ok(scan_zeros(sys, a, b, false, |t| (sys.phi_at(t) * &inv).rows(0, m) * &seeds))
}

/// Dimension of the space of horizontal Jacobi fields on the whole curve.
pub fn horizontal_dim(sys: &JacobiSystem) -> Result<usize> {
    Ok(sys.horizontal_seeds(sys.t0(), sys.t_end())?.ncols())
}

/// Jacobi field with `X(ta) = xa`, `X(tb) = xb`.
pub fn jacobi_bvp(sys: &JacobiSystem, ta: f64, tb: f64, xa: &Vector, xb: &Vector) -> Result<JacobiField> {
    sys.check_time(ta)?;
    sys.check_time(tb)?;
    let m = sys.m();
    let prop = sys.propagator(ta, tb)?;
    let pxx = prop.view((0, 0), (m, m)).into_owned();
    let pxp = prop.view((0, m), (m, m)).into_owned();
    let (ratio, _) = sigma_ratio(&pxp);
    if ratio < 1e-8 {
        return Err(GeomError::ConjugateInterval(format!("γ({ta}) and γ({tb}) are conjugate")));
    }
    let rhs = xb - &pxx * xa;
    let p = pxp.lu().solve(&rhs).ok_or_else(|| GeomError::ConjugateInterval("singular shooting matrix".into()))?;
    sys.field_from_state(ta, xa, &p)
}

/// Horizontal Jacobi field with `X(ta) = xa`, `X(tb) = xb`, solved inside
/// the horizontal solution space on `[ta, tb]`.
pub fn jacobi_bvp_horizontal(sys: &JacobiSystem, ta: f64, tb: f64, xa: &Vector, xb: &Vector) -> Result<(JacobiField, f64)> {
    let m = sys.m();
    let seeds = sys.horizontal_seeds(ta, tb)?;
    if seeds.ncols() == 0 {
        return Err(GeomError::HypothesisViolation("no horizontal Jacobi fields on the window".into()));
    }
    let prop = sys.propagator(ta, tb)?;
    let mut lhs = Matrix::zeros(2 * m, seeds.ncols());
    lhs.view_mut((0, 0), (m, seeds.ncols())).copy_from(&seeds.rows(0, m));
    lhs.view_mut((m, 0), (m, seeds.ncols())).copy_from(&(prop.rows(0, m) * &seeds));
    let mut rhs = Vector::zeros(2 * m);
    rhs.rows_mut(0, m).copy_from(xa);
    rhs.rows_mut(m, m).copy_from(xb);
    let coef = crate::linalg::pinv(&lhs, 1e-12) * &rhs;
    let residual = (&lhs * &coef - &rhs).amax();
    let y = &seeds * coef;
    let field = sys.field_from_state(ta, &y.rows(0, m).into_owned(), &y.rows(m, m).into_owned())?;
    Ok((field, residual))
}

fn quad_pieces<F>(a: f64, b: f64, fields: &[&FieldAlong], dx: f64, f: F) -> f64
where
    F: Fn(f64, Side) -> f64 + Sync,
{
    let mut total = 0.0;
    for (p, q) in FieldAlong::pieces(a, b, fields) {
        let n = ((q - p) / dx).ceil().max(2.0) as usize;
        let n = n + n % 2;
        let step = (q - p) / n as f64;
        let vals = par::map(Exec::default(), n + 1, |i| {
            let t = if i == n { q } else { p + step * i as f64 };
            let side = if i == n { Side::Left } else { Side::Right };
            f(t, side)
        });
        total += simpson(&vals, step);
    }
    total
}

fn check_interval(sys: &JacobiSystem, a: f64, b: f64) -> Result<()> {
    if b <= a {
        return Err(GeomError::Domain(format!("empty interval [{a}, {b}]")));
    }
    sys.check_time(a)?;
    sys.check_time(b)
}

fn check_vanishing(x: &FieldAlong, a: f64, b: f64) -> Result<()> {
    let scale = 1e-8;
    if x.jet(a, Side::Right).0.amax() > scale || x.jet(b, Side::Left).0.amax() > scale {
        return Err(GeomError::Domain("index form needs fields vanishing at both ends".into()));
    }
    Ok(())
}

fn perp(v: &Vector) -> Vector {
    let mut p = v.clone();
    p[0] = 0.0;
    p
}

/// Quadrature spacing used by the index forms.
fn quad_dx(sys: &JacobiSystem) -> f64 {
    0.5 * sys.sol.h
}

/// Index form I(X,Y) on [a,b] of a Sasakian lengthy geodesic.
pub fn index_form(sys: &JacobiSystem, x: &FieldAlong, y: &FieldAlong, a: f64, b: f64) -> Result<f64> {
    if !sys.sol.model.is_sasakian() {
        return Err(GeomError::Domain("index form requires a Sasakian model".into()));
    }
    check_interval(sys, a, b)?;
    check_vanishing(x, a, b)?;
    check_vanishing(y, a, b)?;
    let t_idx = sys.m() - 1;
    let r = sys.speed();
    let val = quad_pieces(a, b, &[x, y], quad_dx(sys), |t, side| {
        let c = sys.coeffs_at(t);
        let (xv, xd, _) = x.jet(t, side);
        let (yv, yd, _) = y.jet(t, side);
        let (xv, xd, yv, yd) = (perp(&xv), perp(&xd), perp(&yv), perp(&yd));
        let om_x = c.omega.dot(&xv);
        let om_y = c.omega.dot(&yv);
        xd.dot(&yd) - yv.dot(&(&c.k * &xv)) - 2.0 * om_x * yd[t_idx] - 2.0 * (xd[t_idx] - 2.0 * om_x) * om_y
    });
    Ok(val / r)
}

/// Integration-by-parts form of the index form, with the Jacobi operator
/// 𝒥X = X″ − 2Ω(X′,γ̇)T + R(X,γ̇)γ̇ and corner jumps of ∇X.
pub fn index_form_by_parts(sys: &JacobiSystem, x: &FieldAlong, y: &FieldAlong, a: f64, b: f64) -> Result<f64> {
    if !sys.sol.model.is_sasakian() {
        return Err(GeomError::Domain("index form requires a Sasakian model".into()));
    }
    check_interval(sys, a, b)?;
    check_vanishing(x, a, b)?;
    check_vanishing(y, a, b)?;
    let t_idx = sys.m() - 1;
    let r = sys.speed();
    let integral = quad_pieces(a, b, &[x, y], quad_dx(sys), |t, side| {
        let c = sys.coeffs_at(t);
        let (xv, xd, xdd) = x.jet(t, side);
        let yv = perp(&y.jet(t, side).0);
        let (xv, xd, xdd) = (perp(&xv), perp(&xd), perp(&xdd));
        let mut jx = xdd + &c.k * &xv;
        jx[t_idx] -= 2.0 * c.omega.dot(&xd);
        let om_x = c.omega.dot(&xv);
        let om_y = c.omega.dot(&yv);
        jx.dot(&yv) + 2.0 * (xd[t_idx] - 2.0 * om_x) * om_y
    });
    let mut corners = 0.0;
    for c in x.breaks.iter().filter(|c| **c > a + 1e-12 && **c < b - 1e-12) {
        let jump = perp(&x.derivative(*c, Side::Left)) - perp(&x.derivative(*c, Side::Right));
        corners += jump.dot(&perp(&y.value(*c)));
    }
    Ok((corners - integral) / r)
}

/// I_a^b(X) = ∫ |X′|² − g(R(X,γ̇)γ̇, X).
pub fn index_i_ab(sys: &JacobiSystem, x: &FieldAlong, a: f64, b: f64) -> Result<f64> {
    check_interval(sys, a, b)?;
    Ok(quad_pieces(a, b, &[x], quad_dx(sys), |t, side| {
        let c = sys.coeffs_at(t);
        let (xv, xd, _) = x.jet(t, side);
        xd.dot(&xd) - xv.dot(&(&c.k * &xv))
    }))
}

/// ∫_a^b Ω(Y^⊥, γ̇) dt.
pub fn omega_integral(sys: &JacobiSystem, y: &FieldAlong, a: f64, b: f64) -> Result<f64> {
    check_interval(sys, a, b)?;
    Ok(quad_pieces(a, b, &[y], quad_dx(sys), |t, side| sys.coeffs_at(t).omega.dot(&perp(&y.jet(t, side).0))))
}

/// Outcome of comparing the index of a field with that of a Jacobi field.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IndexComparison {
    pub ix: f64,
    pub iy: f64,
    pub fields_equal: bool,
    pub pass: bool,
}

/// Compares I_a^b(X) with I_a^b(Y) for a horizontal Jacobi field Y.
pub fn index_comparison(sys: &JacobiSystem, x: &FieldAlong, y: &JacobiField, a: f64, b: f64) -> Result<IndexComparison> {
    if !sys.sol.model.is_sasakian() {
        return Err(GeomError::Domain("index comparison requires a Sasakian model".into()));
    }
    check_interval(sys, a, b)?;
    if let Some(c) = conjugate_points_from(sys, a, b).first() {
        return Err(GeomError::Domain(format!("γ(a) has a conjugate point at t = {}", c.t)));
    }
    jacobi_gate(sys, y)?;
    let scale = y.sup_norm().max(1.0);
    let t_idx = sys.m() - 1;
    let nodes: Vec<usize> = (0..y.t.len()).filter(|k| y.t[*k] >= a - 1e-12 && y.t[*k] <= b + 1e-12).collect();
    if nodes.iter().any(|k| y.x[*k][t_idx].abs() > 1e-7 * scale) {
        return Err(GeomError::Domain("Y is not horizontal".into()));
    }
    if nodes.iter().any(|k| y.x[*k][0].abs() > 1e-7 * scale) {
        return Err(GeomError::Domain("Y is not perpendicular to γ".into()));
    }
    let (ya, _) = y.eval(a);
    let (yb, _) = y.eval(b);
    if ya.amax() > 1e-8 * scale {
        return Err(GeomError::Domain("Y(a) ≠ 0".into()));
    }
    if x.jet(a, Side::Right).0.amax() > 1e-8 * scale {
        return Err(GeomError::Domain("X(a) ≠ 0".into()));
    }
    if (x.jet(b, Side::Left).0 - &yb).amax() > 1e-7 * scale {
        return Err(GeomError::Domain("X(b) ≠ Y(b)".into()));
    }
    let grid: Vec<f64> = (0..=64).map(|i| a + (b - a) * i as f64 / 64.0).collect();
    if grid.iter().any(|t| x.value(*t)[0].abs() > 1e-7 * scale) {
        return Err(GeomError::Domain("X is not perpendicular to γ".into()));
    }
    let yf = y.along(&Arc::new(sys_clone(sys)), a, b);
    let ix = index_i_ab(sys, x, a, b)?;
    let iy = index_i_ab(sys, &yf, a, b)?;
    let dist = grid.iter().map(|t| (x.value(*t) - yf.value(*t)).amax()).fold(0.0, f64::max);
    let fields_equal = dist < 1e-6;
    let equal_values = (ix - iy).abs() < 1e-8;
    let pass = ix >= iy - 1e-8 && (!equal_values || fields_equal || dist < 1e-3);
    Ok(IndexComparison { ix, iy, fields_equal, pass })
}

fn sys_clone(sys: &JacobiSystem) -> JacobiSystem {
    JacobiSystem {
        sol: sys.sol.clone(),
        frame: sys.frame.clone(),
        coeffs: sys.coeffs.clone(),
        phi: sys.phi.clone(),
        cache: Mutex::new(HashMap::new()),
    }
}

/// The broken horizontal field of negative index past a horizontally
/// conjugate point.
#[derive(Debug, Clone)]
pub struct NegativeIndexField {
    pub field: FieldAlong,
    pub i_ab: f64,
    /// Horizontal BVP residual on the window (c−δ, c+δ).
    pub bvp_residual: f64,
    /// sup |θ(Z)| on the window.
    pub window_reeb_sup: f64,
    /// Dimension of the horizontal solution space on the window.
    pub window_horizontal_dim: usize,
    pub conjugate_t: f64,
}

/// Builds X = Y on [a, c−δ], the horizontal Jacobi field Z with
/// Z(c−δ) = Y(c−δ), Z(c+δ) = 0 on the window, and 0 after, where Y is a
/// horizontal Jacobi field vanishing at a and c. Returns X and I_a^b(X).
pub fn negative_index_field(sys: &Arc<JacobiSystem>, a: f64, c: f64, b: f64, delta: f64) -> Result<NegativeIndexField> {
    if !(delta > 0.0) || !(a < c - delta) || !(c + delta < b) {
        return Err(GeomError::Domain(format!("need a < c−δ < c+δ < b, got a={a}, c={c}, b={b}, δ={delta}")));
    }
    check_interval(sys, a, b)?;
    let m = sys.m();
    let reach = (c + 0.5 * delta).min(b);
    let hc = horizontally_conjugate_from(sys, a, reach)?;
    let conj = hc
        .iter()
        .find(|p| (p.t - c).abs() < 1e-6)
        .ok_or_else(|| GeomError::HypothesisViolation(format!("γ({a}) and γ({c}) are not horizontally conjugate")))?;
    let seeds = sys.horizontal_zero_seeds(a, reach)?;
    let inv = sys.phi_at(a).try_inverse().ok_or_else(|| GeomError::Numeric("singular fundamental matrix".into()))?;
    let vh = (sys.phi_at(conj.t) * &inv).rows(0, m) * &seeds;
    let d = crate::linalg::svd(&vh, true);
    let coef = d.v.column(d.v.ncols() - 1).into_owned();
    let mut y0 = &seeds * coef;
    let scale = y0.rows(m, m).norm();
    y0 /= scale;
    let y = sys.field_from_state(a, &y0.rows(0, m).into_owned(), &y0.rows(m, m).into_owned())?;
    let (lo, hi) = (c - delta, c + delta);
    // The full Jacobi BVP on the window must be non-degenerate.
    let probe = jacobi_bvp(sys, lo, hi, &Vector::zeros(m), &Vector::zeros(m))?;
    if probe.sup_norm() > 1e-9 {
        return Err(GeomError::ConjugateInterval("window BVP is not unique".into()));
    }
    let (ylo, _) = y.eval(lo);
    let (z, bvp_residual) = jacobi_bvp_horizontal(sys, lo, hi, &ylo, &Vector::zeros(m))?;
    if bvp_residual > 1e-7 {
        return Err(GeomError::HypothesisViolation(format!("no horizontal Jacobi field solves the window BVP (residual {bvp_residual:e})")));
    }
    let t_idx = m - 1;
    let window_reeb_sup = (0..=64)
        .map(|i| z.eval(lo + (hi - lo) * i as f64 / 64.0).0[t_idx].abs())
        .fold(0.0, f64::max);
    let field = FieldAlong::concat(vec![y.along(sys, a, lo), z.along(sys, lo, hi), FieldAlong::zero(m, hi, b)])?;
    let i_ab = index_i_ab(sys, &field, a, b)?;
    let window_horizontal_dim = sys.horizontal_seeds(lo, hi)?.ncols();
    Ok(NegativeIndexField { field, i_ab, bvp_residual, window_reeb_sup, window_horizontal_dim, conjugate_t: conj.t })
}

/// Minimum sectional curvature over sampled horizontal 2-planes.
pub fn sampled_k0(model: &dyn ModelManifold, points: &[Vector], planes_per_point: usize, seed: u64) -> Result<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut k0 = f64::INFINITY;
    for x in points {
        let c = CurvatureAt::new(model, x, false);
        let n2 = c.m() - 1;
        let mut planes: Vec<(Vector, Vector)> = Vec::new();
        for i in 0..n2 {
            for j in i + 1..n2 {
                let mut u = Vector::zeros(n2 + 1);
                let mut v = Vector::zeros(n2 + 1);
                u[i] = 1.0;
                v[j] = 1.0;
                planes.push((u, v));
            }
        }
        for _ in 0..planes_per_point {
            let mut u = Vector::from_fn(n2 + 1, |_, _| rng.random_range(-1.0..1.0));
            let mut v = Vector::from_fn(n2 + 1, |_, _| rng.random_range(-1.0..1.0));
            u[n2] = 0.0;
            v[n2] = 0.0;
            planes.push((u, v));
        }
        for (u, v) in planes {
            k0 = k0.min(sectional_from(&c, &u, &v)?);
        }
    }
    Ok(k0)
}

/// (2n−1)⁻¹ · minimum of ρ(u,u) over sampled unit horizontal vectors.
pub fn sampled_ricci_k0(model: &dyn ModelManifold, points: &[Vector], vectors_per_point: usize, seed: u64) -> Result<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = model.n();
    let mut k0 = f64::INFINITY;
    for x in points {
        let c = CurvatureAt::new(model, x, false);
        let n2 = c.m() - 1;
        for i in 0..n2 + vectors_per_point {
            let mut u = if i < n2 {
                let mut e = Vector::zeros(n2 + 1);
                e[i] = 1.0;
                e
            } else {
                Vector::from_fn(n2 + 1, |_, _| rng.random_range(-1.0..1.0))
            };
            u[n2] = 0.0;
            let u = &u / u.norm();
            k0 = k0.min(ricci_from(&c, &u)?);
        }
    }
    Ok(k0 / (2 * n - 1) as f64)
}

/// Jet of a field given by closed-form components.
pub fn jet_from(x: Vector, xp: Vector, xpp: Vector) -> Jet {
    (x, xp, xpp)
}
