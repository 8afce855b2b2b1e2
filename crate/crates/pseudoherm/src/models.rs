//! Concrete CR models: Heisenberg groups, CR spheres, and a conformally
//! rescaled Heisenberg group with nonzero pseudohermitian torsion.

use std::sync::Arc;

use num_dual::{Dual64, DualNum};

use crate::error::{GeomError, Result};
use crate::linalg::{Matrix, Vector};
use crate::manifold::{Model, ModelManifold};
use crate::sampling::halton_box;

/// Heisenberg group H^n with coordinates `(x^1..x^n, y^1..y^n, t)` and
/// θ = dt + Σ (x dy − y dx).
#[derive(Debug, Clone)]
pub struct HeisenbergModel {
    pub n: usize,
}

/// Heisenberg group with θ̂ = e^{κ x^1} θ.
#[derive(Debug, Clone)]
pub struct ScaledHeisenbergModel {
    pub base: HeisenbergModel,
    pub kappa: f64,
}

/// CR sphere S^{2n+1} ⊂ C^{n+1}, stored as unit vectors of R^{2n+2}
/// with `(Re z_k, Im z_k)` pairs. T = i z, J = multiplication by i on H.
#[derive(Debug, Clone)]
pub struct SphereModel {
    pub n: usize,
}

pub fn heisenberg(n: usize) -> Result<Model> {
    if n == 0 {
        return Err(GeomError::InvalidDimension("CR dimension n must be at least 1".into()));
    }
    Ok(Arc::new(HeisenbergModel { n }))
}

pub fn sphere(n: usize) -> Result<Model> {
    if n == 0 {
        return Err(GeomError::InvalidDimension("CR dimension n must be at least 1".into()));
    }
    Ok(Arc::new(SphereModel { n }))
}

pub fn scaled_heisenberg(n: usize, kappa: f64) -> Result<Model> {
    if n == 0 {
        return Err(GeomError::InvalidDimension("CR dimension n must be at least 1".into()));
    }
    if !kappa.is_finite() {
        return Err(GeomError::DegenerateMetric(format!("kappa = {kappa} is not finite")));
    }
    Ok(Arc::new(ScaledHeisenbergModel { base: HeisenbergModel { n }, kappa }))
}

/// Parses "heisenberg:n", "sphere:n" or "scaled-heisenberg:n:kappa".
pub fn model_from_id(id: &str) -> Result<Model> {
    let parts: Vec<&str> = id.split(':').collect();
    let bad = || GeomError::InvalidModelId(id.to_string());
    let parse_n = |s: &str| s.parse::<usize>().map_err(|_| bad());
    match parts.as_slice() {
        ["heisenberg", n] => heisenberg(parse_n(n)?),
        ["sphere", n] => sphere(parse_n(n)?),
        ["scaled-heisenberg", n] => scaled_heisenberg(parse_n(n)?, 0.1),
        ["scaled-heisenberg", n, k] => scaled_heisenberg(parse_n(n)?, k.parse::<f64>().map_err(|_| bad())?),
        _ => Err(bad()),
    }
}

impl HeisenbergModel {
    fn xi(&self, a: usize) -> usize {
        a
    }
    fn yi(&self, a: usize) -> usize {
        self.n + a
    }
    fn ti(&self) -> usize {
        2 * self.n
    }

    fn x_field(&self, x: &Vector, a: usize) -> Vector {
        let mut v = Vector::zeros(2 * self.n + 1);
        v[self.xi(a)] = 1.0;
        v[self.ti()] = x[self.yi(a)];
        v
    }

    fn y_field(&self, x: &Vector, a: usize) -> Vector {
        let mut v = Vector::zeros(2 * self.n + 1);
        v[self.yi(a)] = 1.0;
        v[self.ti()] = -x[self.xi(a)];
        v
    }

    fn theta_raw(&self, x: &Vector) -> Vector {
        let mut th = Vector::zeros(2 * self.n + 1);
        for a in 0..self.n {
            th[self.xi(a)] = -x[self.yi(a)];
            th[self.yi(a)] = x[self.xi(a)];
        }
        th[self.ti()] = 1.0;
        th
    }

    fn theta_jac_raw(&self) -> Matrix {
        let m = 2 * self.n + 1;
        let mut d = Matrix::zeros(m, m);
        for a in 0..self.n {
            d[(self.xi(a), self.yi(a))] = 1.0;
            d[(self.yi(a), self.xi(a))] = -1.0;
        }
        d
    }

    /// J on vectors: a X_α + b Y_α + c T ↦ a Y_α − b X_α.
    fn j_raw(&self, x: &Vector, v: &Vector) -> Vector {
        let mut out = Vector::zeros(2 * self.n + 1);
        for a in 0..self.n {
            let ca = v[self.xi(a)];
            let cb = v[self.yi(a)];
            out += self.y_field(x, a) * ca - self.x_field(x, a) * cb;
        }
        out
    }

    fn samples(&self, count: usize, radius: f64, seed: u64) -> Vec<Vector> {
        halton_box(count, 2 * self.n + 1, radius, seed).into_iter().map(Vector::from_vec).collect()
    }
}

impl ModelManifold for HeisenbergModel {
    fn id(&self) -> String {
        format!("heisenberg:{}", self.n)
    }
    fn n(&self) -> usize {
        self.n
    }
    fn ambient_dim(&self) -> usize {
        2 * self.n + 1
    }
    fn is_sasakian(&self) -> bool {
        true
    }
    fn is_heisenberg(&self) -> bool {
        true
    }
    fn closed_form_derivatives(&self) -> bool {
        true
    }
    fn origin(&self) -> Vector {
        Vector::zeros(2 * self.n + 1)
    }
    fn theta(&self, x: &Vector) -> Vector {
        self.theta_raw(x)
    }
    fn theta_jacobian(&self, _x: &Vector) -> Option<Matrix> {
        Some(self.theta_jac_raw())
    }
    fn frame(&self, x: &Vector, _anchor: usize) -> Vec<Vector> {
        let mut f = Vec::with_capacity(2 * self.n + 1);
        for a in 0..self.n {
            f.push(self.x_field(x, a));
            f.push(self.y_field(x, a));
        }
        let mut t = Vector::zeros(2 * self.n + 1);
        t[self.ti()] = 1.0;
        f.push(t);
        f
    }
    fn frame_derivative(&self, _x: &Vector, _anchor: usize, u: &Vector) -> Option<Vec<Vector>> {
        let m = 2 * self.n + 1;
        let mut f = Vec::with_capacity(m);
        for a in 0..self.n {
            let mut dx = Vector::zeros(m);
            dx[self.ti()] = u[self.yi(a)];
            let mut dy = Vector::zeros(m);
            dy[self.ti()] = -u[self.xi(a)];
            f.push(dx);
            f.push(dy);
        }
        f.push(Vector::zeros(m));
        Some(f)
    }
    fn j_apply(&self, x: &Vector, v: &Vector) -> Vector {
        self.j_raw(x, v)
    }
    fn sample_points(&self, count: usize, radius: f64, seed: u64) -> Vec<Vector> {
        self.samples(count, radius, seed)
    }
}

impl ScaledHeisenbergModel {
    fn u(&self, x: &Vector) -> f64 {
        self.kappa * x[0]
    }
}

impl ModelManifold for ScaledHeisenbergModel {
    fn id(&self) -> String {
        format!("scaled-heisenberg:{}:{}", self.base.n, self.kappa)
    }
    fn n(&self) -> usize {
        self.base.n
    }
    fn ambient_dim(&self) -> usize {
        2 * self.base.n + 1
    }
    fn is_sasakian(&self) -> bool {
        self.kappa == 0.0
    }
    fn closed_form_derivatives(&self) -> bool {
        false
    }
    fn origin(&self) -> Vector {
        Vector::zeros(2 * self.base.n + 1)
    }
    fn theta(&self, x: &Vector) -> Vector {
        self.base.theta_raw(x) * self.u(x).exp()
    }
    fn theta_jacobian(&self, x: &Vector) -> Option<Matrix> {
        let e = self.u(x).exp();
        let th = self.base.theta_raw(x);
        let mut d = self.base.theta_jac_raw();
        for j in 0..d.ncols() {
            d[(0, j)] += self.kappa * th[j];
        }
        Some(d * e)
    }
    fn frame(&self, x: &Vector, _anchor: usize) -> Vec<Vector> {
        let n = self.base.n;
        let u = self.u(x);
        let s = (-0.5 * u).exp();
        let mut f = Vec::with_capacity(2 * n + 1);
        for a in 0..n {
            f.push(self.base.x_field(x, a) * s);
            f.push(self.base.y_field(x, a) * s);
        }
        // T̂ = e^{-u}(T − ½ J ∇_H u), ∇_H u = κ X_1.
        let mut t = Vector::zeros(2 * n + 1);
        t[2 * n] = 1.0;
        let grad = self.base.x_field(x, 0) * self.kappa;
        let jgrad = self.base.j_raw(x, &grad);
        f.push((t - jgrad * 0.5) * (-u).exp());
        f
    }
    fn j_apply(&self, x: &Vector, v: &Vector) -> Vector {
        let th = self.theta(x);
        let t = self.frame(x, 0).pop().unwrap();
        let vh = v - t * th.dot(v);
        self.base.j_raw(x, &vh)
    }
    fn sample_points(&self, count: usize, radius: f64, seed: u64) -> Vec<Vector> {
        self.base.samples(count, radius, seed)
    }
}

/// Sphere frame, generic over dual numbers for exact directional derivatives.
fn sphere_frame_generic<D: DualNum<Primitive = f64> + Copy>(x: &[D], anchor: usize) -> Vec<Vec<D>> {
    let n1 = x.len() / 2;
    let zero = D::from(0.0);
    let one = D::from(1.0);
    let mut nrm2 = zero;
    for v in x {
        nrm2 += *v * *v;
    }
    let nrm = nrm2.sqrt();
    let zh: Vec<(D, D)> = (0..n1).map(|k| (x[2 * k] / nrm, x[2 * k + 1] / nrm)).collect();
    let cmul = |a: (D, D), b: (D, D)| (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0);
    let herm = |u: &[(D, D)], w: &[(D, D)]| {
        let mut s = (zero, zero);
        for (a, b) in u.iter().zip(w) {
            let p = cmul((a.0, -a.1), *b);
            s = (s.0 + p.0, s.1 + p.1);
        }
        s
    };
    let mut us: Vec<Vec<(D, D)>> = Vec::with_capacity(n1 - 1);
    for k in (0..n1).filter(|k| *k != anchor) {
        let c = (zh[k].0, -zh[k].1);
        let mut w: Vec<(D, D)> = zh
            .iter()
            .map(|z| {
                let p = cmul(c, *z);
                (-p.0, -p.1)
            })
            .collect();
        w[k].0 += one;
        for u in &us {
            let p = herm(u, &w);
            for (wj, uj) in w.iter_mut().zip(u) {
                let q = cmul(p, *uj);
                wj.0 -= q.0;
                wj.1 -= q.1;
            }
        }
        let mut s = zero;
        for wj in &w {
            s += wj.0 * wj.0 + wj.1 * wj.1;
        }
        let r = s.sqrt();
        for wj in w.iter_mut() {
            wj.0 /= r;
            wj.1 /= r;
        }
        us.push(w);
    }
    let flat = |v: &[(D, D)]| v.iter().flat_map(|c| [c.0, c.1]).collect::<Vec<D>>();
    let times_i = |v: &[(D, D)]| v.iter().map(|c| (-c.1, c.0)).collect::<Vec<(D, D)>>();
    let mut frame = Vec::with_capacity(2 * n1 - 1);
    for u in &us {
        frame.push(flat(u));
        frame.push(flat(&times_i(u)));
    }
    frame.push(flat(&times_i(&zh)));
    frame
}

impl SphereModel {
    fn i_times(v: &Vector) -> Vector {
        let mut out = Vector::zeros(v.len());
        for k in 0..v.len() / 2 {
            out[2 * k] = -v[2 * k + 1];
            out[2 * k + 1] = v[2 * k];
        }
        out
    }
}

impl ModelManifold for SphereModel {
    fn id(&self) -> String {
        format!("sphere:{}", self.n)
    }
    fn n(&self) -> usize {
        self.n
    }
    fn ambient_dim(&self) -> usize {
        2 * self.n + 2
    }
    fn is_sasakian(&self) -> bool {
        true
    }
    fn closed_form_derivatives(&self) -> bool {
        true
    }
    fn origin(&self) -> Vector {
        let mut z = Vector::zeros(2 * self.n + 2);
        z[0] = 1.0;
        z
    }
    fn theta(&self, x: &Vector) -> Vector {
        Self::i_times(x) / x.norm_squared()
    }
    fn theta_jacobian(&self, x: &Vector) -> Option<Matrix> {
        let nn = x.len();
        let r2 = x.norm_squared();
        let ix = Self::i_times(x);
        let mut d = Matrix::zeros(nn, nn);
        for k in 0..nn / 2 {
            // M[2k][2k+1] = -1, M[2k+1][2k] = 1, and ∂_iθ_j = M_ji / r².
            d[(2 * k + 1, 2 * k)] = -1.0 / r2;
            d[(2 * k, 2 * k + 1)] = 1.0 / r2;
        }
        for i in 0..nn {
            for j in 0..nn {
                d[(i, j)] -= 2.0 * ix[j] * x[i] / (r2 * r2);
            }
        }
        Some(d)
    }
    fn anchor(&self, x: &Vector) -> usize {
        (0..=self.n)
            .map(|k| (k, x[2 * k] * x[2 * k] + x[2 * k + 1] * x[2 * k + 1]))
            .fold((0, -1.0), |best, (k, v)| if v > best.1 { (k, v) } else { best })
            .0
    }
    fn frame(&self, x: &Vector, anchor: usize) -> Vec<Vector> {
        let xs: Vec<f64> = x.iter().copied().collect();
        sphere_frame_generic(&xs, anchor).into_iter().map(Vector::from_vec).collect()
    }
    fn frame_derivative(&self, x: &Vector, anchor: usize, u: &Vector) -> Option<Vec<Vector>> {
        let xs: Vec<Dual64> = x.iter().zip(u.iter()).map(|(a, b)| Dual64::new(*a, *b)).collect();
        Some(
            sphere_frame_generic(&xs, anchor)
                .into_iter()
                .map(|v| Vector::from_iterator(v.len(), v.iter().map(|d| d.eps)))
                .collect(),
        )
    }
    fn j_apply(&self, x: &Vector, v: &Vector) -> Vector {
        let xh = x / x.norm();
        let t = Self::i_times(&xh);
        let vh = v - &xh * xh.dot(v) - &t * t.dot(v);
        Self::i_times(&vh)
    }
    fn normalize_point(&self, x: &Vector) -> Vector {
        x / x.norm()
    }
    fn project_tangent(&self, x: &Vector, v: &Vector) -> Vector {
        let xh = x / x.norm();
        v - &xh * xh.dot(v)
    }
    fn point_residual(&self, x: &Vector) -> f64 {
        (x.norm() - 1.0).abs()
    }
    fn tangent_residual(&self, x: &Vector, v: &Vector) -> f64 {
        (x.dot(v) / x.norm()).abs()
    }
    fn sample_points(&self, count: usize, _radius: f64, seed: u64) -> Vec<Vector> {
        let nn = 2 * self.n + 2;
        let mut out = Vec::with_capacity(count);
        let mut skip = seed;
        while out.len() < count {
            for p in halton_box(count, nn, 1.0, skip) {
                let v = Vector::from_vec(p);
                if v.norm() > 0.2 && out.len() < count {
                    out.push(&v / v.norm());
                }
            }
            skip += count as u64;
        }
        out
    }
}
