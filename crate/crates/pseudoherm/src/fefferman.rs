//! The Fefferman metric on the circle bundle `C(M) = M × S¹` over the
//! Heisenberg group, its geodesics and the lift of sub-Riemannian
//! geodesics.
//!
//! Coordinates on `C(M)` are the chart coordinates of the base followed
//! by the fibre coordinate `r`. On the flat model `σ = dr/(n+2)` and
//! `F = G̃ + 2(θ⊗σ + σ⊗θ)`.

use std::f64::consts::TAU;
use std::io::Write;
use std::path::Path;

use crate::connection::PointGeometry;
use crate::error::{GeomError, Result};
use crate::geodesics::{b_equation_residual, sr_equation_residual, CurveKind, CurveSolution};
use crate::linalg::{hermite_vec, Matrix, Vector};
use crate::manifold::{dtheta_at, Model};
use crate::par::{self, Exec};
use crate::report::{ResidualEntry, ResidualReport};

/// Central-difference step for the Christoffel symbols of F.
pub const CHRISTOFFEL_STEP: f64 = 1e-4;

/// A point of the circle bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct CirclePoint {
    pub base: Vector,
    /// Fibre angle in `[0, 2π)`.
    pub r: f64,
}

impl CirclePoint {
    pub fn new(base: Vector, r: f64) -> Self {
        CirclePoint { base, r: r.rem_euclid(TAU) }
    }

    /// Coordinates `(base, r)`.
    pub fn coords(&self) -> Vector {
        let n = self.base.len();
        Vector::from_fn(n + 1, |i, _| if i < n { self.base[i] } else { self.r })
    }
}

/// F_θ on the circle bundle over a Heisenberg model.
#[derive(Debug, Clone)]
pub struct FeffermanMetric {
    pub model: Model,
    pub n: usize,
}

impl FeffermanMetric {
    pub fn new(model: &Model) -> Result<Self> {
        if !model.is_heisenberg() {
            return Err(GeomError::UnsupportedModel(format!("Fefferman metric is only available on Heisenberg models, not {}", model.id())));
        }
        Ok(FeffermanMetric { model: model.clone(), n: model.n() })
    }

    /// Dimension of `C(M)`.
    pub fn dim(&self) -> usize {
        self.model.ambient_dim() + 1
    }

    /// `σ(Σ)` for the fibre generator `Σ = ∂/∂r`.
    pub fn sigma_sigma(&self) -> f64 {
        1.0 / (self.n as f64 + 2.0)
    }

    /// Components `σ_i` (constant on the flat model).
    pub fn sigma(&self, _base: &Vector) -> Vector {
        let d = self.dim();
        let mut s = Vector::zeros(d);
        s[d - 1] = self.sigma_sigma();
        s
    }

    /// Metric matrix at a base point (F does not depend on `r`).
    pub fn matrix(&self, base: &Vector) -> Matrix {
        let g = PointGeometry::at(self.model.as_ref(), base);
        let th = self.model.theta(base);
        let webster = g.coframe.transpose() * &g.coframe;
        let levi = webster - &th * th.transpose();
        let nb = base.len();
        let s = self.sigma_sigma();
        let mut f = Matrix::zeros(nb + 1, nb + 1);
        f.view_mut((0, 0), (nb, nb)).copy_from(&levi);
        for i in 0..nb {
            f[(i, nb)] = 2.0 * th[i] * s;
            f[(nb, i)] = 2.0 * th[i] * s;
        }
        f
    }

    pub fn metric(&self, z: &CirclePoint, u: &Vector, v: &Vector) -> f64 {
        u.dot(&(self.matrix(&z.base) * v))
    }

    /// Number of positive and negative eigenvalues.
    pub fn signature(&self, base: &Vector) -> (usize, usize) {
        let e = self.matrix(base).symmetric_eigen().eigenvalues;
        let pos = e.iter().filter(|v| **v > 1e-12).count();
        let neg = e.iter().filter(|v| **v < -1e-12).count();
        (pos, neg)
    }

    /// `Γ^k_{ij}` as a list of matrices indexed by `k`, from central
    /// differences of the metric components.
    pub fn christoffel(&self, base: &Vector) -> Vec<Matrix> {
        let d = self.dim();
        let nb = d - 1;
        let h = CHRISTOFFEL_STEP;
        // dF[l] = ∂F/∂z^l; the fibre derivative vanishes.
        let mut df: Vec<Matrix> = (0..nb)
            .map(|l| {
                let mut p = base.clone();
                let mut q = base.clone();
                p[l] += h;
                q[l] -= h;
                (self.matrix(&p) - self.matrix(&q)) / (2.0 * h)
            })
            .collect();
        df.push(Matrix::zeros(d, d));
        let finv = self.matrix(base).try_inverse().expect("Fefferman metric is nondegenerate");
        let mut lower = vec![Matrix::zeros(d, d); d];
        for (l, low) in lower.iter_mut().enumerate() {
            for i in 0..d {
                for j in 0..d {
                    low[(i, j)] = 0.5 * (df[i][(j, l)] + df[j][(i, l)] - df[l][(i, j)]);
                }
            }
        }
        (0..d)
            .map(|k| {
                let mut g = Matrix::zeros(d, d);
                for (l, low) in lower.iter().enumerate() {
                    if finv[(k, l)] != 0.0 {
                        g += low * finv[(k, l)];
                    }
                }
                g
            })
            .collect()
    }

    /// `Γ(u, w)` as a vector.
    pub fn gamma_apply(&self, base: &Vector, u: &Vector, w: &Vector) -> Vector {
        let gam = self.christoffel(base);
        Vector::from_fn(self.dim(), |k, _| u.dot(&(&gam[k] * w)))
    }

    /// Geodesic acceleration `−Γ(ż, ż)`.
    pub fn geodesic_acceleration(&self, base: &Vector, zdot: &Vector) -> Vector {
        -self.gamma_apply(base, zdot, zdot)
    }

    /// Max |dσ| by central differences of the σ components.
    pub fn sigma_closed_residual(&self, base: &Vector) -> f64 {
        let d = self.dim();
        let nb = d - 1;
        let h = CHRISTOFFEL_STEP;
        let mut ds = Matrix::zeros(d, d);
        for l in 0..nb {
            let mut p = base.clone();
            let mut q = base.clone();
            p[l] += h;
            q[l] -= h;
            let row = (self.sigma(&p) - self.sigma(&q)) / (2.0 * h);
            for j in 0..d {
                ds[(l, j)] = row[j];
            }
        }
        (&ds - ds.transpose()).amax()
    }

    /// Horizontal lift `(v, 0)` of a base vector.
    pub fn lift(&self, v: &Vector) -> Vector {
        let nb = v.len();
        Vector::from_fn(nb + 1, |i, _| if i < nb { v[i] } else { 0.0 })
    }

    /// `Σ̂ = ((n+2)/2) ∂/∂r`.
    pub fn sigma_hat(&self) -> Vector {
        let d = self.dim();
        let mut s = Vector::zeros(d);
        s[d - 1] = 0.5 * (self.n as f64 + 2.0);
        s
    }
}

/// A curve in the circle bundle with velocities and accelerations.
#[derive(Debug, Clone)]
pub struct CircleCurve {
    pub t: Vec<f64>,
    /// Coordinates `(base, r)` with `r` unwrapped.
    pub z: Vec<Vector>,
    pub zdot: Vec<Vector>,
    pub zddot: Vec<Vector>,
    pub h: f64,
}

impl CircleCurve {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn point(&self, k: usize) -> CirclePoint {
        let d = self.z[k].len();
        CirclePoint::new(self.z[k].rows(0, d - 1).into_owned(), self.z[k][d - 1])
    }

    /// Unwrapped fibre coordinate at node `k`.
    pub fn r(&self, k: usize) -> f64 {
        self.z[k][self.z[k].len() - 1]
    }

    /// Position and velocity at `t` (Hermite interpolation).
    pub fn eval(&self, t: f64) -> (Vector, Vector) {
        let last = self.t.len() - 1;
        let k = (((t - self.t[0]) / self.h).floor().max(0.0) as usize).min(last.saturating_sub(1));
        if last == 0 {
            return (self.z[0].clone(), self.zdot[0].clone());
        }
        let s = t - self.t[k];
        let (z, _) = hermite_vec(&self.z[k], &self.zdot[k], &self.z[k + 1], &self.zdot[k + 1], self.h, s);
        let (v, _) = hermite_vec(&self.zdot[k], &self.zddot[k], &self.zdot[k + 1], &self.zddot[k + 1], self.h, s);
        (z, v)
    }

    /// Sup over this curve's nodes of the coordinate distance to `other`.
    pub fn sup_distance(&self, other: &CircleCurve) -> f64 {
        self.t
            .iter()
            .zip(&self.z)
            .filter(|(t, _)| **t <= other.t[other.len() - 1] + 1e-12)
            .map(|(t, z)| (z - other.eval(*t).0).amax())
            .fold(0.0, f64::max)
    }

    /// Relative drift of F(ż, ż).
    pub fn energy_drift(&self, f: &FeffermanMetric) -> f64 {
        let nb = self.z[0].len() - 1;
        let e: Vec<f64> = self.z.iter().zip(&self.zdot).map(|(z, v)| v.dot(&(f.matrix(&z.rows(0, nb).into_owned()) * v))).collect();
        let scale = e[0].abs().max(self.zdot[0].norm_squared()).max(1e-300);
        e.iter().map(|v| (v - e[0]).abs() / scale).fold(0.0, f64::max)
    }

    /// Projection to M as a sub-Riemannian curve with `b = 2ṙ/(n+2)`.
    pub fn project(&self, model: &Model) -> CurveSolution {
        let nb = self.z[0].len() - 1;
        let c = 2.0 / (model.n() as f64 + 2.0);
        CurveSolution {
            model: model.clone(),
            kind: CurveKind::SubRiemannian,
            t: self.t.clone(),
            x: self.z.iter().map(|z| z.rows(0, nb).into_owned()).collect(),
            v: self.zdot.iter().map(|z| z.rows(0, nb).into_owned()).collect(),
            acc: self.zddot.iter().map(|z| z.rows(0, nb).into_owned()).collect(),
            b: Some(self.zdot.iter().map(|z| c * z[nb]).collect()),
            bdot: Some(self.zddot.iter().map(|z| c * z[nb]).collect()),
            xi: None,
            h: self.h,
        }
    }

    /// CSV with header `t, x0.., r`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let nb = self.z[0].len() - 1;
        let mut header = vec!["t".to_string()];
        header.extend((0..nb).map(|i| format!("x{i}")));
        header.push("r".into());
        wr.write_record(&header)?;
        for (t, z) in self.t.iter().zip(&self.z) {
            let mut row = vec![format!("{t:.17e}")];
            row.extend(z.iter().map(|c| format!("{c:.17e}")));
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Solves `ż = γ̇↑ + ((n+2)/2) b Σ` over the nodes of a sub-Riemannian
/// geodesic, integrating `ṙ` exactly on the Hermite interpolant of b.
pub fn lift_sr_geodesic(sol: &CurveSolution, r0: f64) -> Result<CircleCurve> {
    let b = sol.b.as_ref().ok_or_else(|| GeomError::Domain("lift needs a curve carrying b(t)".into()))?;
    let bd = sol.bdot.as_ref().ok_or_else(|| GeomError::Domain("lift needs b′(t)".into()))?;
    let k = 0.5 * (sol.model.n() as f64 + 2.0);
    let nb = sol.x[0].len();
    let join = |x: &Vector, r: f64| Vector::from_fn(nb + 1, |i, _| if i < nb { x[i] } else { r });
    let mut r = r0;
    let mut z = Vec::with_capacity(sol.len());
    let mut zdot = Vec::with_capacity(sol.len());
    let mut zddot = Vec::with_capacity(sol.len());
    for i in 0..sol.len() {
        if i > 0 {
            let h = sol.t[i] - sol.t[i - 1];
            r += k * (0.5 * h * (b[i - 1] + b[i]) + h * h * (bd[i - 1] - bd[i]) / 12.0);
        }
        z.push(join(&sol.x[i], r));
        zdot.push(join(&sol.v[i], k * b[i]));
        zddot.push(join(&sol.acc[i], k * bd[i]));
    }
    Ok(CircleCurve { t: sol.t.clone(), z, zdot, zddot, h: sol.h })
}

/// Fibre coordinate of a lifted curve at `t`.
pub fn lifted_r(curve: &CircleCurve, t: f64) -> f64 {
    let d = curve.z[0].len();
    curve.eval(t).0[d - 1]
}

/// RK4 on the geodesic equations of F from `(z0, ż0)`.
pub fn integrate_fefferman_geodesic(f: &FeffermanMetric, z0: &CirclePoint, zdot0: &Vector, t_max: f64, h: f64) -> Result<CircleCurve> {
    if !(h > 0.0) || !(t_max >= 0.0) {
        return Err(GeomError::Contract(format!("need h > 0 and t_max ≥ 0, got h = {h}, t_max = {t_max}")));
    }
    if zdot0.len() != f.dim() {
        return Err(GeomError::DimensionMismatch { expected: f.dim(), got: zdot0.len() });
    }
    let det = f.matrix(&z0.base).determinant();
    if det.abs() < 1e-12 {
        return Err(GeomError::DegenerateMetric(format!("F is degenerate at the initial point (det {det:e})")));
    }
    let steps = (t_max / h - 1e-9).ceil().max(0.0) as usize;
    let h = if steps > 0 { t_max / steps as f64 } else { h };
    let nb = f.dim() - 1;
    let acc = |z: &Vector, v: &Vector| f.geodesic_acceleration(&z.rows(0, nb).into_owned(), v);
    let mut z = z0.coords();
    let mut v = zdot0.clone();
    let mut a = acc(&z, &v);
    let mut out = CircleCurve { t: Vec::new(), z: Vec::new(), zdot: Vec::new(), zddot: Vec::new(), h };
    for i in 0..=steps {
        out.t.push(i as f64 * h);
        out.z.push(z.clone());
        out.zdot.push(v.clone());
        out.zddot.push(a.clone());
        if i == steps {
            break;
        }
        let (z2, v2) = (&z + &v * (0.5 * h), &v + &a * (0.5 * h));
        let a2 = acc(&z2, &v2);
        let (z3, v3) = (&z + &v2 * (0.5 * h), &v + &a2 * (0.5 * h));
        let a3 = acc(&z3, &v3);
        let (z4, v4) = (&z + &v3 * h, &v + &a3 * h);
        let a4 = acc(&z4, &v4);
        z += (&v + &v2 * 2.0 + &v3 * 2.0 + &v4) * (h / 6.0);
        v += (&a + &a2 * 2.0 + &a3 * 2.0 + &a4) * (h / 6.0);
        if z.iter().chain(v.iter()).any(|c| !c.is_finite()) {
            return Err(GeomError::Numeric(format!("Fefferman geodesic diverged at t = {}", out.t[i])));
        }
        a = acc(&z, &v);
    }
    Ok(out)
}

/// Residuals of the lift ↔ geodesic correspondence.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct RoundTrip {
    /// sr geodesic → lift vs Fefferman geodesic from the lift's initial data.
    pub lift_distance: f64,
    pub lift_energy_drift: f64,
    /// Fefferman geodesic → projection: max |θ(γ̇)|.
    pub projection_theta: f64,
    /// Projection: max |∇_γ̇γ̇ + 2bJγ̇| with b = 2ṙ/(n+2).
    pub projection_sr_residual: f64,
    /// Projection: max |b′ − A(γ̇,γ̇)|.
    pub projection_b_residual: f64,
    pub projection_energy_drift: f64,
}

/// Lifts `sol`, integrates the Fefferman geodesic from the lift's initial
/// data, then projects that geodesic back and checks the sub-Riemannian
/// equations.
pub fn round_trip(f: &FeffermanMetric, sol: &CurveSolution, r0: f64) -> Result<RoundTrip> {
    let lift = lift_sr_geodesic(sol, r0)?;
    let geo = integrate_fefferman_geodesic(f, &lift.point(0), &lift.zdot[0], sol.t_end() - sol.t0(), sol.h)?;
    let mut geo_t = geo.clone();
    geo_t.t.iter_mut().for_each(|t| *t += sol.t0());
    let r_shift = lift.r(0) - geo.r(0);
    let nb = geo.z[0].len() - 1;
    geo_t.z.iter_mut().for_each(|z| z[nb] += r_shift);
    let proj = geo_t.project(&f.model);
    Ok(RoundTrip {
        lift_distance: geo_t.sup_distance(&lift),
        lift_energy_drift: lift.energy_drift(f),
        projection_theta: proj.theta_drift(),
        projection_sr_residual: sr_equation_residual(&proj)?,
        projection_b_residual: b_equation_residual(&proj).unwrap_or(0.0),
        projection_energy_drift: geo.energy_drift(f),
    })
}

/// Integrates a Fefferman geodesic from generic data with horizontal base
/// velocity and checks that its projection is a sub-Riemannian geodesic.
pub fn projection_check(f: &FeffermanMetric, z0: &CirclePoint, zdot0: &Vector, t_max: f64, h: f64) -> Result<RoundTrip> {
    let geo = integrate_fefferman_geodesic(f, z0, zdot0, t_max, h)?;
    let proj = geo.project(&f.model);
    Ok(RoundTrip {
        lift_distance: 0.0,
        lift_energy_drift: 0.0,
        projection_theta: proj.theta_drift(),
        projection_sr_residual: sr_equation_residual(&proj)?,
        projection_b_residual: b_equation_residual(&proj).unwrap_or(0.0),
        projection_energy_drift: geo.energy_drift(f),
    })
}

/// Covariant derivative on C(M) of a field with value `w` and directional
/// derivative `dw` along `u`.
fn nabla_c(f: &FeffermanMetric, base: &Vector, u: &Vector, w: &Vector, dw: &Vector) -> Vector {
    dw + f.gamma_apply(base, u, w)
}

/// Residuals of the relations between the Levi-Civita connection of F and
/// the Tanaka-Webster connection, over lifted frame fields at each point.
pub fn lift_connection_report(f: &FeffermanMetric, points: &[Vector], tol: f64, exec: Exec) -> ResidualReport {
    let model = f.model.as_ref();
    let per_point = par::map_slice(exec, points, |x| {
        let g = PointGeometry::at(model, x);
        let m = g.m;
        let t = g.t();
        let nb = x.len();
        let d = nb + 1;
        let zero = Vector::zeros(d);
        let sig = f.sigma_hat();
        let unit = |a: usize| {
            let mut e = Vector::zeros(m);
            e[a] = 1.0;
            e
        };
        let up = |v: &Vector| f.lift(v);
        // Lifted frame field e_b↑ differentiated along e_a↑.
        let d_frame = |a: usize, b: usize| up(&g.frame_field_derivative(&unit(b), &unit(a)));
        let tw = |a: usize, b: usize| up(&g.ambient(&g.covariant(&unit(a), &unit(b), &Vector::zeros(m), false)));
        let mut worst = [0.0f64; 9];
        for a in 0..m {
            let ea = up(&g.frame[a]);
            for b in 0..m {
                let eb = up(&g.frame[b]);
                let lhs = nabla_c(f, x, &ea, &eb, &d_frame(a, b));
                let rhs = if a < t && b < t {
                    let dth = dtheta_at(model, x, &g.frame[a], &g.frame[b]);
                    tw(a, b) - up(&g.frame[t]) * dth - &sig * g.a_mat[(a, b)]
                } else if a < t && b == t {
                    up(&g.ambient(&(g.tau_full() * unit(a))))
                } else if a == t && b < t {
                    tw(a, b)
                } else {
                    zero.clone()
                };
                let k = match (a < t, b < t) {
                    (true, true) => 0,
                    (true, false) => 1,
                    (false, true) => 2,
                    (false, false) => 5,
                };
                worst[k] = worst[k].max((lhs - rhs).amax());
            }
            if a < t {
                let jx = up(&g.ambient(&(&g.jm * unit(a))));
                let l1 = nabla_c(f, x, &ea, &sig, &zero);
                worst[3] = worst[3].max((l1 - &jx).amax());
                let l2 = nabla_c(f, x, &sig, &ea, &zero);
                worst[4] = worst[4].max((l2 - &jx).amax());
            }
        }
        worst[6] = nabla_c(f, x, &sig, &sig, &zero).amax();
        let tu = up(&g.frame[t]);
        worst[7] = nabla_c(f, x, &sig, &tu, &zero).amax();
        worst[8] = nabla_c(f, x, &tu, &sig, &zero).amax();
        worst
    });
    let names = [
        "lift_horizontal_horizontal",
        "lift_horizontal_reeb",
        "lift_reeb_horizontal",
        "lift_horizontal_sigma",
        "lift_sigma_horizontal",
        "lift_reeb_reeb",
        "lift_sigma_sigma",
        "lift_sigma_reeb",
        "lift_reeb_sigma",
    ];
    let mut report = ResidualReport::default();
    for (x, w) in points.iter().zip(per_point) {
        for (name, r) in names.iter().zip(w) {
            report.push(ResidualEntry::new(name, x, r, tol));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{heisenberg, sphere};

    #[test]
    fn sphere_is_unsupported() {
        let s = sphere(1).unwrap();
        assert!(matches!(FeffermanMetric::new(&s), Err(GeomError::UnsupportedModel(_))));
    }

    #[test]
    fn lorentz_signature_on_heisenberg() {
        let h = heisenberg(2).unwrap();
        let f = FeffermanMetric::new(&h).unwrap();
        for x in h.sample_points(5, 1.0, 1) {
            assert_eq!(f.signature(&x), (5, 1));
        }
    }

    #[test]
    fn fibre_generator_is_null() {
        let h = heisenberg(1).unwrap();
        let f = FeffermanMetric::new(&h).unwrap();
        let z = CirclePoint::new(Vector::from_vec(vec![0.2, -0.4, 0.1]), 7.0);
        assert!(z.r < TAU);
        let s = f.sigma_hat() / f.sigma_hat()[3];
        assert_eq!(f.metric(&z, &s, &s), 0.0);
    }
}
