//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use pseudoherm::linalg::{pinv, rank, Matrix, Tensor3, Vector};
use pseudoherm::manifold::ModelManifold;

/// Frame, coframe, brackets by Richardson-extrapolated central differences
/// of the model frame along retractions, and the matrix of J.
pub struct FdFrame {
    pub m: usize,
    pub frame: Vec<Vector>,
    pub coframe: Matrix,
    pub bracket: Tensor3,
    pub jm: Matrix,
}

fn frame_derivative(model: &dyn ModelManifold, x: &Vector, anchor: usize, u: &Vector, h: f64) -> Vec<Vector> {
    let d = |s: f64| -> Vec<Vector> {
        let fp = model.frame(&model.retract(x, &(u * s)), anchor);
        let fm = model.frame(&model.retract(x, &(u * -s)), anchor);
        fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * s)).collect()
    };
    let (d1, d2) = (d(h), d(0.5 * h));
    d1.iter().zip(&d2).map(|(a, b)| (b * 4.0 - a) / 3.0).collect()
}

impl FdFrame {
    pub fn new(model: &dyn ModelManifold, x: &Vector) -> Self {
        Self::with_step(model, x, 1e-3)
    }

    pub fn with_step(model: &dyn ModelManifold, x: &Vector, h: f64) -> Self {
        let anchor = model.anchor(x);
        let frame = model.frame(x, anchor);
        let m = frame.len();
        let coframe = pinv(&Matrix::from_columns(&frame), 1e-13);
        let de: Vec<Vec<Vector>> = frame.iter().map(|e| frame_derivative(model, x, anchor, e, h)).collect();
        let mut bracket = Tensor3::zeros(m);
        for a in 0..m {
            for b in 0..m {
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
        FdFrame { m, frame, coframe, bracket, jm }
    }
}

/// Result of the least-squares solve for the connection coefficients.
pub struct OracleSolution {
    pub gamma: Tensor3,
    pub rank: usize,
    pub unknowns: usize,
    pub residual: f64,
}

/// Solves the linear axiom system (metric, ∇J = 0, ∇T = 0, H parallel,
/// horizontal torsion −2Ω(X,Y)T, τ symmetric, τJ = −Jτ) for Γ(a,b,c), the
/// c-component of ∇_{e_a}e_b, in the least-squares sense.
pub fn tw_oracle(f: &FdFrame) -> OracleSolution {
    let (a, rhs) = oracle_system(f);
    let sol = pinv(&a, 1e-12) * &rhs;
    let residual = (&a * &sol - &rhs).amax();
    let mut gamma = Tensor3::zeros(f.m);
    gamma.data.copy_from_slice(sol.as_slice());
    OracleSolution { gamma, rank: rank(&a, 1e-10), unknowns: f.m * f.m * f.m, residual }
}

/// The axiom equations as a dense system `A γ = rhs` over Γ(a,b,c) in
/// row-major (a, b, c) order.
pub fn oracle_system(f: &FdFrame) -> (Matrix, Vector) {
    let m = f.m;
    let t = m - 1;
    let idx = |a: usize, b: usize, c: usize| (a * m + b) * m + c;
    let nu = m * m * m;
    let mut rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                rows.push((vec![(idx(a, b, c), 1.0), (idx(a, c, b), 1.0)], 0.0));
                let mut r = Vec::new();
                for d in 0..m {
                    r.push((idx(a, d, c), f.jm[(d, b)]));
                    r.push((idx(a, b, d), -f.jm[(c, d)]));
                }
                rows.push((r, 0.0));
            }
            rows.push((vec![(idx(a, t, b), 1.0)], 0.0));
            if b < t {
                rows.push((vec![(idx(a, b, t), 1.0)], 0.0));
            }
        }
    }
    for a in 0..t {
        for b in 0..t {
            for c in 0..m {
                let rhs = f.bracket.get(a, b, c) - if c == t { 2.0 * f.jm[(a, b)] } else { 0.0 };
                rows.push((vec![(idx(a, b, c), 1.0), (idx(b, a, c), -1.0)], rhs));
            }
        }
    }
    // τ[c][b] = Γ(t,b,c) − [T,e_b]^c on H.
    for b in 0..t {
        for c in 0..t {
            rows.push((
                vec![(idx(t, b, c), 1.0), (idx(t, c, b), -1.0)],
                f.bracket.get(t, b, c) - f.bracket.get(t, c, b),
            ));
            let mut r = Vec::new();
            let mut rhs = 0.0;
            for d in 0..t {
                r.push((idx(t, d, c), f.jm[(d, b)]));
                rhs += f.bracket.get(t, d, c) * f.jm[(d, b)];
                r.push((idx(t, b, d), f.jm[(c, d)]));
                rhs += f.bracket.get(t, b, d) * f.jm[(c, d)];
            }
            rows.push((r, rhs));
        }
    }
    let mut a = Matrix::zeros(rows.len(), nu);
    let mut rhs = Vector::zeros(rows.len());
    for (i, (r, v)) in rows.iter().enumerate() {
        for (j, c) in r {
            a[(i, *j)] += c;
        }
        rhs[i] = *v;
    }
    (a, rhs)
}
