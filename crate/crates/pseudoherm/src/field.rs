//! Piecewise-smooth vector fields along a curve, stored as components in
//! a parallel frame together with their first and second derivatives.

use std::fmt;
use std::sync::Arc;

use crate::error::{GeomError, Result};
use crate::linalg::Vector;

/// Which one-sided limit to take at a breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Value, first and second derivative of the components.
pub type Jet = (Vector, Vector, Vector);

type JetFn = Arc<dyn Fn(f64, Side) -> Jet + Send + Sync>;

/// A piecewise-C² field on `[a, b]` with breakpoints `breaks`.
#[derive(Clone)]
pub struct FieldAlong {
    pub m: usize,
    pub a: f64,
    pub b: f64,
    pub breaks: Vec<f64>,
    f: JetFn,
}

impl fmt::Debug for FieldAlong {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldAlong").field("m", &self.m).field("a", &self.a).field("b", &self.b).field("breaks", &self.breaks).finish()
    }
}

impl FieldAlong {
    /// Smooth field from a jet function.
    pub fn smooth<F>(m: usize, a: f64, b: f64, f: F) -> Self
    where
        F: Fn(f64) -> Jet + Send + Sync + 'static,
    {
        FieldAlong { m, a, b, breaks: Vec::new(), f: Arc::new(move |t, _| f(t)) }
    }

    pub fn zero(m: usize, a: f64, b: f64) -> Self {
        Self::smooth(m, a, b, move |_| (Vector::zeros(m), Vector::zeros(m), Vector::zeros(m)))
    }

    /// `φ(t) · dir` for a scalar profile returning (φ, φ′, φ″).
    pub fn scalar<F>(dir: Vector, a: f64, b: f64, phi: F) -> Self
    where
        F: Fn(f64) -> (f64, f64, f64) + Send + Sync + 'static,
    {
        let m = dir.len();
        Self::smooth(m, a, b, move |t| {
            let (p, dp, ddp) = phi(t);
            (&dir * p, &dir * dp, &dir * ddp)
        })
    }

    /// `φ(t) · e_i` for the i-th parallel frame vector.
    pub fn along_axis<F>(m: usize, i: usize, a: f64, b: f64, phi: F) -> Self
    where
        F: Fn(f64) -> (f64, f64, f64) + Send + Sync + 'static,
    {
        let mut dir = Vector::zeros(m);
        dir[i] = 1.0;
        Self::scalar(dir, a, b, phi)
    }

    /// Concatenates fields on adjacent intervals.
    pub fn concat(parts: Vec<FieldAlong>) -> Result<Self> {
        let first = parts.first().ok_or_else(|| GeomError::Contract("empty field list".into()))?;
        let m = first.m;
        for w in parts.windows(2) {
            if (w[0].b - w[1].a).abs() > 1e-12 || w[1].m != m {
                return Err(GeomError::Contract("pieces must be adjacent and of equal size".into()));
            }
        }
        let a = first.a;
        let b = parts.last().unwrap().b;
        let mut breaks = Vec::new();
        for (i, p) in parts.iter().enumerate() {
            breaks.extend(p.breaks.iter().copied());
            if i + 1 < parts.len() {
                breaks.push(p.b);
            }
        }
        let parts = Arc::new(parts);
        let f = move |t: f64, side: Side| {
            let k = parts
                .iter()
                .position(|p| match side {
                    Side::Left => t <= p.b,
                    Side::Right => t < p.b,
                })
                .unwrap_or(parts.len() - 1);
            parts[k].jet(t, side)
        };
        Ok(FieldAlong { m, a, b, breaks, f: Arc::new(f) })
    }

    pub fn jet(&self, t: f64, side: Side) -> Jet {
        (self.f)(t, side)
    }

    pub fn value(&self, t: f64) -> Vector {
        self.jet(t, Side::Right).0
    }

    pub fn derivative(&self, t: f64, side: Side) -> Vector {
        self.jet(t, side).1
    }

    /// Pointwise `self + other` on the common interval.
    pub fn add(&self, other: &FieldAlong) -> FieldAlong {
        self.combine(other, 1.0, 1.0)
    }

    /// Pointwise `α self + β other`.
    pub fn combine(&self, other: &FieldAlong, alpha: f64, beta: f64) -> FieldAlong {
        let mut breaks: Vec<f64> = self.breaks.iter().chain(&other.breaks).copied().collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
        let (f1, f2) = (self.f.clone(), other.f.clone());
        FieldAlong {
            m: self.m,
            a: self.a.max(other.a),
            b: self.b.min(other.b),
            breaks,
            f: Arc::new(move |t, s| {
                let (x0, x1, x2) = f1(t, s);
                let (y0, y1, y2) = f2(t, s);
                (x0 * alpha + y0 * beta, x1 * alpha + y1 * beta, x2 * alpha + y2 * beta)
            }),
        }
    }

    pub fn scaled(&self, alpha: f64) -> FieldAlong {
        let f = self.f.clone();
        FieldAlong {
            m: self.m,
            a: self.a,
            b: self.b,
            breaks: self.breaks.clone(),
            f: Arc::new(move |t, s| {
                let (x0, x1, x2) = f(t, s);
                (x0 * alpha, x1 * alpha, x2 * alpha)
            }),
        }
    }

    /// Smooth pieces of `[lo, hi]` cut at the breakpoints of `fields`.
    pub fn pieces(lo: f64, hi: f64, fields: &[&FieldAlong]) -> Vec<(f64, f64)> {
        let mut cuts = vec![lo, hi];
        for f in fields {
            cuts.extend(f.breaks.iter().copied().filter(|c| *c > lo + 1e-12 && *c < hi - 1e-12));
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
        cuts.windows(2).map(|w| (w[0], w[1])).collect()
    }
}
