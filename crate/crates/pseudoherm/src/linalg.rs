//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Dense rank-3 array `t[i][j][k]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    pub m: usize,
    pub data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(m: usize) -> Self {
        Tensor3 { m, data: vec![0.0; m * m * m] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.m + j) * self.m + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.data[(i * self.m + j) * self.m + k] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.data[(i * self.m + j) * self.m + k] += v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, b| a.max(b.abs()))
    }

    pub fn max_abs_diff(&self, other: &Tensor3) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |a, (x, y)| a.max((x - y).abs()))
    }
}

/// Dense rank-4 array `t[i][j][k][l]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    pub m: usize,
    pub data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(m: usize) -> Self {
        Tensor4 { m, data: vec![0.0; m * m * m * m] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[((i * self.m + j) * self.m + k) * self.m + l]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        self.data[((i * self.m + j) * self.m + k) * self.m + l] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, b| a.max(b.abs()))
    }
}

/// Singular value decomposition `a = u · diag(s) · vᵀ` with `s`
/// non-increasing. `v` is square when requested in full, thin otherwise.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

/// SVD via faer; nalgebra's bidiagonal QR loses accuracy on matrices with
/// clustered singular values.
pub fn svd(a: &Matrix, full: bool) -> Svd {
    let (r, c) = a.shape();
    if r == 0 || c == 0 {
        return Svd { u: Matrix::zeros(r, 0), s: Vec::new(), v: if full { Matrix::identity(c, c) } else { Matrix::zeros(c, 0) } };
    }
    let fa = faer::Mat::<f64>::from_fn(r, c, |i, j| a[(i, j)]);
    let d = if full { fa.svd() } else { fa.thin_svd() }.expect("svd converges");
    let (fu, fv, fs) = (d.U(), d.V(), d.S().column_vector());
    let k = fs.nrows();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|i, j| fs[*j].total_cmp(&fs[*i]));
    let cols_u = if full { r } else { k };
    let cols_v = if full { c } else { k };
    let perm = |j: usize| if j < k { order[j] } else { j };
    let u = Matrix::from_fn(r, cols_u, |i, j| fu[(i, perm(j))]);
    let v = Matrix::from_fn(c, cols_v, |i, j| fv[(i, perm(j))]);
    let s = order.iter().map(|i| fs[*i]).collect();
    Svd { u, s, v }
}

/// Moore–Penrose pseudo-inverse with relative cutoff `rcond`.
pub fn pinv(a: &Matrix, rcond: f64) -> Matrix {
    let d = svd(a, false);
    let cut = rcond * d.s.first().copied().unwrap_or(0.0);
    let mut out = Matrix::zeros(a.ncols(), a.nrows());
    for (k, s) in d.s.iter().enumerate() {
        if *s > cut {
            out += (d.v.column(k) * d.u.column(k).transpose()) / *s;
        }
    }
    out
}

/// Singular values sorted in decreasing order.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let fa = faer::Mat::<f64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)]);
    let mut s = fa.singular_values().expect("svd converges");
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Numerical rank: singular values above `rel · σ_max`.
pub fn rank(a: &Matrix, rel: f64) -> usize {
    let s = singular_values(a);
    match s.first() {
        Some(&smax) if smax > 0.0 => s.iter().filter(|v| **v > rel * smax).count(),
        _ => 0,
    }
}

/// Orthonormal basis (as columns) of the right null space of `a`,
/// using the relative cutoff `rel · σ_max`.
pub fn null_space(a: &Matrix, rel: f64) -> Matrix {
    let ncols = a.ncols();
    if a.nrows() == 0 {
        return Matrix::identity(ncols, ncols);
    }
    let d = svd(a, true);
    let smax = d.s.first().copied().unwrap_or(0.0);
    let cols: Vec<Vector> = (0..ncols)
        .filter(|k| smax == 0.0 || d.s.get(*k).is_none_or(|s| *s <= rel * smax))
        .map(|k| d.v.column(k).into_owned())
        .collect();
    if cols.is_empty() {
        Matrix::zeros(ncols, 0)
    } else {
        Matrix::from_columns(&cols)
    }
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

/// Composite Simpson rule on uniformly spaced samples (odd count).
pub fn simpson(values: &[f64], dx: f64) -> f64 {
    let n = values.len();
    assert!(n >= 3 && n % 2 == 1, "simpson needs an odd number of samples");
    let mut s = values[0] + values[n - 1];
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * dx / 3.0
}

/// Number of Simpson intervals (even) for an interval of length `len`
/// with target spacing `dx`.
pub fn simpson_intervals(len: f64, dx: f64) -> usize {
    let k = (len / dx).ceil().max(2.0) as usize;
    k + (k % 2)
}

/// Integrates `f` over `[a, b]` with composite Simpson on `intervals`
/// subintervals (rounded up to even).
pub fn simpson_fn<F: Fn(f64) -> f64>(a: f64, b: f64, intervals: usize, f: F) -> f64 {
    let k = intervals.max(2) + intervals % 2;
    let dx = (b - a) / k as f64;
    let vals: Vec<f64> = (0..=k).map(|i| f(a + dx * i as f64)).collect();
    simpson(&vals, dx)
}

/// Cubic Hermite interpolation on `[0, h]` at `s ∈ [0, h]`:
/// returns (value, derivative).
pub fn hermite(y0: f64, d0: f64, y1: f64, d1: f64, h: f64, s: f64) -> (f64, f64) {
    let u = s / h;
    let u2 = u * u;
    let u3 = u2 * u;
    let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    let h10 = u3 - 2.0 * u2 + u;
    let h01 = -2.0 * u3 + 3.0 * u2;
    let h11 = u3 - u2;
    let val = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
    let dh00 = (6.0 * u2 - 6.0 * u) / h;
    let dh10 = 3.0 * u2 - 4.0 * u + 1.0;
    let dh01 = (-6.0 * u2 + 6.0 * u) / h;
    let dh11 = 3.0 * u2 - 2.0 * u;
    let der = dh00 * y0 + dh10 * d0 + dh01 * y1 + dh11 * d1;
    (val, der)
}

/// Vector form of [`hermite`].
pub fn hermite_vec(y0: &Vector, d0: &Vector, y1: &Vector, d1: &Vector, h: f64, s: f64) -> (Vector, Vector) {
    let n = y0.len();
    let mut v = Vector::zeros(n);
    let mut d = Vector::zeros(n);
    for i in 0..n {
        let (a, b) = hermite(y0[i], d0[i], y1[i], d1[i], h, s);
        v[i] = a;
        d[i] = b;
    }
    (v, d)
}

/// One Richardson level for a second-order central difference:
/// `(4 D(h/2) − D(h)) / 3`.
#[inline]
pub fn richardson(d_h: f64, d_half: f64) -> f64 {
    (4.0 * d_half - d_h) / 3.0
}

/// Modified Gram–Schmidt under the Euclidean inner product; drops
/// vectors whose residual norm falls below `tol`.
pub fn gram_schmidt(vs: &[Vector], tol: f64) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for q in &out {
            let c = q.dot(&w);
            w -= q * c;
        }
        let nrm = w.norm();
        if nrm > tol {
            out.push(w / nrm);
        }
    }
    out
}
