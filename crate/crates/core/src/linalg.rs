//! Small dense linear algebra: real symmetric matrices, two eigensolvers and
//! complex vector helpers.
//!
//! Dicke-basis problems have dimension at most 65 and go through the cyclic
//! Jacobi solver. The `2^n` oracle needs dimensions up to 4096 and uses
//! Householder tridiagonalization followed by implicit QL.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense square real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Matrix { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Matrix { dim, data }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let d = self.dim;
        &mut self.data[i * d..(i + 1) * d]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `(self + selfᵀ) / 2`; the result is exactly symmetric.
    pub fn symmetrized(&self) -> Matrix {
        Self::from_fn(self.dim, |i, j| 0.5 * (self[(i, j)] + self[(j, i)]))
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| f64::max(m, libm::fabs(a - b)))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| f64::max(m, libm::fabs(*a)))
    }

    pub fn frobenius(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|a| a * a).sum())
    }

    pub fn apply_real(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|i| dot_real(self.row(i), x)).collect()
    }

    pub fn apply_complex(&self, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let row = self.row(i);
            let mut acc = C64::new(0.0, 0.0);
            for (&a, &b) in row.iter().zip(x) {
                acc += b * a;
            }
            *yi = acc;
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.dim + j]
    }
}

fn dot_real(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Anything that can act linearly on a complex state vector.
pub trait Operator {
    fn dim(&self) -> usize;
    /// `y = A x`
    fn apply_into(&self, x: &[C64], y: &mut [C64]);

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim()];
        self.apply_into(x, &mut y);
        y
    }
}

impl Operator for Matrix {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        self.apply_complex(x, y)
    }
}

// ---------------------------------------------------------------------------
// complex vector helpers

/// `⟨a|b⟩`, conjugate-linear in `a`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    libm::sqrt(norm_sqr(a))
}

/// `‖a - b‖`
pub fn distance(a: &[C64], b: &[C64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum())
}

pub fn real_to_complex(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| C64::new(x, 0.0)).collect()
}

pub fn scale(a: &mut [C64], k: f64) {
    for x in a {
        *x *= k;
    }
}

// ---------------------------------------------------------------------------
// eigensolvers

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors
/// stored as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl Eigen {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Only the upper triangle is read. Eigenvectors are sign-fixed so that their
/// first component with magnitude above `1e-10` is positive.
pub fn jacobi_eigen(a: &Matrix) -> Result<Eigen> {
    let (values, vectors) = jacobi(a, true)?;
    let vectors = vectors.expect("vectors requested");
    Ok(sort_and_fix(values, vectors))
}

/// Eigenvalues only, ascending.
pub fn jacobi_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    let (mut values, _) = jacobi(a, false)?;
    values.sort_by(f64::total_cmp);
    Ok(values)
}

fn jacobi(a: &Matrix, want_vectors: bool) -> Result<(Vec<f64>, Option<Matrix>)> {
    let n = a.dim();
    let mut m = Matrix::from_fn(n, |i, j| if i <= j { a[(i, j)] } else { a[(j, i)] });
    let mut v = want_vectors.then(|| Matrix::identity(n));
    if m.data.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("matrix", "non-finite entry"));
    }
    let scale = m.frobenius();
    if n <= 1 || scale == 0.0 {
        return Ok(((0..n).map(|i| m[(i, i)]).collect(), v));
    }
    let tol = f64::EPSILON * scale;

    let mut off = 0.0;
    for sweep in 0..JACOBI_MAX_SWEEPS {
        off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        off = libm::sqrt(off);
        if off <= tol {
            let values = (0..n).map(|i| m[(i, i)]).collect();
            return Ok((values, v));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                // Negligible element: drop it once the sweep count says we are converging.
                if sweep > 3
                    && libm::fabs(app) + 100.0 * libm::fabs(apq) == libm::fabs(app)
                    && libm::fabs(aqq) + 100.0 * libm::fabs(apq) == libm::fabs(aqq)
                {
                    m[(p, q)] = 0.0;
                    m[(q, p)] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if libm::fabs(theta) > 1e150 {
                    0.5 / theta
                } else {
                    let t = 1.0 / (libm::fabs(theta) + libm::sqrt(theta * theta + 1.0));
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    m[(k, p)] = new_kp;
                    m[(p, k)] = new_kp;
                    m[(k, q)] = new_kq;
                    m[(q, k)] = new_kq;
                }
                m[(p, p)] = app - t * apq;
                m[(q, q)] = aqq + t * apq;
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    Err(Error::NoConvergence { iterations: JACOBI_MAX_SWEEPS, residual: off })
}

fn sort_and_fix(values: Vec<f64>, vectors: Matrix) -> Eigen {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut sorted = Matrix::zeros(n);
    let mut out_values = Vec::with_capacity(n);
    for (new, &old) in order.iter().enumerate() {
        out_values.push(values[old]);
        let mut sign = 1.0;
        for i in 0..n {
            let x = vectors[(i, old)];
            if libm::fabs(x) > 1e-10 {
                sign = if x < 0.0 { -1.0 } else { 1.0 };
                break;
            }
        }
        for i in 0..n {
            sorted[(i, new)] = sign * vectors[(i, old)];
        }
    }
    Eigen { values: out_values, vectors: sorted }
}

/// Householder + implicit QL eigendecomposition for larger symmetric
/// matrices. Reads the full matrix, which must be symmetric.
pub fn tridiagonal_eigen(a: &Matrix) -> Result<Eigen> {
    let (d, v) = householder_ql(a, true)?;
    Ok(sort_and_fix(d, v.expect("vectors requested")))
}

/// Eigenvalues only via Householder + implicit QL, ascending.
pub fn tridiagonal_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    let (mut d, _) = householder_ql(a, false)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

fn householder_ql(a: &Matrix, want_vectors: bool) -> Result<(Vec<f64>, Option<Matrix>)> {
    let n = a.dim();
    if a.data.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("matrix", "non-finite entry"));
    }
    if n == 0 {
        return Ok((Vec::new(), want_vectors.then(|| Matrix::zeros(0))));
    }
    let mut v = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e, want_vectors);
    tql2(&mut v, &mut d, &mut e, want_vectors)?;
    Ok((d, want_vectors.then_some(v)))
}

// Symmetric Householder reduction to tridiagonal form (EISPACK tred2).
fn tred2(v: &mut Matrix, d: &mut [f64], e: &mut [f64], accumulate: bool) {
    let n = v.dim();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += libm::fabs(*dk);
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = libm::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in j + 1..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    if !accumulate {
        for (j, dj) in d.iter_mut().enumerate() {
            *dj = v[(j, j)];
        }
        e[0] = 0.0;
        return;
    }

    for i in 0..n - 1 {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

// Implicit QL on the tridiagonal matrix (EISPACK tql2).
fn tql2(v: &mut Matrix, d: &mut [f64], e: &mut [f64], accumulate: bool) -> Result<()> {
    const MAX_ITER: usize = 60;
    let n = v.dim();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(libm::fabs(d[l]) + libm::fabs(e[l]));
        let mut m = l;
        while m < n {
            if libm::fabs(e[m]) <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_ITER {
                    return Err(Error::NoConvergence { iterations: MAX_ITER, residual: libm::fabs(e[l]) });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if accumulate {
                        for k in 0..n {
                            h = v[(k, i + 1)];
                            v[(k, i + 1)] = s * v[(k, i)] + c * h;
                            v[(k, i)] = c * v[(k, i)] - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if libm::fabs(e[l]) <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Largest eigenvalue of a Hermitian matrix given row-major.
///
/// Uses the real embedding `[[Re, -Im], [Im, Re]]`, whose spectrum is the
/// Hermitian spectrum with every value doubled.
pub fn hermitian_max_eigenvalue(m: usize, h: &[C64]) -> Result<f64> {
    if h.len() != m * m {
        return Err(Error::DimensionMismatch { expected: m * m, found: h.len() });
    }
    if m == 0 {
        return Ok(0.0);
    }
    let emb = Matrix::from_fn(2 * m, |i, j| {
        let (bi, ri) = (i / m, i % m);
        let (bj, rj) = (j / m, j % m);
        let z = h[ri * m + rj];
        match (bi, bj) {
            (0, 0) | (1, 1) => z.re,
            (0, 1) => -z.im,
            _ => z.im,
        }
    });
    let values = jacobi_eigenvalues(&emb.symmetrized())?;
    Ok(*values.last().expect("non-empty"))
}

/// Spectral norm of a symmetric matrix: largest `|λ|`.
pub fn symmetric_norm(a: &Matrix) -> Result<f64> {
    let values = jacobi_eigenvalues(a)?;
    Ok(values.iter().fold(0.0, |m, v| f64::max(m, libm::fabs(*v))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &Matrix, eig: &Eigen) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..a.dim() {
            let v = eig.vector(k);
            let av = a.apply_real(&v);
            let r: f64 = av.iter().zip(&v).map(|(x, y)| (x - eig.values[k] * y).powi(2)).sum();
            worst = worst.max(r.sqrt());
        }
        worst
    }

    #[test]
    fn identity_has_standard_basis() {
        let eig = jacobi_eigen(&Matrix::identity(4)).unwrap();
        assert_eq!(eig.values, vec![1.0; 4]);
        assert_eq!(eig.vectors, Matrix::identity(4));
    }

    #[test]
    fn two_by_two() {
        let a = Matrix::from_fn(2, |i, j| if i == j { 2.0 } else { 1.0 });
        let eig = jacobi_eigen(&a).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-15);
        assert!((eig.values[1] - 3.0).abs() < 1e-15);
        assert!(residual(&a, &eig) < 1e-14);
        // sign convention
        assert!(eig.vectors[(0, 0)] > 0.0 && eig.vectors[(0, 1)] > 0.0);
    }

    #[test]
    fn solvers_agree() {
        let n = 30;
        let a = Matrix::from_fn(n, |i, j| {
            let (i, j) = (i.min(j) as f64, i.max(j) as f64);
            libm::sin(1.0 + 3.0 * i + 7.0 * j * j) + if i == j { i * 0.1 } else { 0.0 }
        });
        let j = jacobi_eigen(&a).unwrap();
        let q = tridiagonal_eigen(&a).unwrap();
        for k in 0..n {
            assert!((j.values[k] - q.values[k]).abs() < 1e-12);
        }
        assert!(residual(&a, &j) < 1e-12);
        assert!(residual(&a, &q) < 1e-12);
        let vals = tridiagonal_eigenvalues(&a).unwrap();
        for k in 0..n {
            assert!((vals[k] - q.values[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_nan() {
        let mut a = Matrix::identity(3);
        a[(0, 1)] = f64::NAN;
        assert!(jacobi_eigen(&a).is_err());
    }

    #[test]
    fn hermitian_embedding() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2.
        let h = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0), C64::new(1.0, 0.0)];
        let top = hermitian_max_eigenvalue(2, &h).unwrap();
        assert!((top - 2.0).abs() < 1e-14);
    }
}
