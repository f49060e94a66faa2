//! Brute-force reference implementation on the full `2^n` dimensional space.
//!
//! Everything here is deliberately naive and only meant for `n ≤ 12`.

use alloc::vec;
use alloc::vec::Vec;

use crate::combinatorics::LogBinomialTable;
use crate::error::{Error, Result};
use crate::evolution::{propagate, EvolutionSpec, HamiltonianPath};
use crate::linalg::{self, tridiagonal_eigen, tridiagonal_eigenvalues, Matrix, Operator, C64};
use crate::model::{SymmetricState, NORM_TOLERANCE};

/// Largest qubit count the oracle accepts.
pub const MAX_ORACLE_N: usize = 12;

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_ORACLE_N {
        return Err(Error::invalid("n", alloc::format!("oracle needs 1..={MAX_ORACLE_N}, got {n}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    n: usize,
    amps: Vec<C64>,
}

impl FullState {
    pub fn new(n: usize, amps: Vec<C64>) -> Result<Self> {
        check_n(n)?;
        if amps.len() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, found: amps.len() });
        }
        let norm = linalg::norm(&amps);
        if libm::fabs(norm - 1.0) > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm });
        }
        Ok(FullState { n, amps })
    }

    /// The computational basis state `|j⟩`.
    pub fn basis(n: usize, j: usize) -> Result<Self> {
        check_n(n)?;
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        *amps.get_mut(j).ok_or_else(|| Error::invalid("j", "index out of range"))? = C64::new(1.0, 0.0);
        Ok(FullState { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }
}

/// In-place normalized Walsh–Hadamard transform, `v ← H^{⊗n} v`.
pub fn fwht<T>(v: &mut [T])
where
    T: Copy + core::ops::Add<Output = T> + core::ops::Sub<Output = T> + core::ops::Mul<f64, Output = T>,
{
    let len = v.len();
    debug_assert!(len.is_power_of_two());
    let mut h = 1;
    while h < len {
        for block in (0..len).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (v[i], v[i + h]);
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
    let scale = 1.0 / libm::sqrt(len as f64);
    for x in v.iter_mut() {
        *x = *x * scale;
    }
}

/// `min(popcount(j), θ)` for every computational basis state.
pub fn cutoff_diagonal(n: usize, theta: usize) -> Vec<f64> {
    (0..1usize << n).map(|j| (j.count_ones() as usize).min(theta) as f64).collect()
}

/// Dense `(H_0^θ, H_1^θ)` on `n ≤ 12` qubits.
pub fn full_theta_hamiltonians(n: usize, theta: usize) -> Result<(Matrix, Matrix)> {
    check_n(n)?;
    if theta == 0 || theta > n {
        return Err(Error::invalid("theta", alloc::format!("must be in 1..={n}, got {theta}")));
    }
    let diag = cutoff_diagonal(n, theta);
    let h1 = Matrix::diagonal(&diag);
    Ok((hadamard_conjugate(&h1), h1))
}

/// `H^{⊗n} A H^{⊗n}` by transforming rows then columns.
pub fn hadamard_conjugate(a: &Matrix) -> Matrix {
    let dim = a.dim();
    let mut m = a.clone();
    for i in 0..dim {
        fwht(m.row_mut(i));
    }
    let mut t = m.transpose();
    for i in 0..dim {
        fwht(t.row_mut(i));
    }
    t.transpose().symmetrized()
}

/// `(1-s)·h0 + s·h1` for dense matrices.
pub fn dense_interpolate(h0: &Matrix, h1: &Matrix, s: f64) -> Matrix {
    Matrix::from_fn(h0.dim(), |i, j| (1.0 - s) * h0[(i, j)] + s * h1[(i, j)])
}

/// Ascending eigenvalues of a dense symmetric matrix.
pub fn full_spectrum(h: &Matrix) -> Result<Vec<f64>> {
    tridiagonal_eigenvalues(h)
}

/// `a_k ↦ a_k / sqrt(C(n,k))` on every weight-`k` string.
pub fn symmetric_sector_embed(state: &SymmetricState) -> Result<FullState> {
    let n = state.n();
    check_n(n)?;
    let table = LogBinomialTable::build(n);
    let amps = (0..1usize << n)
        .map(|j| {
            let k = j.count_ones() as usize;
            state.amps()[k] * libm::exp(-0.5 * table.ln_choose(k))
        })
        .collect();
    Ok(FullState { n, amps })
}

/// Adjoint of [`symmetric_sector_embed`]. Returns the Dicke amplitudes and
/// the norm of the component outside the symmetric sector.
pub fn symmetric_sector_project(full: &[C64], n: usize) -> Result<(Vec<C64>, f64)> {
    check_n(n)?;
    if full.len() != 1 << n {
        return Err(Error::DimensionMismatch { expected: 1 << n, found: full.len() });
    }
    let table = LogBinomialTable::build(n);
    let mut dicke = vec![C64::new(0.0, 0.0); n + 1];
    for (j, a) in full.iter().enumerate() {
        dicke[j.count_ones() as usize] += a;
    }
    for (k, a) in dicke.iter_mut().enumerate() {
        *a *= libm::exp(-0.5 * table.ln_choose(k));
    }
    let leakage = libm::sqrt(
        full.iter()
            .enumerate()
            .map(|(j, a)| {
                let k = j.count_ones() as usize;
                (a - dicke[k] * libm::exp(-0.5 * table.ln_choose(k))).norm_sqr()
            })
            .sum(),
    );
    Ok((dicke, leakage))
}

/// Eigenvalues of `h` whose eigenvectors lie in the symmetric sector, with
/// multiplicity. Levels are grouped into clusters of width `tol`; the
/// symmetric multiplicity of a cluster is the trace of the sector projector
/// over its eigenspace, which does not depend on the basis chosen inside a
/// degenerate eigenspace.
pub fn symmetric_sector_levels(h: &Matrix, n: usize, tol: f64) -> Result<Vec<f64>> {
    check_n(n)?;
    if h.dim() != 1 << n {
        return Err(Error::DimensionMismatch { expected: 1 << n, found: h.dim() });
    }
    let eig = tridiagonal_eigen(h)?;
    let weights: Vec<f64> = (0..h.dim())
        .map(|k| {
            let v = linalg::real_to_complex(&eig.vector(k));
            let (d, _) = symmetric_sector_project(&v, n).expect("dimension checked");
            linalg::norm_sqr(&d)
        })
        .collect();
    let mut levels = Vec::new();
    let mut start = 0;
    while start < eig.values.len() {
        let mut end = start + 1;
        while end < eig.values.len() && eig.values[end] - eig.values[end - 1] <= tol {
            end += 1;
        }
        let mult = libm::round(weights[start..end].iter().sum::<f64>()) as usize;
        let mean = eig.values[start..end].iter().sum::<f64>() / (end - start) as f64;
        levels.extend(core::iter::repeat(mean).take(mult));
        start = end;
    }
    Ok(levels)
}

/// `Σ_{popcount(j) ≥ cutoff} |ψ_j|²`, after a Hadamard transform when
/// `x_basis` is set.
pub fn full_high_weight_projection(amps: &[C64], cutoff: usize, x_basis: bool) -> f64 {
    let mut v = amps.to_vec();
    if x_basis {
        fwht(&mut v);
    }
    v.iter()
        .enumerate()
        .filter(|(j, _)| j.count_ones() as usize >= cutoff)
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

/// Matrix-free `H(s) = (1-s)·H^{⊗n} D0 H^{⊗n} + s·D1` with both `D0`, `D1`
/// diagonal in the computational basis.
#[derive(Debug, Clone)]
pub struct FullPath {
    n: usize,
    d0: Vec<f64>,
    d1: Vec<f64>,
}

impl FullPath {
    pub fn new(n: usize, d0: Vec<f64>, d1: Vec<f64>) -> Result<Self> {
        check_n(n)?;
        for d in [&d0, &d1] {
            if d.len() != 1 << n {
                return Err(Error::DimensionMismatch { expected: 1 << n, found: d.len() });
            }
        }
        Ok(FullPath { n, d0, d1 })
    }

    pub fn theta(n: usize, theta: usize) -> Result<Self> {
        if theta == 0 || theta > n {
            return Err(Error::invalid("theta", alloc::format!("must be in 1..={n}, got {theta}")));
        }
        let d = cutoff_diagonal(n, theta);
        Self::new(n, d.clone(), d)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Dense `H(s)`, for spectra.
    pub fn dense(&self, s: f64) -> Matrix {
        let h0 = hadamard_conjugate(&Matrix::diagonal(&self.d0));
        let h1 = Matrix::diagonal(&self.d1);
        dense_interpolate(&h0, &h1, s)
    }

    fn apply_h0(&self, x: &[C64], y: &mut [C64]) {
        y.copy_from_slice(x);
        fwht(y);
        for (v, d) in y.iter_mut().zip(&self.d0) {
            *v *= *d;
        }
        fwht(y);
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| f64::max(m, libm::fabs(*x)))
}

impl HamiltonianPath for FullPath {
    fn dim(&self) -> usize {
        1 << self.n
    }

    fn apply(&self, s: f64, x: &[C64], y: &mut [C64]) {
        self.apply_h0(x, y);
        for ((yi, xi), d) in y.iter_mut().zip(x).zip(&self.d1) {
            *yi = *yi * (1.0 - s) + xi * (s * d);
        }
    }

    fn norm_bound(&self) -> f64 {
        max_abs(&self.d0).max(max_abs(&self.d1))
    }

    fn trotter_step(&self, s: f64, dt: f64, psi: &mut [C64]) -> Result<()> {
        let phase = |psi: &mut [C64], d: &[f64], t: f64| {
            for (p, e) in psi.iter_mut().zip(d) {
                let (sin, cos) = libm::sincos(-t * e);
                *p *= C64::new(cos, sin);
            }
        };
        phase(psi, &self.d1, dt * s);
        fwht(psi);
        phase(psi, &self.d0, dt * (1.0 - s));
        fwht(psi);
        Ok(())
    }
}

/// Midpoint propagation in the full space; each step's exponential is a
/// Taylor series accurate to `1e-17` per term.
pub fn full_propagate(path: &FullPath, initial: &FullState, tau: f64, steps: usize) -> Result<FullState> {
    if initial.n() != path.n() {
        return Err(Error::DimensionMismatch { expected: path.dim(), found: initial.amps().len() });
    }
    let trace = propagate(path, &EvolutionSpec::new(tau, steps), initial.amps())?;
    Ok(FullState { n: path.n(), amps: trace.final_state })
}

/// A dense operator on the full space for the escape-rate helpers.
pub fn full_operator(path: &FullPath, s: f64) -> impl Operator + '_ {
    struct At<'a>(&'a FullPath, f64);
    impl Operator for At<'_> {
        fn dim(&self) -> usize {
            1 << self.0.n
        }
        fn apply_into(&self, x: &[C64], y: &mut [C64]) {
            self.0.apply(self.1, x, y)
        }
    }
    At(path, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn single_qubit() {
        let (h0, h1) = full_theta_hamiltonians(1, 1).unwrap();
        assert_eq!(h1.as_slice(), &[0.0, 0.0, 0.0, 1.0]);
        let expected = [0.5, -0.5, -0.5, 0.5];
        for (a, b) in h0.as_slice().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn diagonal_spectrum() {
        let (_, h1) = full_theta_hamiltonians(3, 2).unwrap();
        assert_eq!(full_spectrum(&h1).unwrap(), [0.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0]);
    }

    #[test]
    fn embed_examples() {
        let zero = symmetric_sector_embed(&SymmetricState::dicke(4, 0).unwrap()).unwrap();
        assert_eq!(zero, FullState::basis(4, 0).unwrap());
        let t = LogBinomialTable::build(4);
        let w: Vec<f64> = t.half_weights().iter().map(|x| x.sqrt()).collect();
        let plus = symmetric_sector_embed(&SymmetricState::from_real(4, &w).unwrap()).unwrap();
        for a in plus.amps() {
            assert!((a.re - 0.25).abs() < 1e-15 && a.im == 0.0);
        }
        let (back, leak) = symmetric_sector_project(plus.amps(), 4).unwrap();
        assert!(leak < 1e-14);
        for (a, b) in back.iter().zip(&w) {
            assert!((a.re - b).abs() < 1e-15);
        }
    }

    #[test]
    fn fwht_is_involution() {
        let mut v: Vec<C64> = (0..16).map(|i| C64::new(i as f64, -(i as f64) / 3.0)).collect();
        let orig = v.clone();
        fwht(&mut v);
        fwht(&mut v);
        assert!(linalg::distance(&v, &orig) < 1e-13);
        let mut one = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        fwht(&mut one);
        assert!((one[1].re - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn matrix_free_path_matches_dense() {
        let path = FullPath::theta(4, 2).unwrap();
        let dense = path.dense(0.3);
        let x: Vec<C64> = (0..16).map(|i| C64::new(libm::sin(i as f64), libm::cos(2.0 * i as f64))).collect();
        let mut y = vec![C64::new(0.0, 0.0); 16];
        path.apply(0.3, &x, &mut y);
        assert!(linalg::distance(&y, &dense.apply(&x)) < 1e-13);
    }

    #[test]
    fn rejects_large_n() {
        assert!(full_theta_hamiltonians(13, 1).is_err());
        assert!(FullPath::theta(13, 1).is_err());
        assert!(FullState::basis(0, 0).is_err());
    }
}
