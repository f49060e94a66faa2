//! States, operators and the θ-cutoff Hamiltonians in the Dicke basis.
//!
//! Index `k` of every vector is the Hamming-weight sector: `|D_k⟩` is the
//! uniform superposition of all `n`-bit strings with `k` ones.

use alloc::vec;
use alloc::vec::Vec;

use crate::combinatorics::{choose_exact, KrawtchoukMatrix, LogBinomialTable, DEFAULT_KRAWTCHOUK_CAP};
use crate::error::{Error, Result};
use crate::linalg::{self, jacobi_eigen, Eigen, Matrix, Operator, C64};

/// Unit-norm tolerance enforced when a state is constructed.
pub const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricState {
    n: usize,
    amps: Vec<C64>,
}

impl SymmetricState {
    /// Fails unless `amps` has `n + 1` entries and unit norm within
    /// [`NORM_TOLERANCE`].
    pub fn new(n: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != n + 1 {
            return Err(Error::DimensionMismatch { expected: n + 1, found: amps.len() });
        }
        let norm = linalg::norm(&amps);
        if libm::fabs(norm - 1.0) > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm });
        }
        Ok(SymmetricState { n, amps })
    }

    /// Rescales `amps` to unit norm. A zero vector is rejected.
    pub fn normalized(n: usize, mut amps: Vec<C64>) -> Result<Self> {
        let norm = linalg::norm(&amps);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        linalg::scale(&mut amps, 1.0 / norm);
        Self::new(n, amps)
    }

    pub fn from_real(n: usize, amps: &[f64]) -> Result<Self> {
        Self::new(n, linalg::real_to_complex(amps))
    }

    /// The Dicke state `|D_k⟩`.
    pub fn dicke(n: usize, k: usize) -> Result<Self> {
        if k > n {
            return Err(Error::invalid("k", "Dicke index exceeds n"));
        }
        let mut amps = vec![C64::new(0.0, 0.0); n + 1];
        amps[k] = C64::new(1.0, 0.0);
        Ok(SymmetricState { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &SymmetricState) -> C64 {
        linalg::inner(&self.amps, &other.amps)
    }

    pub fn distance(&self, other: &SymmetricState) -> f64 {
        linalg::distance(&self.amps, &other.amps)
    }
}

/// Real symmetric operator on the Dicke basis, stored as its packed upper
/// triangle so that symmetry is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricOperator {
    n: usize,
    upper: Vec<f64>,
}

impl SymmetricOperator {
    /// `f(i, j)` is evaluated for `i ≤ j` only.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let dim = n + 1;
        let mut upper = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in i..dim {
                upper.push(f(i, j));
            }
        }
        SymmetricOperator { n, upper }
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_fn(n, |_, _| 0.0)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("values", "empty diagonal"));
        }
        Ok(Self::from_fn(values.len() - 1, |i, j| if i == j { values[i] } else { 0.0 }))
    }

    /// Reads the upper triangle of a dense matrix.
    pub fn from_upper(m: &Matrix) -> Result<Self> {
        if m.dim() == 0 {
            return Err(Error::invalid("matrix", "empty"));
        }
        Ok(Self::from_fn(m.dim() - 1, |i, j| m[(i, j)]))
    }

    /// `|v⟩⟨v|` for a real vector.
    pub fn projector(v: &[f64]) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::invalid("v", "empty vector"));
        }
        Ok(Self::from_fn(v.len() - 1, |i, j| v[i] * v[j]))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    fn offset(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        // row i starts after sum_{r<i} (dim - r) entries
        i * self.dim() - i * i.saturating_sub(1) / 2 + (j - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[self.offset(i, j)]
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(self.dim(), |i, j| self.get(i, j))
    }

    /// `a·self + b·other`
    pub fn combine(&self, a: f64, other: &SymmetricOperator, b: f64) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        let upper = self.upper.iter().zip(&other.upper).map(|(x, y)| a * x + b * y).collect();
        Ok(SymmetricOperator { n: self.n, upper })
    }

    pub fn add(&self, other: &SymmetricOperator) -> Result<Self> {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &SymmetricOperator) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }

    pub fn scaled(&self, a: f64) -> Self {
        SymmetricOperator { n: self.n, upper: self.upper.iter().map(|x| a * x).collect() }
    }

    /// Spectral norm, `max |λ|`.
    pub fn norm(&self) -> Result<f64> {
        linalg::symmetric_norm(&self.to_matrix())
    }

    pub fn eigen(&self) -> Result<Eigen> {
        jacobi_eigen(&self.to_matrix())
    }

    /// `⟨ψ|A|ψ⟩`, real for symmetric `A`.
    pub fn expectation(&self, psi: &[C64]) -> f64 {
        linalg::inner(psi, &self.apply(psi)).re
    }
}

impl Operator for SymmetricOperator {
    fn dim(&self) -> usize {
        self.n + 1
    }

    fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        let dim = self.dim();
        for yi in y.iter_mut() {
            *yi = C64::new(0.0, 0.0);
        }
        let mut idx = 0;
        for i in 0..dim {
            y[i] += x[i] * self.upper[idx];
            idx += 1;
            for j in i + 1..dim {
                let a = self.upper[idx];
                idx += 1;
                y[i] += x[j] * a;
                y[j] += x[i] * a;
            }
        }
    }
}

/// `H_s = (1 - s)·h0 + s·h1` over `s ∈ [0, 1]`, with the endpoint
/// eigensystems precomputed.
#[derive(Debug, Clone)]
pub struct LinearSchedule {
    h0: SymmetricOperator,
    h1: SymmetricOperator,
    eig0: Eigen,
    eig1: Eigen,
}

impl LinearSchedule {
    pub fn new(h0: SymmetricOperator, h1: SymmetricOperator) -> Result<Self> {
        if h0.n() != h1.n() {
            return Err(Error::DimensionMismatch { expected: h0.dim(), found: h1.dim() });
        }
        let eig0 = h0.eigen()?;
        let eig1 = h1.eigen()?;
        Ok(LinearSchedule { h0, h1, eig0, eig1 })
    }

    pub fn n(&self) -> usize {
        self.h0.n()
    }

    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    pub fn h0(&self) -> &SymmetricOperator {
        &self.h0
    }

    pub fn h1(&self) -> &SymmetricOperator {
        &self.h1
    }

    pub fn eigen0(&self) -> &Eigen {
        &self.eig0
    }

    pub fn eigen1(&self) -> &Eigen {
        &self.eig1
    }

    /// `(1-s)·h0 + s·h1`, with the endpoints returned exactly.
    pub fn interpolate(&self, s: f64) -> Result<SymmetricOperator> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::invalid("s", alloc::format!("must lie in [0, 1], got {s}")));
        }
        if s == 0.0 {
            return Ok(self.h0.clone());
        }
        if s == 1.0 {
            return Ok(self.h1.clone());
        }
        self.h0.combine(1.0 - s, &self.h1, s)
    }

    /// `max(‖h0‖, ‖h1‖)`, which bounds `‖H_s‖` for every `s`.
    pub fn max_endpoint_norm(&self) -> f64 {
        endpoint_norm(&self.eig0).max(endpoint_norm(&self.eig1))
    }

    /// Adds `(1-s)·delta0 + s·delta1` to the schedule.
    pub fn perturbed(&self, delta0: &SymmetricOperator, delta1: &SymmetricOperator) -> Result<Self> {
        LinearSchedule::new(self.h0.add(delta0)?, self.h1.add(delta1)?)
    }
}

pub(crate) fn endpoint_norm(e: &Eigen) -> f64 {
    e.values.iter().fold(0.0, |m, v| f64::max(m, libm::fabs(*v)))
}

/// `H_1^θ = diag(min(k, θ))` and `H_0^θ = Q·H_1^θ·Q` on `n` qubits.
#[derive(Debug, Clone)]
pub struct ThetaModel {
    n: usize,
    theta: usize,
    krawtchouk: KrawtchoukMatrix,
    schedule: LinearSchedule,
}

impl ThetaModel {
    pub fn new(n: usize, theta: usize) -> Result<Self> {
        if n == 0 || n > DEFAULT_KRAWTCHOUK_CAP {
            return Err(Error::invalid("n", alloc::format!("must be in 1..={DEFAULT_KRAWTCHOUK_CAP}, got {n}")));
        }
        if theta == 0 || theta > n {
            return Err(Error::invalid("theta", alloc::format!("must be in 1..={n}, got {theta}")));
        }
        let krawtchouk = KrawtchoukMatrix::new(n)?;
        let energies = cutoff_energies(n, theta);
        let h1 = SymmetricOperator::diagonal(&energies)?;
        let h0 = SymmetricOperator::from_upper(&krawtchouk.conjugate_diagonal(&energies))?;
        let schedule = LinearSchedule::new(h0, h1)?;
        Ok(ThetaModel { n, theta, krawtchouk, schedule })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn theta(&self) -> usize {
        self.theta
    }

    pub fn krawtchouk(&self) -> &KrawtchoukMatrix {
        &self.krawtchouk
    }

    pub fn schedule(&self) -> &LinearSchedule {
        &self.schedule
    }

    pub fn h0(&self) -> &SymmetricOperator {
        self.schedule.h0()
    }

    pub fn h1(&self) -> &SymmetricOperator {
        self.schedule.h1()
    }

    pub fn interpolate(&self, s: f64) -> Result<SymmetricOperator> {
        self.schedule.interpolate(s)
    }

    /// Ground state of `H_0^θ`: `|+…+⟩ = Q|D_0⟩`.
    pub fn initial_ground_state(&self) -> SymmetricState {
        let amps = self.krawtchouk.matrix().column(0);
        SymmetricState::from_real(self.n, &amps).expect("Q has orthonormal columns")
    }

    /// Ground state of `H_1^θ`: `|0…0⟩ = |D_0⟩`.
    pub fn final_ground_state(&self) -> SymmetricState {
        SymmetricState::dicke(self.n, 0).expect("k = 0 is valid")
    }
}

/// `min(k, θ)` for `k = 0..=n`.
pub fn cutoff_energies(n: usize, theta: usize) -> Vec<f64> {
    (0..=n).map(|k| k.min(theta) as f64).collect()
}

/// `(cos φ)^{n-k} (sin φ)^k sqrt(C(n,k))`: the product state
/// `(cos φ|0⟩ + sin φ|1⟩)^{⊗n}` in the Dicke basis.
pub fn product_ground_state(n: usize, phi: f64) -> Result<SymmetricState> {
    if !(0.0..=core::f64::consts::FRAC_PI_4 + 1e-15).contains(&phi) {
        return Err(Error::invalid("phi", alloc::format!("must lie in [0, π/4], got {phi}")));
    }
    if n == 0 {
        return Err(Error::invalid("n", "must be positive"));
    }
    let (s, c) = (libm::sin(phi), libm::cos(phi));
    if s == 0.0 {
        return SymmetricState::dicke(n, 0);
    }
    let table = LogBinomialTable::build(n);
    let (ls, lc) = (libm::log(s), libm::log(c));
    let amps: Vec<f64> = (0..=n)
        .map(|k| libm::exp(0.5 * table.ln_choose(k) + (n - k) as f64 * lc + k as f64 * ls))
        .collect();
    SymmetricState::from_real(n, &amps)
}

/// Bloch angle `φ_s ∈ [0, π/4]` of the ground state of
/// `(1-s)|−⟩⟨−| + s|1⟩⟨1|`, written `cos φ|0⟩ + sin φ|1⟩`.
pub fn single_qubit_angle(s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::invalid("s", alloc::format!("must lie in [0, 1], got {s}")));
    }
    // [[a, b], [b, c]] with a = (1-s)/2, b = -(1-s)/2, c = (1+s)/2
    let b = -(1.0 - s) / 2.0;
    let c_minus_a = s;
    Ok(0.5 * libm::atan2(-2.0 * b, c_minus_a))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Computational (Hamming-weight) sectors.
    Z,
    /// Hadamard-rotated sectors, reached through `Q`.
    X,
}

/// Squared weight of `state` on sectors `k ≥ cutoff` in the given basis.
pub fn high_weight_projection(state: &SymmetricState, cutoff: usize, basis: Basis) -> Result<f64> {
    let n = state.n();
    if cutoff > n {
        return Err(Error::invalid("cutoff", "must not exceed n"));
    }
    let amps = match basis {
        Basis::Z => state.amps().to_vec(),
        Basis::X => KrawtchoukMatrix::with_cap(n, n.max(DEFAULT_KRAWTCHOUK_CAP))?.apply(state.amps()),
    };
    let mut tail: Vec<f64> = amps[cutoff..].iter().map(|a| a.norm_sqr()).collect();
    tail.sort_by(f64::total_cmp);
    Ok(tail.iter().sum())
}

/// One row of the energy landscape of `H_1^θ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LandscapeRow {
    pub k: usize,
    pub energy: usize,
    pub degeneracy: u128,
}

/// `(k, min(k, θ), C(n, k))` for every Hamming weight.
pub fn landscape(n: usize, theta: usize) -> Result<Vec<LandscapeRow>> {
    if n == 0 || n > 120 {
        return Err(Error::invalid("n", "must be in 1..=120"));
    }
    if theta == 0 || theta > n {
        return Err(Error::invalid("theta", "must be in 1..=n"));
    }
    Ok((0..=n)
        .map(|k| LandscapeRow { k, energy: k.min(theta), degeneracy: choose_exact(n as u32, k as u32) })
        .collect())
}
