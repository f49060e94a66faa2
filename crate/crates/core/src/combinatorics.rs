//! Log-space binomials, the Krawtchouk matrix and binomial tail bounds.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, C64};

/// Largest `n` accepted by [`LogBinomialTable::new`].
pub const MAX_LOG_BINOMIAL_N: usize = 100_000;
/// Default cap for an explicit Krawtchouk matrix.
pub const DEFAULT_KRAWTCHOUK_CAP: usize = 64;
/// Largest `n` accepted by [`exact_binomial_tail`].
pub const MAX_EXACT_TAIL_N: usize = 10_000;

/// `ln C(n, k)` for `k = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogBinomialTable {
    n: usize,
    log_choose: Vec<f64>,
}

impl LogBinomialTable {
    /// Builds the row by cumulative sums of `ln((n-k+1)/k)` over the lower
    /// half and mirrors it, so `log_choose[k] == log_choose[n-k]` bit for bit.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_LOG_BINOMIAL_N {
            return Err(Error::invalid("n", alloc::format!("must be in 1..={MAX_LOG_BINOMIAL_N}, got {n}")));
        }
        Ok(Self::build(n))
    }

    // n = 0 is fine internally (a single entry) even though the public
    // constructor rejects it.
    pub(crate) fn build(n: usize) -> Self {
        let mut log_choose = alloc::vec![0.0; n + 1];
        let mut acc = 0.0;
        for k in 1..=n / 2 {
            acc += libm::log((n - k + 1) as f64) - libm::log(k as f64);
            log_choose[k] = acc;
        }
        for k in n / 2 + 1..=n {
            log_choose[k] = log_choose[n - k];
        }
        LogBinomialTable { n, log_choose }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ln_choose(&self, k: usize) -> f64 {
        self.log_choose[k]
    }

    pub fn choose(&self, k: usize) -> f64 {
        libm::exp(self.log_choose[k])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.log_choose
    }

    /// Binomial(n, 1/2) probabilities `C(n,k) / 2^n`.
    pub fn half_weights(&self) -> Vec<f64> {
        let shift = self.n as f64 * core::f64::consts::LN_2;
        self.log_choose.iter().map(|lc| libm::exp(lc - shift)).collect()
    }
}

/// Exact `C(n, k)` as an integer. Panics on overflow of `u128`, which cannot
/// happen for `n ≤ 120`.
pub fn choose_exact(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// The `n`-qubit Hadamard transform restricted to the Dicke states:
/// `Q[j][k] = ⟨D_j| H^{⊗n} |D_k⟩ = 2^{-n/2} K_k(j; n) sqrt(C(n,j) / C(n,k))`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrawtchoukMatrix {
    n: usize,
    entries: Matrix,
}

impl KrawtchoukMatrix {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_cap(n, DEFAULT_KRAWTCHOUK_CAP)
    }

    /// Builds each row with the normalized three-term recurrence
    /// `q_{k+1} = ((n-2j) q_k - sqrt(k(n-k+1)) q_{k-1}) / sqrt((k+1)(n-k))`
    /// up to `k = n/2`, seeded with `q_0 = 2^{-n/2} sqrt(C(n,j))` from log
    /// binomials. The upper half comes from `K_{n-k}(j) = (-1)^j K_k(j)`: the
    /// forward recurrence is only stable while growing into the oscillatory
    /// region, which the lower half always is.
    pub fn with_cap(n: usize, cap: usize) -> Result<Self> {
        if n == 0 || n > cap {
            return Err(Error::invalid("n", alloc::format!("must be in 1..={cap}, got {n}")));
        }
        let table = LogBinomialTable::build(n);
        let nf = n as f64;
        let half = n / 2;
        let mut q = Matrix::zeros(n + 1);
        for j in 0..=n {
            let row = q.row_mut(j);
            row[0] = libm::exp(0.5 * table.ln_choose(j) - 0.5 * nf * core::f64::consts::LN_2);
            if half >= 1 {
                row[1] = (nf - 2.0 * j as f64) * row[0] / libm::sqrt(nf);
            }
            for k in 1..half {
                let kf = k as f64;
                let next = ((nf - 2.0 * j as f64) * row[k] - libm::sqrt(kf * (nf - kf + 1.0)) * row[k - 1])
                    / libm::sqrt((kf + 1.0) * (nf - kf));
                row[k + 1] = next;
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            for k in half + 1..=n {
                row[k] = sign * row[n - k];
            }
        }
        Ok(KrawtchoukMatrix { n, entries: q.symmetrized() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &Matrix {
        &self.entries
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.entries[(j, k)]
    }

    /// `Q·v` for a complex Dicke-basis vector.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let mut out = alloc::vec![C64::new(0.0, 0.0); v.len()];
        self.entries.apply_complex(v, &mut out);
        out
    }

    /// `Q · diag(values) · Q`
    pub fn conjugate_diagonal(&self, values: &[f64]) -> Matrix {
        let n = self.n + 1;
        let qd = Matrix::from_fn(n, |i, j| self.entries[(i, j)] * values[j]);
        qd.matmul(&self.entries).symmetrized()
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid("p", alloc::format!("must lie in (0, 1), got {p}")));
    }
    Ok(())
}

/// Multiplicative Chernoff bound `P(X ≥ (1+δ)μ) ≤ exp(-δ²μ/3)` for
/// `X ~ Binomial(n, p)`. Returns 1 below the mean.
///
/// The `δ²μ/3` exponent only holds for `δ ≤ 1` (`n = 1, p = 0.1` at
/// threshold 1 already breaks it), so larger deviations use
/// `exp(-δ²μ/(2+δ))`, which agrees at `δ = 1`.
pub fn chernoff_upper_tail(n: usize, p: f64, threshold: f64) -> Result<f64> {
    check_probability(p)?;
    let mu = n as f64 * p;
    if threshold < mu {
        return Ok(1.0);
    }
    let delta = threshold / mu - 1.0;
    let denom = if delta <= 1.0 { 3.0 } else { 2.0 + delta };
    Ok(libm::exp(-delta * delta * mu / denom))
}

/// Lower-tail Chernoff bound `P(X ≤ (1-δ)μ) ≤ exp(-δ²μ/2)`, `0 ≤ δ ≤ 1`.
pub fn chernoff_lower_tail(n: usize, p: f64, threshold: f64) -> Result<f64> {
    check_probability(p)?;
    if threshold < 0.0 {
        return Err(Error::invalid("threshold", "lower-tail threshold must be non-negative"));
    }
    let mu = n as f64 * p;
    if threshold > mu {
        return Ok(1.0);
    }
    let delta = 1.0 - threshold / mu;
    Ok(libm::exp(-delta * delta * mu / 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailSide {
    /// `P(X ≥ threshold)`
    Upper,
    /// `P(X ≤ threshold)`
    Lower,
}

/// Exact binomial tail by summing log-space terms, smallest first.
pub fn exact_binomial_tail(n: usize, p: f64, threshold: f64, side: TailSide) -> Result<f64> {
    if n > MAX_EXACT_TAIL_N {
        return Err(Error::invalid("n", alloc::format!("must be at most {MAX_EXACT_TAIL_N}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("p", "must lie in [0, 1]"));
    }
    let ks: Vec<usize> = match side {
        TailSide::Upper => {
            let lo = libm::ceil(threshold.max(0.0)) as usize;
            (lo..=n).collect()
        }
        TailSide::Lower => {
            if threshold < 0.0 {
                return Ok(0.0);
            }
            let hi = (libm::floor(threshold) as usize).min(n);
            (0..=hi).collect()
        }
    };
    Ok(binomial_pmf_sum(n, p, &ks))
}

/// Σ over `ks` of the Binomial(n, p) mass.
pub(crate) fn binomial_pmf_sum(n: usize, p: f64, ks: &[usize]) -> f64 {
    if p == 0.0 {
        return if ks.contains(&0) { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if ks.contains(&n) { 1.0 } else { 0.0 };
    }
    let table = LogBinomialTable::build(n);
    let (lp, lq) = (libm::log(p), libm::log1p(-p));
    let mut terms: Vec<f64> = ks
        .iter()
        .map(|&k| libm::exp(table.ln_choose(k) + k as f64 * lp + (n - k) as f64 * lq))
        .collect();
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}
