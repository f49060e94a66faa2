//! Escape rates, energy uncertainty, the θ thresholds, and checkers for the
//! two bounds relating escape rate to the final overlap and to the gap.

use alloc::vec;
use alloc::vec::Vec;

use crate::combinatorics::{LogBinomialTable, MAX_LOG_BINOMIAL_N};
use crate::error::{Error, Result};
use crate::evolution::EvolutionTrace;
use crate::linalg::{self, hermitian_max_eigenvalue, Operator, C64};
use crate::model::ThetaModel;
use crate::spectra::GapScan;
use crate::LogBase;

/// Orthonormality tolerance for subspace bases.
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-10;
/// Default additive slack on the overlap bound.
pub const DEFAULT_SLACK: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThetaHForm {
    /// `n/2 + sqrt(40·n·log n)`
    #[default]
    Wide,
    /// `n/2 + sqrt(40·log n)`
    Narrow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdConfig {
    pub c: f64,
    pub log_base: LogBase,
    pub theta_h_form: ThetaHForm,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig { c: 1.5, log_base: LogBase::Natural, theta_h_form: ThetaHForm::Wide }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub theta_l: f64,
    pub theta_h: f64,
    pub c: f64,
    pub theta_l_clamped: bool,
    pub theta_h_clamped: bool,
}

/// `θ_ℓ = n/2 - sqrt(n·(log n)^c)` and `θ_h` per `config.theta_h_form`, each
/// clamped to `[0, n]`.
pub fn thresholds(n: usize, config: &ThresholdConfig) -> Result<Thresholds> {
    if n < 2 {
        return Err(Error::invalid("n", "must be at least 2"));
    }
    if !(config.c > 1.0) || !config.c.is_finite() {
        return Err(Error::invalid("c", alloc::format!("must exceed 1, got {}", config.c)));
    }
    let nf = n as f64;
    let log_n = config.log_base.log(nf);
    let raw_l = nf / 2.0 - libm::sqrt(nf * libm::pow(log_n, config.c));
    let raw_h = nf / 2.0
        + match config.theta_h_form {
            ThetaHForm::Wide => libm::sqrt(40.0 * nf * log_n),
            ThetaHForm::Narrow => libm::sqrt(40.0 * log_n),
        };
    Ok(Thresholds {
        theta_l: raw_l.clamp(0.0, nf),
        theta_h: raw_h.clamp(0.0, nf),
        c: config.c,
        theta_l_clamped: !(0.0..=nf).contains(&raw_l),
        theta_h_clamped: !(0.0..=nf).contains(&raw_h),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EscapeReport {
    pub n: usize,
    pub theta: usize,
    pub beta: f64,
    pub beta_sq_exact: f64,
    /// `2θ²·exp(-(n/2-θ)²/n)`, meaningful for `θ ≤ n/2`.
    pub tail_bound: f64,
    pub thresholds: Thresholds,
}

/// Escape rate of `span(|+…+⟩)` under `H_1^θ`:
/// `β² = Var[min(K, θ)]` for `K ~ Binomial(n, 1/2)`.
pub fn escape_rate_theta(n: usize, theta: usize, config: &ThresholdConfig) -> Result<EscapeReport> {
    if n == 0 || n > MAX_LOG_BINOMIAL_N {
        return Err(Error::invalid("n", alloc::format!("must be in 1..={MAX_LOG_BINOMIAL_N}")));
    }
    if theta == 0 || theta > n {
        return Err(Error::invalid("theta", alloc::format!("must be in 1..={n}, got {theta}")));
    }
    let beta_sq_exact = capped_variance(n, theta);
    let (nf, tf) = (n as f64, theta as f64);
    let tail_bound = 2.0 * tf * tf * libm::exp(-(nf / 2.0 - tf) * (nf / 2.0 - tf) / nf);
    let thresholds = if n >= 2 {
        thresholds(n, config)?
    } else {
        Thresholds { theta_l: 0.0, theta_h: 1.0, c: config.c, theta_l_clamped: true, theta_h_clamped: true }
    };
    Ok(EscapeReport { n, theta, beta: libm::sqrt(beta_sq_exact), beta_sq_exact, tail_bound, thresholds })
}

/// `Var[min(K, θ)]` for `K ~ Binomial(n, 1/2)`, computed through the
/// deficit `Y = θ - min(K, θ)` (zero on the bulk `K ≥ θ`) as a sum of
/// non-negative terms: `Σ_{k<θ} w_k (θ-k-D)² + P(K ≥ θ)·D²` with `D = E[Y]`.
fn capped_variance(n: usize, theta: usize) -> f64 {
    let w = LogBinomialTable::build(n).half_weights();
    let below = &w[..theta];
    let deficit = sorted_sum(below.iter().enumerate().map(|(k, wk)| wk * (theta - k) as f64));
    let upper = sorted_sum(w[theta..].iter().copied());
    let spread = sorted_sum(below.iter().enumerate().map(|(k, wk)| {
        let y = (theta - k) as f64 - deficit;
        wk * y * y
    }));
    spread + upper * deficit * deficit
}

fn sorted_sum(it: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = it.collect();
    v.sort_by(f64::total_cmp);
    v.iter().sum()
}

/// Checks that `basis` is orthonormal within [`ORTHONORMAL_TOLERANCE`].
pub fn check_orthonormal(basis: &[Vec<C64>]) -> Result<()> {
    let mut worst: f64 = 0.0;
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((linalg::inner(a, b) - target).norm());
        }
    }
    if worst > ORTHONORMAL_TOLERANCE {
        return Err(Error::NotOrthonormal { deviation: worst });
    }
    Ok(())
}

/// `max_{v ∈ V, ‖v‖=1} ‖Π_{V⊥} H v‖`, the largest singular value of
/// `Π_{V⊥} H Π_V`. `basis` must be an orthonormal basis of `V`.
pub fn escape_rate_general<H: Operator + ?Sized>(basis: &[Vec<C64>], h: &H) -> Result<f64> {
    check_orthonormal(basis)?;
    let d = h.dim();
    if let Some(bad) = basis.iter().find(|v| v.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: bad.len() });
    }
    let m = basis.len();
    if m == 0 || m == d {
        return Ok(0.0);
    }
    // columns of Π_{V⊥} H B, projected twice for accuracy
    let mut leak: Vec<Vec<C64>> = basis.iter().map(|v| h.apply(v)).collect();
    for w in leak.iter_mut() {
        for _ in 0..2 {
            for b in basis {
                let c = linalg::inner(b, w);
                for (x, y) in w.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
    }
    let mut gram = vec![C64::new(0.0, 0.0); m * m];
    for i in 0..m {
        for j in 0..m {
            gram[i * m + j] = linalg::inner(&leak[i], &leak[j]);
        }
    }
    Ok(libm::sqrt(hermitian_max_eigenvalue(m, &gram)?.max(0.0)))
}

/// `sqrt(⟨H²⟩ - ⟨H⟩²)`, evaluated as `‖(H - ⟨H⟩)ψ‖` so it is never
/// negative.
pub fn energy_uncertainty<H: Operator + ?Sized>(state: &[C64], h: &H) -> Result<f64> {
    if state.len() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: state.len() });
    }
    let norm = linalg::norm(state);
    if libm::fabs(norm - 1.0) > crate::model::NORM_TOLERANCE {
        return Err(Error::NotNormalized { norm });
    }
    let hpsi = h.apply(state);
    let mean = linalg::inner(state, &hpsi);
    Ok(libm::sqrt(hpsi.iter().zip(state).map(|(a, b)| (a - mean * b).norm_sqr()).sum()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Holds,
    Violated,
    /// The bound says nothing here (e.g. `βτ ≥ π/2`).
    Vacuous,
    /// An assumption of the bound is not met.
    PreconditionFailed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapBoundReport {
    pub beta: f64,
    pub beta_tau: f64,
    pub sin_bound: f64,
    /// `‖Π_V α_1‖ = |⟨α_0|α_1⟩|`
    pub initial_final_overlap: f64,
    pub slack: f64,
    pub measured_overlap: f64,
    pub status: CheckStatus,
}

/// The final overlap `|⟨α_1|ψ(τ)⟩|` must stay below
/// `sin(βτ) + ‖Π_V α_1‖ + slack` while `βτ < π/2`, with
/// `V = span(|+…+⟩)`.
pub fn check_lemma1(model: &ThetaModel, tau: f64, trace: &EvolutionTrace, slack: f64) -> Result<OverlapBoundReport> {
    let measured_overlap = match trace.final_overlap_alpha1 {
        Some(x) => x,
        None => linalg::inner(model.final_ground_state().amps(), &trace.final_state).norm(),
    };
    overlap_bound(model, tau, measured_overlap, slack)
}

/// As [`check_lemma1`] for an already measured overlap.
pub fn overlap_bound(model: &ThetaModel, tau: f64, measured_overlap: f64, slack: f64) -> Result<OverlapBoundReport> {
    if !(tau >= 0.0) {
        return Err(Error::invalid("tau", "must be non-negative"));
    }
    let beta = escape_rate_theta(model.n(), model.theta(), &ThresholdConfig::default())?.beta;
    let initial_final_overlap = model.initial_ground_state().inner(&model.final_ground_state()).norm();
    let beta_tau = beta * tau;
    let sin_bound = libm::sin(beta_tau);
    let status = if beta_tau >= core::f64::consts::FRAC_PI_2 {
        CheckStatus::Vacuous
    } else if measured_overlap <= sin_bound + initial_final_overlap + slack {
        CheckStatus::Holds
    } else {
        CheckStatus::Violated
    };
    Ok(OverlapBoundReport { beta, beta_tau, sin_bound, initial_final_overlap, slack, measured_overlap, status })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapBoundReport {
    pub beta: f64,
    pub interpolation_norm: f64,
    /// `(100·β·‖h0 - h1‖³)^{1/4}`
    pub bound: f64,
    pub measured_min_gap: f64,
    pub measured_min_s: f64,
    pub status: CheckStatus,
}

/// Smallest `n` with `2^{-n/2} ≤ 1/10`.
pub const GAP_BOUND_MIN_N: usize = 7;

/// The minimal gap must not exceed `(100·β·‖h0 - h1‖³)^{1/4}` once
/// `‖Π_V α_1‖ = 2^{-n/2} ≤ 1/10`.
pub fn check_lemma2(model: &ThetaModel, scan: &GapScan) -> Result<GapBoundReport> {
    let beta = escape_rate_theta(model.n(), model.theta(), &ThresholdConfig::default())?.beta;
    let interpolation_norm = model.h0().sub(model.h1())?.norm()?;
    let bound = libm::pow(100.0 * beta * interpolation_norm * interpolation_norm * interpolation_norm, 0.25);
    let overlap = model.initial_ground_state().inner(&model.final_ground_state()).norm();
    let status = if model.n() < GAP_BOUND_MIN_N || overlap > 0.1 {
        CheckStatus::PreconditionFailed
    } else if scan.min_gap <= bound {
        CheckStatus::Holds
    } else {
        CheckStatus::Violated
    };
    Ok(GapBoundReport {
        beta,
        interpolation_norm,
        bound,
        measured_min_gap: scan.min_gap,
        measured_min_s: scan.min_s,
        status,
    })
}
