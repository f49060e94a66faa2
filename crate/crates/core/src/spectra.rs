//! Spectral gaps of the interpolating Hamiltonian.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, jacobi_eigenvalues, Eigen};
use crate::model::{LinearSchedule, SymmetricOperator, ThetaModel};

/// Ascending eigenvalues and orthonormal, sign-fixed eigenvectors.
pub fn eigensystem(op: &SymmetricOperator) -> Result<Eigen> {
    jacobi_eigen(&op.to_matrix())
}

fn lowest_two(op: &SymmetricOperator) -> Result<(f64, f64)> {
    if op.dim() < 2 {
        return Err(Error::invalid("operator", "a gap needs at least two levels"));
    }
    let values = jacobi_eigenvalues(&op.to_matrix())?;
    Ok((values[0], values[1]))
}

/// `λ1 - λ0` of `H_s` in the Dicke basis.
pub fn gap_at(model: &ThetaModel, s: f64) -> Result<f64> {
    schedule_gap_at(model.schedule(), s)
}

pub fn schedule_gap_at(schedule: &LinearSchedule, s: f64) -> Result<f64> {
    let (l0, l1) = lowest_two(&schedule.interpolate(s)?)?;
    Ok(l1 - l0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSample {
    pub s: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapScan {
    pub n: usize,
    /// `None` when the scanned schedule is not a plain θ model.
    pub theta: Option<usize>,
    /// Sorted by `s`.
    pub samples: Vec<GapSample>,
    pub min_s: f64,
    pub min_gap: f64,
    pub grid: usize,
    pub refinement_depth: usize,
}

/// Points added around the running minimum per refinement level. The
/// bracket spans two grid cells, so 21 points shrink the spacing tenfold.
const REFINE_POINTS: usize = 21;

pub fn gap_scan(model: &ThetaModel, grid: usize, refine_levels: usize) -> Result<GapScan> {
    let mut scan = schedule_gap_scan(model.schedule(), grid, refine_levels)?;
    scan.theta = Some(model.theta());
    Ok(scan)
}

/// Uniform scan of `[0, 1]` with `grid` points followed by `refine_levels`
/// rounds of tenfold refinement around the current minimum. Ties go to the
/// smaller `s`.
pub fn schedule_gap_scan(schedule: &LinearSchedule, grid: usize, refine_levels: usize) -> Result<GapScan> {
    if grid < 3 {
        return Err(Error::invalid("grid", "needs at least 3 points"));
    }
    let sample = |s: f64| -> Result<GapSample> {
        let (lambda0, lambda1) = lowest_two(&schedule.interpolate(s)?)?;
        Ok(GapSample { s, lambda0, lambda1, gap: lambda1 - lambda0 })
    };
    let step = 1.0 / (grid - 1) as f64;
    let mut samples = Vec::with_capacity(grid + refine_levels * REFINE_POINTS);
    for i in 0..grid {
        let s = if i == grid - 1 { 1.0 } else { i as f64 * step };
        samples.push(sample(s)?);
    }
    let mut spacing = step;
    for _ in 0..refine_levels {
        let best = argmin(&samples);
        let center = samples[best].s;
        let lo = (center - spacing).max(0.0);
        let hi = (center + spacing).min(1.0);
        let h = (hi - lo) / (REFINE_POINTS - 1) as f64;
        for j in 0..REFINE_POINTS {
            let s = if j == REFINE_POINTS - 1 { hi } else { lo + j as f64 * h };
            if !samples.iter().any(|p| p.s == s) {
                samples.push(sample(s)?);
            }
        }
        samples.sort_by(|a, b| a.s.total_cmp(&b.s));
        spacing /= 10.0;
    }
    let best = argmin(&samples);
    let (min_s, min_gap) = (samples[best].s, samples[best].gap);
    debug_assert!(samples.iter().all(|p| min_gap <= p.gap));
    Ok(GapScan { n: schedule.n(), theta: None, samples, min_s, min_gap, grid, refinement_depth: refine_levels })
}

/// First index of the smallest gap; `samples` is sorted by `s`.
fn argmin(samples: &[GapSample]) -> usize {
    let mut best = 0;
    for (i, p) in samples.iter().enumerate() {
        if p.gap < samples[best].gap {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelGap {
    /// `λ+ - λ-` of the two-level block.
    pub gap: f64,
    /// The degenerate band at energy 1 sits strictly closer to `λ-` than
    /// `λ+` does, so the true `λ1 - λ0` is `1 - λ-`.
    pub flat_band_closer: bool,
}

/// Closed-form gap for `θ = 1`, where `H_s = I - (1-s)|+⟩⟨+| - s|0⟩⟨0|`.
///
/// The radicand `1/4 - s(1-s)(1-γ²)` with `γ = 2^{-n/2}` is evaluated as
/// `(s-1/2)² + s(1-s)γ²`, which avoids cancellation near `s = 1/2`.
pub fn closed_form_gap_theta1(n: usize, s: f64) -> Result<TwoLevelGap> {
    check_s(s)?;
    if n == 0 {
        return Err(Error::invalid("n", "must be positive"));
    }
    let gamma_sq = libm::exp2(-(n as f64));
    let d = s - 0.5;
    let root = libm::sqrt(d * d + s * (1.0 - s) * gamma_sq);
    let lower = 0.5 - root;
    let gap = 2.0 * root;
    // n = 1 has no flat band
    let flat_band_closer = n > 1 && 1.0 - lower < gap;
    Ok(TwoLevelGap { gap, flat_band_closer })
}

/// Closed-form gap for `θ = n`: the single-qubit gap `sqrt(s² + (1-s)²)`.
pub fn closed_form_gap_thetan(s: f64) -> Result<f64> {
    check_s(s)?;
    Ok(libm::sqrt(s * s + (1.0 - s) * (1.0 - s)))
}

fn check_s(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::invalid("s", alloc::format!("must lie in [0, 1], got {s}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseRow {
    pub theta: usize,
    pub min_gap: f64,
    pub min_s: f64,
}

/// Minimal gap over `s` for each `θ`, in the order given.
pub fn phase_diagram(n: usize, thetas: &[usize], grid: usize, refine_levels: usize) -> Result<Vec<PhaseRow>> {
    if let Some(&bad) = thetas.iter().find(|&&t| t == 0 || t > n) {
        return Err(Error::invalid("theta", alloc::format!("{bad} is outside 1..={n}")));
    }
    thetas
        .iter()
        .map(|&theta| {
            let scan = gap_scan(&ThetaModel::new(n, theta)?, grid, refine_levels)?;
            Ok(PhaseRow { theta, min_gap: scan.min_gap, min_s: scan.min_s })
        })
        .collect()
}
