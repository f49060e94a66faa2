//! Perturbations of the adiabatic path and checks on how far they can push
//! the evolved state.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::evolution::{propagate, EvolutionSpec, HamiltonianPath};
use crate::linalg::{self, Operator, C64};
use crate::model::{
    high_weight_projection, product_ground_state, single_qubit_angle, Basis, LinearSchedule, SymmetricOperator,
    SymmetricState, ThetaModel,
};
use crate::spectra::{schedule_gap_scan, GapScan};

/// Mixing weight between the confined and unconfined parts of the bound.
pub const ETA: f64 = 1.0 / 200.0;
/// Rank tolerance when orthonormalizing snapshots.
pub const RANK_TOLERANCE: f64 = 1e-10;

// ---------------------------------------------------------------------------
// perturbations

/// A Hamming-symmetric perturbation of a linear schedule.
#[derive(Debug, Clone, PartialEq)]
pub enum Perturbation {
    /// Shifts every sector `k ≥ cutoff` by `magnitudes[k - cutoff]` in both
    /// the computational basis (added to `h1`) and the Hadamard basis (added
    /// to `h0`). A single magnitude is broadcast to all such sectors.
    HammingCutoff { cutoff: usize, magnitudes: Vec<f64> },
    /// `x(s)·|D_k⟩⟨D_k|` with `x(s) = (1-s)·x0 + s·x1`.
    SectorProjector { sector: usize, x0: f64, x1: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSpec {
    pub kind: Perturbation,
    /// Norm cap asserted after materialization; `None` skips the check.
    pub g_max: Option<f64>,
}

impl PerturbationSpec {
    /// The `(δ0, δ1)` pair added to `(h0, h1)`.
    pub fn materialize(&self, model: &ThetaModel) -> Result<(SymmetricOperator, SymmetricOperator)> {
        let n = model.n();
        let (d0, d1) = match &self.kind {
            Perturbation::HammingCutoff { cutoff, magnitudes } => {
                if *cutoff > n {
                    return Err(Error::invalid("cutoff", alloc::format!("must be at most n = {n}")));
                }
                let width = n + 1 - cutoff;
                if magnitudes.len() != width && magnitudes.len() != 1 {
                    return Err(Error::invalid(
                        "magnitudes",
                        alloc::format!("expected 1 or {width} values, got {}", magnitudes.len()),
                    ));
                }
                let diag: Vec<f64> = (0..=n)
                    .map(|k| match k.checked_sub(*cutoff) {
                        Some(i) => magnitudes[if magnitudes.len() == 1 { 0 } else { i }],
                        None => 0.0,
                    })
                    .collect();
                let d1 = SymmetricOperator::diagonal(&diag)?;
                let d0 = SymmetricOperator::from_upper(&model.krawtchouk().conjugate_diagonal(&diag))?;
                (d0, d1)
            }
            Perturbation::SectorProjector { sector, x0, x1 } => {
                let unit = SymmetricState::dicke(n, *sector)?;
                let p = SymmetricOperator::projector(&unit.amps().iter().map(|a| a.re).collect::<Vec<_>>())?;
                (p.scaled(*x0), p.scaled(*x1))
            }
        };
        if let Some(g_max) = self.g_max {
            let norm = d0.norm()?.max(d1.norm()?);
            if norm > g_max * (1.0 + 1e-12) {
                return Err(Error::PerturbationTooLarge { norm, g_max });
            }
        }
        Ok((d0, d1))
    }

    pub fn perturb(&self, model: &ThetaModel) -> Result<LinearSchedule> {
        let (d0, d1) = self.materialize(model)?;
        model.schedule().perturbed(&d0, &d1)
    }
}

// ---------------------------------------------------------------------------
// path shift

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathShiftReport {
    /// `‖ψ_a(τ) - ψ_b(τ)‖`
    pub lhs: f64,
    /// `∫ ‖(H_a - H_b)(t) ψ_a(t)‖ dt` by the trapezoid rule on the step grid.
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
}

/// Propagates `initial` under both paths in lockstep (midpoint rule, same
/// grid) and compares the final distance to the integrated perturbation
/// along path `a`.
pub fn check_lemma3<A, B>(a: &A, b: &B, initial: &[C64], tau: f64, steps: usize, slack: f64) -> Result<PathShiftReport>
where
    A: HamiltonianPath + ?Sized,
    B: HamiltonianPath + ?Sized,
{
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    if initial.len() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: initial.len() });
    }
    if !(tau > 0.0) || steps == 0 {
        return Err(Error::invalid("tau/steps", "need tau > 0 and steps ≥ 1"));
    }
    let dim = a.dim();
    let dt = tau / steps as f64;
    let mut psi_a = initial.to_vec();
    let mut psi_b = initial.to_vec();
    let mut ya = vec![C64::new(0.0, 0.0); dim];
    let mut yb = vec![C64::new(0.0, 0.0); dim];
    let mut integrand = |s: f64, psi: &[C64]| {
        a.apply(s, psi, &mut ya);
        b.apply(s, psi, &mut yb);
        linalg::distance(&ya, &yb)
    };
    let mut rhs = 0.5 * integrand(0.0, &psi_a);
    for j in 0..steps {
        let s_mid = (j as f64 + 0.5) / steps as f64;
        a.exp_step(s_mid, dt, &mut psi_a)?;
        b.exp_step(s_mid, dt, &mut psi_b)?;
        let s = (j + 1) as f64 / steps as f64;
        let f = integrand(s, &psi_a);
        rhs += if j + 1 == steps { 0.5 * f } else { f };
    }
    rhs *= dt;
    let lhs = linalg::distance(&psi_a, &psi_b);
    Ok(PathShiftReport { lhs, rhs, slack, holds: lhs <= rhs + slack })
}

// ---------------------------------------------------------------------------
// spectrum cutoff robustness

#[derive(Debug, Clone, PartialEq)]
pub struct CutoffRobustnessReport {
    pub n: usize,
    pub cutoff: usize,
    pub tau: f64,
    pub steps: usize,
    /// `|⟨0…0|ψ̃(τ)⟩|`
    pub final_overlap: f64,
    /// Same quantity without the perturbation.
    pub unperturbed_overlap: f64,
    /// `‖ψ(τ) - ψ̃(τ)‖`
    pub path_shift: f64,
    /// `τ·g·max_s[(1-s)‖Π_W^x α_s‖ + s‖Π_W^z α_s‖]` with `g` the largest
    /// magnitude and `α_s` the unperturbed product ground state.
    pub path_shift_bound: f64,
    /// The projection maximum inside `path_shift_bound`.
    pub max_high_weight_amplitude: f64,
    pub perturbed_scan: GapScan,
}

/// Runs the `θ = n` schedule with every sector of Hamming weight at least
/// `cutoff` shifted by `magnitudes`, in both bases.
pub fn corollary1_experiment(
    n: usize,
    cutoff: usize,
    magnitudes: &[f64],
    tau: f64,
    steps: usize,
    scan_grid: usize,
) -> Result<CutoffRobustnessReport> {
    let model = ThetaModel::new(n, n)?;
    let spec = PerturbationSpec {
        kind: Perturbation::HammingCutoff { cutoff, magnitudes: magnitudes.to_vec() },
        g_max: None,
    };
    let perturbed = spec.perturb(&model)?;
    let init = model.initial_ground_state();
    let evo = EvolutionSpec::new(tau, steps);
    let plain = propagate(model.schedule(), &evo, init.amps())?;
    let shifted = propagate(&perturbed, &evo, init.amps())?;
    let target = model.final_ground_state();
    let g = magnitudes.iter().fold(0.0, |m: f64, x| m.max(libm::fabs(*x)));

    let mut max_amp: f64 = 0.0;
    for i in 0..=200 {
        let s = i as f64 / 200.0;
        let alpha = product_ground_state(n, single_qubit_angle(s)?)?;
        let px = libm::sqrt(high_weight_projection(&alpha, cutoff, Basis::X)?);
        let pz = libm::sqrt(high_weight_projection(&alpha, cutoff, Basis::Z)?);
        max_amp = max_amp.max((1.0 - s) * px + s * pz);
    }
    Ok(CutoffRobustnessReport {
        n,
        cutoff,
        tau,
        steps,
        final_overlap: linalg::inner(target.amps(), &shifted.final_state).norm(),
        unperturbed_overlap: linalg::inner(target.amps(), &plain.final_state).norm(),
        path_shift: linalg::distance(&plain.final_state, &shifted.final_state),
        path_shift_bound: tau * g * max_amp,
        max_high_weight_amplitude: max_amp,
        perturbed_scan: schedule_gap_scan(&perturbed, scan_grid, 3)?,
    })
}

// ---------------------------------------------------------------------------
// gap closing without failure

/// Weight of the ground state of `H_s + x·|D_n⟩⟨D_n|` on `|D_n⟩`.
fn top_sector_ground_weight(model: &ThetaModel, s: f64, x: f64) -> Result<f64> {
    let n = model.n();
    let h = model.interpolate(s)?.add(&SymmetricOperator::projector(&top_sector(n))?.scaled(x))?;
    let v = h.eigen()?.vector(0);
    Ok(v[n] * v[n])
}

fn top_sector(n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n + 1];
    v[n] = 1.0;
    v
}

/// Bisects `x ∈ [-2n, 0]` until the ground state of `H_{s*} + x·|D_n⟩⟨D_n|`
/// on the `θ = n` model carries weight `1/2` on `|D_n⟩`, i.e. sits exactly
/// on the avoided crossing.
pub fn tune_crossing(n: usize, s_star: f64) -> Result<f64> {
    let model = ThetaModel::new(n, n)?;
    let (mut lo, mut hi) = (-2.0 * n as f64, 0.0);
    if top_sector_ground_weight(&model, s_star, lo)? < 0.5 || top_sector_ground_weight(&model, s_star, hi)? > 0.5 {
        return Err(Error::invalid("s_star", "no crossing inside [-2n, 0]"));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if top_sector_ground_weight(&model, s_star, mid)? >= 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapClosingReport {
    pub n: usize,
    pub x0: f64,
    pub x1: f64,
    pub min_gap: f64,
    pub min_s: f64,
    /// `|⟨0…0|ψ(τ)⟩|`
    pub final_overlap: f64,
    pub tau: f64,
    pub steps: usize,
}

/// Runs the `θ = n` schedule plus `x(s)·|D_n⟩⟨D_n|` with
/// `x(s) = (1-s)·x0 + s·x1`.
pub fn gap_closing_success_experiment(
    n: usize,
    x0: f64,
    x1: f64,
    tau: f64,
    steps: usize,
    grid: usize,
    refine: usize,
) -> Result<GapClosingReport> {
    let model = ThetaModel::new(n, n)?;
    let spec = PerturbationSpec { kind: Perturbation::SectorProjector { sector: n, x0, x1 }, g_max: None };
    let schedule = spec.perturb(&model)?;
    let scan = schedule_gap_scan(&schedule, grid, refine)?;
    let trace = propagate(&schedule, &EvolutionSpec::new(tau, steps), model.initial_ground_state().amps())?;
    Ok(GapClosingReport {
        n,
        x0,
        x1,
        min_gap: scan.min_gap,
        min_s: scan.min_s,
        final_overlap: linalg::inner(model.final_ground_state().amps(), &trace.final_state).norm(),
        tau,
        steps,
    })
}

// ---------------------------------------------------------------------------
// confinement

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubspaceSource {
    Snapshot,
    Given,
}

/// An orthonormal basis of a subspace of the state space.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfinementSubspace {
    vectors: Vec<Vec<C64>>,
    ambient_dim: usize,
    source: SubspaceSource,
}

impl ConfinementSubspace {
    pub fn new(ambient_dim: usize, source: SubspaceSource) -> Self {
        ConfinementSubspace { vectors: Vec::new(), ambient_dim, source }
    }

    /// Orthonormalizes `vectors`, dropping any whose residual falls below
    /// [`RANK_TOLERANCE`] relative to its norm.
    pub fn span(ambient_dim: usize, vectors: &[Vec<C64>], source: SubspaceSource) -> Result<Self> {
        let mut sub = Self::new(ambient_dim, source);
        for v in vectors {
            sub.push(v)?;
        }
        Ok(sub)
    }

    /// Adds `v` after two rounds of modified Gram–Schmidt. Returns whether
    /// it enlarged the subspace.
    pub fn push(&mut self, v: &[C64]) -> Result<bool> {
        if v.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim, found: v.len() });
        }
        let scale = linalg::norm(v);
        if scale == 0.0 || self.vectors.len() == self.ambient_dim {
            return Ok(false);
        }
        let mut w = v.to_vec();
        for _ in 0..2 {
            for b in &self.vectors {
                let c = linalg::inner(b, &w);
                for (x, y) in w.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let r = linalg::norm(&w);
        if r <= RANK_TOLERANCE * scale {
            return Ok(false);
        }
        linalg::scale(&mut w, 1.0 / r);
        self.vectors.push(w);
        Ok(true)
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn source(&self) -> SubspaceSource {
        self.source
    }

    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    /// `‖Π_𝒳 v‖²`
    pub fn projection_norm_sqr(&self, v: &[C64]) -> f64 {
        self.vectors.iter().map(|b| linalg::inner(b, v).norm_sqr()).sum()
    }

    /// `‖Π_𝒳 e_j‖²` for every computational basis vector.
    pub fn diagonal_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.ambient_dim];
        for b in &self.vectors {
            for (acc, x) in w.iter_mut().zip(b) {
                *acc += x.norm_sqr();
            }
        }
        w
    }
}

/// Which orthonormal basis to pick the perturbation directions from.
#[derive(Debug, Clone, Copy)]
pub enum BasisChoice<'a> {
    Computational,
    Explicit(&'a [Vec<C64>]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubbasisSelection {
    /// Picked basis indices, smallest projection first.
    pub indices: Vec<usize>,
    /// `Σ ‖Π_𝒳 w_i‖²` over the picks.
    pub projection_sum: f64,
    /// `d·dim𝒳/dimℋ`
    pub bound: f64,
    pub holds: bool,
}

/// Greedily picks the `d` basis vectors with the smallest weight inside `x`
/// (ties go to the lower index).
pub fn select_low_overlap_subbasis(basis: BasisChoice<'_>, x: &ConfinementSubspace, d: usize) -> Result<SubbasisSelection> {
    let weights = match basis {
        BasisChoice::Computational => x.diagonal_weights(),
        BasisChoice::Explicit(vectors) => {
            crate::escape::check_orthonormal(vectors)?;
            if let Some(bad) = vectors.iter().find(|v| v.len() != x.ambient_dim()) {
                return Err(Error::DimensionMismatch { expected: x.ambient_dim(), found: bad.len() });
            }
            vectors.iter().map(|v| x.projection_norm_sqr(v)).collect()
        }
    };
    if d > weights.len() {
        return Err(Error::invalid("d", alloc::format!("must be at most {}", weights.len())));
    }
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[a].total_cmp(&weights[b]).then(a.cmp(&b)));
    order.truncate(d);
    let projection_sum = order.iter().map(|&i| weights[i]).sum();
    let bound = d as f64 * x.dim() as f64 / x.ambient_dim() as f64;
    Ok(SubbasisSelection { indices: order, projection_sum, bound, holds: projection_sum <= bound + 1e-12 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfinementOptions {
    /// Integration steps between consecutive snapshots.
    pub substeps: usize,
    pub slack: f64,
}

impl Default for ConfinementOptions {
    fn default() -> Self {
        ConfinementOptions { substeps: 8, slack: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfinementReport {
    pub snapshots: usize,
    pub dim: usize,
    /// `min_t ‖Π_𝒳 ψ(t)‖` over the integration grid.
    pub min_projection: f64,
    /// `min_t |⟨ψ(t)|ψ(t_k)⟩|` with `t_k` the latest snapshot before `t`.
    pub min_snapshot_overlap: f64,
    pub holds: bool,
}

/// Collects `ψ(t_k)` at `t_k = k/(10·h_max)` for `k < ⌈10·τ·h_max⌉`,
/// orthonormalizes them into `𝒳`, then re-runs the same propagation to
/// measure how much of `ψ(t)` ever leaves `𝒳`. The check asks for
/// `‖Π_𝒳 ψ(t)‖ ≥ 1 - 1/200 - slack`.
pub fn snapshot_confinement<P: HamiltonianPath + ?Sized>(
    path: &P,
    initial: &[C64],
    tau: f64,
    h_max: f64,
    options: &ConfinementOptions,
) -> Result<(ConfinementSubspace, ConfinementReport)> {
    if !(tau > 0.0) || !(h_max > 0.0) || options.substeps == 0 {
        return Err(Error::invalid("tau/h_max/substeps", "must all be positive"));
    }
    if initial.len() != path.dim() {
        return Err(Error::DimensionMismatch { expected: path.dim(), found: initial.len() });
    }
    for i in 0..=100 {
        let s = i as f64 / 100.0;
        let norm = path.norm_at(s)?;
        if norm > h_max * (1.0 + 1e-12) {
            return Err(Error::NormBoundExceeded { s, norm, bound: h_max });
        }
    }
    let interval = 1.0 / (10.0 * h_max);
    let snapshots = libm::ceil(10.0 * tau * h_max).max(1.0) as usize;

    let mut sub = ConfinementSubspace::new(path.dim(), SubspaceSource::Snapshot);
    walk_snapshots(path, initial, tau, interval, snapshots, options.substeps, |psi, at_snapshot| {
        if at_snapshot {
            sub.push(psi)?;
        }
        Ok(())
    })?;

    let mut min_projection: f64 = 1.0;
    let mut min_snapshot_overlap: f64 = 1.0;
    let mut last_snapshot = initial.to_vec();
    walk_snapshots(path, initial, tau, interval, snapshots, options.substeps, |psi, at_snapshot| {
        if at_snapshot {
            last_snapshot.copy_from_slice(psi);
        }
        min_projection = min_projection.min(libm::sqrt(sub.projection_norm_sqr(psi)));
        min_snapshot_overlap = min_snapshot_overlap.min(linalg::inner(psi, &last_snapshot).norm());
        Ok(())
    })?;
    let report = ConfinementReport {
        snapshots,
        dim: sub.dim(),
        min_projection,
        min_snapshot_overlap,
        holds: min_projection >= 1.0 - ETA - options.slack,
    };
    Ok((sub, report))
}

/// Calls `visit(ψ, is_snapshot)` at every grid time. Snapshot `k` sits at
/// `k·interval`; the span after the last snapshot runs to `τ`.
fn walk_snapshots<P: HamiltonianPath + ?Sized>(
    path: &P,
    initial: &[C64],
    tau: f64,
    interval: f64,
    snapshots: usize,
    substeps: usize,
    mut visit: impl FnMut(&[C64], bool) -> Result<()>,
) -> Result<()> {
    let mut psi = initial.to_vec();
    for k in 0..snapshots {
        let start = k as f64 * interval;
        let end = if k + 1 == snapshots { tau } else { ((k + 1) as f64 * interval).min(tau) };
        visit(&psi, true)?;
        let dt = (end - start) / substeps as f64;
        if dt <= 0.0 {
            continue;
        }
        for j in 0..substeps {
            let t_mid = start + (j as f64 + 0.5) * dt;
            path.exp_step(t_mid / tau, dt, &mut psi)?;
            if j + 1 < substeps {
                visit(&psi, false)?;
            }
        }
    }
    visit(&psi, false)
}

// ---------------------------------------------------------------------------
// bounded-rank perturbations

/// Where a rank-`d` projector perturbation is supported.
#[derive(Debug, Clone, PartialEq)]
pub enum ProjectorSupport {
    /// Computational basis states by index.
    Indices(Vec<usize>),
    Vectors(Vec<Vec<C64>>),
}

/// `H(s) + g·Π_W`. Both the perturbed and the unperturbed runs go through
/// this wrapper so they share one integrator.
pub struct ProjectorPerturbed<'a, P: ?Sized> {
    base: &'a P,
    g: f64,
    support: ProjectorSupport,
}

impl<'a, P: HamiltonianPath + ?Sized> ProjectorPerturbed<'a, P> {
    pub fn new(base: &'a P, g: f64, support: ProjectorSupport) -> Self {
        ProjectorPerturbed { base, g, support }
    }
}

impl<P: HamiltonianPath + ?Sized> HamiltonianPath for ProjectorPerturbed<'_, P> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn apply(&self, s: f64, x: &[C64], y: &mut [C64]) {
        self.base.apply(s, x, y);
        match &self.support {
            ProjectorSupport::Indices(idx) => {
                for &i in idx {
                    y[i] += x[i] * self.g;
                }
            }
            ProjectorSupport::Vectors(vs) => {
                for v in vs {
                    let c = linalg::inner(v, x) * self.g;
                    for (yi, vi) in y.iter_mut().zip(v) {
                        *yi += c * vi;
                    }
                }
            }
        }
    }

    fn norm_bound(&self) -> f64 {
        self.base.norm_bound() + libm::fabs(self.g)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundedRankReport {
    pub d: usize,
    pub g_max: f64,
    pub tau: f64,
    pub h_max: f64,
    pub dim_h: usize,
    pub confinement: ConfinementReport,
    pub selection: SubbasisSelection,
    /// `‖ψ(τ) - ψ̃(τ)‖`
    pub lhs: f64,
    /// `τ·g·[(1-η)·sqrt(d·dim𝒳/dimℋ) + η]`
    pub confinement_bound: f64,
    /// `τ²·g²·[(1-η)·sqrt(10·τ·h_max·d/dimℋ) + η]`, reported only.
    pub bounded_rank_bound: f64,
    pub slack: f64,
    pub holds_confinement_bound: bool,
}

/// Confinement, then greedy selection of `d` directions nearly orthogonal to
/// it, then `δH = g_max·Π_W`, then the final-state distance between the
/// perturbed and unperturbed runs.
pub fn check_theorem2<P: HamiltonianPath + ?Sized>(
    path: &P,
    initial: &[C64],
    tau: f64,
    steps: usize,
    basis: BasisChoice<'_>,
    d: usize,
    g_max: f64,
    slack: f64,
) -> Result<BoundedRankReport> {
    if !(g_max >= 0.0) {
        return Err(Error::invalid("g_max", "must be non-negative"));
    }
    let h_max = path.norm_bound();
    let (sub, confinement) = snapshot_confinement(path, initial, tau, h_max, &ConfinementOptions::default())?;
    let selection = select_low_overlap_subbasis(basis, &sub, d)?;
    let support = match basis {
        BasisChoice::Computational => ProjectorSupport::Indices(selection.indices.clone()),
        BasisChoice::Explicit(vs) => ProjectorSupport::Vectors(selection.indices.iter().map(|&i| vs[i].clone()).collect()),
    };
    let plain = ProjectorPerturbed::new(path, 0.0, ProjectorSupport::Indices(Vec::new()));
    let shifted = ProjectorPerturbed::new(path, g_max, support);
    let evo = EvolutionSpec::new(tau, steps);
    let a = propagate(&plain, &evo, initial)?;
    let b = propagate(&shifted, &evo, initial)?;
    let lhs = linalg::distance(&a.final_state, &b.final_state);

    let dim_h = path.dim() as f64;
    let df = d as f64;
    let confinement_bound = tau * g_max * ((1.0 - ETA) * libm::sqrt(df * sub.dim() as f64 / dim_h) + ETA);
    let bounded_rank_bound = tau * tau * g_max * g_max * ((1.0 - ETA) * libm::sqrt(10.0 * tau * h_max * df / dim_h) + ETA);
    Ok(BoundedRankReport {
        d,
        g_max,
        tau,
        h_max,
        dim_h: path.dim(),
        confinement,
        selection,
        lhs,
        confinement_bound,
        bounded_rank_bound,
        slack,
        holds_confinement_bound: lhs <= confinement_bound + slack,
    })
}

/// A fixed operator viewed as a constant path.
pub struct ConstantPath<'a, O: ?Sized>(pub &'a O, pub f64);

impl<O: Operator + ?Sized> HamiltonianPath for ConstantPath<'_, O> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn apply(&self, _s: f64, x: &[C64], y: &mut [C64]) {
        self.0.apply_into(x, y)
    }
    fn norm_bound(&self) -> f64 {
        self.1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(dim: usize, i: usize) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); dim];
        v[i] = C64::new(1.0, 0.0);
        v
    }

    #[test]
    fn identical_paths_do_not_shift() {
        let m = ThetaModel::new(6, 3).unwrap();
        let r = check_lemma3(m.schedule(), m.schedule(), m.initial_ground_state().amps(), 5.0, 200, 1e-3).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 0.0);
        assert!(r.holds);
    }

    #[test]
    fn global_shift_is_a_phase() {
        let m = ThetaModel::new(5, 5).unwrap();
        let eps = 0.03;
        let id = SymmetricOperator::identity(5).scaled(eps);
        let shifted = m.schedule().perturbed(&id, &id).unwrap();
        let tau = 7.0;
        let r = check_lemma3(m.schedule(), &shifted, m.initial_ground_state().amps(), tau, 400, 0.0).unwrap();
        assert!((r.lhs - 2.0 * libm::sin(eps * tau / 2.0)).abs() < 1e-9);
        assert!((r.rhs - eps * tau).abs() < 1e-9);
        assert!(r.holds);
    }

    #[test]
    fn zero_magnitudes_leave_run_unchanged() {
        let r = corollary1_experiment(6, 4, &[0.0], 5.0, 100, 11).unwrap();
        assert_eq!(r.final_overlap, r.unperturbed_overlap);
        assert_eq!(r.path_shift, 0.0);
    }

    #[test]
    fn cutoff_perturbation_touches_only_high_sectors() {
        let m = ThetaModel::new(8, 8).unwrap();
        let spec = PerturbationSpec {
            kind: Perturbation::HammingCutoff { cutoff: 6, magnitudes: vec![1.0, 2.0, 3.0] },
            g_max: Some(3.0),
        };
        let (d0, d1) = spec.materialize(&m).unwrap();
        for k in 0..=8 {
            assert_eq!(d1.get(k, k), if k >= 6 { (k - 5) as f64 } else { 0.0 });
        }
        // δ0 annihilates Hadamard-basis sectors below the cutoff
        for k in 0..6 {
            let v = linalg::real_to_complex(&m.krawtchouk().matrix().column(k));
            assert!(linalg::norm(&d0.apply(&v)) < 1e-12);
        }
        let capped = PerturbationSpec { g_max: Some(2.0), ..spec };
        assert!(matches!(capped.materialize(&m), Err(Error::PerturbationTooLarge { .. })));
    }

    #[test]
    fn fact1_trivial_cases() {
        let x = ConfinementSubspace::span(4, &[unit(4, 0)], SubspaceSource::Given).unwrap();
        let sel = select_low_overlap_subbasis(BasisChoice::Computational, &x, 1).unwrap();
        assert_eq!(sel.indices, [1]);
        assert_eq!(sel.projection_sum, 0.0);
        assert_eq!(sel.bound, 0.25);
        let full: Vec<Vec<C64>> = (0..4).map(|i| unit(4, i)).collect();
        let x = ConfinementSubspace::span(4, &full, SubspaceSource::Given).unwrap();
        for d in 0..=4 {
            let sel = select_low_overlap_subbasis(BasisChoice::Explicit(&full), &x, d).unwrap();
            assert!((sel.projection_sum - d as f64).abs() < 1e-12);
            assert_eq!(sel.bound, d as f64);
            assert!(sel.holds);
        }
        assert!(select_low_overlap_subbasis(BasisChoice::Computational, &x, 5).is_err());
    }

    #[test]
    fn gram_schmidt_drops_dependent_vectors() {
        let a = unit(3, 0);
        let b: Vec<C64> = vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)];
        let c: Vec<C64> = a.iter().zip(&b).map(|(x, y)| x * 2.0 - y).collect();
        let x = ConfinementSubspace::span(3, &[a, b, c], SubspaceSource::Given).unwrap();
        assert_eq!(x.dim(), 2);
        crate::escape::check_orthonormal(x.vectors()).unwrap();
    }

    #[test]
    fn eigenstate_confines_to_a_line() {
        let m = ThetaModel::new(6, 3).unwrap();
        let h = m.h1();
        let norm = h.norm().unwrap();
        let path = ConstantPath(h, norm);
        let init = unit(7, 0);
        let (sub, r) = snapshot_confinement(&path, &init, 4.0, norm, &ConfinementOptions::default()).unwrap();
        assert_eq!(sub.dim(), 1);
        assert!((r.min_projection - 1.0).abs() < 1e-12);
        assert!(r.holds);
    }

    #[test]
    fn understated_norm_is_rejected() {
        let m = ThetaModel::new(6, 6).unwrap();
        let init = m.initial_ground_state();
        let err = snapshot_confinement(m.schedule(), init.amps(), 1.0, 1.0, &ConfinementOptions::default());
        assert!(matches!(err, Err(Error::NormBoundExceeded { .. })));
    }

    #[test]
    fn zero_strength_perturbation_is_exact() {
        let m = ThetaModel::new(6, 6).unwrap();
        let init = m.initial_ground_state();
        let r = check_theorem2(m.schedule(), init.amps(), 2.0, 100, BasisChoice::Computational, 3, 0.0, 1e-3).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.confinement_bound, 0.0);
        assert!(r.holds_confinement_bound);
    }

    #[test]
    fn crossing_is_tuned_to_half_weight() {
        let x = tune_crossing(8, 0.5).unwrap();
        let m = ThetaModel::new(8, 8).unwrap();
        let w = top_sector_ground_weight(&m, 0.5, x).unwrap();
        assert!((w - 0.5).abs() < 1e-6, "{w}");
    }
}
