//! Schrödinger propagation along `H(t) = H_{t/τ}` with `ħ = 1`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, Eigen, Matrix, Operator, C64};
use crate::model::LinearSchedule;

/// Norm deviation at which propagation gives up.
pub const NORM_DRIFT_ABORT: f64 = 1e-6;

/// A Hamiltonian `H(s)` on `s ∈ [0, 1]`.
pub trait HamiltonianPath {
    fn dim(&self) -> usize;

    /// `y = H(s) x`
    fn apply(&self, s: f64, x: &[C64], y: &mut [C64]);

    /// An upper bound on `‖H(s)‖` valid for every `s`.
    fn norm_bound(&self) -> f64;

    /// `‖H(s)‖`, or an upper bound on it.
    fn norm_at(&self, _s: f64) -> Result<f64> {
        Ok(self.norm_bound())
    }

    /// `ψ ← exp(-i·dt·H(s)) ψ`. The default uses a scaled Taylor series.
    fn exp_step(&self, s: f64, dt: f64, psi: &mut [C64]) -> Result<()> {
        taylor_exp_step(|x, y| self.apply(s, x, y), self.norm_bound(), dt, psi);
        Ok(())
    }

    /// `ψ ← exp(-i·dt·(1-s)·H(0)) exp(-i·dt·s·H(1)) ψ`, for paths that are
    /// linear interpolations.
    fn trotter_step(&self, _s: f64, _dt: f64, _psi: &mut [C64]) -> Result<()> {
        Err(Error::Unsupported("Trotter splitting needs a linear interpolation"))
    }

    /// Phase-fixed ground state of `H(s)`, if the path can compute it.
    fn ground_state(&self, _s: f64) -> Result<Option<Vec<C64>>> {
        Ok(None)
    }
}

impl HamiltonianPath for LinearSchedule {
    fn dim(&self) -> usize {
        LinearSchedule::dim(self)
    }

    fn apply(&self, s: f64, x: &[C64], y: &mut [C64]) {
        let a = self.h0().apply(x);
        let b = self.h1().apply(x);
        for ((yi, ai), bi) in y.iter_mut().zip(a).zip(b) {
            *yi = ai * (1.0 - s) + bi * s;
        }
    }

    fn norm_bound(&self) -> f64 {
        self.max_endpoint_norm()
    }

    fn norm_at(&self, s: f64) -> Result<f64> {
        self.interpolate(s)?.norm()
    }

    fn exp_step(&self, s: f64, dt: f64, psi: &mut [C64]) -> Result<()> {
        // Householder + QL is several times faster than Jacobi here and the
        // exponential does not care about eigenvector signs.
        let eig = linalg::tridiagonal_eigen(&self.interpolate(s)?.to_matrix())?;
        apply_eigen_exp(&eig, dt, psi);
        Ok(())
    }

    fn trotter_step(&self, s: f64, dt: f64, psi: &mut [C64]) -> Result<()> {
        apply_eigen_exp(self.eigen1(), dt * s, psi);
        apply_eigen_exp(self.eigen0(), dt * (1.0 - s), psi);
        Ok(())
    }

    fn ground_state(&self, s: f64) -> Result<Option<Vec<C64>>> {
        let eig = self.interpolate(s)?.eigen()?;
        Ok(Some(linalg::real_to_complex(&eig.vector(0))))
    }
}

/// `ψ ← V exp(-i·dt·Λ) Vᵀ ψ`
pub fn apply_eigen_exp(eig: &Eigen, dt: f64, psi: &mut [C64]) {
    let v: &Matrix = &eig.vectors;
    let d = eig.values.len();
    let mut coeffs = vec![C64::new(0.0, 0.0); d];
    for (k, c) in coeffs.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..d {
            acc += psi[i] * v[(i, k)];
        }
        let (sin, cos) = libm::sincos(-dt * eig.values[k]);
        *c = acc * C64::new(cos, sin);
    }
    for (i, p) in psi.iter_mut().enumerate() {
        let row = v.row(i);
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..d {
            acc += coeffs[k] * row[k];
        }
        *p = acc;
    }
}

/// `ψ ← exp(-i·dt·H) ψ` through a Taylor series, splitting `dt` so that each
/// piece has `|dt|·‖H‖ ≤ 1/2` and summing terms until they drop below
/// `1e-17`. `norm` must bound `‖H‖`.
pub fn taylor_exp_step(apply: impl Fn(&[C64], &mut [C64]), norm: f64, dt: f64, psi: &mut [C64]) {
    let d = psi.len();
    let substeps = libm::ceil(2.0 * libm::fabs(dt) * norm).max(1.0) as usize;
    let h = dt / substeps as f64;
    let mut term = vec![C64::new(0.0, 0.0); d];
    let mut next = vec![C64::new(0.0, 0.0); d];
    let mut acc = vec![C64::new(0.0, 0.0); d];
    for _ in 0..substeps {
        term.copy_from_slice(psi);
        acc.copy_from_slice(psi);
        let psi_norm = linalg::norm(psi).max(f64::MIN_POSITIVE);
        for k in 1..=60 {
            apply(&term, &mut next);
            let factor = C64::new(0.0, -h / k as f64);
            for (t, x) in term.iter_mut().zip(&next) {
                *t = x * factor;
            }
            for (a, t) in acc.iter_mut().zip(&term) {
                *a += t;
            }
            if linalg::norm(&term) < 1e-17 * psi_norm {
                break;
            }
        }
        psi.copy_from_slice(&acc);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// `exp(-i·dt·H((j + 1/2)/steps))` per step.
    #[default]
    Midpoint,
    /// `exp(-i·dt·(1-s_j)h0) exp(-i·dt·s_j h1)` with `s_j = j/steps`.
    Trotter,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionSpec {
    pub tau: f64,
    pub steps: usize,
    pub method: Method,
    pub record_every: usize,
    /// Compute the overlap with the instantaneous ground state at each record.
    pub track_ground: bool,
}

impl EvolutionSpec {
    pub fn new(tau: f64, steps: usize) -> Self {
        EvolutionSpec { tau, steps, method: Method::Midpoint, record_every: steps.max(1), track_ground: false }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn recording(mut self, record_every: usize, track_ground: bool) -> Self {
        self.record_every = record_every;
        self.track_ground = track_ground;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::invalid("tau", alloc::format!("must be positive, got {}", self.tau)));
        }
        if self.steps == 0 {
            return Err(Error::invalid("steps", "must be at least 1"));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record_every", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub s_values: Vec<f64>,
    pub states: Vec<Vec<C64>>,
    pub norms: Vec<f64>,
    /// `|⟨α_s|ψ(t)⟩|` at each record, when tracked.
    pub overlaps_ground: Vec<Option<f64>>,
    pub final_state: Vec<C64>,
    /// `|⟨α_1|ψ(τ)⟩|`, when the path can supply `α_1`.
    pub final_overlap_alpha1: Option<f64>,
    pub method: Method,
    pub steps: usize,
}

impl EvolutionTrace {
    /// `|⟨α_1|ψ(τ)⟩|²`
    pub fn success_probability(&self) -> Option<f64> {
        self.final_overlap_alpha1.map(|x| x * x)
    }
}

/// `|⟨target|ψ(τ)⟩|²`
pub fn success_probability(trace: &EvolutionTrace, target: &[C64]) -> Result<f64> {
    if target.len() != trace.final_state.len() {
        return Err(Error::DimensionMismatch { expected: trace.final_state.len(), found: target.len() });
    }
    Ok(linalg::inner(target, &trace.final_state).norm_sqr())
}

/// Propagates `initial` from `t = 0` to `t = τ`. A record is kept at `t = 0`,
/// after every `record_every` steps, and at `t = τ`.
pub fn propagate<P: HamiltonianPath + ?Sized>(path: &P, spec: &EvolutionSpec, initial: &[C64]) -> Result<EvolutionTrace> {
    spec.validate()?;
    if initial.len() != path.dim() {
        return Err(Error::DimensionMismatch { expected: path.dim(), found: initial.len() });
    }
    let norm0 = linalg::norm(initial);
    if libm::fabs(norm0 - 1.0) > crate::model::NORM_TOLERANCE {
        return Err(Error::NotNormalized { norm: norm0 });
    }
    let dt = spec.tau / spec.steps as f64;
    let mut psi = initial.to_vec();
    let mut trace = EvolutionTrace {
        times: Vec::new(),
        s_values: Vec::new(),
        states: Vec::new(),
        norms: Vec::new(),
        overlaps_ground: Vec::new(),
        final_state: Vec::new(),
        final_overlap_alpha1: None,
        method: spec.method,
        steps: spec.steps,
    };
    record(path, spec, &mut trace, 0.0, 0.0, &psi)?;
    for j in 0..spec.steps {
        match spec.method {
            Method::Midpoint => path.exp_step((j as f64 + 0.5) / spec.steps as f64, dt, &mut psi)?,
            Method::Trotter => path.trotter_step((j + 1) as f64 / spec.steps as f64, dt, &mut psi)?,
        }
        let norm = linalg::norm(&psi);
        if !(libm::fabs(norm - 1.0) <= NORM_DRIFT_ABORT) {
            return Err(Error::NormDrift { step: j + 1, norm });
        }
        let done = j + 1 == spec.steps;
        if done || (j + 1) % spec.record_every == 0 {
            let (t, s) = if done { (spec.tau, 1.0) } else { ((j + 1) as f64 * dt, (j + 1) as f64 / spec.steps as f64) };
            record(path, spec, &mut trace, t, s, &psi)?;
        }
    }
    trace.final_overlap_alpha1 = path.ground_state(1.0)?.map(|alpha| linalg::inner(&alpha, &psi).norm());
    trace.final_state = psi;
    Ok(trace)
}

fn record<P: HamiltonianPath + ?Sized>(
    path: &P,
    spec: &EvolutionSpec,
    trace: &mut EvolutionTrace,
    t: f64,
    s: f64,
    psi: &[C64],
) -> Result<()> {
    let overlap = if spec.track_ground {
        path.ground_state(s)?.map(|g| linalg::inner(&g, psi).norm())
    } else {
        None
    };
    trace.times.push(t);
    trace.s_values.push(s);
    trace.norms.push(linalg::norm(psi));
    trace.overlaps_ground.push(overlap);
    trace.states.push(psi.to_vec());
    Ok(())
}

/// Runtime sufficient for the adiabatic theorem to deliver a final state
/// within `eta` of the ground state:
/// `τ = (10⁴/η²)·max(‖H'‖³/Δ⁴, ‖H'‖·‖H''‖/Δ³)` with `H' = h1 - h0` and
/// `H'' = 0` for a linear schedule.
pub fn adiabatic_runtime(schedule: &LinearSchedule, eta: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::invalid("delta", "must be positive"));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::invalid("eta", "must lie in (0, 1)"));
    }
    let d1 = schedule.h1().sub(schedule.h0())?.norm()?;
    let d2 = 0.0;
    let first = d1 * d1 * d1 / (delta * delta * delta * delta);
    let second = d1 * d2 / (delta * delta * delta);
    Ok(1e4 / (eta * eta) * first.max(second))
}

/// `ceil(20·τ·max(‖h0‖, ‖h1‖))`
pub fn default_steps(schedule: &LinearSchedule, tau: f64) -> usize {
    libm::ceil(20.0 * tau * schedule.max_endpoint_norm()).max(1.0) as usize
}

/// Distance between the Trotter and midpoint final states for identical
/// step counts.
pub fn trotter_vs_exact_deviation<P: HamiltonianPath + ?Sized>(path: &P, spec: &EvolutionSpec, initial: &[C64]) -> Result<f64> {
    let quiet = EvolutionSpec { record_every: spec.steps, track_ground: false, ..*spec };
    let a = propagate(path, &quiet.with_method(Method::Midpoint), initial)?;
    let b = propagate(path, &quiet.with_method(Method::Trotter), initial)?;
    Ok(linalg::distance(&a.final_state, &b.final_state))
}
