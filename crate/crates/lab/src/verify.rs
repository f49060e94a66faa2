//! Seeded verification suites behind `verify --suite`. Reports carry no
//! timings or timestamps, so equal seeds give byte-identical output.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use thetalab_core::combinatorics::{self, KrawtchoukMatrix, LogBinomialTable, TailSide};
use thetalab_core::escape::{self, CheckStatus, ThresholdConfig};
use thetalab_core::evolution::{self, EvolutionSpec, HamiltonianPath, Method};
use thetalab_core::linalg::{self, C64};
use thetalab_core::oracle::{self, FullPath};
use thetalab_core::robustness::{self, BasisChoice, ConfinementOptions, ConfinementSubspace, SubspaceSource, ETA};
use thetalab_core::spectra;
use thetalab_core::{LinearSchedule, SymmetricOperator, SymmetricState, ThetaModel};

use crate::cli::Suite;
use crate::error::Result;
use crate::rng;

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: &'static str,
    pub cases: usize,
    /// Largest error, or largest excess over the bound, across the cases.
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub checks: Vec<CheckRecord>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub suites: Vec<SuiteReport>,
    pub passed: bool,
}

struct Check {
    name: &'static str,
    tolerance: f64,
    cases: usize,
    worst: f64,
}

impl Check {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Check { name, tolerance, cases: 0, worst: f64::NEG_INFINITY }
    }

    fn record(&mut self, err: f64) {
        self.cases += 1;
        // NaN must fail the check, so it wins the comparison
        if err.is_nan() || err > self.worst {
            self.worst = err;
        }
    }

    fn finish(self) -> CheckRecord {
        let passed = self.cases > 0 && self.worst <= self.tolerance;
        CheckRecord { name: self.name, cases: self.cases, worst: self.worst, tolerance: self.tolerance, passed }
    }
}

fn suite(name: &'static str, checks: Vec<CheckRecord>) -> SuiteReport {
    let passed = checks.iter().all(|c| c.passed);
    SuiteReport { suite: name, checks, passed }
}

pub fn run(which: Suite, seed: u64) -> Result<VerifyReport> {
    let order = [Suite::Combinatorics, Suite::Spectra, Suite::Evolution, Suite::Escape, Suite::Robustness, Suite::Oracle];
    let mut suites = Vec::new();
    for s in order {
        if which != Suite::All && which != s {
            continue;
        }
        suites.push(match s {
            Suite::Combinatorics => combinatorics_suite(seed)?,
            Suite::Spectra => spectra_suite(seed)?,
            Suite::Evolution => evolution_suite(seed)?,
            Suite::Escape => escape_suite(seed)?,
            Suite::Robustness => robustness_suite(seed)?,
            Suite::Oracle => oracle_suite(seed)?,
            Suite::All => unreachable!(),
        });
    }
    let passed = suites.iter().all(|s| s.passed);
    Ok(VerifyReport { seed, suites, passed })
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..dim).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let n = linalg::norm(&v);
    v.into_iter().map(|x| x / n).collect()
}

fn random_operator(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> SymmetricOperator {
    SymmetricOperator::from_fn(n, |_, _| rng.random_range(-scale..scale))
}

fn random_schedule(rng: &mut ChaCha8Rng, n: usize) -> Result<LinearSchedule> {
    Ok(LinearSchedule::new(random_operator(rng, n, 1.0), random_operator(rng, n, 1.0))?)
}

fn combinatorics_suite(seed: u64) -> Result<SuiteReport> {
    let mut rng = rng::stream(seed, "combinatorics");

    let mut involution = Check::new("krawtchouk_involution", 1e-12);
    for n in [1, 2, 3, 5, 8, 13, 21, 34, 55, 64] {
        let q = KrawtchoukMatrix::new(n)?;
        let qq = q.matrix().matmul(q.matrix());
        involution.record(qq.max_abs_diff(&linalg::Matrix::identity(n + 1)));
        involution.record(q.matrix().max_abs_diff(&q.matrix().transpose()));
    }

    let mut binom = Check::new("log_binomial_vs_exact", 1e-12);
    for _ in 0..200 {
        let n = rng.random_range(1..=120usize);
        let k = rng.random_range(0..=n);
        let exact = combinatorics::choose_exact(n as u32, k as u32) as f64;
        let table = LogBinomialTable::new(n)?;
        binom.record((table.choose(k) - exact).abs() / exact);
    }

    let mut chernoff = Check::new("chernoff_dominates_exact_tail", 0.0);
    for _ in 0..200 {
        let n = rng.random_range(1..=60usize);
        let p = rng.random_range(0.01..0.99);
        let mu = n as f64 * p;
        let up = mu * rng.random_range(1.0..2.5);
        let down = mu * rng.random_range(0.0..1.0);
        chernoff.record(combinatorics::exact_binomial_tail(n, p, up, TailSide::Upper)? - combinatorics::chernoff_upper_tail(n, p, up)?);
        chernoff.record(combinatorics::exact_binomial_tail(n, p, down, TailSide::Lower)? - combinatorics::chernoff_lower_tail(n, p, down)?);
    }
    Ok(suite("combinatorics", vec![involution.finish(), binom.finish(), chernoff.finish()]))
}

fn spectra_suite(seed: u64) -> Result<SuiteReport> {
    let mut rng = rng::stream(seed, "spectra");

    let mut residual = Check::new("eigen_residual", 1e-10);
    for _ in 0..100 {
        let n = rng.random_range(1..40);
        let h = random_operator(&mut rng, n, 1.0);
        let eig = spectra::eigensystem(&h)?;
        let scale = h.norm()?.max(1.0);
        for k in 0..=n {
            let v = linalg::real_to_complex(&eig.vector(k));
            let hv = linalg::Operator::apply(&h, &v);
            let r: f64 = hv.iter().zip(&v).map(|(a, b)| (a - b * eig.values[k]).norm_sqr()).sum::<f64>().sqrt();
            residual.record(r / scale);
        }
    }

    let mut theta1 = Check::new("closed_form_theta1", 1e-9);
    let mut thetan = Check::new("closed_form_thetan", 1e-9);
    for _ in 0..60 {
        let n = rng.random_range(2..=40);
        let s = rng.random_range(0.0..=1.0);
        let g = spectra::closed_form_gap_theta1(n, s)?;
        let expect = if g.flat_band_closer { 1.0 - (0.5 - g.gap / 2.0) } else { g.gap };
        theta1.record((spectra::gap_at(&ThetaModel::new(n, 1)?, s)? - expect).abs());
        thetan.record((spectra::gap_at(&ThetaModel::new(n, n)?, s)? - spectra::closed_form_gap_thetan(s)?).abs());
    }

    let mut min_gap = Check::new("min_gap_theta1_relative", 1e-8);
    for n in [4, 8, 12, 16, 20] {
        let scan = spectra::gap_scan(&ThetaModel::new(n, 1)?, 201, 4)?;
        let expect = (2f64).powf(-(n as f64) / 2.0);
        min_gap.record((scan.min_gap - expect).abs() / expect);
    }

    let mut monotone = Check::new("phase_diagram_nondecreasing", 1e-12);
    let rows = spectra::phase_diagram(12, &(1..=12).collect::<Vec<_>>(), 201, 4)?;
    for w in rows.windows(2) {
        monotone.record(w[0].min_gap - w[1].min_gap);
    }
    Ok(suite("spectra", vec![residual.finish(), theta1.finish(), thetan.finish(), min_gap.finish(), monotone.finish()]))
}

fn evolution_suite(seed: u64) -> Result<SuiteReport> {
    let mut rng = rng::stream(seed, "evolution");

    let mut norm = Check::new("norm_drift", 1e-9);
    for _ in 0..10 {
        let n = rng.random_range(2..20);
        let s = random_schedule(&mut rng, n)?;
        let init = random_unit(&mut rng, n + 1);
        for method in [Method::Midpoint, Method::Trotter] {
            let spec = EvolutionSpec::new(10.0, 400).with_method(method).recording(40, false);
            let trace = evolution::propagate(&s, &spec, &init)?;
            for x in &trace.norms {
                norm.record((x - 1.0).abs());
            }
        }
    }

    let mut speed = Check::new("speed_limit", 1e-12);
    for _ in 0..100 {
        let n = rng.random_range(1..30);
        let h = random_operator(&mut rng, n, 1.0);
        let psi = random_unit(&mut rng, n + 1);
        let sigma = escape::energy_uncertainty(&psi, &h)?;
        let eig = h.eigen()?;
        let t = rng.random_range(0.0..std::f64::consts::FRAC_PI_2 / sigma);
        let mut phi = psi.clone();
        evolution::apply_eigen_exp(&eig, t, &mut phi);
        speed.record((sigma * t).cos().powi(2) - linalg::inner(&phi, &psi).norm());
    }

    let m = ThetaModel::new(8, 8)?;
    let init = m.initial_ground_state();
    let run = |steps| evolution::propagate(m.schedule(), &EvolutionSpec::new(64.0, steps), init.amps()).map(|t| t.final_state);
    let (a, b, c) = (run(200)?, run(400)?, run(800)?);
    let mut order = Check::new("midpoint_order_minus_two", 0.2);
    order.record(((linalg::distance(&a, &b) / linalg::distance(&b, &c)).log2() - 2.0).abs());

    let m6 = ThetaModel::new(6, 6)?;
    let mut trotter = Check::new("trotter_deviation", 1e-3);
    trotter.record(evolution::trotter_vs_exact_deviation(m6.schedule(), &EvolutionSpec::new(10.0, 10_000), m6.initial_ground_state().amps())?);

    let mut adiabatic = Check::new("constant_gap_run_shortfall", 0.01);
    let trace = evolution::propagate(m.schedule(), &EvolutionSpec::new(64.0, 6400), init.amps())?;
    adiabatic.record(1.0 - trace.final_overlap_alpha1.unwrap_or(0.0));

    Ok(suite("evolution", vec![norm.finish(), speed.finish(), order.finish(), trotter.finish(), adiabatic.finish()]))
}

fn escape_suite(seed: u64) -> Result<SuiteReport> {
    let mut rng = rng::stream(seed, "escape");
    let cfg = ThresholdConfig::default();

    let mut identity = Check::new("uncertainty_is_escape_rate", 1e-9);
    for _ in 0..200 {
        let n = rng.random_range(1..40);
        let h = random_operator(&mut rng, n, 2.0);
        let v = random_unit(&mut rng, n + 1);
        identity.record((escape::escape_rate_general(std::slice::from_ref(&v), &h)? - escape::energy_uncertainty(&v, &h)?).abs());
    }

    let mut uncapped = Check::new("uncapped_variance", 1e-12);
    let mut single = Check::new("single_step_variance", 1e-12);
    for n in 1..=40 {
        uncapped.record((escape::escape_rate_theta(n, n, &cfg)?.beta_sq_exact - n as f64 / 4.0).abs());
        let p = 2f64.powi(-(n as i32));
        single.record((escape::escape_rate_theta(n, 1, &cfg)?.beta_sq_exact - p * (1.0 - p)).abs());
    }

    let mut tail = Check::new("capped_variance_tail_bound", 0.0);
    for n in 2..=30 {
        for theta in 1..=n / 2 {
            let r = escape::escape_rate_theta(n, theta, &cfg)?;
            tail.record(r.beta_sq_exact - r.tail_bound * (1.0 + 1e-12));
        }
    }

    let mut gap = Check::new("gap_below_escape_bound", 0.0);
    for theta in [1, 3, 5, 7] {
        let m = ThetaModel::new(20, theta)?;
        let r = escape::check_lemma2(&m, &spectra::gap_scan(&m, 201, 4)?)?;
        gap.record(if r.status == CheckStatus::Holds { r.measured_min_gap - r.bound } else { f64::INFINITY });
    }
    Ok(suite("escape", vec![identity.finish(), uncapped.finish(), single.finish(), tail.finish(), gap.finish()]))
}

fn robustness_suite(seed: u64) -> Result<SuiteReport> {
    let mut shift = Check::new("path_shift_excess", 1e-3);
    let mut rng = rng::stream(seed, "path-shift");
    for _ in 0..30 {
        let n = rng.random_range(1..10);
        let a = random_schedule(&mut rng, n)?;
        let g = rng.random_range(0.0..0.5);
        let b = a.perturbed(&random_operator(&mut rng, n, g), &random_operator(&mut rng, n, g))?;
        let init = random_unit(&mut rng, n + 1);
        let tau = rng.random_range(0.5..10.0);
        let r = robustness::check_lemma3(&a, &b, &init, tau, 400, 1e-3)?;
        shift.record(r.lhs - r.rhs);
    }

    let mut select = Check::new("low_overlap_subbasis_excess", 1e-12);
    let mut rng = rng::stream(seed, "subbasis");
    for _ in 0..100 {
        let vs: Vec<Vec<C64>> = (0..5).map(|_| random_unit(&mut rng, 64)).collect();
        let x = ConfinementSubspace::span(64, &vs, SubspaceSource::Given)?;
        let sel = robustness::select_low_overlap_subbasis(BasisChoice::Computational, &x, 8)?;
        select.record(sel.projection_sum - sel.bound);
    }

    let mut confine = Check::new("snapshot_projection_shortfall", 1e-3);
    let mut rng = rng::stream(seed, "confinement");
    for _ in 0..20 {
        let n = rng.random_range(2..12);
        let s = random_schedule(&mut rng, n)?;
        let init = random_unit(&mut rng, n + 1);
        // fewer snapshots than dimensions, so the span is a proper subspace
        let snapshots = rng.random_range(1..=n);
        let tau = snapshots as f64 / (10.0 * s.norm_bound()) * rng.random_range(0.5..1.0);
        let (_, r) = robustness::snapshot_confinement(&s, &init, tau, s.norm_bound(), &ConfinementOptions::default())?;
        confine.record((1.0 - ETA) - r.min_projection);
    }
    Ok(suite("robustness", vec![shift.finish(), select.finish(), confine.finish()]))
}

fn oracle_suite(seed: u64) -> Result<SuiteReport> {
    let mut rng = rng::stream(seed, "oracle");

    let mut spectrum = Check::new("dicke_levels_in_full_spectrum", 1e-8);
    for n in 2..=8 {
        let theta = rng.random_range(1..=n);
        let m = ThetaModel::new(n, theta)?;
        let (f0, f1) = oracle::full_theta_hamiltonians(n, theta)?;
        for s in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let full = oracle::full_spectrum(&oracle::dense_interpolate(&f0, &f1, s))?;
            for e in spectra::eigensystem(&m.interpolate(s)?)?.values {
                spectrum.record(full.iter().map(|f| (f - e).abs()).fold(f64::INFINITY, f64::min));
            }
        }
    }

    let mut leakage = Check::new("sector_leakage", 1e-7);
    let mut agreement = Check::new("propagation_agreement", 1e-6);
    for n in [3, 5, 7] {
        let theta = rng.random_range(1..=n);
        let m = ThetaModel::new(n, theta)?;
        let amps: Vec<C64> = random_unit(&mut rng, n + 1);
        let state = SymmetricState::new(n, amps)?;
        let dicke = evolution::propagate(m.schedule(), &EvolutionSpec::new(6.0, 300), state.amps())?;
        let full = oracle::full_propagate(&FullPath::theta(n, theta)?, &oracle::symmetric_sector_embed(&state)?, 6.0, 300)?;
        let (projected, leak) = oracle::symmetric_sector_project(full.amps(), n)?;
        leakage.record(leak);
        agreement.record(linalg::distance(&projected, &dicke.final_state));
    }

    let mut beta = Check::new("escape_rate_agreement", 1e-10);
    for n in [4, 6, 8] {
        for theta in 1..=n {
            let m = ThetaModel::new(n, theta)?;
            let (_, f1) = oracle::full_theta_hamiltonians(n, theta)?;
            let plus = oracle::symmetric_sector_embed(&m.initial_ground_state())?.into_amps();
            let full = escape::escape_rate_general(&[plus], &f1)?;
            beta.record((full - escape::escape_rate_theta(n, theta, &ThresholdConfig::default())?.beta).abs());
        }
    }
    Ok(suite("oracle", vec![spectrum.finish(), leakage.finish(), agreement.finish(), beta.finish()]))
}
