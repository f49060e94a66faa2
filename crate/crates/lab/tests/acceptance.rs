//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so
//! the lines are printed even when everything passes.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::Rng;
use serde_json::Value;

use thetalab::rng;
use thetalab_core::escape::{self, CheckStatus, ThresholdConfig};
use thetalab_core::evolution::{self, EvolutionSpec, HamiltonianPath};
use thetalab_core::linalg::{self, C64};
use thetalab_core::oracle::{self, FullPath};
use thetalab_core::robustness::{self, BasisChoice, ConfinementOptions, ConfinementSubspace, SubspaceSource, ETA};
use thetalab_core::spectra;
use thetalab_core::{LinearSchedule, SymmetricOperator, ThetaModel};

const SEED: u64 = 20_240_601;

/// Minimal gaps of the n = 20 phase diagram for θ = 1..=20 (grid 201, four
/// refinement levels).
const PHASE_DIAGRAM_N20: [f64; 20] = [
    9.765625000001665e-4,
    1.9537211237437013e-3,
    2.9659157479930975e-3,
    4.649673253350972e-3,
    1.4335604924260892e-2,
    1.3801506539488662e-1,
    2.8378898581620104e-1,
    4.109858443448271e-1,
    5.389124325950312e-1,
    6.510896641429844e-1,
    7.06929476933984e-1,
    7.070858507126752e-1,
    7.071047882563946e-1,
    7.071066260576346e-1,
    7.071067719560551e-1,
    7.071067807736737e-1,
    7.071067811733909e-1,
    7.071067811862837e-1,
    7.071067811865444e-1,
    7.071067811865483e-1,
];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn cli(args: &[&str]) -> Result<Value, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_thetalab"))
        .args(args)
        .output()
        .map_err(|e| format!("spawn failed: {e}"))?;
    if out.status.code() == Some(2) || out.status.code().is_none() {
        return Err(format!("thetalab {} failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)));
    }
    serde_json::from_slice(&out.stdout).map_err(|e| format!("bad JSON from thetalab {}: {e}", args.join(" ")))
}

fn num(v: &Value, key: &str) -> f64 {
    v.pointer(key).and_then(Value::as_f64).unwrap_or(f64::NAN)
}

fn random_unit<R: Rng>(rng: &mut R, dim: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..dim).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let n = linalg::norm(&v);
    v.into_iter().map(|x| x / n).collect()
}

fn random_operator<R: Rng>(rng: &mut R, n: usize, scale: f64) -> SymmetricOperator {
    SymmetricOperator::from_fn(n, |_, _| rng.random_range(-scale..scale))
}

const NS: [usize; 5] = [4, 8, 12, 16, 20];

fn closed_form_theta1() -> Result<Outcome, String> {
    let mut worst_rel: f64 = 0.0;
    let mut worst_s: f64 = 0.0;
    for n in NS {
        let r = cli(&["gap-scan", "--n", &n.to_string(), "--theta", "1"])?;
        let expect = 2f64.powf(-(n as f64) / 2.0);
        worst_rel = worst_rel.max((num(&r, "/min_gap") - expect).abs() / expect);
        worst_s = worst_s.max((num(&r, "/min_s") - 0.5).abs());
    }
    Ok(outcome(worst_rel <= 1e-8 && worst_s <= 1e-4, format!("max rel err {worst_rel:.2e}, max |s-1/2| {worst_s:.2e}")))
}

fn closed_form_thetan() -> Result<Outcome, String> {
    let mut worst: f64 = 0.0;
    for n in NS {
        let r = cli(&["gap-scan", "--n", &n.to_string(), "--theta", &n.to_string()])?;
        worst = worst.max((num(&r, "/min_gap") - std::f64::consts::FRAC_1_SQRT_2).abs());
    }
    Ok(outcome(worst <= 1e-9, format!("max |min_gap - 1/sqrt2| {worst:.2e}")))
}

fn phase_diagram() -> Result<Outcome, String> {
    let start = Instant::now();
    let r = cli(&["phase-diagram", "--n", "20", "--theta", "1..20"])?;
    let elapsed = start.elapsed();
    let rows = r["rows"].as_array().ok_or("no rows")?;
    let gaps: Vec<f64> = rows.iter().map(|row| num(row, "/min_gap")).collect();
    if gaps.len() != 20 {
        return Ok(outcome(false, format!("{} rows", gaps.len())));
    }
    let first = (gaps[0] - 2f64.powi(-10)).abs() / 2f64.powi(-10) <= 1e-8;
    let last = (gaps[19] - std::f64::consts::FRAC_1_SQRT_2).abs() <= 1e-9;
    let monotone = gaps.windows(2).all(|w| w[0] <= w[1]);
    let regression = gaps.iter().zip(PHASE_DIAGRAM_N20).map(|(a, b)| (a - b).abs() / b).fold(0.0, f64::max);
    let fast = elapsed < Duration::from_secs(60);
    Ok(outcome(
        first && last && monotone && regression <= 1e-9 && fast,
        format!("endpoints {first}/{last}, nondecreasing {monotone}, regression drift {regression:.1e}, {:.2}s", elapsed.as_secs_f64()),
    ))
}

fn oracle_equivalence() -> Result<Outcome, String> {
    let e = |e: thetalab_core::Error| e.to_string();
    let mut worst_level: f64 = 0.0;
    for n in 1..=10 {
        for theta in 1..=n {
            let m = ThetaModel::new(n, theta).map_err(e)?;
            let (f0, f1) = oracle::full_theta_hamiltonians(n, theta).map_err(e)?;
            for s in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let full = oracle::full_spectrum(&oracle::dense_interpolate(&f0, &f1, s)).map_err(e)?;
                for level in spectra::eigensystem(&m.interpolate(s).map_err(e)?).map_err(e)?.values {
                    let d = full.iter().map(|f| (f - level).abs()).fold(f64::INFINITY, f64::min);
                    worst_level = worst_level.max(d);
                }
            }
        }
    }
    let mut worst_state: f64 = 0.0;
    for theta in [1, 4, 8] {
        let m = ThetaModel::new(8, theta).map_err(e)?;
        let init = m.initial_ground_state();
        let steps = evolution::default_steps(m.schedule(), 32.0);
        let dicke = evolution::propagate(m.schedule(), &EvolutionSpec::new(32.0, steps), init.amps()).map_err(e)?;
        let full_init = oracle::symmetric_sector_embed(&init).map_err(e)?;
        let full = oracle::full_propagate(&FullPath::theta(8, theta).map_err(e)?, &full_init, 32.0, steps).map_err(e)?;
        let (projected, _) = oracle::symmetric_sector_project(full.amps(), 8).map_err(e)?;
        worst_state = worst_state.max(linalg::distance(&projected, &dicke.final_state));
    }
    Ok(outcome(
        worst_level <= 1e-8 && worst_state <= 1e-6,
        format!("max level distance {worst_level:.1e}, max state distance {worst_state:.1e}"),
    ))
}

fn escape_identities() -> Result<Outcome, String> {
    let e = |e: thetalab_core::Error| e.to_string();
    let cfg = ThresholdConfig::default();
    let mut uncapped: f64 = 0.0;
    let mut single: f64 = 0.0;
    for n in 1..=40 {
        uncapped = uncapped.max((escape::escape_rate_theta(n, n, &cfg).map_err(e)?.beta_sq_exact - n as f64 / 4.0).abs());
        let p = 2f64.powi(-(n as i32));
        single = single.max((escape::escape_rate_theta(n, 1, &cfg).map_err(e)?.beta_sq_exact - p * (1.0 - p)).abs());
    }
    let mut rng = rng::stream(SEED, "acceptance-uncertainty");
    let mut identity: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(1..40);
        let h = random_operator(&mut rng, n, 2.0);
        let v = random_unit(&mut rng, n + 1);
        let beta = escape::escape_rate_general(std::slice::from_ref(&v), &h).map_err(e)?;
        identity = identity.max((beta - escape::energy_uncertainty(&v, &h).map_err(e)?).abs());
    }
    let mut violations = 0;
    for n in 2..=30 {
        for theta in 1..=n / 2 {
            let r = escape::escape_rate_theta(n, theta, &cfg).map_err(e)?;
            if r.beta_sq_exact > r.tail_bound {
                violations += 1;
            }
        }
    }
    Ok(outcome(
        uncapped <= 1e-12 && single <= 1e-12 && identity <= 1e-9 && violations == 0,
        format!("θ=n err {uncapped:.1e}, θ=1 err {single:.1e}, uncertainty identity err {identity:.1e}, tail-bound violations {violations}"),
    ))
}

fn overlap_bound() -> Result<Outcome, String> {
    let e = |e: thetalab_core::Error| e.to_string();
    let m = ThetaModel::new(30, 1).map_err(e)?;
    let tau = 1e4;
    let steps = evolution::default_steps(m.schedule(), tau);
    let trace = evolution::propagate(m.schedule(), &EvolutionSpec::new(tau, steps), m.initial_ground_state().amps()).map_err(e)?;
    let r = escape::check_lemma1(&m, tau, &trace, 0.01).map_err(e)?;
    let bound = r.sin_bound + 0.01;
    Ok(outcome(
        r.beta_tau < std::f64::consts::FRAC_PI_2 && r.measured_overlap <= bound,
        format!("βτ {:.4}, overlap {:.3e} ≤ {:.4} ({steps} steps)", r.beta_tau, r.measured_overlap, bound),
    ))
}

fn gap_bound() -> Result<Outcome, String> {
    let e = |e: thetalab_core::Error| e.to_string();
    let mut detail = Vec::new();
    let mut ok = true;
    for theta in [1, 3, 5, 7] {
        let m = ThetaModel::new(20, theta).map_err(e)?;
        let r = escape::check_lemma2(&m, &spectra::gap_scan(&m, 201, 4).map_err(e)?).map_err(e)?;
        ok &= r.status == CheckStatus::Holds;
        detail.push(format!("θ={theta}: {:.3e} ≤ {:.3}", r.measured_min_gap, r.bound));
    }
    Ok(outcome(ok, detail.join(", ")))
}

fn path_shift() -> Result<Outcome, String> {
    let e = |e: thetalab_core::Error| e.to_string();
    let mut rng = rng::stream(SEED, "acceptance-path-shift");
    let mut failures = 0;
    for _ in 0..100 {
        let n = rng.random_range(1..12);
        let a = LinearSchedule::new(random_operator(&mut rng, n, 1.0), random_operator(&mut rng, n, 1.0)).map_err(e)?;
        let g = rng.random_range(0.0..0.5);
        let b = a.perturbed(&random_operator(&mut rng, n, g), &random_operator(&mut rng, n, g)).map_err(e)?;
        let init = random_unit(&mut rng, n + 1);
        let tau = rng.random_range(0.5..10.0);
        if !robustness::check_lemma3(&a, &b, &init, tau, 400, 1e-3).map_err(e)?.holds {
            failures += 1;
        }
    }
    // constant shift c·I only rotates the global phase: distance 2|sin(cτ/2)|, integral |c|τ
    let m = ThetaModel::new(6, 3).map_err(e)?;
    let (c, tau) = (0.7, 3.0);
    let shifted = m.schedule().perturbed(&SymmetricOperator::identity(6).scaled(c), &SymmetricOperator::identity(6).scaled(c)).map_err(e)?;
    let r = robustness::check_lemma3(m.schedule(), &shifted, m.initial_ground_state().amps(), tau, 600, 0.0).map_err(e)?;
    let phase_err = (r.lhs - 2.0 * (c * tau / 2.0).sin().abs()).abs().max((r.rhs - c * tau).abs());
    Ok(outcome(
        failures == 0 && phase_err <= 1e-9 && r.holds,
        format!("{failures}/100 random pairs violate, global-phase case err {phase_err:.1e}"),
    ))
}

fn confinement_suites() -> Result<Outcome, String> {
    let e = |e: thetalab_core::Error| e.to_string();
    let mut rng = rng::stream(SEED, "acceptance-fact1");
    let mut fact_failures = 0;
    for _ in 0..100 {
        let ambient = 1usize << rng.random_range(3..8);
        let dim = rng.random_range(1..=ambient / 4);
        let d = rng.random_range(1..=ambient / 2);
        let vs: Vec<Vec<C64>> = (0..dim).map(|_| random_unit(&mut rng, ambient)).collect();
        let x = ConfinementSubspace::span(ambient, &vs, SubspaceSource::Given).map_err(e)?;
        if !robustness::select_low_overlap_subbasis(BasisChoice::Computational, &x, d).map_err(e)?.holds {
            fact_failures += 1;
        }
    }
    let mut rng = rng::stream(SEED, "acceptance-confinement");
    let mut worst: f64 = f64::INFINITY;
    for _ in 0..50 {
        let n = rng.random_range(2..16);
        let s = LinearSchedule::new(random_operator(&mut rng, n, 1.0), random_operator(&mut rng, n, 1.0)).map_err(e)?;
        let init = random_unit(&mut rng, n + 1);
        // fewer snapshots than dimensions, so the span is a proper subspace
        let snapshots = rng.random_range(1..=n);
        let tau = snapshots as f64 / (10.0 * s.norm_bound()) * rng.random_range(0.5..1.0);
        let (_, r) = robustness::snapshot_confinement(&s, &init, tau, s.norm_bound(), &ConfinementOptions::default()).map_err(e)?;
        worst = worst.min(r.min_projection);
    }
    let floor = 1.0 - ETA - 1e-3;
    Ok(outcome(
        fact_failures == 0 && worst >= floor,
        format!("{fact_failures}/100 selections exceed d·dim/N, min projection {worst:.6} ≥ {floor}"),
    ))
}

fn cutoff_robustness() -> Result<Outcome, String> {
    let r = cli(&["corollary1", "--n", "16", "--cutoff", "14", "--shift", "-48", "--success-threshold", "0.9"])?;
    let overlap = num(&r, "/final_overlap");
    let lhs = num(&r, "/lhs");
    let integral = num(&r, "/bounds/integrated_perturbation");
    Ok(outcome(
        overlap >= 0.9 && lhs <= integral,
        format!(
            "τ {:.4e}, {} steps, overlap {overlap:.4}, path shift {lhs:.3} ≤ {integral:.3e}",
            num(&r, "/params/tau"),
            num(&r, "/params/steps")
        ),
    ))
}

fn gap_closing() -> Result<Outcome, String> {
    let r = cli(&["gap-closing", "--n", "12", "--success-threshold", "0.9"])?;
    let gap = num(&r, "/min_gap");
    let overlap = num(&r, "/final_overlap");
    Ok(outcome(gap < 1e-3 && overlap >= 0.9, format!("x {:.6}, min gap {gap:.3e}, overlap {overlap:.4}", num(&r, "/params/x0"))))
}

type Criterion = (&'static str, u64, fn() -> Result<Outcome, String>);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("closed-form gap θ=1", 5, closed_form_theta1),
        ("closed-form gap θ=n", 5, closed_form_thetan),
        ("phase diagram n=20", 60, phase_diagram),
        ("oracle equivalence n≤10", 600, oracle_equivalence),
        ("escape-rate identities", 300, escape_identities),
        ("overlap bound n=30 θ=1 τ=1e4", 300, overlap_bound),
        ("gap bound by escape rate n=20", 120, gap_bound),
        ("path-shift property suite", 300, path_shift),
        ("low-overlap selection and snapshot confinement", 300, confinement_suites),
        ("spectrum-cutoff robustness n=16", 300, cutoff_robustness),
        ("gap closing without failure n=12", 300, gap_closing),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed().as_secs_f64();
        let (passed, detail) = match result {
            Ok(o) => (o.passed && elapsed < *budget as f64, o.detail),
            Err(msg) => (false, msg),
        };
        if !passed {
            failed += 1;
        }
        let tag = if passed { "PASS" } else { "FAIL" };
        println!("{tag} [{:>2}] {name}: {detail} ({elapsed:.2}s, budget {budget}s)", i + 1);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
