//! One function per subcommand. Each returns the report, any CSV tables and
//! whether its checked inequalities held.

use rand::Rng;
use rand_distr::StandardNormal;
use serde_json::{json, Value};

use thetalab_core::escape::{self, ThetaHForm, ThresholdConfig};
use thetalab_core::evolution::{self, EvolutionSpec, Method};
use thetalab_core::linalg::{self, C64};
use thetalab_core::model;
use thetalab_core::oracle::{symmetric_sector_embed, FullPath, MAX_ORACLE_N};
use thetalab_core::robustness::{self, BasisChoice, Perturbation, PerturbationSpec};
use thetalab_core::spectra::{self, GapScan};
use thetalab_core::{LogBase, ThetaModel};

use crate::cli::{Args, BasisArg, LogBaseArg, MethodArg, ThetaHFormArg};
use crate::error::{LabError, Result};
use crate::output::{Cell, Table};
use crate::{rng, verify};

pub const DEFAULT_GRID: usize = 201;
pub const DEFAULT_REFINE: usize = 4;
pub const DEFAULT_SUCCESS_THRESHOLD: f64 = 0.5;
pub const DEFAULT_SLACK: f64 = 1e-3;
/// Steps for the spectrum-cutoff runs, whose default runtime comes from the
/// adiabatic theorem and is far too long for `default_steps`.
pub const CUTOFF_RUN_STEPS: usize = 100_000;
/// Target distance used for the default spectrum-cutoff runtime.
pub const CUTOFF_RUN_ETA: f64 = 0.1;
/// Trace rows kept per `evolve` run.
const TRACE_ROWS: usize = 500;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub tables: Vec<Table>,
    /// Print this table instead of the report when no output directory is given.
    pub stdout_table: Option<usize>,
    pub holds: Option<bool>,
}

impl Outcome {
    fn report(report: Value) -> Self {
        Outcome { report, tables: Vec::new(), stdout_table: None, holds: None }
    }
}

pub fn dispatch(name: &str, args: &Args) -> Result<Outcome> {
    match name {
        "gap-scan" => gap_scan(args),
        "phase-diagram" => phase_diagram(args),
        "landscape" => landscape(args),
        "evolve" => evolve(args),
        "escape-rate" => escape_rate(args),
        "thresholds" => thresholds(args),
        "corollary1" => corollary1(args),
        "gap-closing" => gap_closing(args),
        "theorem2" => theorem2(args),
        "verify" => verify(args),
        other => Err(LabError::usage(format!("unknown command {other}"))),
    }
}

fn need<T: Copy>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| LabError::usage(format!("--{flag} is required")))
}

fn single_theta(args: &Args) -> Result<usize> {
    match &args.theta {
        Some(list) if list.0.len() == 1 => Ok(list.0[0]),
        Some(_) => Err(LabError::usage("--theta takes a single value here")),
        None => Err(LabError::usage("--theta is required")),
    }
}

fn threshold_config(args: &Args) -> ThresholdConfig {
    ThresholdConfig {
        c: args.c.unwrap_or(1.5),
        log_base: match args.log_base.unwrap_or(LogBaseArg::Natural) {
            LogBaseArg::Natural => LogBase::Natural,
            LogBaseArg::Two => LogBase::Two,
        },
        theta_h_form: match args.theta_h_form.unwrap_or(ThetaHFormArg::Wide) {
            ThetaHFormArg::Wide => ThetaHForm::Wide,
            ThetaHFormArg::Narrow => ThetaHForm::Narrow,
        },
    }
}

fn scan_table(name: &str, scan: &GapScan) -> Table {
    let mut t = Table::new(name, &["s", "lambda0", "lambda1", "gap"]);
    for x in &scan.samples {
        t.push(vec![x.s.into(), x.lambda0.into(), x.lambda1.into(), x.gap.into()]);
    }
    t
}

fn gap_scan(args: &Args) -> Result<Outcome> {
    let n = need(args.n, "n")?;
    let theta = single_theta(args)?;
    let grid = args.grid.unwrap_or(DEFAULT_GRID);
    let refine = args.refine.unwrap_or(DEFAULT_REFINE);
    let scan = spectra::gap_scan(&ThetaModel::new(n, theta)?, grid, refine)?;
    let report = json!({
        "n": n,
        "theta": theta,
        "min_s": scan.min_s,
        "min_gap": scan.min_gap,
        "grid": grid,
        "refine_levels": refine,
    });
    Ok(Outcome { tables: vec![scan_table("scan", &scan)], ..Outcome::report(report) })
}

fn phase_diagram(args: &Args) -> Result<Outcome> {
    let n = need(args.n, "n")?;
    let thetas = match &args.theta {
        Some(list) => list.0.clone(),
        None => (1..=n).collect(),
    };
    let grid = args.grid.unwrap_or(DEFAULT_GRID);
    let refine = args.refine.unwrap_or(DEFAULT_REFINE);
    let rows = spectra::phase_diagram(n, &thetas, grid, refine)?;
    let mut t = Table::new("phase_diagram", &["theta", "min_gap", "min_s"]);
    for r in &rows {
        t.push(vec![r.theta.into(), r.min_gap.into(), r.min_s.into()]);
    }
    let report = json!({
        "n": n,
        "grid": grid,
        "refine_levels": refine,
        "rows": rows.iter().map(|r| json!({"theta": r.theta, "min_gap": r.min_gap, "min_s": r.min_s})).collect::<Vec<_>>(),
    });
    Ok(Outcome { tables: vec![t], ..Outcome::report(report) })
}

fn landscape(args: &Args) -> Result<Outcome> {
    let n = need(args.n, "n")?;
    let theta = single_theta(args)?;
    let rows = model::landscape(n, theta)?;
    let mut t = Table::new("landscape", &["k", "energy", "degeneracy"]);
    for r in &rows {
        t.push(vec![r.k.into(), r.energy.into(), Cell::Int(r.degeneracy)]);
    }
    let report = json!({ "n": n, "theta": theta, "rows": rows.len() });
    Ok(Outcome { report, tables: vec![t], stdout_table: Some(0), holds: None })
}

fn method(args: &Args) -> Method {
    match args.method.unwrap_or(MethodArg::Midpoint) {
        MethodArg::Midpoint => Method::Midpoint,
        MethodArg::Trotter => Method::Trotter,
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Midpoint => "midpoint",
        Method::Trotter => "trotter",
    }
}

fn evolve(args: &Args) -> Result<Outcome> {
    let n = need(args.n, "n")?;
    let theta = single_theta(args)?;
    let tau = need(args.tau, "tau")?;
    let m = ThetaModel::new(n, theta)?;
    let steps = args.steps.unwrap_or_else(|| evolution::default_steps(m.schedule(), tau));
    let every = steps.div_ceil(TRACE_ROWS).max(1);
    let spec = EvolutionSpec::new(tau, steps).with_method(method(args)).recording(every, true);
    let trace = evolution::propagate(m.schedule(), &spec, m.initial_ground_state().amps())?;
    let mut t = Table::new("trace", &["t", "s", "overlap_instantaneous_ground", "norm"]);
    for i in 0..trace.times.len() {
        let overlap = trace.overlaps_ground[i].unwrap_or(f64::NAN);
        t.push(vec![trace.times[i].into(), trace.s_values[i].into(), overlap.into(), trace.norms[i].into()]);
    }
    let report = json!({
        "n": n,
        "theta": theta,
        "tau": tau,
        "final_overlap_alpha1": trace.final_overlap_alpha1,
        "success_probability": trace.success_probability(),
        "method": method_name(trace.method),
        "steps": trace.steps,
    });
    Ok(Outcome { tables: vec![t], ..Outcome::report(report) })
}

fn escape_rate(args: &Args) -> Result<Outcome> {
    let n = need(args.n, "n")?;
    let theta = single_theta(args)?;
    let r = escape::escape_rate_theta(n, theta, &threshold_config(args))?;
    Ok(Outcome::report(json!({
        "n": r.n,
        "theta": r.theta,
        "beta": r.beta,
        "beta_sq_exact": r.beta_sq_exact,
        "paper_bound": r.tail_bound,
        "theta_l": r.thresholds.theta_l,
        "theta_h": r.thresholds.theta_h,
    })))
}

fn thresholds(args: &Args) -> Result<Outcome> {
    let n = need(args.n, "n")?;
    let cfg = threshold_config(args);
    let t = escape::thresholds(n, &cfg)?;
    Ok(Outcome::report(json!({
        "n": n,
        "c": t.c,
        "log_base": args.log_base.unwrap_or(LogBaseArg::Natural),
        "theta_h_form": args.theta_h_form.unwrap_or(ThetaHFormArg::Wide),
        "theta_l": t.theta_l,
        "theta_h": t.theta_h,
        "theta_l_clamped": t.theta_l_clamped,
        "theta_h_clamped": t.theta_h_clamped,
    })))
}

fn corollary1(args: &Args) -> Result<Outcome> {
    let n = args.n.unwrap_or(16);
    let cutoff = args.cutoff.unwrap_or(n.saturating_sub(2));
    let shift = args.shift.unwrap_or(-3.0 * n as f64);
    let grid = args.grid.unwrap_or(DEFAULT_GRID);
    let slack = args.slack.unwrap_or(DEFAULT_SLACK);
    let threshold = args.success_threshold.unwrap_or(DEFAULT_SUCCESS_THRESHOLD);
    let model = ThetaModel::new(n, n)?;
    let tau = match args.tau {
        Some(t) => t,
        None => {
            let gap = spectra::gap_scan(&model, grid, args.refine.unwrap_or(DEFAULT_REFINE))?.min_gap;
            evolution::adiabatic_runtime(model.schedule(), CUTOFF_RUN_ETA, gap)?
        }
    };
    let steps = args.steps.unwrap_or(CUTOFF_RUN_STEPS);
    let r = robustness::corollary1_experiment(n, cutoff, &[shift], tau, steps, grid)?;
    let spec = PerturbationSpec { kind: Perturbation::HammingCutoff { cutoff, magnitudes: vec![shift] }, g_max: args.gmax };
    let perturbed = spec.perturb(&model)?;
    let shift_check = robustness::check_lemma3(model.schedule(), &perturbed, model.initial_ground_state().amps(), tau, steps, slack)?;
    let success = r.final_overlap >= threshold;
    let holds = shift_check.holds && success;
    let report = json!({
        "params": {"n": n, "cutoff": cutoff, "shift": shift, "tau": tau, "steps": steps, "slack": slack, "success_threshold": threshold},
        "seed": args.seed.unwrap_or(0),
        "lhs": r.path_shift,
        "bounds": {
            "integrated_perturbation": shift_check.rhs,
            "high_weight_amplitude": r.path_shift_bound,
        },
        "holds": holds,
        "path_shift_within_integral": shift_check.holds,
        "final_overlap": r.final_overlap,
        "unperturbed_overlap": r.unperturbed_overlap,
        "max_high_weight_amplitude": r.max_high_weight_amplitude,
        "perturbed_min_gap": r.perturbed_scan.min_gap,
        "perturbed_min_s": r.perturbed_scan.min_s,
    });
    Ok(Outcome { tables: vec![scan_table("perturbed_scan", &r.perturbed_scan)], holds: Some(holds), ..Outcome::report(report) })
}

fn gap_closing(args: &Args) -> Result<Outcome> {
    let n = args.n.unwrap_or(12);
    let s_star = args.s_star.unwrap_or(0.5);
    let tuned = match (args.x0, args.x1) {
        (Some(_), Some(_)) => None,
        _ => Some(robustness::tune_crossing(n, s_star)?),
    };
    let x0 = args.x0.or(tuned).expect("set above");
    let x1 = args.x1.or(tuned).expect("set above");
    let tau = args.tau.unwrap_or(50.0);
    let model = ThetaModel::new(n, n)?;
    let steps = match args.steps {
        Some(s) => s,
        None => {
            let spec = PerturbationSpec { kind: Perturbation::SectorProjector { sector: n, x0, x1 }, g_max: None };
            evolution::default_steps(&spec.perturb(&model)?, tau)
        }
    };
    let threshold = args.success_threshold.unwrap_or(DEFAULT_SUCCESS_THRESHOLD);
    let r = robustness::gap_closing_success_experiment(
        n,
        x0,
        x1,
        tau,
        steps,
        args.grid.unwrap_or(DEFAULT_GRID),
        args.refine.unwrap_or(DEFAULT_REFINE),
    )?;
    let holds = r.final_overlap >= threshold;
    let report = json!({
        "params": {"n": n, "x0": x0, "x1": x1, "s_star": s_star, "tau": tau, "steps": steps, "success_threshold": threshold},
        "seed": args.seed.unwrap_or(0),
        "min_gap": r.min_gap,
        "min_s": r.min_s,
        "final_overlap": r.final_overlap,
        "holds": holds,
    });
    Ok(Outcome { holds: Some(holds), ..Outcome::report(report) })
}

/// Orthonormal basis from Gaussian vectors, two Gram-Schmidt passes.
pub fn random_basis<R: Rng>(rng: &mut R, dim: usize) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(dim);
    while basis.len() < dim {
        let mut v: Vec<C64> = (0..dim).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
        for _ in 0..2 {
            for b in &basis {
                let c = linalg::inner(b, &v);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let norm = linalg::norm(&v);
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    basis
}

fn theorem2(args: &Args) -> Result<Outcome> {
    let n = args.n.unwrap_or(8);
    if n > MAX_ORACLE_N {
        return Err(LabError::usage(format!("theorem2 runs in the full space; --n must be at most {MAX_ORACLE_N}")));
    }
    let theta = match &args.theta {
        Some(_) => single_theta(args)?,
        None => n,
    };
    let tau = args.tau.unwrap_or(6.0);
    let d = args.d.unwrap_or(16);
    let g_max = args.gmax.unwrap_or(1.0);
    let slack = args.slack.unwrap_or(DEFAULT_SLACK);
    let seed = args.seed.unwrap_or(0);
    let basis_arg = args.basis.unwrap_or(BasisArg::Computational);
    let model = ThetaModel::new(n, theta)?;
    let path = FullPath::theta(n, theta)?;
    let steps = args.steps.unwrap_or_else(|| evolution::default_steps(model.schedule(), tau));
    let init = symmetric_sector_embed(&model.initial_ground_state())?;
    let random;
    let basis = match basis_arg {
        BasisArg::Computational => BasisChoice::Computational,
        BasisArg::Random => {
            random = random_basis(&mut rng::stream(seed, "bounded-rank-basis"), 1 << n);
            BasisChoice::Explicit(&random)
        }
    };
    let r = robustness::check_theorem2(&path, init.amps(), tau, steps, basis, d, g_max, slack)?;
    let report = json!({
        "params": {"n": n, "theta": theta, "tau": tau, "steps": steps, "d": d, "gmax": g_max, "basis": basis_arg, "slack": slack},
        "seed": seed,
        "lhs": r.lhs,
        "bounds": {"confinement": r.confinement_bound, "bounded_rank_reported": r.bounded_rank_bound},
        "holds": r.holds_confinement_bound,
        "h_max": r.h_max,
        "dim_h": r.dim_h,
        "confinement": {
            "snapshots": r.confinement.snapshots,
            "dim": r.confinement.dim,
            "min_projection": r.confinement.min_projection,
            "min_snapshot_overlap": r.confinement.min_snapshot_overlap,
            "holds": r.confinement.holds,
        },
        "selection": {
            "indices": r.selection.indices,
            "projection_sum": r.selection.projection_sum,
            "bound": r.selection.bound,
            "holds": r.selection.holds,
        },
    });
    let holds = r.holds_confinement_bound && r.confinement.holds && r.selection.holds;
    Ok(Outcome { holds: Some(holds), ..Outcome::report(report) })
}

fn verify(args: &Args) -> Result<Outcome> {
    let suite = args.suite.unwrap_or(crate::cli::Suite::All);
    let report = verify::run(suite, args.seed.unwrap_or(0))?;
    let holds = report.passed;
    Ok(Outcome { holds: Some(holds), ..Outcome::report(serde_json::to_value(&report)?) })
}
