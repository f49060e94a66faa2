//! Argument parsing and dispatch.

use std::ffi::OsString;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::commands::{self, Outcome};
use crate::config;
use crate::error::{LabError, Result};
use crate::manifest::RunManifest;
use crate::output;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "thetalab", version, about = "Spectral gaps, adiabatic runs and perturbation checks for cutoff Hamming-weight Hamiltonians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}


#[derive(Debug, Subcommand)]
enum Command {
    /// Ground-state gap along the schedule.
    GapScan(Args),
    /// Minimal gap for a range of cutoffs.
    PhaseDiagram(Args),
    /// Energy and degeneracy per Hamming weight.
    Landscape(Args),
    /// Time evolution along the schedule.
    Evolve(Args),
    /// Escape rate of the uniform superposition under the cutoff Hamiltonian.
    EscapeRate(Args),
    /// Cutoff thresholds θ_ℓ and θ_h.
    Thresholds(Args),
    /// Shift every sector above a Hamming-weight cutoff and compare runs.
    Corollary1(Args),
    /// Close the gap with a top-sector projector and check the run still succeeds.
    GapClosing(Args),
    /// Rank-d perturbation of the full 2^n schedule away from the visited subspace.
    Theorem2(Args),
    /// Seeded verification suites.
    Verify(Args),
}

impl Command {
    fn parts(self) -> (&'static str, Args) {
        match self {
            Command::GapScan(a) => ("gap-scan", a),
            Command::PhaseDiagram(a) => ("phase-diagram", a),
            Command::Landscape(a) => ("landscape", a),
            Command::Evolve(a) => ("evolve", a),
            Command::EscapeRate(a) => ("escape-rate", a),
            Command::Thresholds(a) => ("thresholds", a),
            Command::Corollary1(a) => ("corollary1", a),
            Command::GapClosing(a) => ("gap-closing", a),
            Command::Theorem2(a) => ("theorem2", a),
            Command::Verify(a) => ("verify", a),
        }
    }
}

/// `5`, `1..20` (inclusive) or `1,3,5`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct ThetaList(pub Vec<usize>);

impl FromStr for ThetaList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
        let v = if let Some((a, b)) = s.split_once("..") {
            let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
            if a > b {
                return Err(format!("empty range {s}"));
            }
            (a..=b).collect()
        } else {
            s.split(',').map(num).collect::<std::result::Result<Vec<_>, _>>()?
        };
        if v.is_empty() {
            return Err("no θ values".into());
        }
        Ok(ThetaList(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Midpoint,
    Trotter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LogBaseArg {
    Natural,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaHFormArg {
    /// n/2 + sqrt(40·n·log n)
    Wide,
    /// n/2 + sqrt(40·log n)
    Narrow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisArg {
    Computational,
    /// Seeded random orthonormal basis.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Combinatorics,
    Spectra,
    Evolution,
    Escape,
    Robustness,
    Oracle,
    All,
}

/// Flags shared by every subcommand. Each command reads the ones it needs.
#[derive(Debug, Clone, Default, clap::Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct Args {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<ThetaList>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<MethodArg>,
    /// Uniform grid points for gap scans.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    /// Refinement levels around the scan minimum.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refine: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    /// Perturbation rank.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gmax: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Output directory for manifest.json, CSV tables and report.json.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// `key = value` run file; flags given on the command line win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_base: Option<LogBaseArg>,
    /// Exponent in θ_ℓ = n/2 - sqrt(n·(log n)^c).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_h_form: Option<ThetaHFormArg>,
    /// Energy added to each sector at or above --cutoff.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
    /// Top-sector projector weight at s = 0 (defaults to the tuned crossing).
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    /// Top-sector projector weight at s = 1.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x1: Option<f64>,
    /// Where the tuned projector places the avoided crossing.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_star: Option<f64>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<BasisArg>,
    /// Final overlap counted as a successful run.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub success_threshold: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slack: Option<f64>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<Suite>,
}

macro_rules! fill {
    ($a:ident, $b:ident; $($f:ident),*) => {
        $( if $a.$f.is_none() { $a.$f = $b.$f; } )*
    };
}

impl Args {
    fn fill_from(&mut self, other: Args) {
        fill!(self, other; n, theta, tau, steps, method, grid, refine, cutoff, d, gmax, seed, out, log_base, c,
            theta_h_form, shift, x0, x1, s_star, basis, success_threshold, slack, suite);
    }
}

fn parse(argv: Vec<OsString>) -> std::result::Result<(&'static str, Args), clap::Error> {
    Ok(Cli::try_parse_from(argv)?.command.parts())
}

fn resolve(argv: Vec<OsString>) -> std::result::Result<(&'static str, Args), Failure> {
    let (name, mut args) = parse(argv).map_err(Failure::Clap)?;
    if let Some(path) = args.config.clone() {
        let entries = config::load(&path).map_err(Failure::Lab)?;
        let base = || -> Vec<OsString> { vec!["thetalab".into(), name.into()] };
        let mut all = base();
        for e in &entries {
            let bad = |message: String| Failure::Lab(LabError::Config { path: path.clone(), line: e.line, message });
            if e.key == "config" {
                return Err(bad(format!("`{}` cannot be set from a run file", e.key)));
            }
            let mut one = base();
            one.extend(e.to_args().map(OsString::from));
            parse(one).map_err(|err| bad(first_line(&err)))?;
            all.extend(e.to_args().map(OsString::from));
        }
        let (_, from_file) = parse(all).map_err(Failure::Clap)?;
        args.fill_from(from_file);
    }
    Ok((name, args))
}

fn first_line(e: &clap::Error) -> String {
    e.to_string().lines().next().unwrap_or_default().trim_start_matches("error: ").to_string()
}

enum Failure {
    Clap(clap::Error),
    Lab(LabError),
}

/// Runs one command line and returns the process exit code.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let (name, args) = match resolve(argv) {
        Ok(x) => x,
        Err(Failure::Clap(e)) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
        Err(Failure::Lab(e)) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match execute(name, &args) {
        Ok(Some(false)) => EXIT_CHECK_FAILED,
        Ok(_) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn execute(name: &str, args: &Args) -> Result<Option<bool>> {
    let seed = args.seed.unwrap_or(0);
    let mut manifest = match &args.out {
        Some(dir) => {
            output::create_dir(dir)?;
            Some(RunManifest::start(name, serde_json::to_value(args)?, seed, dir)?)
        }
        None => None,
    };
    let outcome = commands::dispatch(name, args)?;
    emit(&outcome, args, manifest.as_mut())?;
    Ok(outcome.holds)
}

fn emit(outcome: &Outcome, args: &Args, manifest: Option<&mut RunManifest>) -> Result<()> {
    let (Some(dir), Some(manifest)) = (&args.out, manifest) else {
        match &outcome.stdout_table {
            Some(i) => print!("{}", outcome.tables[*i].to_string()?),
            None => print!("{}", output::to_json(&outcome.report)?),
        }
        return Ok(());
    };
    let mut written = Vec::new();
    let mut report = outcome.report.clone();
    for t in &outcome.tables {
        written.push(output::write_table(dir, t)?);
    }
    if let serde_json::Value::Object(map) = &mut report {
        if !outcome.tables.is_empty() {
            let names: Vec<String> = outcome.tables.iter().map(|t| t.file_name()).collect();
            map.insert("artifacts".into(), serde_json::to_value(names)?);
        }
    }
    let report_path = dir.join("report.json");
    output::write_json(&report_path, &report)?;
    written.push(report_path);
    manifest.finish(dir, written, report.get("params").cloned(), outcome.holds)?;
    print!("{}", output::to_json(&report)?);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_lists() {
        assert_eq!("5".parse::<ThetaList>().unwrap().0, [5]);
        assert_eq!("1..4".parse::<ThetaList>().unwrap().0, [1, 2, 3, 4]);
        assert_eq!("1..=3".parse::<ThetaList>().unwrap().0, [1, 2, 3]);
        assert_eq!("1, 3,5".parse::<ThetaList>().unwrap().0, [1, 3, 5]);
        assert!("4..1".parse::<ThetaList>().is_err());
        assert!("x".parse::<ThetaList>().is_err());
    }

    #[test]
    fn flags_override_config_values() {
        let mut a = Args { n: Some(4), ..Default::default() };
        a.fill_from(Args { n: Some(9), tau: Some(2.0), ..Default::default() });
        assert_eq!(a.n, Some(4));
        assert_eq!(a.tau, Some(2.0));
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        assert_eq!(run(["thetalab", "gap-scan", "--bogus", "1"]), EXIT_USAGE);
        assert_eq!(run(["thetalab", "frobnicate"]), EXIT_USAGE);
    }
}
