//! Command-line front end: scenario loading, solves, sweeps and verification.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::approx::{
    assemble_full, discrete_norm, evaluate, parse_values, solve_approximation, sum_rule_residuals, sweep, ApproxResult,
    Scenario, SweepAxis, Target, Weight,
};
use crate::cone_solver::{SolveOptions, SolveStatus};
use crate::error::{invalid, Error, Result};
use crate::presets::{angular_strength, hat_equivalent, Preset};
use crate::representation::QuasiHerglotzRep;
use crate::sum_rules::passive_bound;

/// Tolerance for a re-evaluated error to match the recorded one.
pub const ERROR_REPRODUCTION_TOL: f64 = 1e-9;
/// Tolerance for sum-rule equalities of a stored result.
pub const SUM_RULE_TOL: f64 = 1e-6;
/// Relative slack on parameter bounds of a stored result.
const BOUND_SLACK: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Solve,
    Sweep,
    Verify,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Preset(Preset),
    Path(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub source: Source,
    pub out: PathBuf,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub axis: Option<SweepAxis>,
    pub values: Vec<f64>,
}

impl RunConfig {
    pub fn new(command: Command, source: Source, out: impl Into<PathBuf>) -> Self {
        Self { command, source, out: out.into(), tol: None, max_iter: None, axis: None, values: Vec::new() }
    }

    pub fn solve_options(&self) -> SolveOptions {
        let d = SolveOptions::default();
        SolveOptions { tol_rel: self.tol.unwrap_or(d.tol_rel), max_iter: self.max_iter.unwrap_or(d.max_iter) }
    }

    pub fn load_scenario(&self) -> Result<Scenario> {
        match &self.source {
            Source::Preset(p) => Ok(p.scenario()),
            Source::Path(path) => {
                let text = fs::read_to_string(path)?;
                Scenario::from_json(&text).map_err(|e| match e {
                    Error::Schema(m) => Error::Schema(format!("{}: {m}", path.display())),
                    e => e,
                })
            }
        }
    }

    fn label(&self, scenario: &Scenario) -> String {
        match (&self.source, &scenario.name) {
            (Source::Preset(p), _) => p.name().to_string(),
            (Source::Path(_), Some(n)) => n.clone(),
            (Source::Path(path), None) => path.display().to_string(),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "qherglotz", version, about = "Quasi-Herglotz approximation by cone programming")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Subcommand, Debug)]
pub enum CliCommand {
    /// Solve one scenario and write rep.json, residuals.csv and summary.json.
    Solve(CommonArgs),
    /// Solve a family of scenarios along one axis and write sweep.csv.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// One of B, x_u, eps_s.
        #[arg(long)]
        axis: SweepAxis,
        /// Values as lo:hi:n.
        #[arg(long)]
        values: String,
    },
    /// Re-check a stored result against its scenario.
    Verify(CommonArgs),
}

#[derive(Args, Debug)]
pub struct CommonArgs {
    #[arg(long, required_unless_present = "scenario", conflicts_with = "scenario")]
    pub preset: Option<Preset>,
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

impl Cli {
    pub fn into_config(self) -> Result<RunConfig> {
        let (command, common, axis, values) = match self.command {
            CliCommand::Solve(c) => (Command::Solve, c, None, Vec::new()),
            CliCommand::Verify(c) => (Command::Verify, c, None, Vec::new()),
            CliCommand::Sweep { common, axis, values } => (Command::Sweep, common, Some(axis), parse_values(&values)?),
        };
        let source = match (common.preset, common.scenario) {
            (Some(p), None) => Source::Preset(p),
            (None, Some(path)) => Source::Path(path),
            _ => return Err(invalid("give exactly one of --preset and --scenario")),
        };
        Ok(RunConfig { command, source, out: common.out, tol: common.tol, max_iter: common.max_iter, axis, values })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassSummary {
    pub location: f64,
    pub amplitude: f64,
    /// `(2π)²` times the amplitude.
    pub angular_strength: f64,
    pub hat_equivalent: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: String,
    pub status: SolveStatus,
    pub iterations: usize,
    pub error: f64,
    pub objective_value: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Sup-norm lower bound for passive approximations, when it applies.
    pub passive_bound: Option<f64>,
    /// Mass at the origin.
    pub p0: Option<MassSummary>,
    /// Remaining point masses in ascending location (`p1`, `p2`, ...).
    pub masses: Vec<MassSummary>,
    pub b: f64,
    pub sum_rule_residuals: Vec<f64>,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub recorded_error: f64,
    pub recomputed_error: f64,
    pub error_matches: bool,
    pub sum_rule_residuals: Vec<f64>,
    pub sum_rules_hold: bool,
    pub max_bound_violation: f64,
    pub bounds_hold: bool,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.error_matches && self.sum_rules_hold && self.bounds_hold
    }
}

/// Outcome of [`run`]: `success` maps to the process exit status.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub success: bool,
    pub report: String,
}

/// `Δ` for a constant permittivity target with `w = 1/x`, fixed `b` and a single Ω interval.
pub fn scenario_passive_bound(s: &Scenario) -> Option<f64> {
    let Target::Permittivity { eps_re, eps_im } = s.target else { return None };
    if eps_im != 0.0 || s.weight != Weight::InverseX || s.omega.len() != 1 {
        return None;
    }
    let iv = s.omega[0];
    let center = 0.5 * (iv.lo + iv.hi);
    passive_bound(s.b_fixed?, eps_re, iv.len() / center).ok()
}

fn display_spacing(s: &Scenario, rep: &QuasiHerglotzRep) -> Option<f64> {
    s.display_spacing.or_else(|| rep.bases().iter().map(|b| b.spacing()).reduce(f64::min))
}

pub fn summarize(label: &str, scenario: &Scenario, result: &ApproxResult, seconds: f64) -> Result<Summary> {
    let rep = &result.rep;
    let spacing = display_spacing(scenario, rep);
    let mass = |location: f64, amplitude: f64| MassSummary {
        location,
        amplitude,
        angular_strength: angular_strength(amplitude),
        hat_equivalent: spacing.map(|h| hat_equivalent(amplitude, h)),
    };
    let p0 = rep.masses().iter().find(|m| m.location == 0.0).map(|m| mass(0.0, m.amplitude));
    let masses = rep.masses().iter().filter(|m| m.location != 0.0).map(|m| mass(m.location, m.amplitude)).collect();
    Ok(Summary {
        scenario: label.to_string(),
        status: result.solution.status,
        iterations: result.solution.iterations,
        error: result.error,
        objective_value: result.solution.objective_value,
        primal_residual: result.solution.primal_residual,
        dual_residual: result.solution.dual_residual,
        passive_bound: scenario_passive_bound(scenario),
        p0,
        masses,
        b: rep.b(),
        sum_rule_residuals: sum_rule_residuals(scenario, rep)?,
        seconds,
    })
}

pub fn residuals_csv(result: &ApproxResult) -> String {
    let mut out = String::from("x,re_q,im_q,re_f,im_f,w,abs_residual\n");
    for s in &result.samples {
        let _ = writeln!(out, "{},{},{},{},{},{},{}", s.x, s.q.re, s.q.im, s.target.re, s.target.im, s.weight, s.residual);
    }
    out
}

pub fn verify_result(scenario: &Scenario, rep: &QuasiHerglotzRep, recorded_error: f64) -> Result<VerifyReport> {
    let asm = assemble_full(scenario)?;
    let theta = rep.parameters();
    if asm.layout.template.with_parameters(&theta)? != *rep {
        return Err(invalid("stored representation does not match the scenario's structure"));
    }
    let samples = evaluate(rep, &asm.samples, &asm.targets)?;
    let residuals: Vec<f64> = samples.iter().map(|s| s.residual).collect();
    let recomputed = discrete_norm(scenario.norm, &asm.samples, &residuals);
    let sum_rule_residuals = sum_rule_residuals(scenario, rep)?;
    let mut violation: f64 = 0.0;
    for ((&t, &lo), &hi) in theta.iter().zip(&asm.layout.lower).zip(&asm.layout.upper) {
        let slack = BOUND_SLACK * (1.0 + t.abs());
        violation = violation.max(lo - t - slack).max(t - hi - slack);
    }
    Ok(VerifyReport {
        recorded_error,
        recomputed_error: recomputed,
        error_matches: (recomputed - recorded_error).abs() <= ERROR_REPRODUCTION_TOL * recorded_error.abs().max(1.0),
        sum_rules_hold: sum_rule_residuals.iter().all(|&r| r <= SUM_RULE_TOL),
        sum_rule_residuals,
        max_bound_violation: violation.max(0.0),
        bounds_hold: violation <= 0.0,
    })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes")
}

pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    let scenario = config.load_scenario()?;
    let label = config.label(&scenario);
    let options = config.solve_options();
    fs::create_dir_all(&config.out)?;
    match config.command {
        Command::Solve => run_solve(config, &scenario, &label, &options),
        Command::Sweep => run_sweep(config, &scenario, &label, &options),
        Command::Verify => run_verify(config, &scenario, &label),
    }
}

fn run_solve(config: &RunConfig, scenario: &Scenario, label: &str, options: &SolveOptions) -> Result<RunOutcome> {
    let start = Instant::now();
    let result = match solve_approximation(scenario, options) {
        Ok(r) => r,
        Err(Error::Solver(m)) => return Ok(RunOutcome { success: false, report: format!("{label}: {m}") }),
        Err(e) => return Err(e),
    };
    let seconds = start.elapsed().as_secs_f64();
    let summary = summarize(label, scenario, &result, seconds)?;
    write(&config.out.join("rep.json"), &result.rep.to_json())?;
    write(&config.out.join("residuals.csv"), &residuals_csv(&result))?;
    write(&config.out.join("summary.json"), &to_json(&summary))?;
    write(&config.out.join("scenario.json"), &scenario.to_json())?;

    let mut report = format!(
        "{label}: optimal in {} iterations ({seconds:.2} s), error {:.6e}",
        summary.iterations, summary.error
    );
    if let Some(d) = summary.passive_bound {
        let _ = write!(report, ", passive bound {d:.6e}");
    }
    if let Some(p) = &summary.p0 {
        let _ = write!(report, ", p0 {:.6e} ({:.4} angular)", p.amplitude, p.angular_strength);
    }
    for (i, m) in summary.masses.iter().enumerate() {
        let _ = write!(report, ", p{} {:.6e} at {}", i + 1, m.amplitude, m.location);
        if let Some(h) = m.hat_equivalent {
            let _ = write!(report, " ({h:.4} hat)");
        }
    }
    Ok(RunOutcome { success: true, report })
}

fn run_sweep(config: &RunConfig, scenario: &Scenario, label: &str, options: &SolveOptions) -> Result<RunOutcome> {
    let axis = config.axis.ok_or_else(|| invalid("sweep needs an axis"))?;
    if config.values.is_empty() {
        return Err(invalid("sweep needs at least one value"));
    }
    let points = sweep(scenario, axis, &config.values, options);
    let mut csv = format!("{axis},status,error,iterations,p0,message\n");
    let mut failures = 0;
    for p in &points {
        match &p.outcome {
            Ok(r) => {
                let p0 = r.rep.masses().iter().find(|m| m.location == 0.0).map(|m| m.amplitude.to_string());
                let _ = writeln!(
                    csv,
                    "{},optimal,{},{},{},",
                    p.value,
                    r.error,
                    r.solution.iterations,
                    p0.unwrap_or_default()
                );
            }
            Err(m) => {
                failures += 1;
                let _ = writeln!(csv, "{},failed,,,,\"{}\"", p.value, m.replace('"', "'"));
            }
        }
    }
    write(&config.out.join("sweep.csv"), &csv)?;
    Ok(RunOutcome {
        success: failures == 0,
        report: format!("{label}: sweep over {axis} with {} points, {failures} failed", points.len()),
    })
}

fn run_verify(config: &RunConfig, scenario: &Scenario, label: &str) -> Result<RunOutcome> {
    let rep = QuasiHerglotzRep::from_json(&fs::read_to_string(config.out.join("rep.json"))?)?;
    let summary: Summary = serde_json::from_str(&fs::read_to_string(config.out.join("summary.json"))?)
        .map_err(|e| Error::Schema(format!("summary.json: {e}")))?;
    let report = verify_result(scenario, &rep, summary.error)?;
    write(&config.out.join("verify.json"), &to_json(&report))?;
    let verdict = |ok: bool| if ok { "ok" } else { "FAILED" };
    let max_sr = report.sum_rule_residuals.iter().copied().fold(0.0, f64::max);
    Ok(RunOutcome {
        success: report.passed(),
        report: format!(
            "{label}: error {:.6e} vs recorded {:.6e} [{}], sum-rule residual {max_sr:.3e} [{}], bound violation {:.3e} [{}]",
            report.recomputed_error,
            report.recorded_error,
            verdict(report.error_matches),
            verdict(report.sum_rules_hold),
            report.max_bound_violation,
            verdict(report.bounds_hold),
        ),
    })
}

/// Exit status for a failed run: 2 for unusable input, 1 otherwise.
pub fn exit_code(error: &Error) -> u8 {
    match error {
        Error::Schema(_) | Error::InvalidArgument(_) | Error::Assembly(_) => 2,
        _ => 1,
    }
}
