//! Command implementations behind the `fnn` binary.
//!
//! Each command writes a human-readable summary to `out`, writes data files
//! to the output directory when one is given, and returns a [`RunReport`]
//! whose `exit_code` follows one contract: 0 success, 1 verdict failure,
//! 2 configuration or usage error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::born::{compute_distribution, correlators};
use crate::config::WorkbenchConfig;
use crate::error::{Error, Result};
use crate::models::{inflation_identities, maximize_witness, random_model, InflationReport};
use crate::spacetime::audit_all;
use crate::stats::{derive_seed, estimate_witnesses, sample_counts, EstimateReport};
use crate::witness::{evaluate, Witness, CLASSICAL_BOUND};

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Allowed excess over the bound before `verify-bound` raises an alarm.
pub const BOUND_SLACK: f64 = 1e-7;
const IDENTITY_TOL: f64 = 1e-12;
const DECOMPOSITION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    fn ext(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub config_hash: String,
    pub outputs: Vec<PathBuf>,
    pub wall_time_s: f64,
    pub exit_code: i32,
}

/// Exit code for an error: 2 for configuration and input problems, 1 otherwise.
pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Infeasible | Error::Unbounded => EXIT_VERDICT,
        _ => EXIT_CONFIG,
    }
}

struct Run<'a> {
    command: &'static str,
    cfg: &'a WorkbenchConfig,
    opts: &'a RunOptions,
    outputs: Vec<PathBuf>,
    started: Instant,
}

impl<'a> Run<'a> {
    fn new(command: &'static str, cfg: &'a WorkbenchConfig, opts: &'a RunOptions) -> Self {
        Self {
            command,
            cfg,
            opts,
            outputs: Vec::new(),
            started: Instant::now(),
        }
    }

    fn write_file(&mut self, name: &str, contents: &str) -> Result<()> {
        if let Some(dir) = &self.opts.out_dir {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(name);
            std::fs::write(&path, contents)?;
            self.outputs.push(path);
        }
        Ok(())
    }

    /// Writes `csv` or `json` under `stem` according to the chosen format.
    fn write_data(&mut self, stem: &str, csv: impl FnOnce() -> String, json: impl FnOnce() -> String) -> Result<()> {
        let name = format!("{stem}.{}", self.opts.format.ext());
        let body = match self.opts.format {
            OutputFormat::Csv => csv(),
            OutputFormat::Json => json(),
        };
        self.write_file(&name, &body)
    }

    fn finish(self, exit_code: i32) -> Result<RunReport> {
        let report = RunReport {
            command: self.command.to_string(),
            config_hash: self.cfg.hash(),
            outputs: self.outputs,
            wall_time_s: self.started.elapsed().as_secs_f64(),
            exit_code,
        };
        if let Some(dir) = &self.opts.out_dir {
            std::fs::write(dir.join("run_report.json"), to_json(&report))?;
        }
        Ok(report)
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn num(v: f64) -> String {
    format!("{v:.8e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryRow {
    pub alpha1: f64,
    pub alpha2: f64,
    pub r_cns: f64,
    pub r_nsc: f64,
    pub violated_cns: bool,
    pub violated_nsc: bool,
}

const THEORY_HEADER: &str = "alpha1,alpha2,r_cns,r_nsc,violated_cns,violated_nsc\n";

fn theory_csv(rows: &[TheoryRow]) -> String {
    let mut s = String::from(THEORY_HEADER);
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            num(r.alpha1),
            num(r.alpha2),
            num(r.r_cns),
            num(r.r_nsc),
            r.violated_cns,
            r.violated_nsc
        ));
    }
    s
}

fn theory_row(cfg: &WorkbenchConfig, alpha1: f64, alpha2: f64) -> Result<TheoryRow> {
    let s = cfg.scenario.scenario_at(alpha1, alpha2)?;
    let rep = evaluate(&correlators(&compute_distribution(&s)?))?;
    Ok(TheoryRow {
        alpha1,
        alpha2,
        r_cns: rep.r_cns,
        r_nsc: rep.r_nsc,
        violated_cns: rep.violated_cns,
        violated_nsc: rep.violated_nsc,
    })
}

/// Both witnesses at the configured scenario.
pub fn cmd_theory(cfg: &WorkbenchConfig, opts: &RunOptions, out: &mut dyn Write) -> Result<RunReport> {
    let mut run = Run::new("theory", cfg, opts);
    let row = theory_row(cfg, cfg.scenario.alpha1.0, cfg.scenario.alpha2.0)?;
    writeln!(out, "R_C-NS = {:.6}", row.r_cns)?;
    writeln!(out, "R_NS-C = {:.6}", row.r_nsc)?;
    writeln!(out, "fnn = {}", row.violated_cns && row.violated_nsc)?;
    run.write_data("theory", || theory_csv(&[row]), || to_json(&row))?;
    run.finish(EXIT_SUCCESS)
}

/// Witness values along the configured `alpha1` grid.
pub fn cmd_sweep(cfg: &WorkbenchConfig, opts: &RunOptions, out: &mut dyn Write) -> Result<RunReport> {
    let mut run = Run::new("sweep", cfg, opts);
    let alpha2 = cfg.sweep.alpha2.unwrap_or(cfg.scenario.alpha2).0;
    let rows = cfg
        .sweep
        .grid()
        .par_iter()
        .map(|&a1| theory_row(cfg, a1, alpha2))
        .collect::<Result<Vec<_>>>()?;
    for r in &rows {
        writeln!(
            out,
            "alpha1 = {:.6}  R_C-NS = {:.6}  R_NS-C = {:.6}  fnn = {}",
            r.alpha1,
            r.r_cns,
            r.r_nsc,
            r.violated_cns && r.violated_nsc
        )?;
    }
    let certified = rows.iter().filter(|r| r.violated_cns && r.violated_nsc).count();
    writeln!(out, "{certified} of {} points violate both witnesses", rows.len())?;
    run.write_data("sweep", || theory_csv(&rows), || to_json(&rows))?;
    run.finish(EXIT_SUCCESS)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub total: u64,
    pub seed: u64,
    pub bootstrap_resamples: usize,
    pub empty_contexts: Vec<(usize, usize)>,
    pub estimate: Option<EstimateReport>,
}

/// Simulated finite-statistics run at the configured scenario.
pub fn cmd_sample(cfg: &WorkbenchConfig, opts: &RunOptions, out: &mut dyn Write) -> Result<RunReport> {
    let mut run = Run::new("sample", cfg, opts);
    let st = &cfg.statistics;
    let d = compute_distribution(&cfg.scenario.scenario()?)?;
    let counts = sample_counts(&d, st.total, st.seed)?;
    let empty = counts.empty_contexts();
    if st.total < 400 {
        writeln!(out, "warning: {} events leave few per input context; contexts may be empty", st.total)?;
    }
    let estimate = if empty.is_empty() {
        Some(estimate_witnesses(&counts, st.bootstrap_resamples, st.seed)?)
    } else {
        writeln!(out, "warning: empty input contexts {empty:?}; no estimate")?;
        None
    };
    if let Some(e) = &estimate {
        let sig = |s: Option<f64>| s.map_or("n/a".to_string(), |v| format!("{v:.2}"));
        writeln!(out, "R_C-NS = {:.4} ± {:.4} ({} sigma)", e.r_cns_hat, e.se_cns, sig(e.sigma_cns))?;
        writeln!(out, "R_NS-C = {:.4} ± {:.4} ({} sigma)", e.r_nsc_hat, e.se_nsc, sig(e.sigma_nsc))?;
    }
    let summary = SampleSummary {
        total: st.total,
        seed: st.seed,
        bootstrap_resamples: st.bootstrap_resamples,
        empty_contexts: empty,
        estimate,
    };
    run.write_data("counts", || counts.to_csv(), || to_json(&counts))?;
    run.write_file("estimate.json", &to_json(&summary))?;
    let code = if summary.estimate.is_some() { EXIT_SUCCESS } else { EXIT_VERDICT };
    run.finish(code)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSummary {
    pub kind: Witness,
    pub random_models: usize,
    pub random_max: f64,
    pub seesaw_max: f64,
    pub seesaw_converged: bool,
    pub best_model: crate::models::HybridModel,
    pub fixture_values: Vec<f64>,
    pub max_found: f64,
}

fn bound_summary(cfg: &WorkbenchConfig, kind: Witness) -> Result<BoundSummary> {
    let o = &cfg.optimization;
    let random_max = (0..o.random_models as u64)
        .into_par_iter()
        .map(|i| random_model(kind, o.n_lambda, derive_seed(o.seed, i))?.witness_value())
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let opt = maximize_witness(kind, o.n_lambda, o.restarts, o.iters, o.seed)?;
    let fixture_values = o
        .fixture_models
        .iter()
        .filter(|m| m.kind == kind)
        .map(|m| m.witness_value())
        .collect::<Result<Vec<_>>>()?;
    let max_found = fixture_values.iter().copied().fold(random_max.max(opt.best_value), f64::max);
    Ok(BoundSummary {
        kind,
        random_models: o.random_models,
        random_max,
        seesaw_max: opt.best_value,
        seesaw_converged: opt.all_converged(),
        best_model: opt.best_model,
        fixture_values,
        max_found,
    })
}

/// Searches both hybrid model classes for values above the bound.
pub fn cmd_verify_bound(cfg: &WorkbenchConfig, opts: &RunOptions, out: &mut dyn Write) -> Result<RunReport> {
    let mut run = Run::new("verify-bound", cfg, opts);
    let summaries = [Witness::Cns, Witness::Nsc]
        .into_iter()
        .map(|k| bound_summary(cfg, k))
        .collect::<Result<Vec<_>>>()?;
    let mut exceeded = false;
    for s in &summaries {
        writeln!(
            out,
            "{}: random max = {:.12}, seesaw max = {:.12}, max found = {:.12}",
            s.kind.label(),
            s.random_max,
            s.seesaw_max,
            s.max_found
        )?;
        for v in &s.fixture_values {
            writeln!(out, "{}: fixture model = {v}", s.kind.label())?;
        }
        if s.max_found > CLASSICAL_BOUND + BOUND_SLACK {
            exceeded = true;
            writeln!(out, "{}: bound exceeded", s.kind.label())?;
        }
    }
    run.write_file("verify_bound.json", &to_json(&summaries))?;
    run.finish(if exceeded { EXIT_VERDICT } else { EXIT_SUCCESS })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InflationRow {
    pub kind: Witness,
    pub seed: u64,
    pub report: InflationReport,
}

fn inflation_csv(rows: &[InflationRow]) -> String {
    let mut s = String::from("kind,seed,identity_residual,factorization_residual,decomposition_residual,max_bound_excess,witness\n");
    for r in rows {
        let rep = &r.report;
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.kind.label(),
            r.seed,
            num(rep.max_identity_residual),
            num(rep.factorization_residual),
            num(rep.decomposition_residual),
            num(rep.max_bound_excess),
            num(rep.witness_value)
        ));
    }
    s
}

/// Checks the inflation identities on seeded random models of both classes.
pub fn cmd_inflate_check(cfg: &WorkbenchConfig, opts: &RunOptions, out: &mut dyn Write) -> Result<RunReport> {
    let mut run = Run::new("inflate-check", cfg, opts);
    let o = &cfg.optimization;
    let jobs: Vec<(Witness, u64)> = [Witness::Cns, Witness::Nsc]
        .into_iter()
        .flat_map(|k| (0..o.inflation_models as u64).map(move |i| (k, derive_seed(o.seed, i))))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(kind, seed)| {
            let m = random_model(kind, o.n_lambda, seed)?;
            Ok(InflationRow {
                kind,
                seed,
                report: inflation_identities(&m)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut ok = true;
    for kind in [Witness::Cns, Witness::Nsc] {
        let of_kind: Vec<&InflationReport> = rows.iter().filter(|r| r.kind == kind).map(|r| &r.report).collect();
        let max = |f: fn(&InflationReport) -> f64| of_kind.iter().map(|r| f(r)).fold(0.0, f64::max);
        let identity = max(|r| r.max_identity_residual);
        let factorization = max(|r| r.factorization_residual);
        let decomposition = max(|r| r.decomposition_residual);
        let excess = of_kind.iter().map(|r| r.max_bound_excess).fold(f64::NEG_INFINITY, f64::max);
        writeln!(
            out,
            "{}: {} models, identity {identity:.3e}, factorization {factorization:.3e}, decomposition {decomposition:.3e}, bound excess {excess:.3e}",
            kind.label(),
            of_kind.len()
        )?;
        ok &= identity <= IDENTITY_TOL
            && factorization <= IDENTITY_TOL
            && decomposition <= DECOMPOSITION_TOL
            && excess <= DECOMPOSITION_TOL;
    }
    writeln!(out, "identities hold = {ok}")?;
    run.write_data("inflation", || inflation_csv(&rows), || to_json(&rows))?;
    run.finish(if ok { EXIT_SUCCESS } else { EXIT_VERDICT })
}

/// Space-like separation audit of the configured layout.
pub fn cmd_spacetime(cfg: &WorkbenchConfig, opts: &RunOptions, out: &mut dyn Write) -> Result<RunReport> {
    let mut run = Run::new("spacetime", cfg, opts);
    let report = audit_all(&cfg.spacetime.layout, cfg.spacetime.k_sigma)?;
    for w in &report.windows {
        writeln!(
            out,
            "{:<8} [{:.2} ± {:.2}, {:.2} ± {:.2}] ns",
            w.label, w.start.value, w.start.sigma, w.end.value, w.end.sigma
        )?;
    }
    for r in &report.results {
        writeln!(
            out,
            "{}-{}: d = {:.0} ± {:.0} m, dt = {:.2} ± {:.2} ns, ds2 = {:.0} ± {:.0} m^2, spacelike = {}",
            r.first,
            r.second,
            r.distance.value,
            r.distance.sigma,
            r.delta_t.value,
            r.delta_t.sigma,
            r.interval.value,
            r.interval.sigma,
            r.spacelike
        )?;
    }
    writeln!(out, "all spacelike = {}", report.all_spacelike)?;
    run.write_data("spacetime", || report.to_csv(), || to_json(&report))?;
    run.finish(if report.all_spacelike { EXIT_SUCCESS } else { EXIT_VERDICT })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Theory,
    Sweep,
    Sample,
    VerifyBound,
    InflateCheck,
    Spacetime,
}

/// Loads the config (defaults when `path` is `None`), applies a seed override and runs `command`.
///
/// Errors are reported to `err` and turned into exit codes.
pub fn run_command(
    command: Command,
    path: Option<&Path>,
    seed: Option<u64>,
    opts: &RunOptions,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let result = (|| {
        let mut cfg = match path {
            Some(p) => crate::config::load_config(p)?,
            None => WorkbenchConfig::default(),
        };
        if let Some(s) = seed {
            cfg.statistics.seed = s;
            cfg.optimization.seed = s;
        }
        let f = match command {
            Command::Theory => cmd_theory,
            Command::Sweep => cmd_sweep,
            Command::Sample => cmd_sample,
            Command::VerifyBound => cmd_verify_bound,
            Command::InflateCheck => cmd_inflate_check,
            Command::Spacetime => cmd_spacetime,
        };
        f(&cfg, opts, out)
    })();
    match result {
        Ok(r) => r.exit_code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code_for(&e)
        }
    }
}
