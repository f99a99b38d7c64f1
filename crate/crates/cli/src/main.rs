//! `npivq`: estimate `∫h²μ` in nonparametric IV models from CSV data, select
//! the sieve dimension adaptively, and run Monte Carlo rate experiments.
//!
//! Exit codes: 0 success, 2 bad input or config, 3 numerical failure.

mod data;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use npiv_quad::basis::{BasisFamily, BasisSpec};
use npiv_quad::config::load_config;
use npiv_quad::estimators::{ahat_matrix, build_design, fit_npiv, loo_sums, quad_plugin};
use npiv_quad::experiments::{
    compare_loo_plugin, run_experiment, summarize, write_csv, EstimatorKind, ExperimentConfig,
    RawResults, RateReport,
};
use npiv_quad::illposedness::{tau_hat, S_MIN_CUTOFF};
use npiv_quad::lepski::adaptive_estimate;
use npiv_quad::linalg::TolerancePolicy;

#[derive(Parser)]
#[command(name = "npivq", version, about = "Quadratic functionals in nonparametric IV regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Leave-one-out and plug-in estimates at a fixed sieve dimension.
    Estimate(EstimateArgs),
    /// Lepski selection of the sieve dimension.
    Adapt(AdaptArgs),
    /// Run a configured Monte Carlo experiment and write the raw table.
    Simulate(SimArgs),
    /// Run an experiment and also fit rate slopes.
    Rates(SimArgs),
}

#[derive(Args)]
struct DataArgs {
    /// CSV file with header `y,x,w`.
    #[arg(long)]
    data: PathBuf,
    /// cosine, bspline (cubic), bspline<k> or legendre.
    #[arg(long, default_value = "cosine")]
    basis: String,
    /// `uniform` or `file:<path>` (CSV with header `x,mu`).
    #[arg(long, default_value = "uniform")]
    weight: String,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Recorded in the report; the estimators themselves are deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Sieve dimension.
    #[arg(long, default_value_t = 4)]
    j: usize,
    /// Instrument dimension; defaults to J.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args)]
struct AdaptArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = npiv_quad::lepski::DEFAULT_C0)]
    c0: f64,
}

#[derive(Args)]
struct SimArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "npivq-out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    c0: Option<f64>,
    #[arg(long = "C0")]
    big_c0: Option<f64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Numeric(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<npiv_quad::Error> for CliError {
    fn from(e: npiv_quad::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Numeric(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn tool() -> Value {
    json!({ "name": "npivq", "version": env!("CARGO_PKG_VERSION") })
}

fn emit(value: &Value, out: Option<&Path>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Numeric(format!("serializing report: {e}")))?;
    match out {
        Some(path) => fs::write(path, text + "\n")
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
        None => {
            use std::io::Write;
            match writeln!(std::io::stdout().lock(), "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(CliError::Input(format!("writing to stdout: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> CliResult<Value> {
    serde_json::to_value(v).map_err(|e| CliError::Numeric(format!("serializing report: {e}")))
}

fn load(args: &DataArgs) -> CliResult<(data::LoadedData, BasisFamily, npiv_quad::basis::WeightFn)> {
    let family = BasisFamily::parse(&args.basis)?;
    let mu = data::load_weight(&args.weight).map_err(CliError::Input)?;
    let loaded = data::load_sample(&args.data).map_err(CliError::Input)?;
    Ok((loaded, family, mu))
}

fn tolerances() -> Value {
    json!({
        "rel_rank_tol": TolerancePolicy::default().rel_rank_tol,
        "s_min_cutoff": S_MIN_CUTOFF,
    })
}

fn cmd_estimate(args: &EstimateArgs) -> CliResult<()> {
    let (loaded, family, mu) = load(&args.data)?;
    let k = args.k.unwrap_or(args.j);
    let psi = BasisSpec::new(family, args.j)?;
    let b = BasisSpec::new(family, k)?;
    let sample = &loaded.sample;
    let design = build_design(sample, psi, b, &mu)?;
    let ahat = ahat_matrix(&design)?;
    let f_loo = loo_sums(&sample.y, &design, &ahat.matrix)?.loo();
    let fit = fit_npiv(sample, &design)?;
    let f_plugin = quad_plugin(&fit);
    let (tau, v) = match tau_hat(&design) {
        Ok(r) => (Some(r.tau_hat), Some(r.v_hat)),
        Err(e @ npiv_quad::Error::IllposednessOverflow { .. }) => {
            log::warn!("{e}");
            (None, None)
        }
        Err(e) => return Err(e.into()),
    };
    let report = json!({
        "tool": tool(),
        "seed": args.data.seed,
        "config": {
            "command": "estimate",
            "data": args.data.data,
            "basis": family.name(),
            "weight": args.data.weight,
            "j": args.j,
            "k": k,
        },
        "n": sample.len(),
        "j": args.j,
        "k": k,
        "f_loo": f_loo,
        "f_plugin": f_plugin,
        "tau_hat": tau,
        "v_hat": v,
        "rank_deficient": ahat.rank_deficient,
        "rescaling": to_value(&loaded.rescaling)?,
        "tolerances": tolerances(),
    });
    emit(&report, args.data.out.as_deref())
}

fn cmd_adapt(args: &AdaptArgs) -> CliResult<()> {
    let (loaded, family, mu) = load(&args.data)?;
    let result = adaptive_estimate(&loaded.sample, family, &mu, args.c0)?;
    let report = json!({
        "tool": tool(),
        "seed": args.data.seed,
        "config": {
            "command": "adapt",
            "data": args.data.data,
            "basis": family.name(),
            "weight": args.data.weight,
            "c0": args.c0,
        },
        "n": loaded.sample.len(),
        "j_hat": result.j_hat,
        "f_hat": result.f_hat,
        "j_min": result.candidate_set.j_min,
        "j_max_hat": result.candidate_set.j_max_hat,
        "result": to_value(&result)?,
        "rescaling": to_value(&loaded.rescaling)?,
        "tolerances": tolerances(),
    });
    emit(&report, args.data.out.as_deref())
}

fn resolve(args: &SimArgs) -> CliResult<ExperimentConfig> {
    let mut config = load_config(&args.config)?;
    if let Some(s) = args.seed {
        config.master_seed = s;
    }
    if let Some(c0) = args.c0 {
        config.c0 = c0;
    }
    if let Some(c) = args.big_c0 {
        config.big_c0 = c;
    }
    if let Some(t) = args.threads {
        config.threads = t;
    }
    config.validate()?;
    Ok(config)
}

fn run(args: &SimArgs) -> CliResult<(ExperimentConfig, RawResults, RateReport)> {
    let config = resolve(args)?;
    fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.out.display())))?;
    let results = run_experiment(&config)?;
    let path = args.out.join("results.csv");
    let file = fs::File::create(&path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    write_csv(&results, std::io::BufWriter::new(file))?;
    let report = summarize(&results, &config)?;
    if report.failure_rate > 0.0 {
        log::warn!(
            "{:.2}% of estimator runs failed",
            100.0 * report.failure_rate
        );
    }
    Ok((config, results, report))
}

fn header(config: &ExperimentConfig) -> CliResult<(Value, Value)> {
    Ok((tool(), to_value(config)?))
}

fn cmd_simulate(args: &SimArgs) -> CliResult<()> {
    let (config, _, report) = run(args)?;
    let (tool, cfg) = header(&config)?;
    let summary = json!({
        "tool": tool,
        "seed": config.master_seed,
        "config": cfg,
        "summary": to_value(&report)?,
    });
    emit(&summary, Some(&args.out.join("summary.json")))
}

fn cmd_rates(args: &SimArgs) -> CliResult<()> {
    let (config, results, report) = run(args)?;
    let primary = config.estimators[0];
    let fit = report.slopes.get(primary.name()).copied().flatten();
    let comparison = if config.estimators.contains(&EstimatorKind::LooOptimalJ)
        && config.estimators.contains(&EstimatorKind::Plugin)
    {
        Some(to_value(&compare_loo_plugin(&results))?)
    } else {
        None
    };
    let (tool, cfg) = header(&config)?;
    let rates = json!({
        "tool": tool,
        "seed": config.master_seed,
        "config": cfg,
        "estimator": primary.name(),
        "slope": fit.map(|f| f.slope),
        "stderr": fit.map(|f| f.stderr),
        "theoretical_exponent": report.theoretical_exponent,
        "theorem31_pass_rate": report.theorem31_pass_rate,
        "failure_rate": report.failure_rate,
        "slopes": to_value(&report.slopes)?,
        "cells": to_value(&report.cells)?,
        "theorem31": to_value(&report.theorem31)?,
        "loo_vs_plugin": comparison,
    });
    emit(&rates, Some(&args.out.join("rates.json")))?;

    let path = args.out.join("rates_plot.csv");
    let mut w = csv::Writer::from_path(&path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let io = |e: csv::Error| CliError::Numeric(format!("writing plot data: {e}"));
    w.write_record(["estimator", "n", "rmse"]).map_err(io)?;
    for &est in &config.estimators {
        for (n, rmse) in report.rmse_series(est) {
            w.write_record([est.name().to_string(), n.to_string(), rmse.to_string()])
                .map_err(io)?;
        }
    }
    w.flush()
        .map_err(|e| CliError::Numeric(format!("writing plot data: {e}")))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Adapt(a) => cmd_adapt(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Rates(a) => cmd_rates(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = match &e {
                CliError::Input(m) | CliError::Numeric(m) => m,
            };
            eprintln!("npivq: {msg}");
            ExitCode::from(e.code())
        }
    }
}
