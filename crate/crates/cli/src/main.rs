//! `nlheat`: command-line laboratory for radial solutions of
//! u_t = Δu + |u|^{p-1} u.
//!
//! Four subcommands: `thresholds` prints the closed-form blowup constants at
//! one (d, p); `criterion` evaluates the heat-semigroup blowup test for a
//! configured profile; `simulate` integrates the radial equation and writes
//! series/snapshot files; `sweep` runs a family of criterion + solver cells
//! over a parameter range.
//!
//! Experiments are described by a single JSON config document; command-line
//! flags override config fields. Exit codes: 0 success, 2 parameter or
//! config error, 3 numerical failure; failures also emit one JSON error
//! object on stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nlheat_cli::{
    criterion_csv, criterion_doc, load_experiment, parse_p, simulate_doc, sweep_csv, sweep_rows,
    thresholds_csv, thresholds_doc, Experiment, Overrides,
};
use nlheat_core::model::PExponent;
use nlheat_core::{Error, Result, SimOutcome};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "nlheat",
    version,
    about = "Blowup laboratory for the semilinear heat equation u_t = \u{394}u + |u|^{p-1}u"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the threshold constants at one (d, p)
    Thresholds(CommonArgs),
    /// Evaluate the semigroup blowup criterion for the configured profile
    Criterion(CommonArgs),
    /// Integrate the radial equation; write summary, series, and snapshots
    Simulate(CommonArgs),
    /// Run criterion + solver cells over a parameter range
    Sweep(CommonArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Space dimension
    #[arg(long)]
    d: Option<u32>,
    /// Reaction exponent: a real ("3.2") or an exact ratio ("5/3")
    #[arg(long, value_parser = parse_p)]
    p: Option<PExponent>,
    /// Weight exponent; adds the weighted horizon bound to `criterion`
    #[arg(long)]
    beta: Option<f64>,
    /// Experiment config, one JSON document; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for file outputs
    #[arg(long)]
    out: Option<PathBuf>,
    /// stdout format (default: csv for sweep, json elsewhere)
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl CommonArgs {
    fn experiment(&self) -> Result<Experiment> {
        let ov = Overrides {
            d: self.d,
            p: self.p,
            beta: self.beta,
            out: self.out.clone(),
        };
        load_experiment(self.config.as_deref(), &ov)
    }
}

fn write_out(dir: Option<&Path>, name: &str, contents: &str) -> Result<()> {
    if let Some(dir) = dir {
        fs::write(dir.join(name), contents).map_err(|e| {
            Error::domain(format!("cannot write {}: {e}", dir.join(name).display()))
        })?;
    }
    Ok(())
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    text
}

fn cmd_thresholds(args: &CommonArgs) -> Result<()> {
    let exp = args.experiment()?;
    let report = thresholds_doc(&exp)?;
    let text = match args.format.unwrap_or(Format::Json) {
        Format::Json => to_pretty(&report),
        Format::Csv => thresholds_csv(&report),
    };
    print!("{text}");
    write_out(exp.out_dir()?, "thresholds.json", &to_pretty(&report))
}

fn cmd_criterion(args: &CommonArgs) -> Result<()> {
    let exp = args.experiment()?;
    let doc = criterion_doc(&exp)?;
    let text = match args.format.unwrap_or(Format::Json) {
        Format::Json => to_pretty(&doc),
        Format::Csv => criterion_csv(&doc),
    };
    print!("{text}");
    write_out(exp.out_dir()?, "criterion.json", &to_pretty(&doc))
}

fn cmd_simulate(args: &CommonArgs) -> Result<()> {
    let exp = args.experiment()?;
    let artifacts = simulate_doc(&exp)?;
    let summary_text = to_pretty(&artifacts.summary);

    let dir = exp.out_dir()?;
    write_out(dir, "summary.json", &summary_text)?;
    write_out(dir, "series.csv", &artifacts.series_csv)?;
    for (name, csv) in &artifacts.snapshots {
        write_out(dir, name, csv)?;
    }

    match args.format.unwrap_or(Format::Json) {
        Format::Json => print!("{summary_text}"),
        Format::Csv => print!("{}", artifacts.series_csv),
    }

    // a run that died mid-integration is a numerical failure for scripting
    // purposes, even though its partial outputs are already on disk
    if let SimOutcome::StepFailure { t, reason } = artifacts.summary.outcome {
        return Err(Error::StepFailure { t, reason });
    }
    Ok(())
}

fn cmd_sweep(args: &CommonArgs) -> Result<()> {
    let exp = args.experiment()?;
    let rows = sweep_rows(&exp)?;
    let csv = sweep_csv(&rows);
    match args.format.unwrap_or(Format::Csv) {
        Format::Csv => print!("{csv}"),
        Format::Json => print!("{}", to_pretty(&rows)),
    }
    write_out(exp.out_dir()?, "sweep.csv", &csv)
}

#[derive(Serialize)]
struct ErrorDoc<'a> {
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
    exit_code: u8,
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Domain(_) => "domain",
        Error::Singularity(_) => "singularity",
        Error::Quadrature { .. } => "quadrature",
        Error::StepFailure { .. } => "step_failure",
        Error::Parse(_) => "parse",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Thresholds(args) => cmd_thresholds(args),
        Command::Criterion(args) => cmd_criterion(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = if e.is_domain() { 2u8 } else { 3u8 };
            let doc = ErrorDoc {
                error: ErrorBody {
                    kind: error_kind(&e),
                    message: e.to_string(),
                    exit_code: code,
                },
            };
            eprintln!(
                "{}",
                serde_json::to_string(&doc).expect("error doc serializes")
            );
            ExitCode::from(code)
        }
    }
}
