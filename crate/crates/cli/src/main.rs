use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use fracmin_cli::{parse_config, run, Command, RunError, RunOptions};

/// Minimizers of the Dirichlet energy plus fractional perimeter.
#[derive(Debug, Parser)]
#[command(name = "fracmin", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Clone, clap::Args)]
struct Common {
    /// Experiment config (INI).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `[output] directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed; overrides `[search] seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Input snapshot (defaults to `<out>/snapshot.txt` where needed).
    #[arg(long)]
    snapshot: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Minimize and write the snapshot and energy history.
    Minimize(Common),
    /// Evaluate Per_σ of the configured set.
    Persigma(Common),
    /// κ_σ along the boundary of the configured set.
    Curvature(Common),
    /// Full diagnostics report on a snapshot.
    Diagnose(Common),
    /// Calibrate the extension constant.
    Calibrate(Common),
    /// Minimize once per σ in the configured grid.
    SweepSigma(Common),
    /// Rescaling sequence of a snapshot.
    Blowup(Common),
}

impl Cmd {
    fn split(self) -> (Command, Common) {
        match self {
            Cmd::Minimize(c) => (Command::Minimize, c),
            Cmd::Persigma(c) => (Command::Persigma, c),
            Cmd::Curvature(c) => (Command::Curvature, c),
            Cmd::Diagnose(c) => (Command::Diagnose, c),
            Cmd::Calibrate(c) => (Command::Calibrate, c),
            Cmd::SweepSigma(c) => (Command::SweepSigma, c),
            Cmd::Blowup(c) => (Command::Blowup, c),
        }
    }
}

fn execute(cmd: Command, common: Common) -> anyhow::Result<bool> {
    let text = std::fs::read_to_string(&common.config)
        .with_context(|| format!("cannot read config {}", common.config.display()))?;
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(errs) => {
            for e in &errs.0 {
                eprintln!("error: kind=config line={} message={}", e.line, e.message);
            }
            return Ok(false);
        }
    };
    if let Some(seed) = common.seed {
        cfg.search.params.seed = seed;
    }
    let opts = RunOptions {
        out: common.out.unwrap_or_else(|| PathBuf::from(&cfg.output.directory)),
        snapshot: common.snapshot,
    };
    let outcome = match run(cmd, &cfg, &opts) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: kind={} message={}", e.kind(), single_line(&e));
            return Ok(false);
        }
    };
    for m in &outcome.messages {
        println!("{m}");
    }
    for a in &outcome.artifacts {
        println!("wrote {}", a.display());
    }
    for f in &outcome.failures {
        eprintln!("error: kind=gate message={f}");
    }
    Ok(outcome.success())
}

fn single_line(e: &RunError) -> String {
    e.to_string().replace('\n', "; ")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, common) = cli.command.split();
    match execute(cmd, common) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: kind=io message={e:#}");
            ExitCode::FAILURE
        }
    }
}
