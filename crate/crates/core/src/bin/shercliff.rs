use clap::{Args, Parser, Subcommand};
use shercliff::exec::{set_worker_count, Execution};
use shercliff::experiments::{render_report, run_experiment};
use shercliff::io::config::{parse_config, ExperimentKind};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "shercliff",
    version,
    about = "Prandtl-Shercliff boundary-layer laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario JSON; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 keeps the default pool).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Resume a 2D run from a checkpoint header.
    #[arg(long)]
    resume: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// 2D nonlinear run with the energy audit.
    Simulate2d(RunArgs),
    /// 3D linearized run with the analytic-norm monitor.
    #[command(name = "simulate3d-linear")]
    Simulate3dLinear(RunArgs),
    /// Heat-shear decay rates.
    HeatDecay(RunArgs),
    /// Weight-ratio scans, Young and Hardy checks.
    VerifyInequalities(RunArgs),
    /// Weighted inequality audit on random profiles.
    LemmaAudit(RunArgs),
    /// Derivative ladder and analyticity radius of a 2D run.
    SmoothingLadder(RunArgs),
    /// Re-render plots and a summary for a finished run directory.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(kind: ExperimentKind, args: &RunArgs) -> shercliff::Result<bool> {
    let text = match &args.config {
        Some(p) => std::fs::read_to_string(p)?,
        None => "{}".to_string(),
    };
    let mut config = parse_config(&text, Some(kind))?;
    if let Some(seed) = args.seed {
        config.seed = Some(seed);
    }
    if args.threads > 0 {
        set_worker_count(args.threads);
    }
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| Path::new("out").join(kind.to_string()));
    let summary = run_experiment(&config, &out, args.resume.as_deref(), Execution::default())?;
    for c in &summary.checks {
        println!(
            "{} {}: {:.6e} (threshold {})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold
        );
    }
    println!("artifacts in {}", out.display());
    Ok(summary.pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Simulate2d(a) => run(ExperimentKind::Sim2d, a),
        Command::Simulate3dLinear(a) => run(ExperimentKind::Sim3dLinear, a),
        Command::HeatDecay(a) => run(ExperimentKind::HeatDecay, a),
        Command::VerifyInequalities(a) => run(ExperimentKind::VerifyInequalities, a),
        Command::LemmaAudit(a) => run(ExperimentKind::LemmaAudit, a),
        Command::SmoothingLadder(a) => run(ExperimentKind::SmoothingLadder, a),
        Command::Report { out } => render_report(out).map(|s| {
            println!("{}", out.join("report.md").display());
            s.pass
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
