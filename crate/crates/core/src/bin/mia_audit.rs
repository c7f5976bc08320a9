//! Command-line entry point for the auditing pipeline.
//!
//! Exit codes: 0 success, 2 config error, 3 data error, 4 training error,
//! 5 report error. Clap's own usage errors also exit with 2.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use mia_audit::pipeline::{
    cmd_ablate, cmd_attack, cmd_report, cmd_run, cmd_score, load_run_config, load_sweep_config,
    render_summary_text, resolve_out_dir, MetricsReport, RunConfig,
};
use mia_audit::Result;

#[derive(Parser)]
#[command(name = "mia-audit", version, about = "Membership-inference audits for tabular classifiers")]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    parallelism: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run config.
    #[arg(long, value_name = "JSON")]
    config: PathBuf,

    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Output directory (overrides config and MIA_AUDIT_OUT).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Full audit: split, train, score, run every attack, report.
    Run(RunArgs),
    /// Train models and write score records, stopping before the attacks.
    Score(RunArgs),
    /// Run attacks and metrics on a directory produced by `score`.
    Attack(RunArgs),
    /// Ablation sweep from a config with `run` and `ablation` sections.
    Ablate(RunArgs),
    /// Regenerate the consolidated report for an existing run directory.
    Report {
        /// Run directory containing manifest.json.
        run_dir: PathBuf,

        /// Write the report here instead of into the run directory.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

fn load_effective_config(args: &RunArgs) -> Result<(RunConfig, PathBuf)> {
    let mut config = load_run_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let out_dir = resolve_out_dir(args.out.as_deref(), config.out_dir.as_deref());
    Ok((config, out_dir))
}

fn print_table(reports: &[MetricsReport]) {
    let Some(first) = reports.first() else {
        return;
    };
    let fpr_targets: Vec<f64> = first.tpr_at_fpr.iter().map(|p| p.fpr).collect();
    let rows: Vec<&MetricsReport> = reports.iter().collect();
    print!("{}", render_summary_text(&rows, &fpr_targets));
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run(args) => {
            let (config, out_dir) = load_effective_config(&args)?;
            let reports = cmd_run(&config, &out_dir)?;
            print_table(&reports);
            println!("run written to {}", out_dir.display());
        }
        Command::Score(args) => {
            let (config, out_dir) = load_effective_config(&args)?;
            cmd_score(&config, &out_dir)?;
            println!("score records written to {}", out_dir.display());
        }
        Command::Attack(args) => {
            let (config, out_dir) = load_effective_config(&args)?;
            let reports = cmd_attack(&config, &out_dir)?;
            print_table(&reports);
            println!("attacks written to {}", out_dir.display());
        }
        Command::Ablate(args) => {
            let mut sweep = load_sweep_config(&args.config)?;
            if let Some(seed) = args.seed {
                sweep.run.seed = seed;
            }
            let out_dir = resolve_out_dir(args.out.as_deref(), sweep.run.out_dir.as_deref());
            let rows = cmd_ablate(&sweep.run, &sweep.ablation, &out_dir)?;
            let failures = rows.iter().filter(|r| r.error.is_some()).count();
            println!(
                "sweep written to {} ({} rows, {} failed cells)",
                out_dir.display(),
                rows.len(),
                failures
            );
        }
        Command::Report { run_dir, out } => {
            let reports = cmd_report(&run_dir, out.as_deref())?;
            print_table(&reports);
            let report_dir = out.unwrap_or_else(|| run_dir.join("report"));
            println!("report written to {}", report_dir.display());
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Some(n) = cli.parallelism {
        // Ignore the error when a pool already exists (only possible in tests).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    if let Err(e) = execute(cli.command) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
