use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use cgo_stab::forward::write_dtn_cache;
use cgo_stab::harness::{self, Config, Lemma, Report};

#[derive(Parser)]
#[command(name = "cgo-stab", version, about = "CGO solutions, DtN maps and stability checks on the disk")]
struct Cli {
    /// Config file, or `default` for the built-in one.
    #[arg(long, global = true, default_value = "default")]
    config: String,
    /// Output directory for CSV/JSON reports.
    #[arg(long, global = true, default_value = "cgo-stab-out")]
    out: PathBuf,
    /// Worker threads (0: one per core).
    #[arg(long, global = true, env = "CGO_STAB_THREADS", default_value_t = 0)]
    threads: usize,
    /// Seed for the operator-norm probe set.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// DtN map of `potential.v`, written as a binary cache plus a mode table.
    Forward,
    /// Solve for mu at `cgo.z0`, `cgo.lambda` and report the Neumann terms.
    Cgo,
    /// Pointwise stationary-phase estimates along the lambda schedule.
    Reconstruct,
    /// Run one verification battery: lemma1, lemma2, lemma3, lemma4 or alessandrini.
    Verify { lemma: String },
    /// Stability sweep over the perturbation size.
    Stability,
}

fn run(cli: &Cli) -> cgo_stab::Result<Report> {
    let config = Config::load(&cli.config)?;
    let report = harness::with_threads(cli.threads, || -> cgo_stab::Result<Report> {
        match &cli.command {
            Command::Forward => {
                let (report, dtn) = harness::run_forward(&config)?;
                std::fs::create_dir_all(&cli.out)?;
                write_dtn_cache(&dtn, &cli.out.join("dtn"))?;
                Ok(report)
            }
            Command::Cgo => harness::run_cgo(&config),
            Command::Reconstruct => harness::run_reconstruct(&config),
            Command::Verify { lemma } => harness::run_lemma_suite(lemma.parse::<Lemma>()?, &config, cli.seed),
            Command::Stability => {
                let grid = config.grid()?;
                Ok(harness::run_stability_sweep(&config)?.to_report(&grid))
            }
        }
    })??;
    for path in report.write(&cli.out, &config, cli.seed)? {
        log::info!("wrote {}", path.display());
    }
    Ok(report)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            print!("{}", report.summary());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("cgo-stab: {e}");
            ExitCode::from(2)
        }
    }
}
