use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Parser, Subcommand};

use baga::cli;
use baga::colony::Protocol;
use baga::output::fmt_num;
use baga::problems::ProblemKind;
use baga::sweep::parse_seed_range;
use baga::{BagaError, Result};

#[derive(Parser)]
#[command(name = "baga", version, about = "Bacterial-agent genetic algorithm simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one colony and write its output bundle.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `sim.seed`.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// SP, SPE, P or PE; overrides `protocol.variant`.
        #[arg(long, value_parser = parse_variant)]
        variant: Option<Protocol>,
    },
    /// Fit y = exp(-a + b t) to an occurrences CSV.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Enumerate a problem's search space.
    Oracle {
        #[arg(long, value_parser = parse_problem)]
        problem: ProblemKind,
    },
    /// Draw a growth plot from a census or occurrences CSV.
    #[command(group(ArgGroup::new("input").required(true).args(["census", "occurrences"])))]
    Plot {
        #[arg(long)]
        census: Option<PathBuf>,
        #[arg(long)]
        occurrences: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        log: bool,
    },
    /// Run a seed range (`a..b`, inclusive) and fit each run and the pool.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seeds: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_parser = parse_variant)]
        variant: Option<Protocol>,
    },
}

fn parse_variant(s: &str) -> std::result::Result<Protocol, String> {
    s.parse().map_err(|e: BagaError| e.to_string())
}

fn parse_problem(s: &str) -> std::result::Result<ProblemKind, String> {
    s.parse().map_err(|e: BagaError| e.to_string())
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run {
            config,
            seed,
            out,
            variant,
        } => {
            let start = Instant::now();
            let b = cli::cmd_run(&config, seed, &out, variant)?;
            match &b.fit {
                Ok(f) => eprintln!(
                    "fit: a={} b={} r2={} p={} n={}",
                    fmt_num(f.a),
                    fmt_num(f.b),
                    fmt_num(f.r2),
                    fmt_num(f.p_value),
                    f.n
                ),
                Err(e) => eprintln!("fit: {e}"),
            }
            eprintln!("wrote {} in {:.2?}", b.dir.display(), start.elapsed());
        }
        Command::Fit { input, out } => {
            let f = cli::cmd_fit(&input, &out)?;
            println!("a={} b={} r2={} p_value={} n={}", f.a, f.b, f.r2, f.p_value, f.n);
        }
        Command::Oracle { problem } => print!("{}", cli::cmd_oracle(problem)?),
        Command::Plot {
            census,
            occurrences,
            out,
            log,
        } => cli::cmd_plot(census.as_deref(), occurrences.as_deref(), &out, log)?,
        Command::Sweep {
            config,
            seeds,
            out,
            variant,
        } => {
            let start = Instant::now();
            let seeds = parse_seed_range(&seeds)?;
            let s = cli::cmd_sweep(&config, &seeds, &out, variant)?;
            for r in &s.runs {
                eprintln!(
                    "seed {}: {} occurrences, b={}",
                    r.seed,
                    r.occurrences,
                    r.fit.b.map_or("-".to_string(), |b| b.to_string())
                );
            }
            eprintln!(
                "median b: {:?}; wrote {} in {:.2?}",
                s.median_b,
                out.display(),
                start.elapsed()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
