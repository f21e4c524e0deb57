use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use markopt::experiment::{
    cmd_estimate, cmd_exact, cmd_generate, cmd_optimize, compare_runs, ExperimentSpec, PolicyRun, RunTotals,
};
use markopt::Error;

/// Optimal markings of point processes: batch experiment runner.
#[derive(Parser)]
#[command(name = "markopt", version)]
struct Cli {
    /// Worker threads; affects speed only, never results.
    #[arg(long, global = true, env = "MARKOPT_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment spec (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Output directory; defaults to the spec's `out` or `markopt_out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample and store one base configuration per replicate.
    Generate(RunArgs),
    /// Apply every policy and store the final markings with a result CSV.
    Optimize(RunArgs),
    /// Run the exact oracles and store their records as JSON.
    Exact(RunArgs),
    /// Estimate the score intensity of every policy on fresh draws.
    Estimate(RunArgs),
    /// Compare two runs (result CSV or exact JSON) row by row.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Also write the comparison table to this CSV file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::WorkCap { .. } => 3,
        Error::Assertion(_) => 4,
        Error::Io(_) => 1,
        _ => 2,
    }
}

fn load(args: &RunArgs) -> Result<(ExperimentSpec, PathBuf), Error> {
    let mut spec = ExperimentSpec::load(&args.spec)?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let out = args
        .out
        .clone()
        .or_else(|| spec.out.clone())
        .unwrap_or_else(|| PathBuf::from("markopt_out"));
    Ok((spec, out))
}

fn report_policies(run: &PolicyRun) {
    if run.summary.policies.is_empty() {
        println!("no policies; nothing to do");
    }
    for p in &run.summary.policies {
        let e = &p.estimate;
        println!(
            "{}: mean {} ± {} (inadmissible {})",
            p.policy, e.mean, e.stderr, e.inadmissible_fraction
        );
    }
    for path in &run.written {
        println!("wrote {}", path.display());
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Validation("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Assertion(e.to_string()))?;
    }
    match cli.command {
        Command::Generate(args) => {
            let (spec, out) = load(&args)?;
            let paths = cmd_generate(&spec, &out)?;
            println!("wrote {} configurations to {}", paths.len(), out.join("configs").display());
        }
        Command::Optimize(args) => {
            let (spec, out) = load(&args)?;
            report_policies(&cmd_optimize(&spec, &out)?);
        }
        Command::Estimate(args) => {
            let (spec, out) = load(&args)?;
            report_policies(&cmd_estimate(&spec, &out)?);
        }
        Command::Exact(args) => {
            let (spec, out) = load(&args)?;
            let (output, path) = cmd_exact(&spec, &out)?;
            println!("{} oracle records", output.records.len());
            println!("wrote {}", path.display());
        }
        Command::Compare { a, b, out } => {
            let cmp = compare_runs(&RunTotals::load(&a)?, &RunTotals::load(&b)?)?;
            let table = cmp.to_csv()?;
            print!("{table}");
            println!("matched {} rows, unmatched {}, max gap {}", cmp.rows.len(), cmp.unmatched, cmp.max_gap);
            if let Some(path) = out {
                write_file(&path, &table)?;
            }
        }
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<(), Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
