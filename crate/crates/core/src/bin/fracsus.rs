use clap::{Parser, Subcommand};
use fracsus::experiment::{run_experiment, ExperimentConfig, ExperimentKind};
use fracsus::verify::{verify_suite, Level};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fracsus", version, about = "Fractional susceptibility experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the seed of the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Invariant density of the base map.
    Density(RunArgs),
    /// Response curve and its Marchaud derivatives.
    Response(RunArgs),
    /// Susceptibility coefficients and resummed values.
    Susceptibility(RunArgs),
    /// Run the verification battery.
    Verify {
        #[arg(long, value_enum, default_value = "fast")]
        level: Level,
        /// Write the report as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// JSON experiment config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Artifact directory; falls back to `out_dir` of the config, then `out`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(kind: ExperimentKind, args: RunArgs, seed: Option<u64>) -> ExitCode {
    let cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    };
    let mut cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let out = args
        .out
        .or_else(|| cfg.out_dir.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    match run_experiment(kind, &cfg, &out) {
        Ok(m) => {
            for f in &m.files {
                println!("{}", out.join(f).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match cli.command {
        Command::Density(a) => run(ExperimentKind::Density, a, cli.seed),
        Command::Response(a) => run(ExperimentKind::Response, a, cli.seed),
        Command::Susceptibility(a) => run(ExperimentKind::Susceptibility, a, cli.seed),
        Command::Verify { level, out } => {
            let report = verify_suite(level, cli.seed.unwrap_or(0));
            for c in &report.checks {
                let verdict = if c.pass { "PASS" } else { "FAIL" };
                println!("{verdict}  {:<52} value={:<12.6e} expected={:<12.6e} tol={:.3e}", c.check, c.value, c.expected, c.tol);
            }
            if let Some(p) = out {
                if let Err(e) = fracsus::io::write_json(&p, &report) {
                    eprintln!("{e}");
                    return ExitCode::from(3);
                }
            }
            if report.all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
