use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use pk_cli::report::Timing;
use pk_cli::run::{demo_scenarios, load_scenario, run_scenarios, run_sweep, Command};
use pk_cli::{compare_documents, exit, CliError, Document, Format, RunConfig, SweepSpec};

#[derive(Parser)]
#[command(name = "pkcert", version, about = "Constraint operator bounds and their numerical certification")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Constants and explicit bounds only.
    Bounds(ConfigArgs),
    /// Full certification chain for every configured case.
    Certify(ConfigArgs),
    /// Certification over a parameter range.
    Sweep {
        #[command(flatten)]
        args: ConfigArgs,
        /// `rho|degree|region_fraction=start:stop:count`
        #[arg(long)]
        sweep: String,
    },
    /// Flatness, counterexample and trace injectivity of the portion.
    CheckFlat(ConfigArgs),
    /// Built-in scenarios.
    Demo(OutputArgs),
}

#[derive(Args)]
struct ConfigArgs {
    #[arg(long, short)]
    config: PathBuf,
    /// Restrict to these cases; repeatable.
    #[arg(long = "case")]
    cases: Vec<String>,
    /// Overrides both the scalar and the vector degree.
    #[arg(long)]
    degree: Option<usize>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Re-run and diff against a stored JSON report.
    #[arg(long)]
    compare: Option<PathBuf>,
}

struct Outcome {
    doc: Document,
    output: Option<PathBuf>,
    format: Format,
    compare: Option<PathBuf>,
}

fn run_config(command: Command, args: ConfigArgs) -> Result<(Document, OutputArgs, Option<RunConfig>), CliError> {
    let config = RunConfig::load(&args.config)?;
    let o = &args.out;
    let need_trials = command == Command::Certify;
    let scenario = load_scenario(&config, &args.cases, args.degree, o.seed, o.trials, o.workers, need_trials)?;
    Ok((run_scenarios(&[scenario], command), args.out, Some(config)))
}

fn execute(cli: Cli) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let (mut doc, out, config) = match cli.command {
        Cmd::Demo(out) => {
            let scenarios = demo_scenarios(out.trials.unwrap_or(1000), out.seed.unwrap_or(0), out.workers.unwrap_or(1))
                .map_err(|e| CliError::ConfigInvalid(e.to_string()))?;
            (run_scenarios(&scenarios, Command::Certify), out, None)
        }
        Cmd::Sweep { args, sweep } => {
            let spec = SweepSpec::parse(&sweep)?;
            let config = RunConfig::load(&args.config)?;
            let o = &args.out;
            let scenario = load_scenario(&config, &args.cases, args.degree, o.seed, o.trials, o.workers, true)?;
            (run_sweep(&scenario, &spec)?, args.out, Some(config))
        }
        Cmd::Bounds(args) => run_config(Command::Bounds, args)?,
        Cmd::Certify(args) => run_config(Command::Certify, args)?,
        Cmd::CheckFlat(args) => run_config(Command::CheckFlat, args)?,
    };
    doc.timing = Some(Timing {
        total_seconds: start.elapsed().as_secs_f64(),
    });
    let (cfg_path, cfg_format) = config.map(|c| (c.output.path, c.output.format)).unwrap_or_default();
    Ok(Outcome {
        doc,
        output: out.output.or(cfg_path),
        format: out.format.unwrap_or(cfg_format),
        compare: out.compare,
    })
}

fn finish(outcome: Outcome) -> Result<i32, CliError> {
    let Outcome {
        doc,
        output,
        format,
        compare,
    } = outcome;
    for sc in &doc.scenarios {
        for c in &sc.cases {
            match &c.error {
                Some(e) => eprintln!("{:<20} {:<16} {:<5} {e}", sc.name, c.case, c.status.as_str()),
                None => eprintln!("{:<20} {:<16} {}", sc.name, c.case, c.status.as_str()),
            }
        }
        if let Some(f) = &sc.flat_check {
            eprintln!("{:<20} flat={} consistent={}", sc.name, f.flat, f.consistent);
        }
    }
    for r in &doc.sweep {
        eprintln!("{}={:<10.6} {:<16} {}", r.parameter, r.value, r.case, r.status.as_str());
    }
    match &output {
        Some(path) => doc.write(path, format)?,
        None => print!("{}", doc.render(format)?),
    }
    if let Some(stored) = compare {
        let text = std::fs::read_to_string(&stored).map_err(|e| CliError::Io(format!("{}: {e}", stored.display())))?;
        let diffs = compare_documents(&text, &doc.to_json()?, 20)?;
        if !diffs.is_empty() {
            for d in &diffs {
                eprintln!("differs: {d}");
            }
            return Ok(exit::MISMATCH);
        }
        eprintln!("matches {}", stored.display());
    }
    Ok(if doc.passed { exit::PASS } else { exit::FAIL })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = execute(cli).and_then(finish).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        exit::USAGE
    });
    ExitCode::from(code as u8)
}
