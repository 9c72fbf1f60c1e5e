use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use greencell::experiment::{
    run_experiment, validate, write_csv, CsvRow, ExperimentSpec, Metric, NetworkSource, RunOptions, PRESETS,
};

#[derive(Parser)]
#[command(name = "greencell", version, about = "Green cell association experiments for K-tier Poisson networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its CSV.
    Run(RunArgs),
    /// Dry-run checks of an experiment without evaluating it.
    Validate(SpecArgs),
    /// List the bundled presets, or print one as an experiment file.
    Presets {
        /// Preset to print as JSON.
        name: Option<String>,
    },
}

#[derive(Args)]
struct SpecArgs {
    /// Experiment file (JSON).
    spec: Option<PathBuf>,
    /// Bundled experiment, e.g. fig1 or fig4_load.
    #[arg(long, conflicts_with = "spec")]
    preset: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Directory for CSV output.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Skip Monte Carlo.
    #[arg(long, conflicts_with = "mc_only")]
    analytic_only: bool,
    /// Skip the analytic bounds.
    #[arg(long)]
    mc_only: bool,
}

fn load_spec(args: &SpecArgs) -> Result<ExperimentSpec> {
    match (&args.spec, &args.preset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let mut spec = ExperimentSpec::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
            if let NetworkSource::Preset(name) = &spec.network {
                let relative = Path::new(name);
                if name.ends_with(".json") && relative.is_relative() {
                    let dir = path.parent().unwrap_or(Path::new("."));
                    spec.network = NetworkSource::Preset(dir.join(relative).to_string_lossy().into_owned());
                }
            }
            Ok(spec)
        }
        (None, Some(name)) => Ok(ExperimentSpec::preset(name)?),
        _ => bail!("give an experiment file or --preset <name> (one of {})", PRESETS.join(", ")),
    }
}

fn print_summary(rows: &[CsvRow]) {
    println!("{:<16} {:<36} {:>14}", "scheme", "quantity", "value");
    for r in rows {
        if let Some(v) = r.analytic_lower {
            println!("{:<16} {:<36} {:>14.6}", r.scheme, r.metric, v);
        }
    }
}

fn run(args: RunArgs) -> Result<()> {
    let mut spec = load_spec(&args.spec)?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(trials) = args.trials {
        spec.trials = trials;
    }
    spec.validate()?;
    let options = RunOptions { analytic: !args.mc_only, monte_carlo: !args.analytic_only };
    let rows = run_experiment(&spec, options).with_context(|| format!("experiment {}", spec.name))?;
    if spec.metrics.contains(&Metric::ModelSummary) {
        print_summary(&rows);
    }
    std::fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    let path = args.out_dir.join(&spec.output);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    write_csv(&spec, &rows, &mut out)?;
    out.flush()?;
    eprintln!("wrote {} rows to {}", rows.len(), path.display());
    Ok(())
}

fn check(args: SpecArgs) -> Result<bool> {
    let spec = load_spec(&args)?;
    let report = validate(&spec);
    for c in &report.checks {
        println!("{} {:<8} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(report.passed())
}

fn presets(name: Option<String>) -> Result<()> {
    match name {
        Some(name) => println!("{}", ExperimentSpec::preset(&name)?.to_json()),
        None => PRESETS.iter().for_each(|p| println!("{p}")),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args).map(|_| true),
        Command::Validate(args) => check(args),
        Command::Presets { name } => presets(name).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
