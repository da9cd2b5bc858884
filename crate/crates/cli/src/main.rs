use clap::{Args, Parser, Subcommand};
use lwa_core::experiments::{
    compare_mimo, run_beampattern_experiment, run_optimize, run_snr_sweep, ScenarioConfig,
};
use lwa_core::LwaError;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(
    name = "lwa",
    version,
    about = "Leaky-wave antenna multi-user THz experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimize geometry and power for one user draw.
    Optimize(CommonArgs),
    /// Optimize one user draw and export its angle-range energy map.
    Beampattern(CommonArgs),
    /// Sweep SNR and compare mean LWA and MIMO sum-rates over trials.
    SweepSnr(CommonArgs),
    /// Paired LWA versus normalized-MIMO report for a single trial.
    CompareMimo(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// TOML scenario file; omitted keys take their defaults.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the configured base seed.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Overrides the configured number of Monte-Carlo trials.
    #[arg(long, value_name = "N")]
    trials: Option<usize>,
    /// Suppress the summary on stdout.
    #[arg(long)]
    quiet: bool,
}

impl CommonArgs {
    fn scenario(&self) -> Result<ScenarioConfig, LwaError> {
        let mut cfg = match &self.config {
            Some(path) => ScenarioConfig::load(path)?,
            None => ScenarioConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(trials) = self.trials {
            cfg.trials = trials;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn exit_code(err: &LwaError) -> u8 {
    if err.is_numerical() {
        3
    } else if matches!(err, LwaError::Io(_)) {
        1
    } else {
        2
    }
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<PathBuf, LwaError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, body)?;
    Ok(path)
}

/// Runs a subcommand, returning the written files and a stdout summary.
fn execute(command: &Command) -> Result<(Vec<PathBuf>, String), LwaError> {
    match command {
        Command::Optimize(args) => {
            let cfg = args.scenario()?;
            let run = run_optimize(&cfg)?;
            let report = run.to_report();
            let files = vec![
                write_file(&args.out, "optimize.txt", &report)?,
                write_file(&args.out, "trace.csv", &run.result.trace_csv())?,
            ];
            Ok((files, report))
        }
        Command::Beampattern(args) => {
            let cfg = args.scenario()?;
            let run = run_beampattern_experiment(&cfg)?;
            let files = run.write_to(&args.out)?;
            Ok((files, run.result.to_report()))
        }
        Command::SweepSnr(args) => {
            let cfg = args.scenario()?;
            let sweep = run_snr_sweep(&cfg, &cfg.snr_db)?;
            let csv = sweep.to_csv();
            let files = vec![write_file(&args.out, "sweep.csv", &csv)?];
            Ok((files, csv))
        }
        Command::CompareMimo(args) => {
            let cfg = args.scenario()?;
            let run = compare_mimo(&cfg, 0)?;
            let report = run.to_report();
            let files = vec![write_file(&args.out, "compare.txt", &report)?];
            Ok((files, report))
        }
    }
}

fn quiet(command: &Command) -> bool {
    match command {
        Command::Optimize(a)
        | Command::Beampattern(a)
        | Command::SweepSnr(a)
        | Command::CompareMimo(a) => a.quiet,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok((files, summary)) => {
            if !quiet(&cli.command) {
                print!("{summary}");
                for f in files {
                    println!("wrote {}", f.display());
                }
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
