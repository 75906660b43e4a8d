use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use sparkle::harness::diagnostics::{c_regularity_report, group_by_arm, MarginConfig};
use sparkle::harness::offline::{run_offline, OfflineConfig};
use sparkle::harness::stats::{fit_exponent, group_sweep, Axis};
use sparkle::harness::{replay, simulate, ExperimentConfig, RunManifest};
use sparkle::policy::PolicyTrace;
use sparkle::{Error, Result};

/// Sparse additive contextual bandit simulator.
#[derive(Parser)]
#[command(name = "sparkle", version)]
struct Cli {
    /// JSON config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config's base seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config's.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for replications and per-arm fits.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write regret CSVs, plots and a manifest.
    Simulate {
        /// Re-run the experiment recorded in a manifest and check its outputs.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Offline estimation error against sample size.
    FitOffline,
    /// Run a policy comparison and write a summary table.
    Compare,
    /// Log-log fit of final regret against a sweep axis.
    FitExponents {
        /// CSV with columns `value,final_regret`, one row per replication.
        #[arg(long)]
        input: PathBuf,
        /// T, s or d.
        #[arg(long)]
        axis: String,
    },
    /// Estimate the margin exponent by Monte Carlo.
    EstimateAlpha,
    /// Interval structure of the contexts each arm was pulled at.
    Regularity {
        /// A trace CSV written by `simulate`.
        #[arg(long)]
        trace: PathBuf,
        /// Merge distance; a sample-size based default when absent.
        #[arg(long)]
        threshold: Option<f64>,
    },
}

fn read_json<T: serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read config {}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("invalid config {}: {e}", p.display())))
        }
        None => Ok(T::default()),
    }
}

fn experiment(cli: &Cli) -> Result<(ExperimentConfig, PathBuf)> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::Config("this command needs --config".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = cli.seed {
        cfg.seed_base = s;
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    cfg.validate()?;
    let dir = cfg.output_dir.clone();
    Ok((cfg, dir))
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(d) = path.parent() {
        fs::create_dir_all(d).map_err(|e| Error::Io {
            path: d.display().to_string(),
            source: e,
        })?;
    }
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    match &cli.command {
        Command::Simulate { manifest: Some(m) } => {
            let manifest = RunManifest::load(m)?;
            let dir = match &cli.out {
                Some(o) => o.clone(),
                None => m.parent().unwrap_or(Path::new(".")).join("replay"),
            };
            let bad = replay(&manifest, &dir)?;
            if bad.is_empty() {
                println!("replayed {} outputs into {}: all identical", manifest.outputs.len(), dir.display());
                Ok(())
            } else {
                Err(Error::Numerical(format!("replay differs in {}", bad.join(", "))))
            }
        }
        Command::Simulate { manifest: None } | Command::Compare => {
            let (cfg, dir) = experiment(cli)?;
            let comparison = matches!(cli.command, Command::Compare);
            let m = simulate(&cfg, &dir, comparison)?;
            info!("finished in {:.1}s", m.wall_time_seconds);
            if comparison {
                print!("{}", fs::read_to_string(dir.join("comparison.csv")).unwrap_or_default());
            }
            println!("wrote {} files and manifest.json to {}", m.outputs.len(), dir.display());
            Ok(())
        }
        Command::FitOffline => {
            let mut cfg: OfflineConfig = read_json(cli.config.as_deref())?;
            if let Some(s) = cli.seed {
                cfg.seed_base = s;
            }
            let report = run_offline(&cfg)?;
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("results"));
            write(&dir.join("offline.csv"), &report.to_csv())?;
            let fit = serde_json::to_string_pretty(&report.fit)?;
            write(&dir.join("offline_fit.json"), &fit)?;
            println!("{fit}");
            Ok(())
        }
        Command::FitExponents { input, axis } => {
            let axis: Axis = axis.parse()?;
            let text = fs::read_to_string(input).map_err(|e| Error::Io {
                path: input.display().to_string(),
                source: e,
            })?;
            let mut rows = Vec::new();
            for (i, line) in text.lines().enumerate().skip(1) {
                if line.trim().is_empty() {
                    continue;
                }
                let cols: Vec<&str> = line.split(',').collect();
                let parse = |s: &str| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Input(format!("{} line {}: {e}", input.display(), i + 1)))
                };
                if cols.len() != 2 {
                    return Err(Error::Input(format!("{} line {}: expected value,final_regret", input.display(), i + 1)));
                }
                rows.push((parse(cols[0])?, parse(cols[1])?));
            }
            let fit = fit_exponent(&group_sweep(&rows), axis)?;
            let json = serde_json::to_string_pretty(&fit)?;
            if let Some(dir) = &cli.out {
                write(&dir.join("exponent_fit.json"), &json)?;
            }
            println!("{json}");
            Ok(())
        }
        Command::EstimateAlpha => {
            let mut cfg: MarginConfig = read_json(cli.config.as_deref())?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            let est = cfg.run()?;
            let json = serde_json::to_string_pretty(&est)?;
            if let Some(dir) = &cli.out {
                write(&dir.join("margin_alpha.json"), &json)?;
            }
            println!("alpha_hat = {}", est.alpha_hat);
            Ok(())
        }
        Command::Regularity { trace, threshold } => {
            let text = fs::read_to_string(trace).map_err(|e| Error::Io {
                path: trace.display().to_string(),
                source: e,
            })?;
            let points = PolicyTrace::read_points(&text)?;
            let report = c_regularity_report(&group_by_arm(&points), *threshold)?;
            let json = serde_json::to_string_pretty(&report)?;
            if let Some(dir) = &cli.out {
                write(&dir.join("regularity.json"), &json)?;
            }
            println!("{json}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
