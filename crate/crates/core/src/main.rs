use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use herdsim::campaign;
use herdsim::config::{output_dir, IngestConfig, RunConfig};
use herdsim::error::{Context, Error};

/// Herding market model: simulate campaigns, ingest tick data, compare statistics.
#[derive(Parser)]
#[command(name = "herdsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; defaults to the config value, then $HERDSIM_OUT, then ./herdsim-out.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded realizations and write paths, returns, PDFs, PSDs and a manifest.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Base seed; realization i uses seed + i.
        #[arg(long, value_name = "N")]
        seed: Option<u64>,
        #[arg(long, value_name = "N")]
        realizations: Option<usize>,
    },
    /// Build per-symbol minute returns and pooled estimates from tick files.
    Ingest {
        #[command(flatten)]
        common: Common,
        /// Tick files, in addition to those listed in the config.
        files: Vec<PathBuf>,
    },
    /// Compare model and empirical estimates window by window.
    Compare {
        #[arg(long, value_name = "DIR")]
        model: PathBuf,
        #[arg(long, value_name = "DIR")]
        empirical: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1,3,10,30")]
        windows: Vec<u32>,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Simulate { common, seed, realizations } => {
            let mut config = match &common.config {
                Some(p) => RunConfig::load(p).during("cli", "load_config")?,
                None => RunConfig::default(),
            };
            if let Some(s) = seed {
                config.run.seed = s;
            }
            if let Some(r) = realizations {
                config.run.realizations = r;
            }
            if common.jobs.is_some() {
                config.run.jobs = common.jobs;
            }
            let out = output_dir(common.out.as_deref(), config.run.output_dir.as_deref());
            let result = campaign::simulate(&config, &out)?;
            for f in result.estimates.iter().map(|e| &e.fits) {
                log::info!("T={}: {}", f.window, serde_json::to_string(f)?);
            }
            println!("{}", out.join(campaign::MANIFEST).display());
        }
        Command::Ingest { common, files } => {
            let config = match &common.config {
                Some(p) => IngestConfig::load(p).during("cli", "load_config")?,
                None => IngestConfig::default(),
            };
            let out = output_dir(common.out.as_deref(), config.output_dir.as_deref());
            let jobs = common.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            if jobs == 0 {
                return Err(Error::InvalidParam { name: "jobs", reason: "must be >= 1".into() }).during("cli", "ingest");
            }
            let result = campaign::ingest(&config, &files, &out, jobs)?;
            for s in &result.summary {
                log::info!("{}: {} returns, zero fraction {}", s.symbol, s.returns, s.zero_fraction);
            }
            println!("{}", out.join(campaign::MANIFEST).display());
        }
        Command::Compare { model, empirical, windows, out } => {
            let out = output_dir(out.as_deref(), None);
            let report = campaign::compare(&model, &empirical, &windows, &out)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let command = match cli.command {
        Command::Simulate { .. } => "simulate",
        Command::Ingest { .. } => "ingest",
        Command::Compare { .. } => "compare",
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (module, operation) = e.origin().unwrap_or(("cli", command));
            let report = serde_json::json!({
                "status": "error",
                "module": module,
                "operation": operation,
                "kind": e.kind(),
                "file": e.file().map(|p| p.display().to_string()),
                "message": e.root().to_string(),
            });
            eprintln!("{report}");
            ExitCode::FAILURE
        }
    }
}
