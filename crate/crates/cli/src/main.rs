//! `specdenoise`: dataset preparation, training, sweeps and reports.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::CliError;
use config::Config;

#[derive(Debug, Parser)]
#[command(name = "specdenoise", version, about = "Spectrogram denoising lab", after_help = config::help_text())]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// INI configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, env = "SPECDENOISE_OUT", default_value = "out")]
    out: PathBuf,

    /// Master seed (overrides config `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Sweep worker threads (overrides config `workers`).
    #[arg(long, global = true, env = "SPECDENOISE_WORKERS")]
    workers: Option<usize>,

    /// Reuse finished sweep cells found under <out>/cells.
    #[arg(long, global = true)]
    resume: bool,

    /// Start from the 75-image, 256x256x3 settings instead of the desk defaults.
    #[arg(long, global = true)]
    paper_scale: bool,

    /// Override one configuration key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Turn CSV inputs (or synthetic series) into a spectrogram dataset.
    Prepare {
        /// CSV input; repeatable, replaces `data.inputs`.
        #[arg(long = "input", value_name = "CSV")]
        inputs: Vec<PathBuf>,
    },
    /// Train one denoiser with the configured noise.
    Train {
        /// Dataset directory written by `prepare`; built from config when absent.
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Run the distribution x coloring x noise-factor x epochs grid.
    Sweep {
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Rebuild tables, charts and report.md from a results CSV.
    Report {
        #[arg(long, value_name = "CSV")]
        results: PathBuf,
    },
    /// Sample the configured noise and report its moments.
    NoisePreview,
    /// Check backpropagation against finite differences on a small model.
    Gradcheck {
        #[arg(long, default_value_t = 3)]
        model_seed: u64,
        #[arg(long, default_value_t = 8)]
        data_seed: u64,
    },
}

fn resolve(cli: &Cli) -> Result<Config, CliError> {
    let mut cfg = if cli.paper_scale { Config::paper_scale() } else { Config::default() };
    if let Some(path) = &cli.config {
        cfg.load_file(path)?;
    }
    for pair in &cli.set {
        cfg.set_pair(pair)?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Command::Prepare { inputs } = &cli.command {
        if !inputs.is_empty() {
            cfg.inputs = inputs.clone();
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<String, CliError> {
    let cfg = resolve(cli)?;
    let out = cli.out.as_path();
    commands::write_resolved(&cfg, out)?;
    match &cli.command {
        Command::Prepare { .. } => commands::prepare(&cfg, out),
        Command::Train { dataset } => commands::train(&cfg, out, dataset.as_deref()),
        Command::Sweep { dataset } => commands::sweep(&cfg, out, dataset.as_deref(), cli.resume),
        Command::Report { results } => commands::report(results, out),
        Command::NoisePreview => commands::noise_preview(&cfg, out),
        Command::Gradcheck { model_seed, data_seed } => commands::gradcheck(out, *model_seed, *data_seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
