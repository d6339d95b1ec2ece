mod commands;
mod config;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::CliError;
use config::{Config, ConfigError};

#[derive(Parser, Debug)]
#[command(name = "bilayer", version, about = "Bilayer SC-LDPC codes for the erasure multiple-access relay channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a config key, e.g. `--set p=0.3`. May be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    sets: Vec<String>,

    /// Master seed (overrides the `seed` key).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write the CSV here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Also sample the command's ensemble and dump its destination matrix.
    #[arg(long, global = true)]
    dump_matrix: Option<PathBuf>,

    /// Worker threads for scans and trials.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Optimal time allocation, achievable rate and erasure regions.
    Limits,
    /// Rate design and integer degree fit.
    Design,
    /// Density-evolution thresholds along rays.
    De,
    /// Decodable region on a grid.
    Region,
    /// EXIT values on a grid.
    ExitSurface,
    /// Monte-Carlo erasure rates of a sampled code.
    Simulate,
}

fn load_config(cli: &Cli) -> Result<Config, CliError> {
    let mut cfg = Config::default();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path).map_err(|e| {
            ConfigError::Invalid(format!("cannot read {}: {e}", path.display()))
        })?;
        cfg.apply_text(&text, &path.display().to_string())?;
    }
    for s in &cli.sets {
        cfg.set(s)?;
    }
    if let Some(seed) = cli.seed {
        cfg.set(&format!("seed={seed}"))?;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    if cli.print_config {
        print!("{}", cfg.render());
        return Ok(());
    }
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(ConfigError::Invalid("--jobs must be >= 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| ConfigError::Invalid(format!("--jobs: {e}")))?;
    }
    let seed: u64 = cfg.get("seed")?;
    let (csv, ens) = match cli.command {
        Command::Limits => (commands::limits(&cfg)?, None),
        Command::Design => {
            let (csv, ens) = commands::design(&cfg)?;
            (csv, Some(ens))
        }
        Command::De => {
            let ens = match cfg.raw("de_mode") {
                "lemma1" => None,
                _ => Some(commands::ensemble(&cfg)?),
            };
            (commands::de(&cfg)?, ens)
        }
        Command::Region => (commands::region(&cfg)?, Some(commands::ensemble(&cfg)?)),
        Command::ExitSurface => (commands::exit(&cfg)?, Some(commands::ensemble(&cfg)?)),
        Command::Simulate => (commands::simulate(&cfg, seed)?, Some(commands::ensemble(&cfg)?)),
    };
    if let Some(path) = &cli.dump_matrix {
        let Some(ens) = ens else {
            return Err(ConfigError::Invalid("`limits` has no ensemble to dump".into()).into());
        };
        let h = commands::destination_matrix(&ens, seed)?;
        h.dump(std::io::BufWriter::new(fs::File::create(path)?))?;
    }
    match &cli.out {
        Some(path) => fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
