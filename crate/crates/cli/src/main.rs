mod catalog;
mod config;
mod error;
mod experiments;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ExperimentConfig;
use error::CliError;

const WORKERS_ENV: &str = "AQME_WORKERS";

#[derive(Parser)]
#[command(name = "aqme", version, about = "Open-system adiabatic quantum computation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file or a bundled config name.
    Run {
        config: String,
        /// Proceed even when the validity checks fail.
        #[arg(long)]
        force: bool,
        /// Write the CSV here instead of the config's `output`.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// List the bundled configs.
    List,
    /// Check a config against the schema and the validity conditions.
    Validate { config: String },
}

struct Loaded {
    text: String,
    config: ExperimentConfig,
    base: Option<PathBuf>,
}

fn load(name: &str) -> Result<Loaded, CliError> {
    let path = Path::new(name);
    let (text, base) = if path.exists() {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        (text, Some(path.parent().map(Path::to_path_buf).unwrap_or_default()))
    } else if let Some(entry) = catalog::find(name) {
        (entry.text.to_string(), None)
    } else {
        return Err(CliError::Io(format!("no config file or bundled config named `{name}`")));
    };
    let config = ExperimentConfig::parse(&text)?;
    config.check(base.as_deref())?;
    Ok(Loaded { text, config, base })
}

fn workers(config: &ExperimentConfig) -> Result<Option<usize>, CliError> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Schema(format!("{WORKERS_ENV} = `{v}` is not a positive integer"))),
        },
        Err(_) => Ok(config.workers),
    }
}

fn header(loaded: &Loaded, notes: &[String]) -> String {
    let mut h = format!("# aqme {}\n", env!("CARGO_PKG_VERSION"));
    h.push_str(&format!("# kind: {}\n", loaded.config.experiment.kind()));
    h.push_str(&format!("# seed: {}\n", loaded.config.seed));
    h.push_str("# config begin\n");
    for line in loaded.text.lines() {
        h.push_str(&format!("# {line}\n").replace("# \n", "#\n"));
    }
    h.push_str("# config end\n");
    for n in notes {
        h.push_str(&format!("# {n}\n"));
    }
    h
}

fn run(name: &str, force: bool, output: Option<PathBuf>) -> Result<(), CliError> {
    let loaded = load(name)?;
    if let Some(n) = workers(&loaded.config)? {
        // a pool may already exist when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let validity = experiments::validity(&loaded.config)?;
    for w in &validity.soft {
        eprintln!("warning: {w}");
    }
    if !validity.hard.is_empty() {
        if force {
            for w in &validity.hard {
                eprintln!("warning (forced): {w}");
            }
        } else {
            return Err(CliError::Validity(validity.hard.join("; ")));
        }
    }
    let out = experiments::run(&loaded.config, loaded.base.as_deref())?;
    let path = output.unwrap_or_else(|| loaded.config.output.clone());
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut file = fs::File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    file.write_all(header(&loaded, &out.notes).as_bytes())?;
    file.write_all(out.body.as_bytes())?;
    eprintln!("wrote {} ({} rows)", path.display(), out.body.lines().count().saturating_sub(1));
    Ok(())
}

fn validate(name: &str) -> Result<(), CliError> {
    let loaded = load(name)?;
    let validity = experiments::validity(&loaded.config)?;
    for w in &validity.soft {
        println!("warning: {w}");
    }
    if !validity.hard.is_empty() {
        return Err(CliError::Validity(validity.hard.join("; ")));
    }
    println!("{name}: ok ({})", loaded.config.experiment.kind());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, force, output } => run(&config, force, output),
        Command::List => {
            for e in catalog::CATALOG {
                println!("{:<7} {}", e.name, e.description);
            }
            Ok(())
        }
        Command::Validate { config } => validate(&config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
