use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cdwork_core::harness::{preset, presets::describe, run_scenario, ScenarioConfig, PRESET_NAMES};
use cdwork_core::Error;

/// Counterdiabatic driving scenarios: dynamics, excess work and speed limits.
#[derive(Parser)]
#[command(name = "cdwork", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a JSON config file or a named preset.
    Run {
        /// Path to a JSON scenario config.
        config: Option<PathBuf>,
        /// Directory for CSV, SVG and run.json.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Start from a named preset instead of a config file.
        #[arg(long)]
        preset: Option<String>,
        /// Override a config field, e.g. `steps=8000` or `tau.count=5`.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// List the figure presets.
    Presets,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_IO: u8 = 1;

fn load(config: Option<PathBuf>, preset_name: Option<String>) -> Result<ScenarioConfig, Error> {
    match (config, preset_name) {
        (Some(_), Some(_)) => Err(Error::ConfigInvalid {
            field: "<arguments>".into(),
            message: "give either a config file or --preset, not both".into(),
        }),
        (None, None) => Err(Error::ConfigInvalid {
            field: "<arguments>".into(),
            message: "a config file or --preset is required".into(),
        }),
        (None, Some(name)) => preset(&name),
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path).map_err(|e| Error::ConfigInvalid {
                field: "<config>".into(),
                message: format!("cannot read {}: {e}", path.display()),
            })?;
            ScenarioConfig::from_json(&text)
        }
    }
}

fn run(config: Option<PathBuf>, out: PathBuf, preset_name: Option<String>, overrides: Vec<String>) -> ExitCode {
    let config = match load(config, preset_name).and_then(|c| c.with_overrides(&overrides)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let result = match run_scenario(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            let code = if e.is_config_error() { EXIT_CONFIG } else { EXIT_NUMERICAL };
            return ExitCode::from(code);
        }
    };
    for check in result.checks.iter().filter(|c| !c.passed) {
        eprintln!("warning: check {} failed: {}", check.name, check.message);
    }
    match result.write(&out) {
        Ok(files) => {
            if files.is_empty() {
                println!("no outputs requested");
            }
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_IO)
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            config,
            out,
            preset,
            overrides,
        } => run(config, out, preset, overrides),
        Command::Presets => {
            for name in PRESET_NAMES {
                println!("{name}\t{}", describe(name).unwrap_or_default());
            }
            ExitCode::SUCCESS
        }
    }
}
