//! `qarray`: runs encoding roundtrips, imaging comparisons, state-transfer
//! sweeps and the network formulas, writing CSV tables.

use std::path::Path;
use std::process::ExitCode;

use clap::{Arg, ArgMatches, Command};
use thiserror::Error;

mod cmd;
mod config;
mod output;

use config::{keys_for, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("check failed: {0}")]
    Check(String),

    #[error(transparent)]
    Core(#[from] qarray_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use qarray_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::InvalidParameter(_) | E::Parse { .. } | E::UnknownStrategy { .. }) => 2,
            CliError::Check(_) => 3,
            _ => 1,
        }
    }
}

const COMMANDS: [(&str, &str); 4] = [
    ("encode", "Encode/decode roundtrips over every (bin, band) with resource accounting"),
    ("imaging", "QFT versus classical intensity reconstruction over many seeds"),
    ("transfer", "Coherent-ancilla, multiport and lossy-detector state-transfer sweeps"),
    ("formulas", "Multi-site transfer closed forms against Monte Carlo"),
];

fn cli() -> Command {
    let mut root = Command::new("qarray")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Memory-assisted quantum telescope array simulator")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for (name, about) in COMMANDS {
        let mut sub = Command::new(name).about(about).arg(
            Arg::new("config")
                .short('c')
                .long("config")
                .value_name("FILE")
                .help("key = value config file; flags override it"),
        );
        for k in keys_for(name) {
            sub = sub.arg(
                Arg::new(k.name)
                    .long(k.name.replace('_', "-"))
                    .value_name("VALUE")
                    .help(format!("{} [default: {}]", k.help, k.default)),
            );
        }
        root = root.subcommand(sub);
    }
    root
}

fn resolve(name: &str, m: &ArgMatches) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::defaults(name);
    if let Some(path) = m.get_one::<String>("config") {
        cfg.load_file(Path::new(path))?;
    }
    for k in keys_for(name) {
        if let Some(v) = m.get_one::<String>(k.name) {
            cfg.set(k.name, v)?;
        }
    }
    Ok(cfg)
}

fn run(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.command.as_str() {
        "encode" => cmd::encode::run(cfg),
        "imaging" => cmd::imaging::run(cfg),
        "transfer" => cmd::transfer::run(cfg),
        "formulas" => cmd::formulas::run(cfg),
        other => Err(CliError::Config(format!("unknown command {other}"))),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let matches = cli().get_matches();
    let (name, sub) = matches.subcommand().expect("subcommand required");
    match resolve(name, sub).and_then(|cfg| run(&cfg)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
