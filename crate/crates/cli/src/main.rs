//! Batch front-end: `measq <subcommand> [--config FILE] [--out DIR] [--key value ...]`.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Arg, ArgAction, ArgMatches};
use serde_json::{json, Map};

use commands::{Command, COMMANDS};
use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(measq::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<measq::Error> for CliError {
    fn from(e: measq::Error) -> Self {
        use measq::Error as E;
        match e {
            E::InvalidParameter(_) | E::DimensionMismatch { .. } | E::GridTooCoarse(_) | E::ResourceLimit(_) => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

const THREADS_VAR: &str = "MEASQ_THREADS";

fn cli() -> clap::Command {
    let mut app = clap::Command::new("measq")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Measurement-interpreted open quantum systems: transport and collisional Brownian motion")
        .after_help(format!(
            "Each subcommand writes <out>/<subcommand>.csv and a <subcommand>.json sidecar.\n\
             Config files hold key=value lines; flags override them.\n\
             {THREADS_VAR} sets the worker thread count."
        ))
        .subcommand_required(true)
        .arg_required_else_help(true);
    for cmd in COMMANDS {
        let mut sub = clap::Command::new(cmd.name)
            .about(cmd.about)
            .arg(Arg::new("config").long("config").value_name("FILE").help("key=value configuration file"))
            .arg(Arg::new("out").long("out").value_name("DIR").default_value("measq-out").help("output directory"));
        for p in cmd.params {
            let mut arg = Arg::new(p.key)
                .long(p.key.replace('_', "-"))
                .value_name(p.kind.value_name())
                .default_value(p.default)
                .help(p.help)
                .action(ArgAction::Set);
            if p.key.contains('_') {
                arg = arg.alias(p.key);
            }
            sub = sub.arg(arg);
        }
        app = app.subcommand(sub);
    }
    app
}

fn resolve(cmd: &Command, m: &ArgMatches) -> Result<RunConfig, CliError> {
    let flags: Vec<(&'static str, String)> = cmd
        .params
        .iter()
        .filter(|p| m.value_source(p.key) == Some(clap::parser::ValueSource::CommandLine))
        .map(|p| (p.key, m.get_one::<String>(p.key).expect("flag value present").clone()))
        .collect();
    let file = m.get_one::<String>("config").map(PathBuf::from);
    let out = PathBuf::from(m.get_one::<String>("out").expect("defaulted"));
    RunConfig::resolve(cmd.name, cmd.params, file.as_deref(), &flags, out)
}

fn configure_threads() -> Result<usize, CliError> {
    if let Ok(raw) = std::env::var(THREADS_VAR) {
        let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| CliError::Config(format!("{THREADS_VAR} must be a positive integer, got '{raw}'")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(rayon::current_num_threads())
}

fn run(cmd: &Command, m: &ArgMatches) -> Result<(), CliError> {
    let threads = configure_threads()?;
    let cfg = resolve(cmd, m)?;
    let start = Instant::now();
    let report = (cmd.run)(&cfg)?;
    let wall = start.elapsed().as_secs_f64();
    let mut meta = Map::new();
    meta.insert("subcommand".into(), json!(cmd.name));
    meta.insert("measq_version".into(), json!(measq::VERSION));
    meta.insert("measq_cli_version".into(), json!(env!("CARGO_PKG_VERSION")));
    meta.insert("wall_time_s".into(), json!(wall));
    meta.insert("threads".into(), json!(threads));
    meta.insert("config_file".into(), json!(cfg.config_file.as_ref().map(|p| p.display().to_string())));
    meta.insert("out_dir".into(), json!(cfg.out_dir.display().to_string()));
    meta.insert("rows".into(), json!(report.table.rows.len()));
    let written = output::write(&cfg.out_dir, cmd.name, &report, cfg.to_json(), meta)?;
    print!("{}", report.text);
    println!("wrote {} and {}", written.csv.display(), written.json.display());
    Ok(())
}

fn main() -> ExitCode {
    let matches = cli().try_get_matches().unwrap_or_else(|e| e.exit());
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let cmd = COMMANDS.iter().find(|c| c.name == name).expect("subcommands come from the table");
    match run(cmd, sub) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("measq {name}: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn command_definition_is_consistent() {
        super::cli().debug_assert();
    }
}
