use std::collections::BTreeMap;
use std::fs;
use std::process::ExitCode;

use clap::{Arg, ArgMatches, Command};
use spilab_cli::commands::dispatch;
use spilab_cli::config::{parse_config_text, Settings, KNOWN_KEYS};
use spilab_cli::error::CliError;

const SUBCOMMANDS: &[(&str, &str)] = &[
    ("analyze", "Measure summary, capacity profile and Poincare sandwich"),
    ("spectrum", "Low spectrum of the generator, spectral beta and SPI verification"),
    ("transfer", "Run one conversion pipeline on a two-column input table"),
    ("hermite", "Hermite norm tables, L^p bound audit and asymptotic calibration"),
    ("gauss-lsi", "Gaussian capacity chain, kappa_1 search and log-Sobolev check"),
];

fn cli() -> Command {
    let mut root = Command::new("spilab")
        .about("Super-Poincare, capacity and spectral computations for 1D measures")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for &(name, about) in SUBCOMMANDS {
        let mut sub = Command::new(name).about(about).arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .help("key=value settings; flags take precedence"),
        );
        for &key in KNOWN_KEYS {
            sub = sub.arg(Arg::new(key).long(key).value_name("VALUE").allow_hyphen_values(true));
        }
        root = root.subcommand(sub);
    }
    root
}

fn settings(command: &str, m: &ArgMatches) -> Result<Settings, CliError> {
    let file = match m.get_one::<String>("config") {
        Some(path) => parse_config_text(&fs::read_to_string(path)?)?,
        None => BTreeMap::new(),
    };
    let flags = KNOWN_KEYS
        .iter()
        .filter_map(|&k| m.get_one::<String>(k).map(|v| (k.to_string(), v.clone())))
        .collect();
    Ok(Settings::merge(command, file, flags))
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    let (command, sub) = matches.subcommand().expect("subcommand is required");
    match settings(command, sub).and_then(|s| dispatch(&s)) {
        Ok(out) => {
            for p in out.paths() {
                println!("{p}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
