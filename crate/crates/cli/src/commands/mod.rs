pub mod analyze;
pub mod gauss_lsi;
pub mod hermite;
pub mod spectrum;
pub mod transfer;

use serde::Serialize;
use spilab_core::measure::Measure1D;

use crate::config::Settings;
use crate::error::CliError;
use crate::output::Artifacts;

#[derive(Serialize)]
pub struct MeasureSummary {
    pub kind: &'static str,
    pub params: Vec<f64>,
    pub expression: Option<String>,
    pub domain: (f64, f64),
    pub nodes: usize,
    pub log_z: f64,
    pub tail_mass: f64,
    pub median: f64,
    pub quantile_left_1e3: f64,
    pub quantile_right_1e3: f64,
}

pub fn measure_summary(m: &Measure1D) -> Result<MeasureSummary, CliError> {
    let pot = m.potential();
    Ok(MeasureSummary {
        kind: pot.kind(),
        params: pot.params(),
        expression: pot.source().map(str::to_string),
        domain: m.domain(),
        nodes: m.n_nodes(),
        log_z: m.log_z(),
        tail_mass: m.tail_mass(),
        median: m.median()?,
        quantile_left_1e3: m.quantile_left(1e-3)?,
        quantile_right_1e3: m.quantile_right(1e-3)?,
    })
}

/// Runs one subcommand; artifacts are only written after all computation
/// succeeded.
pub fn dispatch(s: &Settings) -> Result<Artifacts, CliError> {
    let formats = s.formats()?;
    let mut out = Artifacts::new(s.out_dir(), &s.command, s.hash(), s.seed()?, formats);
    match s.command.as_str() {
        "analyze" => analyze::run(s, &mut out)?,
        "spectrum" => spectrum::run(s, &mut out)?,
        "transfer" => transfer::run(s, &mut out)?,
        "hermite" => hermite::run(s, &mut out)?,
        "gauss-lsi" => gauss_lsi::run(s, &mut out)?,
        other => return Err(CliError::Config(format!("unknown subcommand '{other}'"))),
    }
    Ok(out)
}
