use std::fs;

use serde::Serialize;
use spilab_core::capacity::CapacityProfile;
use spilab_core::orlicz::power_pair;
use spilab_core::transfer::{
    bcr_to_wang, mc_to_spi, ospi_to_mc, ospi_to_spi, psi_default, spi_to_mc, spi_to_poincare, wang_to_bcr,
    BcrFunction, BetaFunction, OrliczSpi,
};

use crate::config::Settings;
use crate::error::{config_err, CliError};
use crate::output::{Artifacts, Cell, Table};

pub const PIPELINES: &[&str] = &[
    "bcr-to-wang",
    "wang-to-bcr",
    "mc-to-spi",
    "spi-to-mc",
    "ospi-to-mc",
    "ospi-to-spi",
    "spi-to-poincare",
];

/// Two numeric columns; a non-numeric first row is a header, `#` lines are
/// comments.
pub fn read_pairs(text: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() < 2 {
            return config_err(format!("input line {}: expected two columns", i + 1));
        }
        match (parse_cell(cols[0]), parse_cell(cols[1])) {
            (Some(a), Some(b)) => out.push((a, b)),
            _ if out.is_empty() => continue,
            _ => return config_err(format!("input line {}: non-numeric values", i + 1)),
        }
    }
    if out.is_empty() {
        return config_err("input holds no data rows");
    }
    Ok(out)
}

fn parse_cell(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        _ => s.parse().ok(),
    }
}

#[derive(Serialize)]
struct Report {
    pipeline: String,
    input_rows: usize,
    /// Validity threshold of the output β, when the output is a β.
    r0: Option<f64>,
    /// `(x, y)` of the resulting table: `(r, β)`, `(s, β_BCR)` or `(κ, C_κ)`.
    table: Vec<(f64, f64)>,
    columns: (&'static str, &'static str),
    poincare: Option<(f64, f64)>,
}

fn psi_by_name(name: &str) -> Result<fn(f64) -> f64, CliError> {
    match name {
        "xlogx" => Ok(psi_default),
        "sqrt" => Ok(f64::sqrt),
        other => config_err(format!("psi: unknown shape '{other}' (xlogx, sqrt)")),
    }
}

fn beta_from(rows: &[(f64, f64)], r0: f64) -> Result<BetaFunction, CliError> {
    Ok(BetaFunction::table(r0, rows.to_vec())?)
}

fn beta_table(b: &BetaFunction) -> Vec<(f64, f64)> {
    b.table_entries().unwrap_or(&[]).to_vec()
}

pub fn run(s: &Settings, out: &mut Artifacts) -> Result<(), CliError> {
    let Some(pipeline) = s.get("pipeline") else {
        return config_err(format!("pipeline is required ({})", PIPELINES.join(", ")));
    };
    if !PIPELINES.contains(&pipeline) {
        return config_err(format!("pipeline: unknown '{pipeline}' ({})", PIPELINES.join(", ")));
    }
    let Some(input) = s.get("input") else {
        return config_err("input is required");
    };
    let text = fs::read_to_string(input)?;
    let rows = read_pairs(&text)?;
    let r0 = s.f64_or("r0", 0.0)?;
    let c_mc = s.f64_or("c-mc", 1.0)?;
    let b_star = s.f64_or("b-star", 0.5)?;
    let psi = psi_by_name(s.get("psi").unwrap_or("xlogx"))?;
    let p = s.grid_or("p-set", "4")?[0];
    let kappa_grid = || s.grid_or("kappa-grid", "geom:1e-12:0.5:60");

    let mut report = Report {
        pipeline: pipeline.to_string(),
        input_rows: rows.len(),
        r0: None,
        table: Vec::new(),
        columns: ("r", "beta"),
        poincare: None,
    };
    match pipeline {
        "bcr-to-wang" => {
            let b = bcr_to_wang(&BcrFunction::Table(rows))?;
            report.r0 = Some(b.r0);
            report.table = beta_table(&b);
        }
        "wang-to-bcr" => {
            let b = beta_from(&rows, r0)?;
            let cp = s.opt_f64("c-poincare")?;
            report.columns = ("s", "beta_bcr");
            report.table = match wang_to_bcr(&b, cp) {
                BcrFunction::Table(t) => t,
                BcrFunction::Closed(_) => unreachable!("table input gives a table"),
            };
        }
        "mc-to-spi" => {
            let b = mc_to_spi(&CapacityProfile::new(rows)?)?;
            report.r0 = Some(b.r0);
            report.table = beta_table(&b);
        }
        "spi-to-mc" => {
            let prof = spi_to_mc(&beta_from(&rows, r0)?, c_mc, &psi, b_star, &kappa_grid()?)?;
            report.columns = ("kappa", "c_kappa");
            report.table = prof.entries;
        }
        "ospi-to-mc" | "ospi-to-spi" => {
            let ospi = OrliczSpi {
                beta: beta_from(&rows, r0)?,
                pair: power_pair(p)?,
            };
            if pipeline == "ospi-to-mc" {
                report.columns = ("kappa", "c_kappa");
                report.table = ospi_to_mc(&ospi, c_mc, &psi, b_star, &kappa_grid()?)?.entries;
            } else {
                let b = ospi_to_spi(&ospi, c_mc, &psi, b_star, &kappa_grid()?)?;
                report.r0 = Some(b.r0);
                report.table = beta_table(&b);
            }
        }
        "spi-to-poincare" => {
            let b = beta_from(&rows, r0)?;
            let grid = match s.get("r-grid") {
                Some(_) => s.grid_or("r-grid", "")?,
                None => rows.iter().map(|e| e.0).collect(),
            };
            report.poincare = Some(spi_to_poincare(&b, &grid)?);
            report.table = beta_table(&b);
        }
        _ => unreachable!("pipeline validated above"),
    }

    out.json("transfer.json", &report)?;
    out.csv(
        "transfer.csv",
        &Table::new(
            &[report.columns.0, report.columns.1],
            report.table.iter().map(|&(a, b)| vec![Cell::Num(a), Cell::Num(b)]).collect(),
        ),
    )?;
    Ok(())
}
