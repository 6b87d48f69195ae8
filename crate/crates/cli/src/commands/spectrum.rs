use serde::Serialize;
use spilab_core::measure::Potential;
use spilab_core::orlicz::power_pair;
use spilab_core::spectrum::{discretize_generator, low_spectrum, spectral_ospi, verify_spi, SpiReport, SpiTarget};

use crate::config::Settings;
use crate::error::{config_err, CliError};
use crate::output::{Artifacts, Cell, Table};
use crate::svg::{Plot, Series};

use super::{measure_summary, MeasureSummary};

#[derive(Serialize)]
struct BetaTable {
    p: f64,
    r0: f64,
    entries: Vec<(f64, f64)>,
    verification: Vec<SpiReport>,
}

#[derive(Serialize)]
struct Report {
    measure: MeasureSummary,
    ess_threshold: Option<f64>,
    eigenvalues: Vec<f64>,
    gram_defect: f64,
    residual: f64,
    trials: usize,
    beta: Vec<BetaTable>,
}

fn ess_threshold(s: &Settings, pot: &Potential) -> Result<Option<f64>, CliError> {
    match s.get("ess") {
        None if matches!(pot, Potential::Gaussian) => Ok(Some(f64::INFINITY)),
        None | Some("none") => Ok(None),
        Some(_) => Ok(s.opt_f64("ess")?),
    }
}

pub fn run(s: &Settings, out: &mut Artifacts) -> Result<(), CliError> {
    let k = s.usize_or("k", 12)?;
    if k == 0 {
        return config_err("k must be >= 1");
    }
    let p_set = s.grid_or("p-set", "4")?;
    let trials = s.usize_or("trials", 1000)?;
    let seed = s.seed()?;
    let m = s.measure("gaussian")?;
    let ess = ess_threshold(s, m.potential())?;

    let spec = low_spectrum(&m, k, ess)?;
    let (gram_defect, residual) = spec.check_invariants(&discretize_generator(&m)?);
    // the default grid keeps only the r that the computed spectrum covers
    let r_grid = match s.get("r-grid") {
        Some(_) => s.grid_or("r-grid", "")?,
        None => {
            let lmax = spec.lambda_max();
            let g: Vec<f64> = s
                .grid_or("r-grid", "0.1,0.2,0.5,1,2")?
                .into_iter()
                .filter(|&r| 1.0 / r < lmax)
                .collect();
            if g.is_empty() {
                return config_err(format!("k = {k} covers no default r; pass r-grid or raise k"));
            }
            g
        }
    };
    let mut beta = Vec::new();
    for &p in &p_set {
        let pair = power_pair(p)?;
        let ospi = spectral_ospi(&spec, &pair, &r_grid)?;
        let verification: Result<Vec<SpiReport>, CliError> = r_grid
            .iter()
            .map(|&r| Ok(verify_spi(&m, &SpiTarget::Orlicz(&ospi), r, trials, seed)?))
            .collect();
        beta.push(BetaTable {
            p,
            r0: ospi.beta.r0,
            entries: ospi.beta.table_entries().unwrap_or(&[]).to_vec(),
            verification: verification?,
        });
    }
    let report = Report {
        measure: measure_summary(&m)?,
        ess_threshold: ess,
        eigenvalues: spec.eigenvalues.clone(),
        gram_defect,
        residual,
        trials,
        beta,
    };

    out.json("spectrum.json", &report)?;
    let header: Vec<String> = std::iter::once("x".to_string()).chain((0..k).map(|j| format!("f{j}"))).collect();
    let rows = spec
        .nodes
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            std::iter::once(Cell::Num(x))
                .chain(spec.eigenvectors.iter().map(|v| Cell::Num(v[i])))
                .collect()
        })
        .collect();
    out.csv("eigenvectors.csv", &Table { header, rows })?;
    let beta_rows = report
        .beta
        .iter()
        .flat_map(|b| {
            b.entries.iter().zip(&b.verification).map(move |(&(r, v), rep)| {
                vec![
                    Cell::Num(b.p),
                    Cell::Num(r),
                    Cell::Num(v),
                    Cell::Num(rep.max_violation),
                    Cell::Text(if rep.pass { "pass" } else { "fail" }.into()),
                ]
            })
        })
        .collect();
    out.csv(
        "beta.csv",
        &Table::new(&["p", "r", "beta", "max_violation", "verdict"], beta_rows),
    )?;
    out.svg(
        "beta.svg",
        &Plot {
            title: "spectral beta(r)".into(),
            x_label: "r".into(),
            y_label: "beta".into(),
            log_x: true,
            log_y: true,
            series: report
                .beta
                .iter()
                .map(|b| Series {
                    label: format!("p = {}", b.p),
                    points: b.entries.clone(),
                })
                .collect(),
        },
    )?;
    Ok(())
}
