use serde::Serialize;
use spilab_core::capacity::{poincare_from_mc, profile_points, CapacityProfile, TestSet};

use crate::config::Settings;
use crate::error::{config_err, CliError};
use crate::output::{Artifacts, Cell, Table};
use crate::svg::{Plot, Series};

use super::{measure_summary, MeasureSummary};

#[derive(Serialize)]
struct ProfileRow {
    kappa: f64,
    family_ratio: f64,
    family: TestSet,
    c_kappa: f64,
}

#[derive(Serialize)]
struct Report {
    measure: MeasureSummary,
    c_mc: f64,
    poincare_lower: f64,
    poincare_upper: f64,
    profile: Vec<ProfileRow>,
}

pub fn run(s: &Settings, out: &mut Artifacts) -> Result<(), CliError> {
    let mut grid = s.grid_or("kappa-grid", "geom:1e-8:0.5:40")?;
    let last = *grid.last().expect("grid is nonempty");
    if last > 0.5 {
        return config_err("kappa-grid: values must be <= 0.5");
    }
    if last < 0.5 {
        grid.push(0.5);
    }
    let m = s.measure("gaussian")?;
    let points = profile_points(&m, &grid)?;
    let profile = CapacityProfile::new(points.iter().map(|p| (p.kappa, p.c_kappa)).collect())?;
    let (lo, hi) = poincare_from_mc(&profile)?;
    let rows: Vec<ProfileRow> = points
        .iter()
        .zip(&profile.entries)
        .map(|(p, e)| ProfileRow {
            kappa: p.kappa,
            family_ratio: p.c_kappa,
            family: p.family,
            c_kappa: e.1,
        })
        .collect();
    let report = Report {
        measure: measure_summary(&m)?,
        c_mc: profile.entries.last().map(|e| e.1).unwrap_or(f64::NAN),
        poincare_lower: lo,
        poincare_upper: hi,
        profile: rows,
    };

    out.json("analyze.json", &report)?;
    let table = Table::new(
        &["kappa", "family_ratio", "family", "c_kappa"],
        report
            .profile
            .iter()
            .map(|r| {
                vec![
                    Cell::Num(r.kappa),
                    Cell::Num(r.family_ratio),
                    Cell::Text(serde_json::to_value(r.family).unwrap().as_str().unwrap_or("").to_string()),
                    Cell::Num(r.c_kappa),
                ]
            })
            .collect(),
    );
    out.csv("profile.csv", &table)?;
    out.svg(
        "profile.svg",
        &Plot {
            title: "capacity profile".into(),
            x_label: "kappa".into(),
            y_label: "C_kappa".into(),
            log_x: true,
            log_y: true,
            series: vec![Series {
                label: "C_kappa".into(),
                points: report.profile.iter().map(|r| (r.kappa, r.c_kappa)).collect(),
            }],
        },
    )?;
    Ok(())
}
