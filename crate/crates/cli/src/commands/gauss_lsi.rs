use serde::Serialize;
use spilab_core::capacity::capacity_profile;
use spilab_core::gauss_lsi::{
    c_kappa_chain, claim_check, find_kappa1, lsi_defect_check, ClaimCheck, GaussChainParams, LsiReport,
};
use spilab_core::hermite::audit_lp_bound;

use crate::config::Settings;
use crate::error::{config_err, CliError};
use crate::output::{Artifacts, Cell, Table};
use crate::svg::{Plot, Series};

use super::{measure_summary, MeasureSummary};

#[derive(Serialize)]
struct ClaimRow {
    d: u32,
    p: f64,
    kappa: f64,
    #[serde(flatten)]
    check: ClaimCheck,
}

#[derive(Serialize)]
struct ChainRow {
    kappa: f64,
    chain: f64,
    measured: f64,
    dominates: bool,
}

#[derive(Serialize)]
struct Report {
    measure: MeasureSummary,
    c_const: f64,
    family: Vec<GaussChainParams>,
    kappa1: f64,
    log_inv_kappa1: f64,
    kappa1_per_member: Vec<f64>,
    claims: Vec<ClaimRow>,
    chain: Vec<ChainRow>,
    chain_dominated: bool,
    lsi: LsiReport,
}

pub fn run(s: &Settings, out: &mut Artifacts) -> Result<(), CliError> {
    let dims = s.u32_list_or("d", "1,2,5,10")?;
    let c_const = match s.opt_f64("c-const")? {
        Some(c) => c,
        None => audit_lp_bound(40, &[3.0, 4.0, 6.0, 8.0, 12.0])?.c_sup,
    };
    let grid = s.grid_or("kappa-grid", "geom:1e-8:1e-3:20")?;
    if *grid.last().expect("grid is nonempty") > 0.5 {
        return config_err("kappa-grid: values must be <= 0.5");
    }
    let trials = s.usize_or("trials", 1000)?;
    let c_lsi = s.f64_or("c-lsi", 2.0)?;
    let seed = s.seed()?;
    let m = s.measure("gaussian")?;

    let family: Result<Vec<GaussChainParams>, _> = dims.iter().map(|&d| GaussChainParams::standard(d, c_const)).collect();
    let family = family?;
    let k1 = find_kappa1(&family)?;
    let mut claims = Vec::new();
    for prm in &family {
        for &kappa in grid.iter().filter(|&&k| k < (-1.0f64).exp()) {
            claims.push(ClaimRow {
                d: prm.d,
                p: prm.p,
                kappa,
                check: claim_check(kappa, prm)?,
            });
        }
    }
    let measured = capacity_profile(&m, &grid)?;
    let mut chain = Vec::new();
    for &(kappa, c) in &measured.entries {
        if kappa < k1.kappa1 {
            let v = c_kappa_chain(kappa, k1.kappa1)?;
            chain.push(ChainRow {
                kappa,
                chain: v,
                measured: c,
                dominates: c >= v,
            });
        }
    }
    let lsi = lsi_defect_check(&m, c_lsi, trials, seed)?;
    let report = Report {
        measure: measure_summary(&m)?,
        c_const,
        family,
        kappa1: k1.kappa1,
        log_inv_kappa1: k1.log_inv_kappa1,
        kappa1_per_member: k1.per_member,
        claims,
        chain_dominated: chain.iter().all(|r| r.dominates),
        chain,
        lsi,
    };

    out.json("gauss_lsi.json", &report)?;
    out.csv(
        "chain.csv",
        &Table::new(
            &["kappa", "chain", "measured", "dominates"],
            report
                .chain
                .iter()
                .map(|r| {
                    vec![
                        Cell::Num(r.kappa),
                        Cell::Num(r.chain),
                        Cell::Num(r.measured),
                        Cell::Text(r.dominates.to_string()),
                    ]
                })
                .collect(),
        ),
    )?;
    out.svg(
        "chain.svg",
        &Plot {
            title: "capacity vs chain bound".into(),
            x_label: "kappa".into(),
            y_label: "C_kappa".into(),
            log_x: true,
            log_y: true,
            series: vec![
                Series {
                    label: "measured".into(),
                    points: report.chain.iter().map(|r| (r.kappa, r.measured)).collect(),
                },
                Series {
                    label: "log(1/kappa)/32".into(),
                    points: report.chain.iter().map(|r| (r.kappa, r.chain)).collect(),
                },
            ],
        },
    )?;
    Ok(())
}
