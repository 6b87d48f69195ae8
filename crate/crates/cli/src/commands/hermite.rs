use serde::Serialize;
use spilab_core::hermite::{
    audit_lp_bound, calibration_phi, eigenspace_dims, integral_split, pr_calibration, pr_oscillating_error,
    EigenspaceDims, HermiteBasis, LpAudit,
};

use crate::config::Settings;
use crate::error::{config_err, CliError};
use crate::output::{Artifacts, Cell, Table};

#[derive(Serialize)]
struct PrRow {
    n: usize,
    phi: f64,
    rel_error: f64,
}

#[derive(Serialize)]
struct Calibration {
    n: usize,
    phi: f64,
    factor: f64,
}

#[derive(Serialize)]
struct SplitRow {
    n: usize,
    p: f64,
    inner: f64,
    frontier: f64,
    outer: f64,
}

#[derive(Serialize)]
struct DimsRow {
    d: u32,
    k: u32,
    #[serde(flatten)]
    dims: EigenspaceDimsOut,
}

/// `u128` counts as decimal strings.
#[derive(Serialize)]
struct EigenspaceDimsOut {
    level_dim: String,
    cumulative_dim: String,
    within_bound: bool,
}

impl From<EigenspaceDims> for EigenspaceDimsOut {
    fn from(d: EigenspaceDims) -> Self {
        Self {
            level_dim: d.level_dim.to_string(),
            cumulative_dim: d.cumulative_dim.to_string(),
            within_bound: d.within_bound,
        }
    }
}

#[derive(Serialize)]
struct Report {
    n_max: usize,
    normalization_defect: f64,
    c_sup: f64,
    c_max_10_20: f64,
    c_max_20_40: f64,
    audit: LpAudit,
    calibration: Vec<Calibration>,
    pr_errors: Vec<PrRow>,
    integral_split: Vec<SplitRow>,
    eigenspaces: Vec<DimsRow>,
}

pub fn run(s: &Settings, out: &mut Artifacts) -> Result<(), CliError> {
    let n_max = s.usize_or("n-max", 40)?;
    let p_set = s.grid_or("p-set", "3,4,6,8,12")?;
    let pr_n = s.grid_or("pr-n", "100,200,400")?;
    let phi_grid = s.grid_or("phi-grid", "-1,-0.5,0,0.5,1")?;
    let dims = s.u32_list_or("d", "1,2,5,10")?;
    if pr_n.iter().any(|&n| n.fract() != 0.0 || n < 1.0) {
        return config_err("pr-n: degrees must be positive integers");
    }
    let pr_n: Vec<usize> = pr_n.into_iter().map(|n| n as usize).collect();

    let normalization_defect = HermiteBasis::new(n_max).normalization_defect()?;
    let audit = audit_lp_bound(n_max, &p_set)?;
    let mut calibration = Vec::new();
    let mut pr_errors = Vec::new();
    let mut split = Vec::new();
    for &n in &pr_n {
        calibration.push(Calibration {
            n,
            phi: calibration_phi(n),
            factor: pr_calibration(n)?,
        });
        for &phi in &phi_grid {
            pr_errors.push(PrRow {
                n,
                phi,
                rel_error: pr_oscillating_error(n, phi)?,
            });
        }
        for &p in &p_set {
            let (inner, frontier, outer) = integral_split(n, p)?;
            split.push(SplitRow {
                n,
                p,
                inner,
                frontier,
                outer,
            });
        }
    }
    let mut eigenspaces = Vec::new();
    for &d in &dims {
        for k in 0..=10 {
            eigenspaces.push(DimsRow {
                d,
                k,
                dims: eigenspace_dims(d, k)?.into(),
            });
        }
    }
    let report = Report {
        n_max,
        normalization_defect,
        c_sup: audit.c_sup,
        c_max_10_20: audit.max_over(10, 20),
        c_max_20_40: audit.max_over(20, 40),
        audit,
        calibration,
        pr_errors,
        integral_split: split,
        eigenspaces,
    };

    out.json("hermite.json", &report)?;
    out.csv(
        "lp_audit.csv",
        &Table::new(
            &["n", "p", "norm", "c"],
            report
                .audit
                .entries
                .iter()
                .map(|e| vec![Cell::Int(e.n as i64), Cell::Num(e.p), Cell::Num(e.norm), Cell::Num(e.c)])
                .collect(),
        ),
    )?;
    out.csv(
        "pr.csv",
        &Table::new(
            &["n", "phi", "rel_error"],
            report
                .pr_errors
                .iter()
                .map(|r| vec![Cell::Int(r.n as i64), Cell::Num(r.phi), Cell::Num(r.rel_error)])
                .collect(),
        ),
    )?;
    Ok(())
}
