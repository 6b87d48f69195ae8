//! The Gaussian chain: spectral β bound in dimension `d`, the choice
//! `r_κ = 4/log(1/κ)`, the resulting capacity lower bound, and a numerical
//! log-Sobolev check.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measure::{Measure1D, MeasureError};
use crate::spectrum::{bulk_sampler, SpectrumError};
use crate::testfn::TestFunction;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GaussLsiError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no κ on the grid passes the claim for every family member")]
    NoPassingKappa,
    #[error("κ = {kappa} is not below κ₁ = {kappa1}")]
    AboveKappa1 { kappa: f64, kappa1: f64 },
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

/// Parameters of the chain; `b★ = 1/2` and `ψ(x) = x log(1/x)` are fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussChainParams {
    pub d: u32,
    pub p: f64,
    pub c_const: f64,
}

impl GaussChainParams {
    pub fn new(d: u32, p: f64, c_const: f64) -> Result<Self, GaussLsiError> {
        if d == 0 {
            return Err(GaussLsiError::InvalidInput("dimension must be >= 1".into()));
        }
        if !(p > 2.0) || !p.is_finite() {
            return Err(GaussLsiError::InvalidInput(format!("p must be > 2, got {p}")));
        }
        if !(c_const > 0.0) || !c_const.is_finite() {
            return Err(GaussLsiError::InvalidInput(format!("c_const must be > 0, got {c_const}")));
        }
        Ok(Self { d, p, c_const })
    }

    /// `p = 2d + 3`.
    pub fn standard(d: u32, c_const: f64) -> Result<Self, GaussLsiError> {
        Self::new(d, 2.0 * d as f64 + 3.0, c_const)
    }

    /// `p > 2d + 2` and `p > c_const²`.
    pub fn endgame_admissible(&self) -> bool {
        self.p > 2.0 * self.d as f64 + 2.0 && self.p > self.c_const * self.c_const
    }
}

pub const B_STAR: f64 = 0.5;

/// `log(2^d r^{−d} C^{2/r} p^{3/(2r)})`.
pub fn log_beta_bound(r: f64, params: &GaussChainParams) -> f64 {
    let d = params.d as f64;
    d * std::f64::consts::LN_2 - d * r.ln() + 2.0 / r * params.c_const.ln() + 1.5 / r * params.p.ln()
}

pub fn beta_bound(r: f64, params: &GaussChainParams) -> Result<f64, GaussLsiError> {
    if !(r > 0.0) {
        return Err(GaussLsiError::InvalidInput(format!("r must be > 0, got {r}")));
    }
    Ok(log_beta_bound(r, params).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClaimLemmas {
    /// `log p ≤ p/6`.
    pub log_p_bound: bool,
    /// `C^{2/r} p^{3/(2r)} ≤ κ^{−5p/12}` at `r = r_κ`.
    pub kappa_power_bound: bool,
    /// `2^{−d}·4p κ^{p/12} ≤ log(1/κ) κ^{p/13}`.
    pub absorption_bound: bool,
    /// `product ≤ log(1/κ)^{d+1−p/2} κ^{2/13}`.
    pub final_bound: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClaimCheck {
    /// `log(1/κ)`.
    pub log_inv_kappa: f64,
    pub r_kappa: f64,
    pub log_product: f64,
    pub product: f64,
    pub pass: bool,
    pub lemmas: ClaimLemmas,
}

/// `β_bound(r_κ)·θ²(ψ(κ))` with `θ²(x) = 4p x^{p/2}`, for `κ = e^{−L}`.
pub fn claim_check_log(log_inv_kappa: f64, params: &GaussChainParams) -> Result<ClaimCheck, GaussLsiError> {
    let l = log_inv_kappa;
    if !(l > 1.0) || !l.is_finite() {
        return Err(GaussLsiError::InvalidInput(format!("κ must lie in (0, 1/e), got log(1/κ) = {l}")));
    }
    let p = params.p;
    let d = params.d as f64;
    let r = 1.0 / (0.25 * l);
    let log_psi = -l + l.ln();
    let log_theta_sq = (4.0 * p).ln() + 0.5 * p * log_psi;
    let log_product = log_beta_bound(r, params) + log_theta_sq;
    let lemmas = ClaimLemmas {
        log_p_bound: p.ln() <= p / 6.0,
        kappa_power_bound: 2.0 / r * params.c_const.ln() + 1.5 / r * p.ln() <= 5.0 * p / 12.0 * l,
        absorption_bound: -d * std::f64::consts::LN_2 + (4.0 * p).ln() - p / 12.0 * l <= l.ln() - p / 13.0 * l,
        final_bound: log_product <= (d + 1.0 - 0.5 * p) * l.ln() - 2.0 / 13.0 * l,
    };
    let product = log_product.exp();
    Ok(ClaimCheck {
        log_inv_kappa: l,
        r_kappa: r,
        log_product,
        product,
        pass: log_product <= -std::f64::consts::LN_2,
        lemmas,
    })
}

pub fn claim_check(kappa: f64, params: &GaussChainParams) -> Result<ClaimCheck, GaussLsiError> {
    if !(kappa > 0.0) {
        return Err(GaussLsiError::InvalidInput(format!("κ must be > 0, got {kappa}")));
    }
    claim_check_log(-kappa.ln(), params)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kappa1Report {
    pub kappa1: f64,
    pub log_inv_kappa1: f64,
    /// Largest passing-from-below `κ` for each member alone.
    pub per_member: Vec<f64>,
    /// Grid `log(1/κ)` values, ascending.
    pub grid: Vec<f64>,
}

/// Geometric grid in `log(1/κ)` from just above 1 to `l_max`.
fn log_kappa_grid(l_max: f64, points: usize) -> Vec<f64> {
    let lo = 1.0f64 + 1e-9;
    let (a, b) = (lo.ln(), l_max.ln());
    (0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect()
}

/// Smallest grid `L` from which every larger grid `L` passes, or `None`.
fn threshold(grid: &[f64], params: &GaussChainParams) -> Result<Option<usize>, GaussLsiError> {
    let mut idx = None;
    for i in (0..grid.len()).rev() {
        if claim_check_log(grid[i], params)?.pass {
            idx = Some(i);
        } else {
            break;
        }
    }
    Ok(idx)
}

/// The largest grid `κ₁` below which the claim holds for every member.
pub fn find_kappa1(family: &[GaussChainParams]) -> Result<Kappa1Report, GaussLsiError> {
    if family.is_empty() {
        return Err(GaussLsiError::InvalidInput("empty parameter family".into()));
    }
    if let Some(bad) = family.iter().find(|p| !p.endgame_admissible()) {
        return Err(GaussLsiError::InvalidInput(format!(
            "parameters {bad:?} violate p > 2d + 2 or p > c_const²"
        )));
    }
    let mut l_max = 1e3;
    for _ in 0..3 {
        let grid = log_kappa_grid(l_max, 4000);
        let idx: Result<Vec<Option<usize>>, GaussLsiError> = family.iter().map(|p| threshold(&grid, p)).collect();
        let idx = idx?;
        if idx.iter().all(|i| i.is_some()) {
            let idx: Vec<usize> = idx.into_iter().map(|i| i.unwrap()).collect();
            let worst = *idx.iter().max().unwrap();
            return Ok(Kappa1Report {
                kappa1: (-grid[worst]).exp(),
                log_inv_kappa1: grid[worst],
                per_member: idx.iter().map(|&i| (-grid[i]).exp()).collect(),
                grid,
            });
        }
        l_max *= 10.0;
    }
    Err(GaussLsiError::NoPassingKappa)
}

/// `¼ min(log(1/κ), 1/(2 r_κ))`, which is `log(1/κ)/32`.
pub fn c_kappa_chain(kappa: f64, kappa1: f64) -> Result<f64, GaussLsiError> {
    if !(kappa > 0.0) {
        return Err(GaussLsiError::InvalidInput(format!("κ must be > 0, got {kappa}")));
    }
    if !(kappa < kappa1) {
        return Err(GaussLsiError::AboveKappa1 { kappa, kappa1 });
    }
    let l = -kappa.ln();
    let inv_r = 0.25 * l;
    Ok(0.25 * l.min(0.5 * inv_r))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsiReport {
    pub c_lsi: f64,
    pub trials: usize,
    pub seed: u64,
    /// Largest `Ent(f²)/∫f′²` over the random trials.
    pub random_max_ratio: f64,
    /// Largest ratio over the exponential family `e^{sx/2}`.
    pub exponential_max_ratio: f64,
    pub max_ratio: f64,
    pub pass: bool,
}

pub const LSI_REL_TOL: f64 = 1e-6;

/// Exponents of the near-extremal family `e^{sx/2}`.
pub const EXPONENTIAL_SLOPES: [f64; 8] = [0.05, 0.1, 0.2, 0.4, 0.7, 1.0, 1.5, 2.0];

/// `(Ent_μ(f²), ∫f′² dμ)`.
pub fn entropy_and_energy(m: &Measure1D, f: &TestFunction) -> Result<(f64, f64), GaussLsiError> {
    let mass = m.integrate(|x| f.eval(x).powi(2))?.value;
    if mass == 0.0 {
        return Ok((0.0, m.dirichlet_energy(|x| f.deriv(x))?.value));
    }
    let ent = m
        .integrate(|x| {
            let v = f.eval(x).powi(2);
            if v == 0.0 {
                0.0
            } else {
                v * (v / mass).ln()
            }
        })?
        .value;
    let energy = m.dirichlet_energy(|x| f.deriv(x))?.value;
    Ok((ent, energy))
}

fn ratio(ent: f64, energy: f64) -> f64 {
    if energy > 0.0 {
        ent / energy
    } else if ent.abs() < 1e-300 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Checks `Ent(f²) ≤ c_lsi ∫f′² dμ` on seeded random functions and the
/// exponential family.
pub fn lsi_defect_check(m: &Measure1D, c_lsi: f64, trials: usize, seed: u64) -> Result<LsiReport, GaussLsiError> {
    if !(c_lsi > 0.0) {
        return Err(GaussLsiError::InvalidInput(format!("c_lsi must be > 0, got {c_lsi}")));
    }
    let sampler = bulk_sampler(m, seed)?;
    let ratios: Result<Vec<f64>, GaussLsiError> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let (e, k) = entropy_and_energy(m, &sampler.draw(i as u64))?;
            Ok(ratio(e, k))
        })
        .collect();
    let random_max_ratio = ratios?.into_iter().fold(0.0, f64::max);
    let mut exponential_max_ratio = 0.0f64;
    for &s in &EXPONENTIAL_SLOPES {
        let (e, k) = entropy_and_energy(m, &TestFunction::Exponential { s })?;
        exponential_max_ratio = exponential_max_ratio.max(ratio(e, k));
    }
    let max_ratio = random_max_ratio.max(exponential_max_ratio);
    Ok(LsiReport {
        c_lsi,
        trials,
        seed,
        random_max_ratio,
        exponential_max_ratio,
        max_ratio,
        pass: max_ratio <= c_lsi * (1.0 + LSI_REL_TOL),
    })
}
