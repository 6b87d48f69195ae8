//! Hermite polynomials orthonormal in `L²(γ)`, `γ` the standard Gaussian.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{eig_sym_tridiag, gauss_kronrod_adaptive, NumericsError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HermiteError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degree {0} is below the asymptotic range (n >= 10)")]
    DegreeTooSmall(usize),
    #[error("x = {0} falls in no asymptotic regime")]
    NoRegime(f64),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

const LOG_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `(log|H_n(x)|, sign)` by the normalized three-term recurrence, rescaled to
/// stay in range.
pub fn eval_log(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let mut prev = 1.0f64;
    let mut cur = x;
    let mut log_scale = 0.0f64;
    for k in 1..n {
        let next = (x * cur - (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
        prev = cur;
        cur = next;
        let s = cur.abs().max(prev.abs());
        if s > 1e150 {
            prev /= s;
            cur /= s;
            log_scale += s.ln();
        }
    }
    if cur == 0.0 {
        (f64::NEG_INFINITY, 0.0)
    } else {
        (log_scale + cur.abs().ln(), cur.signum())
    }
}

/// `H_n(x)`; overflows to `±∞` only where the value itself does.
pub fn eval_orthonormal(n: usize, x: f64) -> f64 {
    let (l, s) = eval_log(n, x);
    s * l.exp()
}

/// `H_0(x), …, H_{n_max}(x)`.
pub fn eval_all(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    if n_max >= 1 {
        out.push(x);
    }
    for k in 1..n_max {
        let next = (x * out[k] - (k as f64).sqrt() * out[k - 1]) / ((k + 1) as f64).sqrt();
        out.push(next);
    }
    out
}

/// Basis `H_0..H_max_degree` with a quadrature check of the normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HermiteBasis {
    pub max_degree: usize,
}

impl HermiteBasis {
    pub fn new(max_degree: usize) -> Self {
        Self { max_degree }
    }

    pub fn eval(&self, x: f64) -> Vec<f64> {
        eval_all(self.max_degree, x)
    }

    /// Largest `|‖H_n‖₂ − 1|` over the basis.
    pub fn normalization_defect(&self) -> Result<f64, HermiteError> {
        let gram = gram_matrix(self.max_degree)?;
        Ok((0..=self.max_degree).map(|i| (gram[i][i].sqrt() - 1.0).abs()).fold(0.0, f64::max))
    }
}

/// Gauss quadrature for `γ` with `k` nodes.
pub fn gauss_hermite(k: usize) -> Result<(Vec<f64>, Vec<f64>), HermiteError> {
    if k == 0 {
        return Err(HermiteError::InvalidInput("need at least one node".into()));
    }
    let diag = vec![0.0; k];
    let off: Vec<f64> = (1..k).map(|i| (i as f64).sqrt()).collect();
    let eig = eig_sym_tridiag(&diag, &off, k)?;
    // Newton polish on H_k, then Christoffel weights 1/Σ_{j<k} H_j(x)²
    let nodes: Vec<f64> = eig
        .values
        .iter()
        .map(|&x0| {
            let mut x = x0;
            for _ in 0..3 {
                let h = eval_all(k, x);
                let dh = (k as f64).sqrt() * h[k - 1];
                if dh == 0.0 {
                    break;
                }
                x -= h[k] / dh;
            }
            x
        })
        .collect();
    let weights: Vec<f64> = nodes
        .iter()
        .map(|&x| 1.0 / eval_all(k - 1, x).iter().map(|h| h * h).sum::<f64>())
        .collect();
    Ok((nodes, weights))
}

/// `∫H_i H_j dγ` for `i, j ≤ n_max`, exact up to rounding.
pub fn gram_matrix(n_max: usize) -> Result<Vec<Vec<f64>>, HermiteError> {
    let (xs, ws) = gauss_hermite(n_max + 2)?;
    let mut g = vec![vec![0.0; n_max + 1]; n_max + 1];
    for (&x, &w) in xs.iter().zip(&ws) {
        let h = eval_all(n_max, x);
        for i in 0..=n_max {
            for j in 0..=i {
                g[i][j] += w * h[i] * h[j];
            }
        }
    }
    for i in 0..=n_max {
        for j in 0..i {
            g[j][i] = g[i][j];
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeKind {
    Oscillating,
    Exterior,
    Frontier,
}

/// Regime data: `phase` is `φ` (oscillating, exterior) or `t` (frontier);
/// `coeff` is `a_n`, `b_n` or `d_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrRegime {
    pub kind: RegimeKind,
    pub n_scale: f64,
    pub phase: f64,
    pub coeff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrEvaluation {
    /// Calibrated approximation to `e^{−x²/4} H_n(x)`.
    pub value: f64,
    /// Uncalibrated asymptotic value.
    pub raw: f64,
    pub regime: PrRegime,
    pub error_scale: f64,
    pub calibration: f64,
}

pub fn coeff_a(n: usize) -> f64 {
    (2.0 / PI).powf(0.25) * (n as f64).powf(-0.25)
}

pub fn coeff_b(n: usize) -> f64 {
    (8.0 * PI).powf(-0.25) * (n as f64).powf(-0.25)
}

pub fn coeff_d(n: usize) -> f64 {
    3f64.cbrt() * (2.0 / PI.powi(3)).powf(0.25) * (n as f64).powf(-1.0 / 12.0)
}

fn n_scale(n: usize) -> f64 {
    (4.0 * n as f64 + 2.0).sqrt()
}

/// `Ai(z)` from its Maclaurin series, summed until the terms stop mattering.
pub fn airy_ai(z: f64) -> f64 {
    const C1: f64 = 0.355_028_053_887_817_2;
    const C2: f64 = 0.258_819_403_792_806_8;
    let z3 = z * z * z;
    let (mut f, mut g) = (1.0f64, z);
    let (mut tf, mut tg) = (1.0f64, z);
    let mut k = 1usize;
    loop {
        let k3 = 3.0 * k as f64;
        tf *= z3 / ((k3 - 1.0) * k3);
        tg *= z3 / (k3 * (k3 + 1.0));
        f += tf;
        g += tg;
        if (tf.abs() <= 1e-17 * f.abs().max(1e-300) && tg.abs() <= 1e-17 * g.abs().max(1e-300)) || k > 500 {
            break;
        }
        k += 1;
    }
    C1 * f - C2 * g
}

/// The rescaled Airy function `A(t) = π 3^{−1/3} Ai(−3^{−1/3} t)`.
pub fn airy_a(t: f64) -> f64 {
    let c = 3f64.powf(-1.0 / 3.0);
    PI * c * airy_ai(-c * t)
}

fn osc_phase(n: usize, phi: f64) -> f64 {
    let nn = n_scale(n);
    nn * nn / 8.0 * (2.0 * phi + (2.0 * phi).sin()) - (n as f64 - 1.0) * FRAC_PI_2
}

fn raw_asymptotic(n: usize, x: f64) -> Result<(f64, PrRegime, f64), HermiteError> {
    if n < 10 {
        return Err(HermiteError::DegreeTooSmall(n));
    }
    if !x.is_finite() {
        return Err(HermiteError::NoRegime(x));
    }
    let nf = n as f64;
    let nn = n_scale(n);
    let delta = nf.powf(-1.0 / 6.0);
    let ax = x.abs();
    let parity = if n.is_multiple_of(2) || x >= 0.0 { 1.0 } else { -1.0 };
    if ax <= nn - delta {
        let phi = (x / nn).asin();
        let c = phi.cos();
        let a = coeff_a(n);
        let v = a / c.sqrt() * osc_phase(n, phi).sin();
        let regime = PrRegime {
            kind: RegimeKind::Oscillating,
            n_scale: nn,
            phase: phi,
            coeff: a,
        };
        Ok((v, regime, 1.0 / (nf * c.powi(3))))
    } else if ax >= nn + delta {
        let phi = (ax / nn).acosh();
        let sh = phi.sinh();
        let b = coeff_b(n);
        let v = parity * b / sh.sqrt() * (nn * nn / 8.0 * (2.0 * phi - (2.0 * phi).sinh())).exp();
        let regime = PrRegime {
            kind: RegimeKind::Exterior,
            n_scale: nn,
            phase: phi,
            coeff: b,
        };
        Ok((v, regime, 1.0 / (nf * (sh * (-phi).exp()).powi(3))))
    } else if delta > 0.0 {
        let t = (nn - ax) * 3f64.cbrt() * nf.powf(1.0 / 6.0);
        let d = coeff_d(n);
        let v = parity * d * airy_a(t);
        let regime = PrRegime {
            kind: RegimeKind::Frontier,
            n_scale: nn,
            phase: t,
            coeff: d,
        };
        Ok((v, regime, nf.powf(-2.0 / 3.0)))
    } else {
        Err(HermiteError::NoRegime(x))
    }
}

/// `φ` of the oscillating-formula crest nearest `φ = 0`.
pub fn calibration_phi(n: usize) -> f64 {
    let nn = n_scale(n);
    let theta0 = osc_phase(n, 0.0);
    let m = ((theta0 - FRAC_PI_2) / PI).round();
    let mut target = FRAC_PI_2 + m * PI;
    if (target - theta0).abs() > FRAC_PI_2 {
        target -= (target - theta0).signum() * PI;
    }
    let mut phi = (target - theta0) / (nn * nn / 2.0);
    for _ in 0..50 {
        let g = osc_phase(n, phi) - target;
        let dg = nn * nn / 2.0 * phi.cos().powi(2);
        let step = g / dg;
        phi -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    phi
}

/// Factor mapping the asymptotic formula onto `e^{−x²/4} H_n` from the
/// recurrence, matched at the crest nearest the origin.
pub fn pr_calibration(n: usize) -> Result<f64, HermiteError> {
    let x = n_scale(n) * calibration_phi(n).sin();
    let (raw, _, _) = raw_asymptotic(n, x)?;
    Ok(weighted_value(n, x) / raw)
}

/// `e^{−x²/4} H_n(x)` from the recurrence.
pub fn weighted_value(n: usize, x: f64) -> f64 {
    let (l, s) = eval_log(n, x);
    s * (l - 0.25 * x * x).exp()
}

/// Plancherel–Rotach approximation of `e^{−x²/4} H_n(x)`.
pub fn pr_asymptotic(n: usize, x: f64) -> Result<PrEvaluation, HermiteError> {
    let (raw, regime, error_scale) = raw_asymptotic(n, x)?;
    let calibration = pr_calibration(n)?;
    Ok(PrEvaluation {
        value: calibration * raw,
        raw,
        regime,
        error_scale,
        calibration,
    })
}

/// Oscillating-regime error at `φ`, relative to the local envelope
/// `a_n/√cos φ` and maximized over one oscillation period around `φ`.
pub fn pr_oscillating_error(n: usize, phi: f64) -> Result<f64, HermiteError> {
    if !(phi.abs() < FRAC_PI_2) {
        return Err(HermiteError::InvalidInput(format!("φ = {phi} outside (−π/2, π/2)")));
    }
    let nn = n_scale(n);
    let calibration = pr_calibration(n)?;
    let period = 4.0 * PI / (nn * nn * phi.cos().powi(2));
    let samples = 64;
    let mut worst = 0.0f64;
    for i in 0..=samples {
        let p = phi + period * (i as f64 / samples as f64 - 0.5);
        let x = nn * p.sin();
        let (raw, regime, _) = raw_asymptotic(n, x)?;
        if regime.kind != RegimeKind::Oscillating {
            return Err(HermiteError::InvalidInput(format!("φ = {phi} too close to the turning point")));
        }
        let envelope = (calibration * coeff_a(n) / p.cos().sqrt()).abs();
        worst = worst.max((calibration * raw - weighted_value(n, x)).abs() / envelope);
    }
    Ok(worst)
}

fn log_integrand(n: usize, p: f64, x: f64) -> f64 {
    let (l, _) = eval_log(n, x);
    p * l - 0.5 * x * x - LOG_SQRT_2PI
}

/// `∫_a^b |H_n|^p dγ` for `0 ≤ a < b ≤ ∞`, on panels of about a quarter of
/// the local zero spacing.
fn abs_pow_integral(n: usize, p: f64, a: f64, b: f64) -> Result<f64, HermiteError> {
    let nn = n_scale(n);
    let peak = (0..=400)
        .map(|i| log_integrand(n, p, (nn + 4.0) * i as f64 / 400.0))
        .fold(f64::NEG_INFINITY, f64::max);
    let cutoff = peak - 80.0;
    let mut hi = b;
    if !hi.is_finite() {
        hi = a.max(nn) + 1.0;
        while log_integrand(n, p, hi) > cutoff {
            hi += 1.0;
        }
    }
    if hi <= a {
        return Ok(0.0);
    }
    let spacing = PI / nn.max(1.0);
    let panels = (((hi - a) / (0.5 * spacing)).ceil() as usize).max(1);
    let h = (hi - a) / panels as f64;
    let scale = peak;
    let mut total = 0.0;
    for i in 0..panels {
        let lo = a + h * i as f64;
        let up = if i + 1 == panels { hi } else { lo + h };
        let q = gauss_kronrod_adaptive(|x| (log_integrand(n, p, x) - scale).exp(), lo, up, 1e-300, 1e-13, 200)?;
        total += q.value;
    }
    Ok(total * scale.exp())
}

/// `‖H_n‖_p` under `γ`.
pub fn lp_norm(n: usize, p: f64) -> Result<f64, HermiteError> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(HermiteError::InvalidInput(format!("p must be >= 2, got {p}")));
    }
    let half = abs_pow_integral(n, p, 0.0, f64::INFINITY)?;
    Ok((2.0 * half).powf(1.0 / p))
}

/// `∫|H_n|^p dγ` over the oscillating zone, the frontier band and the exterior.
pub fn integral_split(n: usize, p: f64) -> Result<(f64, f64, f64), HermiteError> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(HermiteError::InvalidInput(format!("p must be >= 2, got {p}")));
    }
    if n < 10 {
        return Err(HermiteError::DegreeTooSmall(n));
    }
    let nn = n_scale(n);
    let delta = (n as f64).powf(-1.0 / 6.0);
    let i1 = 2.0 * abs_pow_integral(n, p, 0.0, nn - delta)?;
    let i2 = 2.0 * abs_pow_integral(n, p, nn - delta, nn + delta)?;
    let i3 = 2.0 * abs_pow_integral(n, p, nn + delta, f64::INFINITY)?;
    Ok((i1, i2, i3))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpAuditEntry {
    pub n: usize,
    pub p: f64,
    pub norm: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpAudit {
    pub entries: Vec<LpAuditEntry>,
    pub c_sup: f64,
}

impl LpAudit {
    /// Largest `c(n, p)` with `n` in `[lo, hi]`.
    pub fn max_over(&self, lo: usize, hi: usize) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.n >= lo && e.n <= hi)
            .map(|e| e.c)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `c(n, p) = (‖H_n‖_p / p^{3n/4})^{1/n}` for `1 ≤ n ≤ n_max`.
pub fn audit_lp_bound(n_max: usize, p_set: &[f64]) -> Result<LpAudit, HermiteError> {
    if n_max < 5 {
        return Err(HermiteError::InvalidInput(format!("n_max must be >= 5, got {n_max}")));
    }
    if p_set.is_empty() || p_set.iter().any(|&p| !(p >= 2.0 && p.is_finite())) {
        return Err(HermiteError::InvalidInput("p values must be finite and >= 2".into()));
    }
    let jobs: Vec<(usize, f64)> = (1..=n_max).flat_map(|n| p_set.iter().map(move |&p| (n, p))).collect();
    let entries: Result<Vec<LpAuditEntry>, HermiteError> = jobs
        .par_iter()
        .map(|&(n, p)| {
            let norm = lp_norm(n, p)?;
            let nf = n as f64;
            let c = ((norm.ln() - 0.75 * nf * p.ln()) / nf).exp();
            Ok(LpAuditEntry { n, p, norm, c })
        })
        .collect();
    let entries = entries?;
    let c_sup = entries.iter().map(|e| e.c).fold(f64::NEG_INFINITY, f64::max);
    if !c_sup.is_finite() {
        return Err(HermiteError::InvalidInput("non-finite audit constant".into()));
    }
    Ok(LpAudit { entries, c_sup })
}

fn binom(n: u64, k: u64) -> u128 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EigenspaceDims {
    pub level_dim: u128,
    pub cumulative_dim: u128,
    /// `cumulative_dim ≤ 2^d k^d` (vacuous at `k = 0`).
    pub within_bound: bool,
}

/// Dimensions of the degree-`k` eigenspace of `−L` on `R^d` and of the sum of
/// eigenspaces up to `k`.
pub fn eigenspace_dims(d: u32, k: u32) -> Result<EigenspaceDims, HermiteError> {
    if d == 0 {
        return Err(HermiteError::InvalidInput("dimension must be >= 1".into()));
    }
    let (d, k) = (d as u64, k as u64);
    let cumulative = binom(k + d, d);
    let below = if k == 0 { 0 } else { binom(k - 1 + d, d) };
    let within_bound = k == 0 || (cumulative as f64) <= (2.0 * k as f64).powi(d as i32);
    Ok(EigenspaceDims {
        level_dim: cumulative - below,
        cumulative_dim: cumulative,
        within_bound,
    })
}

/// `∏_k ‖H_{α_k}‖_p`, the `L^p(γ_d)` norm of the tensor product `H_α`.
pub fn multivariate_lp_bound(alpha: &[usize], p: f64) -> Result<f64, HermiteError> {
    let mut prod = 1.0;
    for &a in alpha {
        if a > 0 {
            prod *= lp_norm(a, p)?;
        } else if !(p >= 2.0) {
            return Err(HermiteError::InvalidInput(format!("p must be >= 2, got {p}")));
        }
    }
    Ok(prod)
}
