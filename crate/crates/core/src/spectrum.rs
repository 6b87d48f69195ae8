//! Finite-volume discretization of `−L = −(d²/dx² − V′ d/dx)` with Neumann
//! ends, its low spectrum, and spectral super-Poincaré functions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measure::{Measure1D, MeasureError};
use crate::numerics::{eig_sym_tridiag, NumericsError};
use crate::orlicz::{luxembourg_norm_weighted, orlicz_norm_weighted, OrliczError, YoungPair};
use crate::testfn::{TestFunction, TestFunctionSampler};
use crate::transfer::{BetaFunction, OrliczSpi, TransferError};

pub const MIN_INTERIOR_NODES: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("grid too coarse: {interior} interior nodes, need at least {MIN_INTERIOR_NODES}")]
    GridTooCoarse { interior: usize },
    #[error("insufficient spectrum computed: 1/r = {inv_r} is not below the largest computed eigenvalue {lambda_max}")]
    InsufficientSpectrum { inv_r: f64, lambda_max: f64 },
    #[error("density underflows on the grid at x = {x}; shrink the domain")]
    DensityUnderflow { x: f64 },
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Orlicz(#[from] OrliczError),
    #[error(transparent)]
    Transfer(#[from] TransferError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Symmetrized generator `T = W^{−1/2} K W^{−1/2}`: `K` is the finite-volume
/// energy matrix and `W` the lumped node masses.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteGenerator {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    /// `log w_i`.
    pub log_masses: Vec<f64>,
    /// Conductances `ρ(x_{i+1/2})/h`.
    pub conductance: Vec<f64>,
}

impl DiscreteGenerator {
    /// `(−L_h f)_i = (K f)_i / w_i`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let n = f.len();
        (0..n)
            .map(|i| {
                let mut acc = 0.0;
                if i > 0 {
                    acc += self.conductance[i - 1] * (f[i] - f[i - 1]);
                }
                if i + 1 < n {
                    acc += self.conductance[i] * (f[i] - f[i + 1]);
                }
                acc * (-self.log_masses[i]).exp()
            })
            .collect()
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

pub fn discretize_generator(m: &Measure1D) -> Result<DiscreteGenerator, SpectrumError> {
    let n = m.n_nodes();
    if n < MIN_INTERIOR_NODES + 2 {
        return Err(SpectrumError::GridTooCoarse {
            interior: n.saturating_sub(2),
        });
    }
    let h = m.spacing();
    let ld = m.log_density();
    let mut log_masses: Vec<f64> = ld
        .iter()
        .enumerate()
        .map(|(i, l)| l + if i == 0 || i + 1 == n { 0.5 * h } else { h }.ln())
        .collect();
    let norm = log_sum_exp(&log_masses);
    log_masses.iter_mut().for_each(|l| *l -= norm);
    if let Some(i) = log_masses.iter().position(|l| *l < -700.0) {
        return Err(SpectrumError::DensityUnderflow { x: m.nodes()[i] });
    }
    let mid = m.mid_log_density();
    let conductance: Vec<f64> = mid.iter().map(|l| l.exp() / h).collect();
    let mut diag = vec![0.0; n];
    let mut offdiag = vec![0.0; n - 1];
    for i in 0..n - 1 {
        let (a, b) = (log_masses[i], log_masses[i + 1]);
        diag[i] += (mid[i] - a).exp() / h;
        diag[i + 1] += (mid[i] - b).exp() / h;
        offdiag[i] = -(mid[i] - 0.5 * (a + b)).exp() / h;
    }
    Ok(DiscreteGenerator {
        diag,
        offdiag,
        log_masses,
        conductance,
    })
}

/// Low eigenpairs of the discretized `−L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    /// `μ`-orthonormal grid functions.
    pub eigenvectors: Vec<Vec<f64>>,
    pub nodes: Vec<f64>,
    /// Lumped node masses: the discrete measure of the spectral problem.
    pub masses: Vec<f64>,
    /// Bottom of the essential spectrum of the continuum operator, if known.
    pub ess_threshold: Option<f64>,
}

impl SpectralData {
    pub fn lambda_max(&self) -> f64 {
        *self.eigenvalues.last().expect("at least one eigenpair")
    }

    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.masses.iter().zip(f).zip(g).map(|((w, a), b)| w * a * b).sum()
    }

    /// `Σ_{λ_i ≤ 1/r} (f, f_i)²`.
    pub fn low_projection(&self, f: &[f64], r: f64) -> Result<f64, SpectrumError> {
        self.check_coverage(r)?;
        Ok(self
            .eigenvalues
            .iter()
            .zip(&self.eigenvectors)
            .filter(|(l, _)| **l <= 1.0 / r)
            .map(|(_, v)| self.inner(f, v).powi(2))
            .sum())
    }

    fn check_coverage(&self, r: f64) -> Result<(), SpectrumError> {
        if !(r > 0.0) {
            return Err(SpectrumError::InvalidInput(format!("r must be > 0, got {r}")));
        }
        if !(1.0 / r < self.lambda_max()) {
            return Err(SpectrumError::InsufficientSpectrum {
                inv_r: 1.0 / r,
                lambda_max: self.lambda_max(),
            });
        }
        Ok(())
    }

    /// `(max |G − I|, max_i ‖(−L_h)f_i − λ_i f_i‖_μ / (1 + λ_i))`.
    pub fn check_invariants(&self, generator: &DiscreteGenerator) -> (f64, f64) {
        let k = self.eigenvalues.len();
        let mut gram = 0.0f64;
        for i in 0..k {
            for j in 0..=i {
                let e = if i == j { 1.0 } else { 0.0 };
                gram = gram.max((self.inner(&self.eigenvectors[i], &self.eigenvectors[j]) - e).abs());
            }
        }
        let residual = self
            .eigenvalues
            .iter()
            .zip(&self.eigenvectors)
            .map(|(&l, v)| {
                let lv = generator.apply(v);
                let d: Vec<f64> = lv.iter().zip(v).map(|(a, b)| a - l * b).collect();
                self.inner(&d, &d).sqrt() / (1.0 + l)
            })
            .fold(0.0, f64::max);
        (gram, residual)
    }
}

/// The `k` lowest eigenpairs of the discretized `−L`.
pub fn low_spectrum(m: &Measure1D, k: usize, ess_threshold: Option<f64>) -> Result<SpectralData, SpectrumError> {
    if k == 0 {
        return Err(SpectrumError::InvalidInput("k must be >= 1".into()));
    }
    if let Some(l) = ess_threshold {
        if !(l > 0.0) {
            return Err(SpectrumError::InvalidInput(format!("essential threshold must be > 0, got {l}")));
        }
    }
    let g = discretize_generator(m)?;
    let eig = eig_sym_tridiag(&g.diag, &g.offdiag, k)?;
    let eigenvectors: Vec<Vec<f64>> = eig
        .vectors
        .iter()
        .enumerate()
        .map(|(j, u)| {
            // constants span the kernel exactly; dividing the computed vector
            // by √w would amplify rounding in the tails
            if j == 0 {
                return vec![1.0; u.len()];
            }
            u.iter().zip(&g.log_masses).map(|(a, l)| a * (-0.5 * l).exp()).collect()
        })
        .collect();
    Ok(SpectralData {
        eigenvalues: eig.values,
        eigenvectors,
        nodes: m.nodes().to_vec(),
        masses: g.log_masses.iter().map(|l| l.exp()).collect(),
        ess_threshold,
    })
}

/// `β(r) = Σ_{λ_i ≤ 1/r} ‖f_i‖²_{Φ*}` on `r_grid` (Luxembourg norms on the
/// lumped measure).
pub fn spectral_ospi(spec: &SpectralData, pair: &YoungPair, r_grid: &[f64]) -> Result<OrliczSpi, SpectrumError> {
    if r_grid.is_empty() {
        return Err(SpectrumError::InvalidInput("empty r grid".into()));
    }
    let mut grid = r_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    for &r in &grid {
        spec.check_coverage(r)?;
    }
    let norms: Result<Vec<f64>, OrliczError> = spec
        .eigenvectors
        .par_iter()
        .map(|v| luxembourg_norm_weighted(v, &spec.masses, &pair.phi_star))
        .collect();
    let norms = norms?;
    let entries: Vec<(f64, f64)> = grid
        .iter()
        .map(|&r| {
            let b: f64 = spec
                .eigenvalues
                .iter()
                .zip(&norms)
                .filter(|(l, _)| **l <= 1.0 / r)
                .map(|(_, n)| n * n)
                .sum();
            (r, b)
        })
        .collect();
    let r0 = match spec.ess_threshold {
        Some(l) => 1.0 / l,
        None => 1.0 / spec.lambda_max(),
    };
    let beta = BetaFunction::table(r0, entries)?;
    Ok(OrliczSpi { beta, pair: pair.clone() })
}

/// What [`verify_spi`] checks.
#[derive(Debug, Clone)]
pub enum SpiTarget<'a> {
    /// `∫f² ≤ r∫f′² + β(r)(∫|f|)²`.
    L1(&'a BetaFunction),
    /// `∫f² ≤ r∫f′² + β(r) 𝒩_Φ(f)²`.
    Orlicz(&'a OrliczSpi),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpiReport {
    pub r: f64,
    pub beta: f64,
    pub trials: usize,
    pub seed: u64,
    /// Largest `(lhs − rhs)/lhs`.
    pub max_violation: f64,
    pub worst_trial: usize,
    pub pass: bool,
}

pub const SPI_TOLERANCE: f64 = 1e-8;

/// Sides of the inequality on the lumped measure for one grid function.
pub fn spi_sides(m: &Measure1D, masses: &[f64], target: &SpiTarget, r: f64, values: &[f64]) -> Result<(f64, f64), SpectrumError> {
    let beta = match target {
        SpiTarget::L1(b) => b,
        SpiTarget::Orlicz(o) => &o.beta,
    };
    let b = beta
        .eval(r)
        .ok_or(SpectrumError::Transfer(TransferError::BelowThreshold { r, r0: beta.r0 }))?;
    let lhs: f64 = values.iter().zip(masses).map(|(v, w)| w * v * v).sum();
    let energy = m.grid_dirichlet_energy(values)?;
    let norm = match target {
        SpiTarget::L1(_) => values.iter().zip(masses).map(|(v, w)| w * v.abs()).sum::<f64>(),
        SpiTarget::Orlicz(o) => orlicz_norm_weighted(values, masses, &o.pair)?,
    };
    Ok((lhs, r * energy + b * norm * norm))
}

/// Lumped node masses of `m`, the discrete measure used by spectral checks.
pub fn lumped_masses(m: &Measure1D) -> Vec<f64> {
    m.lumped_masses().to_vec()
}

/// Sampler whose features cover the bulk of `m`.
pub fn bulk_sampler(m: &Measure1D, seed: u64) -> Result<TestFunctionSampler, SpectrumError> {
    let lo = m.quantile_left(1e-3)?;
    let hi = m.quantile_right(1e-3)?;
    Ok(TestFunctionSampler::new(lo, hi, seed))
}

/// Checks the inequality on `trials` seeded random test functions.
pub fn verify_spi(m: &Measure1D, target: &SpiTarget, r: f64, trials: usize, seed: u64) -> Result<SpiReport, SpectrumError> {
    let masses = lumped_masses(m);
    let sampler = bulk_sampler(m, seed)?;
    let beta = match target {
        SpiTarget::L1(b) => *b,
        SpiTarget::Orlicz(o) => &o.beta,
    };
    let b = beta
        .eval(r)
        .ok_or(SpectrumError::Transfer(TransferError::BelowThreshold { r, r0: beta.r0 }))?;
    let violations: Result<Vec<f64>, SpectrumError> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let f = sampler.draw(i as u64);
            let values = f.sample(m.nodes());
            let (lhs, rhs) = spi_sides(m, &masses, target, r, &values)?;
            Ok(if lhs > 0.0 { (lhs - rhs) / lhs } else { f64::NEG_INFINITY })
        })
        .collect();
    let violations = violations?;
    let (worst_trial, max_violation) = violations
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    Ok(SpiReport {
        r,
        beta: b,
        trials,
        seed,
        max_violation,
        worst_trial,
        pass: max_violation <= SPI_TOLERANCE,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionSplit {
    pub p_part: f64,
    pub q_part: f64,
    /// `r ∫|f′|² dμ` on the grid.
    pub q_bound: f64,
}

impl ProjectionSplit {
    pub fn q_bound_holds(&self, tol: f64) -> bool {
        self.q_part <= self.q_bound + tol && self.q_part >= -tol
    }
}

/// `∫f² = ‖Pf‖² + ‖Qf‖²` with `P` the spectral projection on `[0, 1/r]`.
pub fn projection_split(m: &Measure1D, spec: &SpectralData, f: &[f64], r: f64) -> Result<ProjectionSplit, SpectrumError> {
    if f.len() != spec.nodes.len() {
        return Err(SpectrumError::InvalidInput("grid function does not match the spectral grid".into()));
    }
    let p_part = spec.low_projection(f, r)?;
    let total = spec.inner(f, f);
    let energy = m.grid_dirichlet_energy(f)?;
    Ok(ProjectionSplit {
        p_part,
        q_part: total - p_part,
        q_bound: r * energy,
    })
}

/// Largest `(f, f_i)² − 𝒩_Φ(f)² ‖f_i‖²_{Φ*}` over the computed eigenvectors,
/// relative to the right side.
pub fn holder_defect(spec: &SpectralData, pair: &YoungPair, f: &[f64]) -> Result<f64, SpectrumError> {
    let nf = orlicz_norm_weighted(f, &spec.masses, pair)?;
    let mut worst = f64::NEG_INFINITY;
    for v in &spec.eigenvectors {
        let lux = luxembourg_norm_weighted(v, &spec.masses, &pair.phi_star)?;
        let rhs = (nf * lux).powi(2);
        worst = worst.max((spec.inner(f, v).powi(2) - rhs) / rhs.max(1e-300));
    }
    Ok(worst)
}

/// Random test function for the Q-bound and Hölder checks.
pub fn draw_test_function(m: &Measure1D, seed: u64, index: u64) -> Result<TestFunction, SpectrumError> {
    Ok(bulk_sampler(m, seed)?.draw(index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Potential;
    use crate::orlicz::power_pair;

    fn ou(n: usize) -> Measure1D {
        Measure1D::build(Potential::preset("gaussian", &[]).unwrap(), (-10.0, 10.0), n, 1e-12).unwrap()
    }

    #[test]
    fn generator_structure() {
        let m = ou(201);
        let g = discretize_generator(&m).unwrap();
        let ones = vec![1.0; m.n_nodes()];
        assert!(g.apply(&ones).iter().all(|v| v.abs() < 1e-12));
        // W^{1/2} 1 is in the kernel of T
        let u: Vec<f64> = g.log_masses.iter().map(|l| (0.5 * l).exp()).collect();
        let n = u.len();
        for i in 0..n {
            let mut acc = g.diag[i] * u[i];
            if i > 0 {
                acc += g.offdiag[i - 1] * u[i - 1];
            }
            if i + 1 < n {
                acc += g.offdiag[i] * u[i + 1];
            }
            assert!(acc.abs() < 1e-9 * g.diag[i] * u[i].max(1e-300) + 1e-12, "row {i}");
        }
        let coarse = Measure1D::build(Potential::preset("gaussian", &[]).unwrap(), (-10.0, 10.0), 40, 1e-12).unwrap();
        assert!(matches!(discretize_generator(&coarse), Err(SpectrumError::GridTooCoarse { .. })));
    }

    #[test]
    fn neumann_laplacian() {
        let m = Measure1D::on_interval(Potential::Polynomial { coeffs: vec![0.0] }, (0.0, 1.0), 401).unwrap();
        let s = low_spectrum(&m, 3, None).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!(s.eigenvalues[0].abs() < 1e-9);
        assert!((s.eigenvalues[1] / pi2 - 1.0).abs() < 1e-2);
        assert!((s.eigenvalues[2] / (4.0 * pi2) - 1.0).abs() < 1e-2);
    }

    #[test]
    fn ou_spectrum_and_eigenvectors() {
        let m = ou(2001);
        let s = low_spectrum(&m, 6, Some(f64::INFINITY)).unwrap();
        for (j, l) in s.eigenvalues.iter().enumerate() {
            assert!((l - j as f64).abs() < 1e-3, "λ_{j} = {l}");
        }
        assert!(s.eigenvectors[0].iter().all(|v| (v - 1.0).abs() < 1e-6));
        let dev = s.eigenvectors[1]
            .iter()
            .zip(&s.nodes)
            .map(|(v, x)| (v - x).abs() * (-0.25 * x * x).exp())
            .fold(0.0, f64::max);
        assert!(dev < 1e-3, "{dev}");
        let g = discretize_generator(&m).unwrap();
        let (gram, res) = s.check_invariants(&g);
        assert!(gram < 1e-8 && res < 1e-6, "{gram} {res}");
    }

    #[test]
    fn spectral_beta_for_power_pair() {
        let m = ou(2001);
        let s = low_spectrum(&m, 6, Some(f64::INFINITY)).unwrap();
        let pair = power_pair(4.0).unwrap();
        let o = spectral_ospi(&s, &pair, &[0.25, 0.4, 0.6, 2.0]).unwrap();
        let b = o.beta.eval(0.6).unwrap();
        assert!((b - (1.0 + 3f64.sqrt()) / 2.0).abs() < 1e-3, "{b}");
        assert!((o.beta.eval(2.0).unwrap() - 0.5).abs() < 1e-9);
        assert!(o.beta.eval(0.25).unwrap() >= o.beta.eval(0.4).unwrap());
        assert!(spectral_ospi(&s, &pair, &[0.1]).is_err());
    }

    #[test]
    fn projection_examples() {
        let m = ou(2001);
        let s = low_spectrum(&m, 6, Some(f64::INFINITY)).unwrap();
        let cube: Vec<f64> = s.nodes.iter().map(|x| x.powi(3)).collect();
        let split = projection_split(&m, &s, &cube, 0.5).unwrap();
        assert!((split.p_part - 9.0).abs() < 1e-2, "{split:?}");
        assert!((split.q_part - 6.0).abs() < 1e-2, "{split:?}");
        assert!(split.q_bound_holds(1e-8));
        let e = projection_split(&m, &s, &s.eigenvectors[1].clone(), 0.5).unwrap();
        assert!((e.p_part - 1.0).abs() < 1e-8 && e.q_part.abs() < 1e-8);
    }

    #[test]
    fn verify_detects_failures_and_passes() {
        let m = ou(1001);
        let s = low_spectrum(&m, 8, Some(f64::INFINITY)).unwrap();
        let o = spectral_ospi(&s, &power_pair(4.0).unwrap(), &[0.2, 0.5, 1.0]).unwrap();
        let rep = verify_spi(&m, &SpiTarget::Orlicz(&o), 0.5, 200, 3).unwrap();
        assert!(rep.pass, "{rep:?}");
        let tiny = BetaFunction::table(0.0, vec![(1e-6, 1e-3)]).unwrap();
        let rep = verify_spi(&m, &SpiTarget::L1(&tiny), 1e-6, 20, 3).unwrap();
        assert!(!rep.pass);
    }
}
