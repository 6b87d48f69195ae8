//! Young functions, Legendre conjugation and Luxembourg / Orlicz norms.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::measure::{Measure1D, MeasureError};
use crate::numerics::{minimize_scalar, root_find_monotone, NumericsError, Tolerance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrliczError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("exponent p = {0} must exceed 2 (Φ*(x)/x² must be unbounded)")]
    ExponentTooSmall(f64),
    #[error("supremum not attained inside the grid at y = {y} (grid too small)")]
    GridTooSmall { y: f64 },
    #[error("function is not in the Orlicz space: no finite λ is admissible")]
    NotInSpace,
    #[error("empty trial set")]
    EmptyTrialSet,
    #[error("Young-function check failed: {0}")]
    NotYoung(String),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// An even convex function with `Φ(0) = 0` growing to infinity.
#[derive(Clone)]
pub enum YoungFunction {
    /// `|x|^p / p`.
    Power { p: f64 },
    Custom {
        name: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
    /// Numerical conjugate `sup_{x in grid} (x|y| - Φ(x))`.
    Conjugate { base: Box<YoungFunction>, grid: Arc<Vec<f64>> },
}

impl fmt::Debug for YoungFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            YoungFunction::Power { p } => write!(f, "Power(p = {p})"),
            YoungFunction::Custom { name, .. } => write!(f, "Custom({name})"),
            YoungFunction::Conjugate { base, grid } => write!(f, "Conjugate({base:?}, {} grid points)", grid.len()),
        }
    }
}

impl YoungFunction {
    pub fn power(p: f64) -> Result<Self, OrliczError> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(OrliczError::InvalidInput(format!("power Young function needs p > 1, got {p}")));
        }
        Ok(YoungFunction::Power { p })
    }

    pub fn custom<F: Fn(f64) -> f64 + Send + Sync + 'static>(name: &str, f: F) -> Self {
        YoungFunction::Custom {
            name: name.to_string(),
            f: Arc::new(f),
        }
    }

    /// `Φ(x)`; `+∞` where a grid conjugate cannot resolve the supremum.
    pub fn eval(&self, x: f64) -> f64 {
        self.try_eval(x).unwrap_or(f64::INFINITY)
    }

    pub fn try_eval(&self, x: f64) -> Result<f64, OrliczError> {
        let x = x.abs();
        match self {
            YoungFunction::Power { p } => Ok(x.powf(*p) / p),
            YoungFunction::Custom { f, .. } => Ok(f(x)),
            YoungFunction::Conjugate { base, grid } => conjugate_at(base, grid, x),
        }
    }

    /// `Φ^{-1}(y)` for `y ≥ 0`.
    pub fn inverse(&self, y: f64) -> Result<f64, OrliczError> {
        if !(y >= 0.0) {
            return Err(OrliczError::InvalidInput(format!("inverse needs y >= 0, got {y}")));
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        if let YoungFunction::Power { p } = self {
            return Ok((p * y).powf(1.0 / p));
        }
        let mut hi = 1.0;
        let mut guard = 0;
        while self.eval(hi) < y {
            hi *= 2.0;
            guard += 1;
            if guard > 1100 {
                return Err(OrliczError::NotYoung(format!("Φ stays below {y}")));
            }
        }
        let tol = Tolerance::new(1e-15 * hi, 1e-14, 400)?;
        Ok(root_find_monotone(|x| self.eval(x) - y, 0.0, hi, tol)?)
    }

    pub fn exponent(&self) -> Option<f64> {
        match self {
            YoungFunction::Power { p } => Some(*p),
            _ => None,
        }
    }
}

fn conjugate_at(base: &YoungFunction, grid: &[f64], y: f64) -> Result<f64, OrliczError> {
    if y == 0.0 {
        return Ok(0.0);
    }
    let obj = |x: f64| x * y - base.eval(x);
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (i, &x) in grid.iter().enumerate() {
        let v = obj(x);
        if v > best.0 {
            best = (v, i);
        }
    }
    let k = best.1;
    if k + 1 == grid.len() {
        return Err(OrliczError::GridTooSmall { y });
    }
    let a = grid[k.saturating_sub(1)];
    let b = grid[k + 1];
    let tol = Tolerance::new(1e-14 * (1.0 + b.abs()), 1e-13, 300)?;
    let m = minimize_scalar(|x| -obj(x), a, b, tol)?;
    Ok(best.0.max(-m.min))
}

/// Numerical Legendre conjugate of `phi` over `x_grid` (non-negative,
/// increasing). Evaluations whose maximizer sits at the end of the grid fail.
pub fn legendre(phi: &YoungFunction, x_grid: &[f64]) -> Result<YoungFunction, OrliczError> {
    if x_grid.len() < 3 {
        return Err(OrliczError::InvalidInput("legendre grid needs at least 3 points".into()));
    }
    if x_grid[0] < 0.0 || x_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(OrliczError::InvalidInput("legendre grid must be non-negative and increasing".into()));
    }
    let n = x_grid.len();
    let slope = (phi.eval(x_grid[n - 1]) - phi.eval(x_grid[n - 2])) / (x_grid[n - 1] - x_grid[n - 2]);
    if !(slope > 0.0 && slope.is_finite()) {
        return Err(OrliczError::GridTooSmall { y: 0.0 });
    }
    Ok(YoungFunction::Conjugate {
        base: Box::new(phi.clone()),
        grid: Arc::new(x_grid.to_vec()),
    })
}

/// A dual pair `(Φ, Φ*)`.
#[derive(Debug, Clone)]
pub struct YoungPair {
    pub phi: YoungFunction,
    pub phi_star: YoungFunction,
}

impl YoungPair {
    /// Exponent `p` of `Φ* = x^p/p` for power pairs.
    pub fn p(&self) -> Option<f64> {
        self.phi_star.exponent()
    }
}

/// `Φ*(x) = x^p/p`, `Φ(x) = x^q/q` with `1/p + 1/q = 1`.
pub fn power_pair(p: f64) -> Result<YoungPair, OrliczError> {
    if !(p > 2.0) || !p.is_finite() {
        return Err(OrliczError::ExponentTooSmall(p));
    }
    let q = p / (p - 1.0);
    Ok(YoungPair {
        phi: YoungFunction::Power { p: q },
        phi_star: YoungFunction::Power { p },
    })
}

/// Sampled Young-function axioms: `Φ(0) = 0`, evenness, growth and convexity.
pub fn check_young_function(phi: &YoungFunction) -> Result<(), OrliczError> {
    let at0 = phi.eval(0.0);
    if at0 != 0.0 {
        return Err(OrliczError::NotYoung(format!("Φ(0) = {at0}")));
    }
    let grid: Vec<f64> = (0..=200).map(|i| 0.05 * i as f64).collect();
    for &x in &grid {
        let (a, b) = (phi.eval(x), phi.eval(-x));
        if (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
            return Err(OrliczError::NotYoung(format!("not even at x = {x}")));
        }
    }
    for w in grid.windows(3) {
        let d2 = phi.eval(w[0]) - 2.0 * phi.eval(w[1]) + phi.eval(w[2]);
        if d2 < -1e-9 * (1.0 + phi.eval(w[2]).abs()) {
            return Err(OrliczError::NotYoung(format!("not convex near x = {}", w[1])));
        }
    }
    let large: Vec<f64> = (1..=6).map(|k| phi.eval(10f64.powi(k))).collect();
    if large.windows(2).any(|w| !(w[1] > w[0])) || !(large[5] > 1e3) {
        return Err(OrliczError::NotYoung("Φ(x) does not grow to infinity".into()));
    }
    Ok(())
}

/// Sampled Young inequality `xy ≤ Φ(x) + Φ*(y)`.
pub fn check_young_inequality(pair: &YoungPair, tol: f64) -> Result<(), OrliczError> {
    for i in 0..=40 {
        for j in 0..=40 {
            let (x, y) = (0.1 * i as f64, 0.1 * j as f64);
            if x * y > pair.phi.eval(x) + pair.phi_star.eval(y) + tol {
                return Err(OrliczError::NotYoung(format!("Young inequality fails at ({x}, {y})")));
            }
        }
    }
    Ok(())
}

/// Growth conditions on `Φ*`: `Φ*(x)/x² → ∞` and `x ↦ Φ*(√x)` convex.
pub fn check_growth_conditions(pair: &YoungPair) -> Result<(), OrliczError> {
    let ratios: Vec<f64> = (1..=30)
        .map(|k| {
            let x = 2f64.powi(k);
            pair.phi_star.eval(x) / (x * x)
        })
        .collect();
    if ratios.windows(2).any(|w| !(w[1] > w[0])) || !(ratios[29] > 1e3 * ratios[0]) {
        return Err(OrliczError::NotYoung("Φ*(x)/x² does not grow to infinity".into()));
    }
    let g = |x: f64| pair.phi_star.eval(x.sqrt());
    for i in 1..400 {
        let x = 0.05 * i as f64;
        let d2 = g(x - 0.05) - 2.0 * g(x) + g(x + 0.05);
        if d2 < -1e-9 * (1.0 + g(x + 0.05)) {
            return Err(OrliczError::NotYoung(format!("Φ*(√x) not convex near x = {x}")));
        }
    }
    Ok(())
}

/// Smallest `λ` with `Σ w_i Φ(|v_i|/λ) ≤ 1`, for a function sampled with
/// non-negative weights.
pub fn luxembourg_norm_weighted(values: &[f64], weights: &[f64], phi: &YoungFunction) -> Result<f64, OrliczError> {
    if values.len() != weights.len() {
        return Err(OrliczError::InvalidInput("values and weights differ in length".into()));
    }
    if values.iter().chain(weights).any(|v| !v.is_finite()) || weights.iter().any(|&w| w < 0.0) {
        return Err(OrliczError::InvalidInput("values must be finite, weights finite and >= 0".into()));
    }
    let sup = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if sup == 0.0 {
        return Ok(0.0);
    }
    if let YoungFunction::Power { p } = phi {
        // closed form p^{-1/p} ‖f‖_p, scaled by the sup for range safety
        let s: f64 = values.iter().zip(weights).map(|(v, w)| w * (v.abs() / sup).powf(*p)).sum();
        return Ok(sup * (s / p).powf(1.0 / p));
    }
    let modular = |lambda: f64| -> f64 { values.iter().zip(weights).map(|(v, w)| w * phi.eval(v.abs() / lambda)).sum() };
    luxembourg_root(modular, sup)
}

fn luxembourg_root<M: Fn(f64) -> f64>(modular: M, scale: f64) -> Result<f64, OrliczError> {
    // λ ↦ modular(λ) - 1 is decreasing; bracket in log λ
    let g = |t: f64| {
        let v = modular(t.exp());
        if v.is_finite() {
            v - 1.0
        } else {
            f64::MAX
        }
    };
    let mut hi = scale.ln();
    let mut k = 0;
    while g(hi) > 0.0 {
        hi += 2.0;
        k += 1;
        if k > 400 {
            return Err(OrliczError::NotInSpace);
        }
    }
    let mut lo = hi - 2.0;
    k = 0;
    while g(lo) <= 0.0 {
        lo -= 2.0;
        k += 1;
        if k > 400 {
            return Ok(0.0);
        }
    }
    let tol = Tolerance::new(1e-14, 1e-15, 400)?;
    Ok(root_find_monotone(g, lo, hi, tol)?.exp())
}

/// Luxembourg norm `‖f‖_Φ` under `m`.
pub fn luxembourg_norm<F: Fn(f64) -> f64>(m: &Measure1D, f: F, phi: &YoungFunction) -> Result<f64, OrliczError> {
    let (xs, ws) = m.quadrature_rule();
    let values = sample(xs, f)?;
    luxembourg_norm_weighted(&values, ws, phi)
}

fn sample<F: Fn(f64) -> f64>(xs: &[f64], f: F) -> Result<Vec<f64>, OrliczError> {
    xs.iter()
        .map(|&x| {
            let v = f(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(OrliczError::Measure(MeasureError::NonFiniteIntegrand { x }))
            }
        })
        .collect()
}

/// Orlicz norm `𝒩_Φ(f) = sup{∫ fg : ∫Φ*(g) ≤ 1}` of a sampled function, via
/// the Amemiya formula `inf_k (1 + Σ w Φ(k|f|))/k`; `p^{1/p}‖f‖_q` for power pairs.
pub fn orlicz_norm_weighted(values: &[f64], weights: &[f64], pair: &YoungPair) -> Result<f64, OrliczError> {
    if values.len() != weights.len() {
        return Err(OrliczError::InvalidInput("values and weights differ in length".into()));
    }
    let sup = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if sup == 0.0 {
        return Ok(0.0);
    }
    if let (YoungFunction::Power { p: q }, Some(p)) = (&pair.phi, pair.p()) {
        let s: f64 = values.iter().zip(weights).map(|(v, w)| w * (v.abs() / sup).powf(*q)).sum();
        return Ok(p.powf(1.0 / p) * sup * s.powf(1.0 / q));
    }
    let amemiya = |t: f64| {
        let k = t.exp();
        let s: f64 = values.iter().zip(weights).map(|(v, w)| w * pair.phi.eval(k * v.abs())).sum();
        (1.0 + s) / k
    };
    let center = -sup.ln();
    let tol = Tolerance::new(1e-12, 1e-12, 500)?;
    let m = minimize_scalar(amemiya, center - 60.0, center + 60.0, tol)?;
    Ok(m.min)
}

pub fn orlicz_norm<F: Fn(f64) -> f64>(m: &Measure1D, f: F, pair: &YoungPair) -> Result<f64, OrliczError> {
    let (xs, ws) = m.quadrature_rule();
    let values = sample(xs, f)?;
    orlicz_norm_weighted(&values, ws, pair)
}

/// Lower bound on `𝒩_Φ(f)` from trial functions: each `g` is rescaled by its
/// `Φ*`-Luxembourg norm and `|∫ f g̃ dμ|` is maximized over the set.
pub fn orlicz_norm_dual<F, G>(m: &Measure1D, f: F, pair: &YoungPair, trials: &[G]) -> Result<f64, OrliczError>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    if trials.is_empty() {
        return Err(OrliczError::EmptyTrialSet);
    }
    let (xs, ws) = m.quadrature_rule();
    let fv = sample(xs, &f)?;
    let mut best = 0.0f64;
    for g in trials {
        let gv = sample(xs, g)?;
        let norm = luxembourg_norm_weighted(&gv, ws, &pair.phi_star)?;
        if norm == 0.0 {
            continue;
        }
        let dot: f64 = fv.iter().zip(&gv).zip(ws).map(|((a, b), w)| a * b * w).sum();
        best = best.max(dot.abs() / norm);
    }
    Ok(best)
}

fn check_unit(x: f64, what: &str) -> Result<(), OrliczError> {
    if !(x > 0.0 && x < 1.0) {
        return Err(OrliczError::InvalidInput(format!("{what} must lie in (0, 1), got {x}")));
    }
    Ok(())
}

/// Closed form `1 / Φ*(√(1/μ_A))`.
pub fn indicator_norm(mu_a: f64, pair: &YoungPair) -> Result<f64, OrliczError> {
    check_unit(mu_a, "mu_A")?;
    Ok(1.0 / pair.phi_star.eval((1.0 / mu_a).sqrt()))
}

/// Exact Luxembourg norm `1/Ψ^{-1}(1/μ_A)` of an indicator in `L_Ψ`, where `Ψ` is
/// the conjugate of `x ↦ Φ*(√x)`.
pub fn indicator_luxembourg_norm(mu_a: f64, pair: &YoungPair) -> Result<f64, OrliczError> {
    check_unit(mu_a, "mu_A")?;
    let target = 1.0 / mu_a;
    if let Some(p) = pair.p() {
        // Φ*(√x) = x^s/p with s = p/2; its conjugate is (1 - 1/s) (p/s)^{1/(s-1)} y^{s/(s-1)}
        let s = 0.5 * p;
        let c = (1.0 - 1.0 / s) * (p / s).powf(1.0 / (s - 1.0));
        let y = (target / c).powf((s - 1.0) / s);
        return Ok(1.0 / y);
    }
    let g = |x: f64| pair.phi_star.eval(x.max(0.0).sqrt());
    let psi = |y: f64| -> Result<f64, OrliczError> {
        let mut hi = 1.0;
        while g(hi) <= hi * y {
            hi *= 2.0;
            if hi > 1e300 {
                return Err(OrliczError::NotYoung("Φ*(√x) grows too slowly".into()));
            }
        }
        let tol = Tolerance::new(1e-14 * hi, 1e-13, 500)?;
        let m = minimize_scalar(|x| g(x) - x * y, 0.0, hi, tol)?;
        Ok((-m.min).max(0.0))
    };
    let mut hi = 1.0;
    while psi(hi)? < target {
        hi *= 2.0;
    }
    let tol = Tolerance::new(1e-14 * hi, 1e-13, 400)?;
    let y = root_find_monotone(|y| psi(y).unwrap_or(f64::INFINITY) - target, 0.0, hi, tol)?;
    Ok(1.0 / y)
}

/// `θ(x) = 2 / Φ*(√(1/x))^{1/2}`; for power pairs `θ² = 4p x^{p/2}`.
pub fn theta(x: f64, pair: &YoungPair) -> Result<f64, OrliczError> {
    check_unit(x, "x")?;
    Ok(2.0 / pair.phi_star.eval((1.0 / x).sqrt()).sqrt())
}

/// `θ²(x)`, evaluated directly so that tiny arguments do not underflow via θ.
pub fn theta_sq(x: f64, pair: &YoungPair) -> Result<f64, OrliczError> {
    check_unit(x, "x")?;
    if let Some(p) = pair.p() {
        return Ok(4.0 * p * (0.5 * p * x.ln()).exp());
    }
    Ok(4.0 / pair.phi_star.eval((1.0 / x).sqrt()))
}

/// `√x · Φ*^{-1}(1/x)`: a function with `‖f‖_Φ ≤ ‖f‖₂ θ♯(μ(supp f))`.
pub fn theta_sharp(x: f64, pair: &YoungPair) -> Result<f64, OrliczError> {
    check_unit(x, "x")?;
    Ok(x.sqrt() * pair.phi_star.inverse(1.0 / x)?)
}

/// μ-mass of the cells on which a grid function exceeds `rel_threshold·max|f|`
/// at either endpoint.
pub fn support_mass(m: &Measure1D, values: &[f64], rel_threshold: f64) -> Result<f64, OrliczError> {
    if values.len() != m.n_nodes() {
        return Err(OrliczError::InvalidInput("grid function length does not match the grid".into()));
    }
    let sup = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if sup == 0.0 {
        return Ok(0.0);
    }
    let thr = rel_threshold * sup;
    Ok(values
        .windows(2)
        .zip(m.cell_masses())
        .filter(|(w, _)| w[0].abs() > thr || w[1].abs() > thr)
        .map(|(_, c)| c)
        .sum())
}
