//! Conversions between super-Poincaré functions, measure-capacity profiles and
//! Poincaré constants.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::capacity::{validate_kappa_grid, CapacityError, CapacityProfile};
use crate::measure::{Measure1D, MeasureError};
use crate::numerics::{minimize_scalar, NumericsError, Tolerance};
use crate::orlicz::{check_growth_conditions, support_mass, theta_sq, OrliczError, YoungPair};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransferError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("ill-posed input: {0}")]
    IllPosed(String),
    #[error("shape function check failed: {0}")]
    PsiCheck(String),
    #[error("hypothesis not satisfied on grid: {0}")]
    HypothesisNotSatisfied(String),
    #[error("r = {r} is not above the validity threshold r0 = {r0}")]
    BelowThreshold { r: f64, r0: f64 },
    #[error(transparent)]
    Capacity(#[from] CapacityError),
    #[error(transparent)]
    Orlicz(#[from] OrliczError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum BetaForm {
    /// Ascending `(r_i, β_i)`; `β(r) = β_i` for the largest `r_i ≤ r`.
    Table(Vec<(f64, f64)>),
    Closed(ScalarFn),
}

/// `r ↦ β(r)`, valid for `r > r0`.
#[derive(Clone)]
pub struct BetaFunction {
    pub r0: f64,
    pub form: BetaForm,
}

impl fmt::Debug for BetaFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.form {
            BetaForm::Table(t) => write!(f, "BetaFunction {{ r0: {}, table: {:?} }}", self.r0, t),
            BetaForm::Closed(_) => write!(f, "BetaFunction {{ r0: {}, closed form }}", self.r0),
        }
    }
}

impl BetaFunction {
    /// A tabulated β, monotonized by a running minimum in `r`.
    pub fn table(r0: f64, mut entries: Vec<(f64, f64)>) -> Result<Self, TransferError> {
        if !(r0 >= 0.0) {
            return Err(TransferError::InvalidInput(format!("r0 must be >= 0, got {r0}")));
        }
        if entries.is_empty() {
            return Err(TransferError::InvalidInput("empty beta table".into()));
        }
        if entries.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(TransferError::InvalidInput("beta table r values must be strictly ascending".into()));
        }
        if entries.iter().any(|e| !(e.1 > 0.0) || e.0.is_nan()) {
            return Err(TransferError::InvalidInput("beta values must be > 0".into()));
        }
        for i in 1..entries.len() {
            entries[i].1 = entries[i].1.min(entries[i - 1].1);
        }
        Ok(Self {
            r0,
            form: BetaForm::Table(entries),
        })
    }

    /// A closed-form β; the caller guarantees it is positive and non-increasing.
    pub fn closed<F: Fn(f64) -> f64 + Send + Sync + 'static>(r0: f64, f: F) -> Self {
        Self {
            r0,
            form: BetaForm::Closed(Arc::new(f)),
        }
    }

    /// `β(r)`, or `None` where the inequality is not available.
    pub fn eval(&self, r: f64) -> Option<f64> {
        if !(r >= self.r0) {
            return None;
        }
        let v = match &self.form {
            BetaForm::Table(t) => {
                let i = t.partition_point(|e| e.0 <= r);
                if i == 0 {
                    return None;
                }
                t[i - 1].1
            }
            BetaForm::Closed(f) => {
                if r == self.r0 {
                    return None;
                }
                f(r)
            }
        };
        (v.is_finite() && v > 0.0).then_some(v)
    }

    pub fn table_entries(&self) -> Option<&[(f64, f64)]> {
        match &self.form {
            BetaForm::Table(t) => Some(t),
            BetaForm::Closed(_) => None,
        }
    }

    /// Values on a grid (None where undefined), with a running minimum applied.
    pub fn tabulate(&self, r_grid: &[f64]) -> Vec<(f64, Option<f64>)> {
        let mut best = f64::INFINITY;
        r_grid
            .iter()
            .map(|&r| {
                let v = self.eval(r).map(|v| {
                    best = best.min(v);
                    best
                });
                (r, v)
            })
            .collect()
    }

    /// Smallest grid point at which β is defined.
    pub fn first_finite(&self, r_grid: &[f64]) -> Option<f64> {
        r_grid.iter().copied().find(|&r| self.eval(r).is_some())
    }
}

/// Orlicz super-Poincaré data: β together with the Young pair of the norm.
#[derive(Debug, Clone)]
pub struct OrliczSpi {
    pub beta: BetaFunction,
    pub pair: YoungPair,
}

/// `s ↦ β_BCR(s)` for `s ≥ 1`.
#[derive(Clone)]
pub enum BcrFunction {
    /// Ascending `(s_i, v_i)`; value at the largest `s_i ≤ s`.
    Table(Vec<(f64, f64)>),
    Closed(ScalarFn),
}

impl fmt::Debug for BcrFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BcrFunction::Table(t) => write!(f, "BcrFunction::Table({t:?})"),
            BcrFunction::Closed(_) => write!(f, "BcrFunction::Closed"),
        }
    }
}

impl BcrFunction {
    pub fn closed<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        BcrFunction::Closed(Arc::new(f))
    }

    pub fn eval(&self, s: f64) -> f64 {
        if !(s >= 1.0) {
            return f64::NAN;
        }
        match self {
            BcrFunction::Table(t) => {
                let i = t.partition_point(|e| e.0 <= s);
                if i == 0 {
                    f64::INFINITY
                } else {
                    t[i - 1].1
                }
            }
            BcrFunction::Closed(f) => f(s),
        }
    }
}

/// Converts `β_BCR` into a partial SPI: `r0 = lim_{s→∞} β_BCR(s)` and
/// `β(r) = inf{s ≥ 1 : β_BCR(s) ≤ r}`.
pub fn bcr_to_wang(bcr: &BcrFunction) -> Result<BetaFunction, TransferError> {
    let at1 = bcr.eval(1.0);
    if !at1.is_finite() {
        return Err(TransferError::IllPosed(format!("β_BCR(1) = {at1} is not finite")));
    }
    match bcr {
        BcrFunction::Table(t) => {
            if t.is_empty() || t[0].0 > 1.0 {
                return Err(TransferError::IllPosed("table must start at s <= 1".into()));
            }
            let mut mono = t.clone();
            for i in 1..mono.len() {
                mono[i].1 = mono[i].1.min(mono[i - 1].1);
            }
            // β(r) = smallest s_i with v_i ≤ r; breakpoints at r = v_i
            let mut entries: Vec<(f64, f64)> = Vec::new();
            for &(s, v) in mono.iter().rev() {
                match entries.last_mut() {
                    Some(last) if last.0 == v => last.1 = last.1.min(s),
                    _ => entries.push((v, s.max(1.0))),
                }
            }
            entries.reverse();
            let r0 = mono.last().map(|e| e.1).unwrap_or(0.0);
            // ascending r with decreasing β
            entries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let mut cleaned: Vec<(f64, f64)> = Vec::new();
            for e in entries {
                match cleaned.last_mut() {
                    Some(last) if last.0 == e.0 => last.1 = last.1.min(e.1),
                    _ => cleaned.push(e),
                }
            }
            BetaFunction::table(r0, cleaned)
        }
        BcrFunction::Closed(f) => {
            let f = f.clone();
            let mut r0 = at1;
            for k in 1..=1023 {
                let v = f(2f64.powi(k));
                if v.is_finite() {
                    r0 = r0.min(v);
                }
            }
            if r0 < 1e-300 {
                r0 = 0.0;
            }
            Ok(BetaFunction::closed(r0, move |r| inverse_decreasing(&*f, r, 1.0)))
        }
    }
}

/// `inf{s ≥ s_min : g(s) ≤ r}` for non-increasing `g`, by doubling and
/// bisection in `log s`; `+∞` when the level is never reached.
fn inverse_decreasing(g: &dyn Fn(f64) -> f64, r: f64, s_min: f64) -> f64 {
    if g(s_min) <= r {
        return s_min;
    }
    let mut lo = s_min;
    let mut hi = 2.0 * s_min;
    let mut k = 0;
    while !(g(hi) <= r) {
        lo = hi;
        hi *= 2.0;
        k += 1;
        if k > 1100 || !hi.is_finite() {
            return f64::INFINITY;
        }
    }
    for _ in 0..200 {
        let mid = (0.5 * (lo.ln() + hi.ln())).exp();
        if !(mid > lo && mid < hi) || hi - lo <= 1e-14 * hi {
            break;
        }
        if g(mid) <= r {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// `β_BCR(s) = inf{r > r0 : β(r) ≤ s}`, capped by the Poincaré constant when
/// one is supplied (a Poincaré inequality gives `β(C_P) = 1`).
pub fn wang_to_bcr(beta: &BetaFunction, c_poincare: Option<f64>) -> BcrFunction {
    let cap = c_poincare.unwrap_or(f64::INFINITY);
    match &beta.form {
        BetaForm::Table(t) => {
            let mut out: Vec<(f64, f64)> = Vec::new();
            // each breakpoint (r_i, β_i) gives β_BCR(s) ≤ r_i for s ≥ β_i
            let mut pts: Vec<(f64, f64)> = t.iter().map(|&(r, b)| (b.max(1.0), r.max(beta.r0))).collect();
            pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.partial_cmp(&b.1).unwrap()));
            let mut best = f64::INFINITY;
            for (s, r) in pts {
                best = best.min(r);
                match out.last_mut() {
                    Some(last) if last.0 == s => last.1 = best,
                    _ => out.push((s, best)),
                }
            }
            if out.first().is_none_or(|e| e.0 > 1.0) {
                out.insert(0, (1.0, f64::INFINITY));
            }
            for e in out.iter_mut() {
                e.1 = e.1.min(cap);
            }
            BcrFunction::Table(out)
        }
        BetaForm::Closed(f) => {
            let f = f.clone();
            let r0 = beta.r0;
            BcrFunction::closed(move |s| {
                let v = smallest_r_below(&*f, r0, s);
                v.min(cap)
            })
        }
    }
}

/// `inf{r > r0 : β(r) ≤ s}` for non-increasing `β`.
fn smallest_r_below(beta: &dyn Fn(f64) -> f64, r0: f64, s: f64) -> f64 {
    let ok = |r: f64| {
        let v = beta(r);
        v.is_finite() && v <= s
    };
    let start = if r0 > 0.0 { r0 * (1.0 + 1e-13) } else { 1e-300 };
    if ok(start) {
        return r0;
    }
    let mut lo = start;
    let mut hi = if r0 > 0.0 { 2.0 * r0 } else { 1e-12 };
    let mut k = 0;
    while !ok(hi) {
        lo = hi;
        hi = if r0 > 0.0 { r0 + 2.0 * (hi - r0) } else { 2.0 * hi };
        k += 1;
        if k > 2100 || !hi.is_finite() {
            return f64::INFINITY;
        }
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) || hi - lo <= 1e-14 * hi {
            break;
        }
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// SPI from a measure-capacity profile: `β(r) = 1/sup{κ : C_κ ≥ 8/r}`, valid
/// from `r0 = 8/C_{κ_min}`.
pub fn mc_to_spi(profile: &CapacityProfile) -> Result<BetaFunction, TransferError> {
    if profile.entries.is_empty() {
        return Err(TransferError::InvalidInput("empty profile".into()));
    }
    let mut entries: Vec<(f64, f64)> = Vec::new();
    for &(kappa, c) in &profile.entries {
        if !(c > 0.0) {
            continue;
        }
        let r = 8.0 / c;
        match entries.last_mut() {
            Some(last) if last.0 == r => last.1 = last.1.min(1.0 / kappa),
            _ => entries.push((r, 1.0 / kappa)),
        }
    }
    if entries.is_empty() {
        return Err(TransferError::HypothesisNotSatisfied("profile carries no positive C_κ".into()));
    }
    let r0 = entries[0].0;
    BetaFunction::table(r0, entries)
}

/// Checks `ψ(x) → 0` and `ψ(x)/x → ∞` on `x = 10^{-k}`.
pub fn check_psi(psi: &dyn Fn(f64) -> f64) -> Result<(), TransferError> {
    let xs: Vec<f64> = (1..=12).map(|k| 10f64.powi(-k)).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| psi(x)).collect();
    if vals.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(TransferError::PsiCheck("ψ must be finite and positive on (0, 1)".into()));
    }
    if vals.windows(2).any(|w| !(w[1] < w[0])) || !(vals[11] < 0.1 * vals[0]) {
        return Err(TransferError::PsiCheck("ψ(x) does not decrease to 0".into()));
    }
    let ratios: Vec<f64> = vals.iter().zip(&xs).map(|(v, x)| v / x).collect();
    if ratios.windows(2).any(|w| !(w[1] > w[0])) || !(ratios[11] > 10.0 * ratios[0]) {
        return Err(TransferError::PsiCheck("ψ(x)/x does not grow to infinity".into()));
    }
    Ok(())
}

/// `ψ(x) = x log(1/x)`.
pub fn psi_default(x: f64) -> f64 {
    x * (1.0 / x).ln()
}

/// `sup_{r > r0} (1 - β(r) w) / r`.
pub fn sup_over_r(beta: &BetaFunction, w: f64) -> Result<f64, TransferError> {
    let obj = |r: f64| beta.eval(r).map_or(f64::NEG_INFINITY, |b| (1.0 - b * w) / r);
    if let Some(t) = beta.table_entries() {
        // on each step β is constant and the objective is best at the left end
        return Ok(t.iter().map(|e| obj(e.0.max(beta.r0))).fold(f64::NEG_INFINITY, f64::max));
    }
    let r0 = beta.r0;
    let at = |t: f64| obj(r0 + t.exp());
    let mut lo_t = (1e-12 * r0.max(1.0)).ln();
    let mut hi_t = (r0.max(1.0) * 4.0).ln();
    let samples = 400;
    let mut prev = f64::NEG_INFINITY;
    for _ in 0..60 {
        let step = (hi_t - lo_t) / samples as f64;
        let (mut best, mut arg) = (f64::NEG_INFINITY, 0usize);
        for i in 0..=samples {
            let v = at(lo_t + step * i as f64);
            if v > best {
                best = v;
                arg = i;
            }
        }
        let at_edge_hi = arg == samples;
        let at_edge_lo = arg == 0;
        if at_edge_hi {
            hi_t += std::f64::consts::LN_2;
        }
        if at_edge_lo {
            lo_t -= 10.0 * std::f64::consts::LN_2;
        }
        if (at_edge_hi || at_edge_lo) && (best - prev).abs() > 1e-12 * best.abs().max(1e-300) {
            prev = best;
            continue;
        }
        if !best.is_finite() {
            return Ok(best);
        }
        let a = lo_t + step * arg.saturating_sub(1) as f64;
        let b = lo_t + step * (arg + 1).min(samples) as f64;
        let tol = Tolerance::new(1e-13, 1e-13, 300)?;
        let m = minimize_scalar(|t| -at(t), a, b, tol)?;
        return Ok(best.max(-m.min));
    }
    Ok(prev)
}

/// The two terms of the MC profile at one `κ`: `C ψ(κ)/κ · b★²` and
/// `sup_{r>r0} (1 - β(r) w)/r · (1 - b★)²`.
pub fn profile_terms(
    beta: &BetaFunction,
    c_mc: f64,
    kappa: f64,
    psi_kappa: f64,
    weight: f64,
    b_star: f64,
) -> Result<(f64, f64), TransferError> {
    let first = c_mc * psi_kappa / kappa * b_star * b_star;
    let second = sup_over_r(beta, weight)? * (1.0 - b_star) * (1.0 - b_star);
    Ok((first, second))
}

fn profile_from_weights<W>(
    beta: &BetaFunction,
    c_mc: f64,
    psi: &(dyn Fn(f64) -> f64 + Sync),
    weight: W,
    b_star: f64,
    kappa_grid: &[f64],
) -> Result<CapacityProfile, TransferError>
where
    W: Fn(f64) -> Result<f64, TransferError> + Sync,
{
    if !(c_mc > 0.0) {
        return Err(TransferError::InvalidInput(format!("Poincaré MC constant must be > 0, got {c_mc}")));
    }
    if !(b_star > 0.0 && b_star < 1.0) {
        return Err(TransferError::InvalidInput(format!("b_star must lie in (0, 1), got {b_star}")));
    }
    validate_kappa_grid(kappa_grid)?;
    let entries: Result<Vec<(f64, f64)>, TransferError> = kappa_grid
        .par_iter()
        .map(|&kappa| {
            let (first, second) = profile_terms(beta, c_mc, kappa, psi(kappa), weight(kappa)?, b_star)?;
            Ok((kappa, first.min(second).max(0.0)))
        })
        .collect();
    Ok(CapacityProfile::new(entries?)?)
}

/// MC profile from an SPI:
/// `C_κ = min(C ψ(κ)/κ · b★², sup_{r>r0} (1 - β(r)ψ(κ))/r · (1 - b★)²)`.
pub fn spi_to_mc(
    beta: &BetaFunction,
    c_mc: f64,
    psi: &(dyn Fn(f64) -> f64 + Sync),
    b_star: f64,
    kappa_grid: &[f64],
) -> Result<CapacityProfile, TransferError> {
    check_psi(psi)?;
    profile_from_weights(beta, c_mc, psi, |k| Ok(psi(k)), b_star, kappa_grid)
}

/// MC profile from an Orlicz SPI: as [`spi_to_mc`] with `θ²(ψ(κ))` in the
/// second term.
pub fn ospi_to_mc(
    ospi: &OrliczSpi,
    c_mc: f64,
    psi: &(dyn Fn(f64) -> f64 + Sync),
    b_star: f64,
    kappa_grid: &[f64],
) -> Result<CapacityProfile, TransferError> {
    check_psi(psi)?;
    check_growth_conditions(&ospi.pair)?;
    let pair = &ospi.pair;
    profile_from_weights(
        &ospi.beta,
        c_mc,
        psi,
        |k| Ok(theta_sq(psi(k), pair)?),
        b_star,
        kappa_grid,
    )
}

/// Orlicz SPI to SPI through the MC profile.
pub fn ospi_to_spi(
    ospi: &OrliczSpi,
    c_mc: f64,
    psi: &(dyn Fn(f64) -> f64 + Sync),
    b_star: f64,
    kappa_grid: &[f64],
) -> Result<BetaFunction, TransferError> {
    mc_to_spi(&ospi_to_mc(ospi, c_mc, psi, b_star, kappa_grid)?)
}

/// Poincaré constant `min_r r/(1 - β(r)/2)` over the grid points with `β(r) < 2`,
/// refined by Brent for closed forms. Returns `(C, r)`.
pub fn spi_to_poincare(beta: &BetaFunction, r_grid: &[f64]) -> Result<(f64, f64), TransferError> {
    let c_of = |r: f64| match beta.eval(r) {
        Some(b) if b < 2.0 => r / (1.0 - 0.5 * b),
        _ => f64::INFINITY,
    };
    let mut best = (f64::INFINITY, f64::NAN, 0usize);
    for (i, &r) in r_grid.iter().enumerate() {
        let c = c_of(r);
        if c < best.0 {
            best = (c, r, i);
        }
    }
    if !best.0.is_finite() {
        return Err(TransferError::HypothesisNotSatisfied("β(r) >= 2 at every grid point".into()));
    }
    if beta.table_entries().is_none() && r_grid.len() >= 2 {
        let i = best.2;
        let a = r_grid[i.saturating_sub(1)];
        let b = r_grid[(i + 1).min(r_grid.len() - 1)];
        if a < b {
            let m = minimize_scalar(c_of, a, b, Tolerance::new(1e-13, 1e-12, 300)?)?;
            if m.min < best.0 {
                best = (m.min, m.argmin, i);
            }
        }
    }
    Ok((best.0, best.1))
}

/// Sides of the support inequality `(1 - β(r) μ(supp f)) ∫f² ≤ r ∫f'²` for a
/// grid function.
pub fn lemma1_bound(m: &Measure1D, values: &[f64], beta: &BetaFunction, r: f64) -> Result<(f64, f64), TransferError> {
    let b = beta.eval(r).ok_or(TransferError::BelowThreshold { r, r0: beta.r0 })?;
    let supp = support_mass(m, values, 1e-12)?;
    let sq: Vec<f64> = values.iter().map(|v| v * v).collect();
    let l2 = m.integrate_grid(&sq)?;
    let energy = m.grid_dirichlet_energy(values)?;
    Ok(((1.0 - b * supp) * l2, r * energy))
}

/// Geometric grid with `points` values from `lo` to `hi`.
pub fn geometric_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let points = points.max(2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else {
                (a + (b - a) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bcr_inverse_of_reciprocal() {
        let beta = bcr_to_wang(&BcrFunction::closed(|s| 1.0 / s)).unwrap();
        assert_eq!(beta.r0, 0.0);
        for r in [0.01f64, 0.3, 1.0, 2.0, 10.0] {
            let expected = (1.0 / r).max(1.0);
            assert!((beta.eval(r).unwrap() / expected - 1.0).abs() < 1e-12, "r = {r}");
        }
    }

    #[test]
    fn bcr_constant() {
        let beta = bcr_to_wang(&BcrFunction::closed(|_| 0.7)).unwrap();
        assert_eq!(beta.r0, 0.7);
        assert_eq!(beta.eval(0.8), Some(1.0));
        assert_eq!(beta.eval(0.7), None);
        assert!(bcr_to_wang(&BcrFunction::closed(|_| f64::INFINITY)).is_err());
    }

    #[test]
    fn wang_to_bcr_examples() {
        let c = 2.0;
        let beta = BetaFunction::closed(0.0, move |r| (c / r).exp());
        let bcr = wang_to_bcr(&beta, None);
        for s in [1.5, 3.0, 100.0] {
            assert!((bcr.eval(s) / (c / s.ln()) - 1.0).abs() < 1e-12);
        }
        assert!(bcr.eval(1.0) > 1e15);
        assert_eq!(wang_to_bcr(&beta, Some(5.0)).eval(1.0), 5.0);
        let one = BetaFunction::closed(0.3, |_| 1.0);
        assert_eq!(wang_to_bcr(&one, None).eval(1.0), 0.3);
        assert_eq!(wang_to_bcr(&one, None).eval(7.0), 0.3);
    }

    #[test]
    fn galois_round_trip_is_below() {
        let bcr = BcrFunction::closed(|s| 0.2 + 1.0 / s.sqrt());
        let back = wang_to_bcr(&bcr_to_wang(&bcr).unwrap(), None);
        for s in [1.0, 1.3, 2.0, 10.0, 1e4] {
            assert!(back.eval(s) <= bcr.eval(s) * (1.0 + 1e-12), "s = {s}");
        }
    }

    #[test]
    fn bcr_tables() {
        let bcr = BcrFunction::Table(vec![(1.0, 4.0), (2.0, 2.0), (4.0, 1.0)]);
        let beta = bcr_to_wang(&bcr).unwrap();
        assert_eq!(beta.r0, 1.0);
        assert_eq!(beta.eval(1.0), Some(4.0));
        assert_eq!(beta.eval(3.0), Some(2.0));
        assert_eq!(beta.eval(4.0), Some(1.0));
        assert_eq!(beta.eval(0.5), None);
        let back = wang_to_bcr(&beta, None);
        for s in [1.0, 1.5, 2.0, 3.0, 4.0, 9.0] {
            assert!(back.eval(s) <= bcr.eval(s));
        }
    }

    #[test]
    fn mc_to_spi_log_profile() {
        let kappas: Vec<f64> = geometric_grid(1e-12, 0.5, 400);
        let profile = CapacityProfile::new(kappas.iter().map(|&k| (k, (1.0 / k).ln() / 32.0)).collect()).unwrap();
        let beta = mc_to_spi(&profile).unwrap();
        for r in [30.0, 50.0, 100.0, 300.0] {
            let b = beta.eval(r).unwrap();
            let exact = (256.0 / r).exp();
            // grid-resolved: β ≥ exact, within one grid ratio
            assert!(b >= exact * (1.0 - 1e-12));
            assert!(b <= exact * 1.1, "r = {r}: {b} vs {exact}");
        }
    }

    #[test]
    fn mc_to_spi_constant_profile_and_scaling() {
        let c = 3.0;
        let kappas = geometric_grid(1e-6, 0.5, 50);
        let profile = CapacityProfile::new(kappas.iter().map(|&k| (k, c)).collect()).unwrap();
        let beta = mc_to_spi(&profile).unwrap();
        assert_eq!(beta.eval(8.0 / c), Some(2.0));
        assert_eq!(beta.eval(10.0), Some(2.0));
        assert_eq!(beta.eval(8.0 / c * 0.99), None);
        let base = CapacityProfile::new(kappas.iter().map(|&k| (k, 1.0 + (1.0 / k).ln())).collect()).unwrap();
        let doubled = CapacityProfile::new(base.entries.iter().map(|&(k, c)| (k, 2.0 * c)).collect()).unwrap();
        let (b1, b2) = (mc_to_spi(&base).unwrap(), mc_to_spi(&doubled).unwrap());
        for r in [0.5, 1.0, 2.0, 4.0] {
            assert_eq!(b2.eval(r), b1.eval(2.0 * r));
        }
    }

    #[test]
    fn psi_checks() {
        check_psi(&psi_default).unwrap();
        check_psi(&|x: f64| x.sqrt()).unwrap();
        assert!(check_psi(&|x: f64| x).is_err());
        assert!(check_psi(&|_| 0.5).is_err());
        assert!((psi_default((-1f64).exp()) - (-1f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn spi_to_mc_terms() {
        let beta = BetaFunction::closed(1.0, |_| 1.0);
        let kappas = vec![1e-300, 1e-100, 1e-20];
        let prof = spi_to_mc(&beta, 1.0, &psi_default, 0.5, &kappas).unwrap();
        // second term tends to (1 - b★)²/r0 = 1/4
        assert!((prof.entries[0].1 - 0.25).abs() < 1e-9);
        // first term with C = 1, b★ = 1/2: log(1/κ)/4
        let k = 0.3;
        let prof = spi_to_mc(&BetaFunction::closed(0.0, |_| 1e-30), 1.0, &psi_default, 0.5, &[k]).unwrap();
        assert!((prof.entries[0].1 - (1.0 / k).ln() / 4.0).abs() < 1e-12);
    }

    #[test]
    fn poincare_from_spi() {
        let one = BetaFunction::table(0.0, vec![(1.0, 1.0)]).unwrap();
        assert_eq!(spi_to_poincare(&one, &[1.0]).unwrap().0, 2.0);
        let two = BetaFunction::closed(0.0, |_| 2.0);
        assert!(spi_to_poincare(&two, &geometric_grid(0.1, 10.0, 20)).is_err());
        let e = BetaFunction::closed(0.0, |r: f64| (1.0 / r).exp());
        let grid = geometric_grid(0.5, 50.0, 200);
        let (c, _) = spi_to_poincare(&e, &grid).unwrap();
        let dense = (1..200_000)
            .map(|i| 1.0 + i as f64 * 1e-4)
            .map(|r: f64| {
                let b = (1.0 / r).exp();
                if b < 2.0 {
                    r / (1.0 - 0.5 * b)
                } else {
                    f64::INFINITY
                }
            })
            .fold(f64::INFINITY, f64::min);
        assert!(c.is_finite());
        assert!((c - dense).abs() < 1e-6 * dense, "{c} vs {dense}");
    }

    #[test]
    fn table_monotonized() {
        let b = BetaFunction::table(0.0, vec![(1.0, 3.0), (2.0, 5.0), (3.0, 1.0)]).unwrap();
        assert_eq!(b.eval(2.5), Some(3.0));
        assert!(BetaFunction::table(0.0, vec![(2.0, 1.0), (1.0, 1.0)]).is_err());
    }
}
