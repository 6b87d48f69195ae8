//! Capacities of intervals and measure-capacity profiles `κ ↦ C_κ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measure::{Measure1D, MeasureError};
use crate::numerics::{minimize_scanned, NumericsError, Tolerance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CapacityError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("set mass {mass} exceeds 1/2")]
    MassTooLarge { mass: f64 },
    #[error("kappa = {kappa} outside the profile range [{lo}, {hi}]")]
    OutOfRange { kappa: f64, lo: f64, hi: f64 },
    #[error("profile has no entry at kappa = 1/2")]
    MissingHalf,
    #[error("no admissible support found")]
    NoAdmissibleSupport,
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Test-set family attaining the profile value at one κ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestSet {
    RightTail,
    LeftTail,
    TwoTails,
    Centered,
}

/// Monotone table `κ ↦ C_κ`, κ ascending in `(0, 1/2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityProfile {
    pub entries: Vec<(f64, f64)>,
}

impl CapacityProfile {
    /// Validates the table and replaces `C_κ` by the running minimum over
    /// `κ' ≤ κ`, so `C_κ` is non-increasing and `κ/C_κ` non-decreasing.
    pub fn new(entries: Vec<(f64, f64)>) -> Result<Self, CapacityError> {
        if entries.is_empty() {
            return Err(CapacityError::InvalidInput("empty profile".into()));
        }
        validate_kappa_grid(&entries.iter().map(|e| e.0).collect::<Vec<_>>())?;
        // zero is allowed and carries no information
        if entries.iter().any(|e| !(e.1 >= 0.0)) {
            return Err(CapacityError::InvalidInput("profile values must be >= 0".into()));
        }
        let mut out = entries;
        for i in 1..out.len() {
            out[i].1 = out[i].1.min(out[i - 1].1);
        }
        Ok(Self { entries: out })
    }

    pub fn kappas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.1).collect()
    }

    /// `C_κ` interpolated linearly in `log κ`.
    pub fn at(&self, kappa: f64) -> Result<f64, CapacityError> {
        let lo = self.entries[0].0;
        let hi = self.entries[self.entries.len() - 1].0;
        let slack = 1e-12 * hi;
        if !(kappa >= lo * (1.0 - 1e-12) && kappa <= hi + slack) {
            return Err(CapacityError::OutOfRange { kappa, lo, hi });
        }
        let i = self.entries.partition_point(|e| e.0 < kappa);
        if i < self.entries.len() && (self.entries[i].0 - kappa).abs() <= 1e-12 * kappa {
            return Ok(self.entries[i].1);
        }
        if i == 0 {
            return Ok(self.entries[0].1);
        }
        if i == self.entries.len() {
            return Ok(self.entries[i - 1].1);
        }
        let (k0, c0) = self.entries[i - 1];
        let (k1, c1) = self.entries[i];
        let t = (kappa.ln() - k0.ln()) / (k1.ln() - k0.ln());
        if !c0.is_finite() || !c1.is_finite() {
            return Ok(c0.min(c1));
        }
        Ok(c0 + t * (c1 - c0))
    }
}

pub(crate) fn validate_kappa_grid(kappas: &[f64]) -> Result<(), CapacityError> {
    if kappas.is_empty() {
        return Err(CapacityError::InvalidInput("empty kappa grid".into()));
    }
    if kappas.iter().any(|&k| !(k > 0.0 && k <= 0.5)) {
        return Err(CapacityError::InvalidInput("kappa values must lie in (0, 1/2]".into()));
    }
    if kappas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CapacityError::InvalidInput("kappa grid must be strictly ascending".into()));
    }
    Ok(())
}

fn tol() -> Tolerance {
    Tolerance::new(1e-13, 1e-11, 300).expect("static tolerance")
}

/// Point `α < x` with `μ([α, x]) = u`, or `None` if the domain edge is reached.
fn step_left(m: &Measure1D, x: f64, u: f64) -> Result<Option<f64>, CapacityError> {
    let below = m.cdf(x);
    if u >= below {
        return Ok(None);
    }
    let median_side = below <= 0.5;
    let alpha = if median_side {
        m.quantile_left(below - u)?
    } else {
        let above = m.survival(x);
        m.quantile_right((above + u).min(1.0 - f64::EPSILON))?
    };
    Ok(Some(alpha.min(x)))
}

/// Point `β > x` with `μ([x, β]) = v`, or `None` if the domain edge is reached.
fn step_right(m: &Measure1D, x: f64, v: f64) -> Result<Option<f64>, CapacityError> {
    let above = m.survival(x);
    if v >= above {
        return Ok(None);
    }
    let beta = if above <= 0.5 {
        m.quantile_right(above - v)?
    } else {
        let below = m.cdf(x);
        m.quantile_left((below + v).min(1.0 - f64::EPSILON))?
    };
    Ok(Some(beta.max(x)))
}

fn conductance(r: f64) -> f64 {
    if r > 0.0 {
        1.0 / r
    } else {
        f64::INFINITY
    }
}

/// Capacity of `[a, b]`: the least `∫ f'² dμ` over `f` with `1_{[a,b]} ≤ f ≤ 1`
/// and `μ(supp f) ≤ 1/2`.
///
/// For a support `[α, β]` the optimum is `1/R(α, a) + 1/R(b, β)` with
/// `R(s, t) = ∫_s^t dx/ρ`; the spare mass `1/2 - μ([a,b])` is split between the
/// two sides by a scanned Brent search. A side reaching the domain edge costs
/// nothing, since `f` may stay equal to 1 there.
pub fn interval_capacity(m: &Measure1D, a: f64, b: f64) -> Result<f64, CapacityError> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(CapacityError::InvalidInput(format!("need a < b, got [{a}, {b}]")));
    }
    let (lo, hi) = m.domain();
    let (a, b) = (a.max(lo), b.min(hi));
    if !(a < b) {
        return Err(CapacityError::InvalidInput("interval misses the domain".into()));
    }
    let mass = m.mass(a, b);
    if mass > 0.5 + 1e-12 {
        return Err(CapacityError::MassTooLarge { mass });
    }
    let spare = 0.5 - mass;
    let left_open = a > lo;
    let right_open = b < hi;
    if spare <= 1e-15 && (left_open || right_open) {
        return Ok(f64::INFINITY);
    }
    let left = |u: f64| -> Result<f64, CapacityError> {
        if !left_open {
            return Ok(0.0);
        }
        Ok(match step_left(m, a, u)? {
            None => 0.0,
            Some(alpha) => conductance(m.resistance(alpha, a)),
        })
    };
    let right = |v: f64| -> Result<f64, CapacityError> {
        if !right_open {
            return Ok(0.0);
        }
        Ok(match step_right(m, b, v)? {
            None => 0.0,
            Some(beta) => conductance(m.resistance(b, beta)),
        })
    };
    match (left_open, right_open) {
        (false, false) => return Ok(0.0),
        (true, false) => return left(spare),
        (false, true) => return right(spare),
        _ => {}
    }
    split_minimum(spare, |u| Ok(left(u)? + right(spare - u)?), &[m.mass(lo, a), spare - m.mass(b, hi)])
}

/// Minimizes `energy(u)` over `u ∈ (0, spare)`, also trying the `kinks`.
fn split_minimum<E>(spare: f64, energy: E, kinks: &[f64]) -> Result<f64, CapacityError>
where
    E: Fn(f64) -> Result<f64, CapacityError>,
{
    let failure = std::cell::Cell::new(None);
    let h = |u: f64| match energy(u) {
        Ok(v) => v,
        Err(e) => {
            failure.set(Some(e));
            f64::INFINITY
        }
    };
    let m = minimize_scanned(h, 0.0, spare, 64, tol())?;
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let mut best = m.min;
    for &k in kinks {
        if k > 0.0 && k < spare {
            best = best.min(energy(k)?);
        }
    }
    if !best.is_finite() {
        return Err(CapacityError::NoAdmissibleSupport);
    }
    Ok(best)
}

/// Capacity of the two-tail set `[lo, a] ∪ [b, hi]`.
pub fn two_tail_capacity(m: &Measure1D, a: f64, b: f64) -> Result<f64, CapacityError> {
    if !(a < b) {
        return Err(CapacityError::InvalidInput(format!("need a < b, got {a}, {b}")));
    }
    let mass_l = m.cdf(a);
    let mass_r = m.survival(b);
    let mass = mass_l + mass_r;
    if mass > 0.5 + 1e-12 {
        return Err(CapacityError::MassTooLarge { mass });
    }
    let spare = 0.5 - mass;
    if spare <= 1e-15 {
        return Ok(f64::INFINITY);
    }
    let left = |u: f64| -> Result<f64, CapacityError> {
        Ok(match step_right(m, a, u)? {
            None => 0.0,
            Some(alpha) => conductance(m.resistance(a, alpha)),
        })
    };
    let right = |v: f64| -> Result<f64, CapacityError> {
        Ok(match step_left(m, b, v)? {
            None => 0.0,
            Some(beta) => conductance(m.resistance(beta, b)),
        })
    };
    split_minimum(spare, |u| Ok(left(u)? + right(spare - u)?), &[])
}

/// Profile value at one κ and the family attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub kappa: f64,
    pub c_kappa: f64,
    pub family: TestSet,
}

/// Minimum of `cap(A)/κ` over the test-set family with `μ(A) = κ`.
pub fn family_ratio(m: &Measure1D, kappa: f64) -> Result<ProfilePoint, CapacityError> {
    if !(kappa > 0.0 && kappa <= 0.5) {
        return Err(CapacityError::InvalidInput(format!("kappa = {kappa} outside (0, 1/2]")));
    }
    let (lo, hi) = m.domain();
    let mut best = ProfilePoint {
        kappa,
        c_kappa: f64::INFINITY,
        family: TestSet::RightTail,
    };
    let mut consider = |cap: f64, family: TestSet| {
        let c = cap / kappa;
        if c < best.c_kappa {
            best.c_kappa = c;
            best.family = family;
        }
    };
    if kappa < 0.5 {
        let t = m.quantile_right(kappa)?;
        consider(interval_capacity(m, t, hi)?, TestSet::RightTail);
        let t = m.quantile_left(kappa)?;
        consider(interval_capacity(m, lo, t)?, TestSet::LeftTail);

        // two tails with an optimized mass split
        let failure = std::cell::Cell::new(None);
        let split = |w: f64| {
            let two = (|| -> Result<f64, CapacityError> {
                let a = m.quantile_left(kappa * w)?;
                let b = m.quantile_right(kappa * (1.0 - w))?;
                two_tail_capacity(m, a, b)
            })();
            two.unwrap_or_else(|e| {
                failure.set(Some(e));
                f64::INFINITY
            })
        };
        let two = minimize_scanned(split, 0.0, 1.0, 8, Tolerance::new(1e-6, 1e-6, 100)?)?;
        if let Some(e) = failure.take() {
            return Err(e);
        }
        consider(two.min, TestSet::TwoTails);

        let med_below = m.cdf(m.median()?);
        let a = m.quantile_left((med_below - 0.5 * kappa).max(f64::MIN_POSITIVE))?;
        let b = m.quantile_right((1.0 - med_below - 0.5 * kappa).max(f64::MIN_POSITIVE))?;
        if a < b {
            consider(interval_capacity(m, a, b)?, TestSet::Centered);
        }
    }
    Ok(best)
}

/// Raw family values on `kappa_grid` (not monotonized).
pub fn profile_points(m: &Measure1D, kappa_grid: &[f64]) -> Result<Vec<ProfilePoint>, CapacityError> {
    validate_kappa_grid(kappa_grid)?;
    kappa_grid.par_iter().map(|&k| family_ratio(m, k)).collect()
}

/// Monotonized capacity profile of `m` on `kappa_grid`.
pub fn capacity_profile(m: &Measure1D, kappa_grid: &[f64]) -> Result<CapacityProfile, CapacityError> {
    let points = profile_points(m, kappa_grid)?;
    CapacityProfile::new(points.iter().map(|p| (p.kappa, p.c_kappa)).collect())
}

/// Whether the profile's `C_κ` at `kappa` is at least `c`.
pub fn check_mc(profile: &CapacityProfile, kappa: f64, c: f64) -> Result<bool, CapacityError> {
    Ok(profile.at(kappa)? >= c)
}

/// Poincaré-constant sandwich `[1/C_MC, 4/C_MC]` with `C_MC = C_{1/2}`.
pub fn poincare_from_mc(profile: &CapacityProfile) -> Result<(f64, f64), CapacityError> {
    let last = profile.entries.last().ok_or(CapacityError::MissingHalf)?;
    if (last.0 - 0.5).abs() > 1e-12 {
        return Err(CapacityError::MissingHalf);
    }
    let c = last.1;
    Ok((1.0 / c, 4.0 / c))
}

/// Geometric κ grid from `kappa_min` up to 1/2 (inclusive).
pub fn geometric_kappa_grid(kappa_min: f64, points: usize) -> Vec<f64> {
    let points = points.max(2);
    let (l0, l1) = (kappa_min.ln(), 0.5f64.ln());
    let mut g: Vec<f64> = (0..points)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (points - 1) as f64).exp())
        .collect();
    g[points - 1] = 0.5;
    g
}
