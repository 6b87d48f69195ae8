//! Probability measures `e^{-V(x)} dx / Z` on a truncated interval.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::expr::{Expr, ExprError};
use crate::numerics::{root_find_monotone, simpson_weights, NumericsError, Tolerance};

/// Largest node count reached by automatic refinement.
const MAX_NODES: usize = (1 << 16) + 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("potential is not finite at x = {x}")]
    NonFinitePotential { x: f64 },
    #[error("non-integrable density: {0}")]
    NonIntegrable(String),
    #[error("tail mass estimate {estimate:e} exceeds tolerance {tol:e} (domain too small)")]
    TailMassExceeded { estimate: f64, tol: f64 },
    #[error("integrand is not finite at x = {x}")]
    NonFiniteIntegrand { x: f64 },
    #[error("kappa = {0} outside (0, 1)")]
    KappaOutOfRange(f64),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// The potential `V` of `μ = e^{-V} dx / Z`.
#[derive(Clone)]
pub enum Potential {
    /// `x²/2`.
    Gaussian,
    /// `(x² - 1)²`.
    DoubleWell,
    /// `|x|^alpha`.
    Power { alpha: f64 },
    /// `Σ c_k x^k`, coefficients in increasing degree.
    Polynomial { coeffs: Vec<f64> },
    Expression { source: String, expr: Arc<Expr> },
}

impl Potential {
    /// Preset by name: `gaussian`, `double-well`, `power` (params `[alpha]`),
    /// `polynomial` (params are the coefficients).
    pub fn preset(name: &str, params: &[f64]) -> Result<Self, MeasureError> {
        let p = match name {
            "gaussian" => Potential::Gaussian,
            "double-well" => Potential::DoubleWell,
            "power" => {
                let alpha = params.first().copied().unwrap_or(1.0);
                if !(alpha > 0.0) {
                    return Err(MeasureError::InvalidInput(format!("power preset needs alpha > 0, got {alpha}")));
                }
                Potential::Power { alpha }
            }
            "polynomial" => {
                if params.is_empty() {
                    return Err(MeasureError::InvalidInput("polynomial preset needs coefficients".into()));
                }
                Potential::Polynomial {
                    coeffs: params.to_vec(),
                }
            }
            other => return Err(MeasureError::InvalidInput(format!("unknown preset '{other}'"))),
        };
        Ok(p)
    }

    pub fn expression(source: &str) -> Result<Self, ExprError> {
        let expr = Expr::parse(source)?;
        Ok(Potential::Expression {
            source: source.to_string(),
            expr: Arc::new(expr),
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Potential::Gaussian => 0.5 * x * x,
            Potential::DoubleWell => {
                let t = x * x - 1.0;
                t * t
            }
            Potential::Power { alpha } => x.abs().powf(*alpha),
            Potential::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
            Potential::Expression { expr, .. } => expr.eval(x),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Potential::Gaussian => "gaussian",
            Potential::DoubleWell => "double-well",
            Potential::Power { .. } => "power",
            Potential::Polynomial { .. } => "polynomial",
            Potential::Expression { .. } => "expression",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self {
            Potential::Power { alpha } => vec![*alpha],
            Potential::Polynomial { coeffs } => coeffs.clone(),
            _ => Vec::new(),
        }
    }

    pub fn source(&self) -> Option<&str> {
        match self {
            Potential::Expression { source, .. } => Some(source),
            _ => None,
        }
    }
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Expression { source, .. } => write!(f, "Expression({source:?})"),
            other => write!(f, "{}{:?}", other.kind(), other.params()),
        }
    }
}

/// Quadrature value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

// 15-point Kronrod abscissae on [-1, 1] (ascending) and matching weights;
// Gauss weights are nonzero on the odd positions only.
const GK_X: [f64; 15] = [
    -0.991_455_371_120_812_6,
    -0.949_107_912_342_758_5,
    -0.864_864_423_359_769_1,
    -0.741_531_185_599_394_4,
    -0.586_087_235_467_691_1,
    -0.405_845_151_377_397_2,
    -0.207_784_955_007_898_5,
    0.0,
    0.207_784_955_007_898_5,
    0.405_845_151_377_397_2,
    0.586_087_235_467_691_1,
    0.741_531_185_599_394_4,
    0.864_864_423_359_769_1,
    0.949_107_912_342_758_5,
    0.991_455_371_120_812_6,
];
const GK_WK: [f64; 15] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
    0.204_432_940_075_298_9,
    0.190_350_578_064_785_4,
    0.169_004_726_639_267_9,
    0.140_653_259_715_525_92,
    0.104_790_010_322_250_18,
    0.063_092_092_629_978_55,
    0.022_935_322_010_529_22,
];
const GK_WG: [f64; 15] = [
    0.0,
    0.129_484_966_168_869_7,
    0.0,
    0.279_705_391_489_276_7,
    0.0,
    0.381_830_050_505_118_9,
    0.0,
    0.417_959_183_673_469_4,
    0.0,
    0.381_830_050_505_118_9,
    0.0,
    0.279_705_391_489_276_7,
    0.0,
    0.129_484_966_168_869_7,
    0.0,
];

/// `(Kronrod, Gauss)` approximations of `∫_a^b g`.
fn gk_pair<G: Fn(f64) -> f64>(g: G, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let (mut k, mut gs) = (0.0, 0.0);
    for j in 0..15 {
        let v = g(c + hw * GK_X[j]);
        k += GK_WK[j] * v;
        gs += GK_WG[j] * v;
    }
    (k * hw, gs * hw)
}

/// A probability measure on `[lo, hi]` with density `e^{-V}/Z` on a uniform grid.
///
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct Measure1D {
    potential: Potential,
    lo: f64,
    hi: f64,
    h: f64,
    nodes: Vec<f64>,
    log_z: f64,
    log_density: Vec<f64>,
    mid_log_density: Vec<f64>,
    simpson: Vec<f64>,
    lumped: Vec<f64>,
    cell_mass: Vec<f64>,
    prefix_mass: Vec<f64>,
    suffix_mass: Vec<f64>,
    // resistance ∫ dx/ρ per cell, and cumulative sums measured outward from the mode
    cell_resist: Vec<f64>,
    mode_node: usize,
    resist_from_mode: Vec<f64>,
    quad_x: Vec<f64>,
    quad_wk: Vec<f64>,
    quad_wg: Vec<f64>,
    tail_mass: f64,
    exact_support: bool,
}

impl Measure1D {
    /// Builds and normalizes the measure, doubling the node count until the
    /// normalization integral is resolved and checking that the mass outside
    /// the domain stays below `tail_tol`.
    pub fn build(potential: Potential, domain: (f64, f64), n_nodes: usize, tail_tol: f64) -> Result<Self, MeasureError> {
        let (lo, hi) = domain;
        validate_args(lo, hi, n_nodes)?;
        if !(tail_tol > 0.0) {
            return Err(MeasureError::InvalidInput(format!("tail_tol must be > 0, got {tail_tol}")));
        }
        let left = outward_tail(&potential, lo, -1.0, hi - lo)?;
        let right = outward_tail(&potential, hi, 1.0, hi - lo)?;
        let mut m = Self::assemble(potential, lo, hi, n_nodes)?;
        // the tail estimates are unnormalized; scale by 1/Z
        let tail = (left + right) * (-m.log_z).exp();
        if !(tail <= tail_tol) {
            return Err(MeasureError::TailMassExceeded {
                estimate: tail,
                tol: tail_tol,
            });
        }
        m.tail_mass = tail;
        Ok(m)
    }

    /// Like [`Measure1D::build`] but widens the domain (at fixed spacing) until
    /// the tail check passes.
    pub fn build_adaptive(
        potential: Potential,
        domain: (f64, f64),
        n_nodes: usize,
        tail_tol: f64,
    ) -> Result<Self, MeasureError> {
        let (mut lo, mut hi) = domain;
        let mut n = n_nodes;
        for _ in 0..12 {
            match Self::build(potential.clone(), (lo, hi), n, tail_tol) {
                Err(MeasureError::TailMassExceeded { .. }) if 2 * n - 1 <= MAX_NODES => {
                    let c = 0.5 * (lo + hi);
                    let w = hi - lo;
                    lo = c - w;
                    hi = c + w;
                    n = 2 * n - 1;
                }
                other => return other,
            }
        }
        Self::build(potential, (lo, hi), n, tail_tol)
    }

    /// A measure whose support is exactly `[lo, hi]` (no tail check), e.g. the
    /// uniform measure with `V = 0`.
    pub fn on_interval(potential: Potential, domain: (f64, f64), n_nodes: usize) -> Result<Self, MeasureError> {
        let (lo, hi) = domain;
        validate_args(lo, hi, n_nodes)?;
        let mut m = Self::assemble(potential, lo, hi, n_nodes)?;
        m.exact_support = true;
        Ok(m)
    }

    fn assemble(potential: Potential, lo: f64, hi: f64, n_nodes: usize) -> Result<Self, MeasureError> {
        let mut n = n_nodes;
        loop {
            let h = (hi - lo) / (n - 1) as f64;
            let node = |i: usize| if i + 1 == n { hi } else { lo + i as f64 * h };
            let mut shift = f64::NEG_INFINITY;
            for i in 0..n {
                let x = node(i);
                let v = potential.eval(x);
                if !v.is_finite() {
                    return Err(MeasureError::NonFinitePotential { x });
                }
                shift = shift.max(-v);
            }
            let mut cells = Vec::with_capacity(n - 1);
            let (mut total, mut err) = (0.0, 0.0);
            for i in 0..n - 1 {
                let (k, g) = gk_pair(|t| (-potential.eval(t) - shift).exp(), node(i), node(i + 1));
                if !k.is_finite() {
                    return Err(MeasureError::NonIntegrable(format!(
                        "density quadrature is not finite on [{}, {}]",
                        node(i),
                        node(i + 1)
                    )));
                }
                cells.push(k);
                total += k;
                err += (k - g).abs();
            }
            // the Gauss-7 difference overstates the Kronrod error by orders of
            // magnitude on smooth cells, so refine only when it is gross
            if err > 1e-6 * total && 2 * n - 1 <= MAX_NODES {
                n = 2 * n - 1;
                continue;
            }
            let log_z = shift + total.ln();
            return Ok(Self::finish(potential, lo, hi, n, h, log_z, cells, shift));
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        potential: Potential,
        lo: f64,
        hi: f64,
        n: usize,
        h: f64,
        log_z: f64,
        raw_cells: Vec<f64>,
        shift: f64,
    ) -> Self {
        let nodes: Vec<f64> = (0..n).map(|i| if i + 1 == n { hi } else { lo + i as f64 * h }).collect();
        let log_density: Vec<f64> = nodes.iter().map(|&x| -potential.eval(x) - log_z).collect();
        let mid_log_density: Vec<f64> = nodes
            .windows(2)
            .map(|w| -potential.eval(0.5 * (w[0] + w[1])) - log_z)
            .collect();

        let total: f64 = raw_cells.iter().sum();
        let cell_mass: Vec<f64> = raw_cells.iter().map(|c| c / total).collect();
        let mut prefix_mass = vec![0.0; n];
        for i in 0..n - 1 {
            prefix_mass[i + 1] = prefix_mass[i] + cell_mass[i];
        }
        let mut suffix_mass = vec![0.0; n];
        for i in (0..n - 1).rev() {
            suffix_mass[i] = suffix_mass[i + 1] + cell_mass[i];
        }

        let sw = simpson_weights(n, h);
        let mut simpson: Vec<f64> = sw.iter().zip(&log_density).map(|(w, l)| w * l.exp()).collect();
        let s: f64 = simpson.iter().sum();
        simpson.iter_mut().for_each(|w| *w /= s);
        let mut lumped: Vec<f64> = log_density
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let w = if i == 0 || i + 1 == n { 0.5 * h } else { h };
                w * l.exp()
            })
            .collect();
        let s: f64 = lumped.iter().sum();
        lumped.iter_mut().for_each(|w| *w /= s);

        let cell_resist: Vec<f64> = nodes
            .windows(2)
            .map(|w| gk_pair(|t| (potential.eval(t) + log_z).exp(), w[0], w[1]).0)
            .collect();
        let mode_node = log_density
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |b, (i, &l)| if l > b.1 { (i, l) } else { b })
            .0;
        let mut resist_from_mode = vec![0.0; n];
        for i in mode_node + 1..n {
            resist_from_mode[i] = resist_from_mode[i - 1] + cell_resist[i - 1];
        }
        for i in (0..mode_node).rev() {
            resist_from_mode[i] = resist_from_mode[i + 1] + cell_resist[i];
        }

        let mut quad_x = Vec::with_capacity(15 * (n - 1));
        let mut quad_wk = Vec::with_capacity(15 * (n - 1));
        let mut quad_wg = Vec::with_capacity(15 * (n - 1));
        let norm = shift + total.ln();
        for w in nodes.windows(2) {
            let c = 0.5 * (w[0] + w[1]);
            let hw = 0.5 * (w[1] - w[0]);
            for j in 0..15 {
                let x = c + hw * GK_X[j];
                let rho = (-potential.eval(x) - norm).exp();
                quad_x.push(x);
                quad_wk.push(GK_WK[j] * hw * rho);
                quad_wg.push(GK_WG[j] * hw * rho);
            }
        }

        Self {
            potential,
            lo,
            hi,
            h,
            nodes,
            log_z,
            log_density,
            mid_log_density,
            simpson,
            lumped,
            cell_mass,
            prefix_mass,
            suffix_mass,
            cell_resist,
            mode_node,
            resist_from_mode,
            quad_x,
            quad_wk,
            quad_wg,
            tail_mass: 0.0,
            exact_support: false,
        }
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }
    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
    pub fn log_z(&self) -> f64 {
        self.log_z
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }
    pub fn spacing(&self) -> f64 {
        self.h
    }
    /// `log ρ` at the grid nodes.
    pub fn log_density(&self) -> &[f64] {
        &self.log_density
    }
    /// `log ρ` at the cell midpoints.
    pub fn mid_log_density(&self) -> &[f64] {
        &self.mid_log_density
    }
    /// Simpson μ-weights of the nodes (sum to 1).
    pub fn simpson_weights(&self) -> &[f64] {
        &self.simpson
    }
    /// Trapezoid-lumped node masses (sum to 1).
    pub fn lumped_masses(&self) -> &[f64] {
        &self.lumped
    }
    /// μ-mass of each grid cell.
    pub fn cell_masses(&self) -> &[f64] {
        &self.cell_mass
    }
    /// Estimated μ-mass outside the domain, as a fraction of the total.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }
    pub fn has_exact_support(&self) -> bool {
        self.exact_support
    }
    /// Composite Gauss-Kronrod nodes and μ-weights used by [`Measure1D::integrate`].
    pub fn quadrature_rule(&self) -> (&[f64], &[f64]) {
        (&self.quad_x, &self.quad_wk)
    }

    pub fn log_density_at(&self, x: f64) -> f64 {
        -self.potential.eval(x) - self.log_z
    }

    pub fn density(&self, x: f64) -> f64 {
        if x < self.lo || x > self.hi {
            return 0.0;
        }
        self.log_density_at(x).exp()
    }

    /// `∫ f dμ` by 15-point Gauss-Kronrod on every grid cell; the error is the
    /// summed Kronrod/Gauss discrepancy.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> Result<Integral, MeasureError> {
        let mut value = 0.0;
        let mut error = 0.0;
        for cell in 0..self.quad_x.len() / 15 {
            let (mut k, mut g) = (0.0, 0.0);
            for j in 15 * cell..15 * cell + 15 {
                let x = self.quad_x[j];
                let v = f(x);
                if !v.is_finite() {
                    return Err(MeasureError::NonFiniteIntegrand { x });
                }
                k += self.quad_wk[j] * v;
                g += self.quad_wg[j] * v;
            }
            value += k;
            error += (k - g).abs();
        }
        Ok(Integral { value, error })
    }

    /// `∫ f dμ` for a function sampled at the nodes (Simpson μ-weights).
    pub fn integrate_grid(&self, values: &[f64]) -> Result<f64, MeasureError> {
        self.check_grid(values)?;
        Ok(values.iter().zip(&self.simpson).map(|(v, w)| v * w).sum())
    }

    /// `∫ f'² dμ` given the derivative `df`.
    pub fn dirichlet_energy<F: Fn(f64) -> f64>(&self, df: F) -> Result<Integral, MeasureError> {
        let e = self.integrate(|x| {
            let d = df(x);
            d * d
        })?;
        Ok(Integral {
            value: e.value.max(0.0),
            error: e.error,
        })
    }

    /// Finite-volume energy `Σ ρ(x_{i+1/2}) (f_{i+1} - f_i)² / h` of a grid
    /// function; equals the quadratic form of the discretized generator.
    pub fn grid_dirichlet_energy(&self, values: &[f64]) -> Result<f64, MeasureError> {
        self.check_grid(values)?;
        Ok(values
            .windows(2)
            .zip(&self.mid_log_density)
            .map(|(w, l)| {
                let d = w[1] - w[0];
                l.exp() * d * d / self.h
            })
            .sum())
    }

    fn check_grid(&self, values: &[f64]) -> Result<(), MeasureError> {
        if values.len() != self.nodes.len() {
            return Err(MeasureError::InvalidInput(format!(
                "grid function has {} values, grid has {} nodes",
                values.len(),
                self.nodes.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(MeasureError::NonFiniteIntegrand { x: self.nodes[i] });
        }
        Ok(())
    }

    fn cell_of(&self, x: f64) -> usize {
        (((x - self.lo) / self.h).floor().max(0.0) as usize).min(self.nodes.len() - 2)
    }

    fn partial_mass(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        gk_pair(|t| self.log_density_at(t).exp(), a, b).0
    }

    /// `μ([lo, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.lo {
            return 0.0;
        }
        if x >= self.hi {
            return 1.0;
        }
        let i = self.cell_of(x);
        (self.prefix_mass[i] + self.partial_mass(self.nodes[i], x)).clamp(0.0, 1.0)
    }

    /// `μ([x, hi])`, accurate far into the right tail.
    pub fn survival(&self, x: f64) -> f64 {
        if x <= self.lo {
            return 1.0;
        }
        if x >= self.hi {
            return 0.0;
        }
        let i = self.cell_of(x);
        (self.suffix_mass[i + 1] + self.partial_mass(x, self.nodes[i + 1])).clamp(0.0, 1.0)
    }

    /// `μ([a, b])`, computed from whichever tail is smaller.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let (a, b) = (a.max(self.lo), b.min(self.hi));
        if b <= a {
            return 0.0;
        }
        let (ia, ib) = (self.cell_of(a), self.cell_of(b));
        if ia == ib {
            return self.partial_mass(a, b);
        }
        let head = self.partial_mass(a, self.nodes[ia + 1]);
        let tail = self.partial_mass(self.nodes[ib], b);
        head + (self.prefix_mass[ib] - self.prefix_mass[ia + 1]) + tail
    }

    /// `x` with `μ([lo, x]) = κ`.
    pub fn quantile_left(&self, kappa: f64) -> Result<f64, MeasureError> {
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(MeasureError::KappaOutOfRange(kappa));
        }
        if kappa > 0.5 {
            return self.quantile_right(1.0 - kappa);
        }
        let i = self.prefix_mass.partition_point(|&p| p <= kappa).clamp(1, self.nodes.len() - 1) - 1;
        let (a, b) = (self.nodes[i], self.nodes[i + 1]);
        let base = self.prefix_mass[i];
        let tol = Tolerance::new(1e-15 * (1.0 + a.abs()), 1e-15, 200)?;
        let g = |x: f64| base + self.partial_mass(a, x) - kappa;
        Ok(clamped_root(g, a, b, tol)?)
    }

    /// `x` with `μ([x, hi]) = κ`.
    pub fn quantile_right(&self, kappa: f64) -> Result<f64, MeasureError> {
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(MeasureError::KappaOutOfRange(kappa));
        }
        if kappa > 0.5 {
            return self.quantile_left(1.0 - kappa);
        }
        let n = self.nodes.len();
        // suffix_mass is non-increasing; first node whose suffix is < κ
        let j = self.suffix_mass.partition_point(|&s| s >= kappa).clamp(1, n - 1);
        let (a, b) = (self.nodes[j - 1], self.nodes[j]);
        let base = self.suffix_mass[j];
        let tol = Tolerance::new(1e-15 * (1.0 + a.abs()), 1e-15, 200)?;
        let g = |x: f64| kappa - (base + self.partial_mass(x, b));
        Ok(clamped_root(g, a, b, tol)?)
    }

    pub fn median(&self) -> Result<f64, MeasureError> {
        self.quantile_left(0.5)
    }

    /// `x` with `μ([x, hi]) = κ`.
    pub fn tail_quantile(&self, kappa: f64) -> Result<f64, MeasureError> {
        self.quantile_right(kappa)
    }

    fn partial_resist(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        gk_pair(|t| (-self.log_density_at(t)).exp(), a, b).0
    }

    /// Resistance `∫_a^b dx / ρ(x)`; its inverse is the minimal energy of a
    /// function going from 0 at `a` to 1 at `b`.
    pub fn resistance(&self, a: f64, b: f64) -> f64 {
        let (a, b) = (a.max(self.lo), b.min(self.hi));
        if b <= a {
            return 0.0;
        }
        let (ia, ib) = (self.cell_of(a), self.cell_of(b));
        if ia == ib {
            return self.partial_resist(a, b);
        }
        let head = self.partial_resist(a, self.nodes[ia + 1]);
        let tail = self.partial_resist(self.nodes[ib], b);
        let (p, q) = (ia + 1, ib);
        let middle = if q <= p {
            0.0
        } else if q <= self.mode_node {
            self.resist_from_mode[p] - self.resist_from_mode[q]
        } else if p >= self.mode_node {
            self.resist_from_mode[q] - self.resist_from_mode[p]
        } else {
            self.resist_from_mode[p] + self.resist_from_mode[q]
        };
        let middle = if middle.is_finite() {
            middle
        } else {
            self.cell_resist[p..q].iter().sum()
        };
        head + middle + tail
    }
}

fn clamped_root<G: Fn(f64) -> f64>(g: G, a: f64, b: f64, tol: Tolerance) -> Result<f64, NumericsError> {
    let (ga, gb) = (g(a), g(b));
    if ga >= 0.0 {
        return Ok(a);
    }
    if gb <= 0.0 {
        return Ok(b);
    }
    root_find_monotone(g, a, b, tol)
}

fn validate_args(lo: f64, hi: f64, n_nodes: usize) -> Result<(), MeasureError> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(MeasureError::InvalidInput(format!("domain [{lo}, {hi}] is empty or not finite")));
    }
    if n_nodes < 16 {
        return Err(MeasureError::InvalidInput(format!("n_nodes must be >= 16, got {n_nodes}")));
    }
    if n_nodes > MAX_NODES {
        return Err(MeasureError::InvalidInput(format!("n_nodes must be <= {MAX_NODES}, got {n_nodes}")));
    }
    Ok(())
}

/// Unnormalized mass beyond `edge` in direction `dir`, bounded by
/// `e^{-V(edge)} / s` where `s` is the outward decay rate of `-V`.
fn outward_tail(potential: &Potential, edge: f64, dir: f64, width: f64) -> Result<f64, MeasureError> {
    let ell = |x: f64| -potential.eval(x);
    let l0 = ell(edge);
    if !l0.is_finite() {
        return Err(MeasureError::NonFinitePotential { x: edge });
    }
    let d = 1e-5 * edge.abs().max(1.0);
    let slope = (ell(edge + dir * d) - ell(edge - dir * d)) / (2.0 * d);
    if slope < 0.0 && slope.is_finite() {
        return Ok(l0.exp() / -slope);
    }
    // the density does not decay at the edge; look further out
    for k in 0..40 {
        let x = edge + dir * width * 2f64.powi(k);
        let l = ell(x);
        if l.is_finite() && l < l0 - 40.0 {
            return Ok(f64::INFINITY);
        }
    }
    Err(MeasureError::NonIntegrable(format!(
        "density does not decay beyond x = {edge} (direction {dir:+})"
    )))
}
