//! Seeded random test functions with exact derivatives.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A smooth (or `C¹`) test function on the line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFunction {
    /// `offset + Σ a_k exp(−(x − m_k)² / (2 s_k²))`.
    Bumps { offset: f64, terms: Vec<(f64, f64, f64)> },
    /// Cubic Hermite interpolant of `(knot, value, slope)`, constant outside
    /// the knots (end slopes are zero).
    Spline { knots: Vec<(f64, f64, f64)> },
    /// `amp·(1 − ((x − c)/w)²)³` on `|x − c| < w`, zero elsewhere.
    CompactBump { center: f64, half_width: f64, amp: f64 },
    /// `exp(s x / 2)`.
    Exponential { s: f64 },
}

impl TestFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFunction::Bumps { offset, terms } => {
                offset + terms.iter().map(|&(a, m, s)| a * (-(x - m).powi(2) / (2.0 * s * s)).exp()).sum::<f64>()
            }
            TestFunction::Spline { knots } => spline(knots, x).0,
            TestFunction::CompactBump { center, half_width, amp } => {
                let u = (x - center) / half_width;
                if u.abs() < 1.0 {
                    amp * (1.0 - u * u).powi(3)
                } else {
                    0.0
                }
            }
            TestFunction::Exponential { s } => (0.5 * s * x).exp(),
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        match self {
            TestFunction::Bumps { terms, .. } => terms
                .iter()
                .map(|&(a, m, s)| -a * (x - m) / (s * s) * (-(x - m).powi(2) / (2.0 * s * s)).exp())
                .sum(),
            TestFunction::Spline { knots } => spline(knots, x).1,
            TestFunction::CompactBump { center, half_width, amp } => {
                let u = (x - center) / half_width;
                if u.abs() < 1.0 {
                    -6.0 * amp * u * (1.0 - u * u).powi(2) / half_width
                } else {
                    0.0
                }
            }
            TestFunction::Exponential { s } => 0.5 * s * (0.5 * s * x).exp(),
        }
    }

    pub fn sample(&self, nodes: &[f64]) -> Vec<f64> {
        nodes.iter().map(|&x| self.eval(x)).collect()
    }
}

fn spline(knots: &[(f64, f64, f64)], x: f64) -> (f64, f64) {
    let (first, last) = (knots[0], knots[knots.len() - 1]);
    if x <= first.0 {
        return (first.1, 0.0);
    }
    if x >= last.0 {
        return (last.1, 0.0);
    }
    let i = knots.partition_point(|k| k.0 <= x) - 1;
    let (x0, y0, d0) = knots[i];
    let (x1, y1, d1) = knots[i + 1];
    let h = x1 - x0;
    let t = (x - x0) / h;
    let (t2, t3) = (t * t, t * t * t);
    let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * d1;
    let dv = ((6.0 * t2 - 6.0 * t) * y0 + (3.0 * t2 - 4.0 * t + 1.0) * h * d0 + (-6.0 * t2 + 6.0 * t) * y1
        + (3.0 * t2 - 2.0 * t) * h * d1)
        / h;
    (v, dv)
}

/// Draws test functions whose features live in `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionSampler {
    pub lo: f64,
    pub hi: f64,
    pub seed: u64,
}

impl TestFunctionSampler {
    pub fn new(lo: f64, hi: f64, seed: u64) -> Self {
        Self { lo, hi, seed }
    }

    /// Independent generator for trial `index`.
    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    /// Alternates splines and bump sums.
    pub fn draw(&self, index: u64) -> TestFunction {
        if index.is_multiple_of(2) {
            self.spline(index)
        } else {
            self.bumps(index)
        }
    }

    pub fn spline(&self, index: u64) -> TestFunction {
        let mut rng = self.rng(index);
        let count = rng.gen_range(3..=10);
        let mut xs: Vec<f64> = (0..count).map(|_| rng.gen_range(self.lo..self.hi)).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * (self.hi - self.lo));
        let span = self.hi - self.lo;
        let last = xs.len() - 1;
        let knots = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let y = rng.gen_range(-1.0..1.0);
                let d = if i == 0 || i == last {
                    0.0
                } else {
                    rng.gen_range(-4.0..4.0) / span
                };
                (x, y, d)
            })
            .collect();
        TestFunction::Spline { knots }
    }

    pub fn bumps(&self, index: u64) -> TestFunction {
        let mut rng = self.rng(index);
        let count = rng.gen_range(1..=4);
        let span = self.hi - self.lo;
        let terms = (0..count)
            .map(|_| {
                (
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(self.lo..self.hi),
                    span * rng.gen_range(0.02..0.3),
                )
            })
            .collect();
        TestFunction::Bumps {
            offset: rng.gen_range(-0.5..0.5),
            terms,
        }
    }

    pub fn compact_bump(&self, index: u64) -> TestFunction {
        let mut rng = self.rng(index);
        let span = self.hi - self.lo;
        TestFunction::CompactBump {
            center: rng.gen_range(self.lo..self.hi),
            half_width: span * rng.gen_range(0.02..0.25),
            amp: rng.gen_range(0.1..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_derivative(f: &TestFunction, xs: &[f64]) {
        for &x in xs {
            let h = 1e-6;
            let fd = (f.eval(x + h) - f.eval(x - h)) / (2.0 * h);
            assert!((fd - f.deriv(x)).abs() < 1e-6 * (1.0 + fd.abs()), "{f:?} at {x}");
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let s = TestFunctionSampler::new(-3.0, 3.0, 7);
        let xs: Vec<f64> = (0..50).map(|i| -4.0 + 0.1631 * i as f64).collect();
        for i in 0..20 {
            check_derivative(&s.draw(i), &xs);
            check_derivative(&s.compact_bump(i), &xs);
        }
        check_derivative(&TestFunction::Exponential { s: 0.7 }, &xs);
    }

    #[test]
    fn seeded_draws_repeat() {
        let s = TestFunctionSampler::new(0.0, 1.0, 42);
        assert_eq!(s.draw(5), s.draw(5));
        assert_ne!(s.draw(5), s.draw(7));
        assert_ne!(s.draw(5), TestFunctionSampler::new(0.0, 1.0, 43).draw(5));
    }

    #[test]
    fn spline_interpolates_and_is_flat_outside() {
        let f = TestFunction::Spline {
            knots: vec![(0.0, 1.0, 0.0), (1.0, -1.0, 2.0), (2.0, 0.5, 0.0)],
        };
        assert_eq!(f.eval(1.0), -1.0);
        assert_eq!(f.eval(-5.0), 1.0);
        assert_eq!(f.eval(5.0), 0.5);
        assert!((f.deriv(1.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn compact_bump_support() {
        let f = TestFunction::CompactBump {
            center: 1.0,
            half_width: 0.5,
            amp: 2.0,
        };
        assert_eq!(f.eval(1.0), 2.0);
        assert_eq!(f.eval(1.6), 0.0);
        assert_eq!(f.eval(0.4), 0.0);
    }
}
