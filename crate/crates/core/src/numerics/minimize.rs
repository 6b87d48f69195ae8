use super::{NumericsError, Tolerance};

/// Result of a scalar minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub argmin: f64,
    pub min: f64,
    pub iterations: usize,
}

/// Bounded Brent minimization (golden section with parabolic steps) on the
/// open interval `(lo, hi)`. Endpoints are never evaluated, so objectives with
/// poles at the bounds are fine.
pub fn minimize_scalar<H>(h: H, lo: f64, hi: f64, tol: Tolerance) -> Result<Minimum, NumericsError>
where
    H: Fn(f64) -> f64,
{
    tol.validate()?;
    if !(lo < hi) {
        return Err(NumericsError::InvalidInput(format!(
            "minimize_scalar requires lo < hi (got [{lo}, {hi}])"
        )));
    }
    const GOLDEN: f64 = 0.381_966_011_250_105_1; // (3 - sqrt 5) / 2
    let sqrt_eps = f64::EPSILON.sqrt();

    let (mut a, mut b) = (lo, hi);
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = h(x);
    if fx.is_nan() {
        return Err(NumericsError::NonFinite(x));
    }
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;

    for iter in 0..tol.max_iter {
        let m = 0.5 * (a + b);
        let tol1 = sqrt_eps * x.abs() + tol.width(x) / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            return Ok(Minimum {
                argmin: x,
                min: fx,
                iterations: iter,
            });
        }
        let mut golden_step = true;
        if e.abs() > tol1 {
            // parabola through x, w, v
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            e = d;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if (u - a) < tol2 || (b - u) < tol2 {
                    d = if x < m { tol1 } else { -tol1 };
                }
                golden_step = false;
            }
        }
        if golden_step {
            e = if x >= m { a - x } else { b - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else if d > 0.0 {
            x + tol1
        } else {
            x - tol1
        };
        let fu = h(u);
        if fu.is_nan() {
            return Err(NumericsError::NonFinite(u));
        }
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Err(NumericsError::MaxIterations(tol.max_iter))
}

/// Dense scan followed by Brent refinement inside the best cell.
///
/// For objectives that are not known to be unimodal.
pub(crate) fn minimize_scanned<H>(
    h: H,
    lo: f64,
    hi: f64,
    samples: usize,
    tol: Tolerance,
) -> Result<Minimum, NumericsError>
where
    H: Fn(f64) -> f64,
{
    let samples = samples.max(3);
    let step = (hi - lo) / samples as f64;
    let mut best = (f64::INFINITY, 0usize);
    for i in 0..samples {
        let x = lo + (i as f64 + 0.5) * step;
        let v = h(x);
        if v < best.0 {
            best = (v, i);
        }
    }
    if !best.0.is_finite() {
        let x = lo + 0.5 * step;
        return Ok(Minimum {
            argmin: x,
            min: best.0,
            iterations: samples,
        });
    }
    let i = best.1 as f64;
    let a = (lo + (i - 0.5) * step).max(lo);
    let b = (lo + (i + 1.5) * step).min(hi);
    let refined = minimize_scalar(&h, a, b, tol)?;
    Ok(if refined.min <= best.0 {
        refined
    } else {
        Minimum {
            argmin: lo + (i + 0.5) * step,
            min: best.0,
            iterations: samples + refined.iterations,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::new(1e-10, 1e-10, 500).unwrap()
    }

    #[test]
    fn quadratic() {
        let m = minimize_scalar(|x| (x - 1.0).powi(2), 0.0, 3.0, tol()).unwrap();
        assert!((m.argmin - 1.0).abs() < 1e-8);
        assert!(m.min.abs() < 1e-15);
    }

    #[test]
    fn resistor_sum_matches_grid_scan() {
        let h = |x: f64| 1.0 / x + 1.0 / (0.4 - x);
        let m = minimize_scalar(h, 0.0, 0.4, tol()).unwrap();
        // dense scan oracle
        let (mut best_x, mut best) = (0.0, f64::INFINITY);
        for i in 1..400_000 {
            let x = 0.4 * i as f64 / 400_000.0;
            if h(x) < best {
                best = h(x);
                best_x = x;
            }
        }
        assert!((best_x - 0.2).abs() < 1e-5);
        assert!((best - 10.0).abs() < 1e-8);
        assert!((m.argmin - 0.2).abs() < 1e-6);
        assert!((m.min - 10.0).abs() < 1e-6);
    }

    #[test]
    fn constant_function() {
        let m = minimize_scalar(|_| 3.5, -1.0, 1.0, tol()).unwrap();
        assert_eq!(m.min, 3.5);
        assert!(m.argmin > -1.0 && m.argmin < 1.0);
    }

    #[test]
    fn empty_interval_rejected() {
        assert!(minimize_scalar(|x| x, 1.0, 1.0, tol()).is_err());
    }

    #[test]
    fn scanned_finds_global_minimum_of_bimodal() {
        let h = |x: f64| (x * x - 1.0).powi(2) + 0.3 * x;
        let m = minimize_scanned(h, -2.0, 2.0, 64, tol()).unwrap();
        assert!(m.argmin < 0.0);
        let direct = minimize_scalar(h, -2.0, -0.5, tol()).unwrap();
        assert!((m.min - direct.min).abs() < 1e-12);
    }
}
