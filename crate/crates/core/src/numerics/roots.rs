use super::{NumericsError, Tolerance};

/// Root of a monotone function on `[lo, hi]`.
///
/// Illinois-modified regula falsi; a plain bisection step is forced whenever
/// the bracket fails to halve over an iteration. Stops on an exact zero or when
/// the bracket is narrower than `tol.width(x)`.
pub fn root_find_monotone<G>(g: G, lo: f64, hi: f64, tol: Tolerance) -> Result<f64, NumericsError>
where
    G: Fn(f64) -> f64,
{
    tol.validate()?;
    if !(lo <= hi) {
        return Err(NumericsError::InvalidInput(format!("empty bracket [{lo}, {hi}]")));
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (g(a), g(b));
    if !fa.is_finite() {
        return Err(NumericsError::NonFinite(a));
    }
    if !fb.is_finite() {
        return Err(NumericsError::NonFinite(b));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(NumericsError::NoSignChange {
            lo,
            hi,
            g_lo: fa,
            g_hi: fb,
        });
    }

    // invariant: sign(fa) != sign(fb)
    let mut force_bisect = false;
    let mut prev_width = (b - a).abs();
    for _ in 0..tol.max_iter {
        let width = (b - a).abs();
        let mid = 0.5 * (a + b);
        if width <= tol.width(mid) {
            return Ok(mid);
        }
        let mut x = if force_bisect {
            mid
        } else {
            (a * fb - b * fa) / (fb - fa)
        };
        if !(x > a.min(b) && x < a.max(b)) {
            x = mid;
        }
        let fx = g(x);
        if !fx.is_finite() {
            return Err(NumericsError::NonFinite(x));
        }
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fb.signum() {
            // x replaces b; a is retained and its value halved (Illinois)
            b = x;
            fb = fx;
            fa *= 0.5;
        } else {
            a = b;
            fa = fb;
            b = x;
            fb = fx;
        }
        let new_width = (b - a).abs();
        force_bisect = new_width > 0.5 * prev_width;
        prev_width = new_width;
    }
    Err(NumericsError::MaxIterations(tol.max_iter))
}
