use super::NumericsError;

/// Value and error estimate of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64), NumericsError> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    if !fc.is_finite() {
        return Err(NumericsError::NonFinite(c));
    }
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let (x1, x2) = (c - dx, c + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.is_finite() {
            return Err(NumericsError::NonFinite(x1));
        }
        if !f2.is_finite() {
            return Err(NumericsError::NonFinite(x2));
        }
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Ok((kronrod * h, ((kronrod - gauss) * h).abs()))
}

/// Adaptive 15-point Gauss-Kronrod quadrature on `[a, b]`.
///
/// The interval with the largest local error is bisected until the total error
/// estimate drops below `max(abs_tol, rel_tol * |value|)` or `max_intervals`
/// is reached, in which case `MaxIterations` is returned.
pub fn gauss_kronrod_adaptive<F>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<Quadrature, NumericsError>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(NumericsError::InvalidInput(format!("infinite interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(Quadrature { value: 0.0, error: 0.0 });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let (v, e) = gk15(&f, lo, hi)?;
    let mut cells = vec![(lo, hi, v, e)];
    let mut value = v;
    let mut error = e;
    while error > abs_tol.max(rel_tol * value.abs()) {
        if cells.len() >= max_intervals.max(1) {
            return Err(NumericsError::MaxIterations(max_intervals));
        }
        let (idx, _) = cells
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, c)| if c.3 > best.1 { (i, c.3) } else { best });
        let (l, r, cv, ce) = cells.swap_remove(idx);
        let m = 0.5 * (l + r);
        if !(m > l && m < r) {
            // cell at machine resolution; its error cannot be reduced
            cells.push((l, r, cv, 0.0));
            error -= ce;
            continue;
        }
        let (v1, e1) = gk15(&f, l, m)?;
        let (v2, e2) = gk15(&f, m, r)?;
        value += v1 + v2 - cv;
        error += e1 + e2 - ce;
        cells.push((l, m, v1, e1));
        cells.push((m, r, v2, e2));
    }
    // resum to shed accumulated cancellation in the running total
    cells.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let value: f64 = cells.iter().map(|c| c.2).sum();
    let error: f64 = cells.iter().map(|c| c.3).sum();
    Ok(Quadrature {
        value: sign * value,
        error,
    })
}

/// Composite Simpson weights for `n` equally spaced nodes with spacing `h`.
///
/// When the number of intervals is odd the last three intervals use the 3/8
/// rule. Two nodes fall back to the trapezoid rule.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    match n {
        0 | 1 => return w,
        2 => {
            w[0] = 0.5 * h;
            w[1] = 0.5 * h;
            return w;
        }
        3 => {
            w[0] = h / 3.0;
            w[1] = 4.0 * h / 3.0;
            w[2] = h / 3.0;
            return w;
        }
        _ => {}
    }
    let intervals = n - 1;
    let simpson_end = if intervals.is_multiple_of(2) { n - 1 } else { n - 4 };
    for i in (0..simpson_end).step_by(2) {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    if intervals % 2 == 1 {
        let s = simpson_end;
        w[s] += 3.0 * h / 8.0;
        w[s + 1] += 9.0 * h / 8.0;
        w[s + 2] += 9.0 * h / 8.0;
        w[s + 3] += 3.0 * h / 8.0;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let q = gauss_kronrod_adaptive(|x| 3.0 * x * x - x + 2.0, -1.0, 2.0, 1e-14, 0.0, 10).unwrap();
        assert!((q.value - (9.0 - 1.5 + 6.0)).abs() < 1e-13);
    }

    #[test]
    fn gaussian_integral() {
        let q = gauss_kronrod_adaptive(|x: f64| (-x * x / 2.0).exp(), -12.0, 12.0, 1e-14, 1e-14, 200).unwrap();
        let exact = (2.0 * std::f64::consts::PI).sqrt();
        assert!((q.value - exact).abs() < 1e-12);
    }

    #[test]
    fn reversed_bounds_negate() {
        let q = gauss_kronrod_adaptive(|x: f64| x.exp(), 1.0, 0.0, 1e-13, 0.0, 50).unwrap();
        assert!((q.value + (1f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn kink_is_resolved() {
        let q = gauss_kronrod_adaptive(|x: f64| x.abs().sqrt(), -1.0, 1.0, 1e-10, 0.0, 2000).unwrap();
        assert!((q.value - 4.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn nan_is_reported() {
        let err = gauss_kronrod_adaptive(|x: f64| (x - 0.5).ln(), 0.0, 1.0, 1e-10, 0.0, 50).unwrap_err();
        assert!(matches!(err, NumericsError::NonFinite(_)));
    }

    #[test]
    fn simpson_weights_integrate_cubics() {
        for n in [3usize, 4, 5, 6, 7, 10, 11, 64, 65] {
            let h = 2.0 / (n - 1) as f64;
            let w = simpson_weights(n, h);
            let s: f64 = w
                .iter()
                .enumerate()
                .map(|(i, wi)| {
                    let x = -1.0 + i as f64 * h;
                    wi * (x * x * x + x * x + 1.0)
                })
                .sum();
            assert!((s - (2.0 / 3.0 + 2.0)).abs() < 1e-13, "n = {n}: {s}");
        }
    }
}
