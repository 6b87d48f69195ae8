use proptest::prelude::*;
use spilab_core::hermite::{audit_lp_bound, eval_all, gauss_hermite, pr_oscillating_error};

/// `E x^k` under the standard Gaussian.
fn moment(k: usize) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        (1..k).step_by(2).map(|j| j as f64).product()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn parseval_on_polynomials(coeffs in prop::collection::vec(-2.0f64..2.0, 1..=11)) {
        let deg = coeffs.len() - 1;
        let f = |x: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
        let mut l2 = 0.0;
        for (i, a) in coeffs.iter().enumerate() {
            for (j, b) in coeffs.iter().enumerate() {
                l2 += a * b * moment(i + j);
            }
        }
        let (xs, ws) = gauss_hermite(24).unwrap();
        let mut proj = vec![0.0; deg + 1];
        for (x, w) in xs.iter().zip(&ws) {
            let h = eval_all(deg, *x);
            for k in 0..=deg {
                proj[k] += w * f(*x) * h[k];
            }
        }
        let sum: f64 = proj.iter().map(|c| c * c).sum();
        prop_assert!((sum - l2).abs() <= 1e-6 * l2.max(1.0), "{sum} vs {l2}");
    }

    #[test]
    fn pr_error_decreases_with_degree(phi in -1.0f64..1.0) {
        let e: Vec<f64> = [100, 200, 400].iter().map(|&n| pr_oscillating_error(n, phi).unwrap()).collect();
        prop_assert!(e[1] <= 1.1 * e[0] && e[2] <= 1.1 * e[1], "{e:?}");
    }
}

#[test]
fn norms_increase_with_p() {
    let ps = [3.0, 4.0, 6.0, 8.0, 12.0];
    let audit = audit_lp_bound(30, &ps).unwrap();
    for n in 1..=30 {
        let norms: Vec<f64> = audit.entries.iter().filter(|e| e.n == n).map(|e| e.norm).collect();
        assert_eq!(norms.len(), ps.len());
        assert!(norms.windows(2).all(|w| w[1] >= w[0]), "n = {n}: {norms:?}");
    }
}
