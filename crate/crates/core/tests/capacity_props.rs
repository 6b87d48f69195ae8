use proptest::prelude::*;
use spilab_core::capacity::{capacity_profile, interval_capacity};
use spilab_core::measure::{Measure1D, Potential};
use spilab_core::transfer::geometric_grid;

fn build(p: Potential) -> Measure1D {
    Measure1D::build(p, (-10.0, 10.0), 2001, 1e-10).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn monotone_in_the_set(start in 0.05f64..0.5, w in 0.02f64..0.2, grow_l in 0.0f64..0.1, grow_r in 0.0f64..0.1) {
        let m = build(Potential::DoubleWell);
        let a = m.quantile_left(start).unwrap();
        let b = m.quantile_left(start + w).unwrap();
        let a2 = m.quantile_left(start - grow_l * start).unwrap();
        let b2 = m.quantile_left(start + w + grow_r).unwrap();
        let small = interval_capacity(&m, a, b).unwrap();
        let big = interval_capacity(&m, a2, b2).unwrap();
        prop_assert!(small <= big * (1.0 + 1e-9) + 1e-12, "{small} > {big}");
    }

    #[test]
    fn additive_constant_in_potential(a in -2.0f64..0.5, w in 0.1f64..1.0, c in -5.0f64..5.0) {
        let base = build(Potential::Gaussian);
        let shifted = build(Potential::expression(&format!("x^2/2 + ({c})")).unwrap());
        let x = interval_capacity(&base, a, a + w).unwrap();
        let y = interval_capacity(&shifted, a, a + w).unwrap();
        prop_assert!((x - y).abs() <= 1e-8 * x, "{x} vs {y}");
    }
}

#[test]
fn gaussian_profile_dominates_log_bound() {
    let m = build(Potential::Gaussian);
    let prof = capacity_profile(&m, &geometric_grid(1e-8, 1e-3, 30)).unwrap();
    for &(kappa, c) in &prof.entries {
        assert!(c >= (1.0 / kappa).ln() / 32.0, "κ = {kappa}");
    }
}
