use proptest::prelude::*;
use spilab_core::measure::{Measure1D, Potential};
use spilab_core::orlicz::power_pair;
use spilab_core::spectrum::{draw_test_function, holder_defect, low_spectrum, projection_split, SpectralData};

fn ou(nodes: usize) -> Measure1D {
    Measure1D::build(Potential::Gaussian, (-10.0, 10.0), nodes, 1e-10).unwrap()
}

fn setup() -> (Measure1D, SpectralData) {
    let m = ou(1001);
    let spec = low_spectrum(&m, 12, Some(f64::INFINITY)).unwrap();
    (m, spec)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn parseval_prefixes(seed in 0u64..1000, index in 0u64..1000) {
        let (m, spec) = setup();
        let f = draw_test_function(&m, seed, index).unwrap().sample(&spec.nodes);
        let total = spec.inner(&f, &f);
        let mut acc = 0.0;
        for v in &spec.eigenvectors {
            acc += spec.inner(&f, v).powi(2);
            prop_assert!(acc <= total * (1.0 + 1e-10));
        }
    }

    #[test]
    fn parseval_in_span(c in prop::collection::vec(-3.0f64..3.0, 12)) {
        let (_, spec) = setup();
        let n = spec.nodes.len();
        let f: Vec<f64> = (0..n).map(|i| c.iter().zip(&spec.eigenvectors).map(|(a, v)| a * v[i]).sum()).collect();
        let total = spec.inner(&f, &f);
        let proj: f64 = spec.eigenvectors.iter().map(|v| spec.inner(&f, v).powi(2)).sum();
        prop_assert!((proj - total).abs() <= 1e-6 * total);
    }

    #[test]
    fn q_bound_and_holder(seed in 0u64..1000, index in 0u64..1000, r in 0.1f64..2.0, p in 2.5f64..8.0) {
        let (m, spec) = setup();
        let f = draw_test_function(&m, seed, index).unwrap().sample(&spec.nodes);
        let split = projection_split(&m, &spec, &f, r).unwrap();
        prop_assert!(split.q_part <= split.q_bound + 1e-8);
        let pair = power_pair(p).unwrap();
        prop_assert!(holder_defect(&spec, &pair, &f).unwrap() <= 1e-10);
    }
}

#[test]
fn eigenvalues_converge_under_refinement() {
    let lows: Vec<Vec<f64>> = [201, 401, 801]
        .iter()
        .map(|&n| low_spectrum(&ou(n), 6, None).unwrap().eigenvalues)
        .collect();
    for j in 1..6 {
        let d1 = (lows[1][j] - lows[0][j]).abs();
        let d2 = (lows[2][j] - lows[1][j]).abs();
        assert!(d2 <= d1 / 2.0, "λ_{j}: {d1:e} then {d2:e}");
    }
}
