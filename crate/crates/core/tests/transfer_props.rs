use proptest::prelude::*;
use spilab_core::capacity::CapacityProfile;
use spilab_core::measure::{Measure1D, Potential};
use spilab_core::spectrum::{bulk_sampler, low_spectrum, verify_spi, SpiTarget};
use spilab_core::transfer::{
    geometric_grid, mc_to_spi, profile_terms, psi_default, spi_to_mc, spi_to_poincare, BetaFunction,
};

/// Non-increasing profile built from positive decrements.
fn random_profile(steps: &[f64]) -> CapacityProfile {
    let kappas = geometric_grid(1e-10, 0.5, steps.len());
    let mut c: Vec<f64> = steps
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect();
    c.reverse();
    CapacityProfile::new(kappas.into_iter().zip(c).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mc_to_spi_is_monotone_and_sound(values in prop::collection::vec(0.01f64..3.0, 5..40)) {
        let prof = random_profile(&values);
        let beta = mc_to_spi(&prof).unwrap();
        let rs = geometric_grid(beta.r0, beta.r0 * 100.0, 60);
        let vals: Vec<f64> = rs.iter().filter_map(|&r| beta.eval(r)).collect();
        prop_assert!(vals.windows(2).all(|w| w[1] <= w[0]));
        for &r in &rs {
            if let Some(b) = beta.eval(r) {
                for &(kappa, c) in &prof.entries {
                    if c >= 8.0 / r {
                        prop_assert!(b <= 1.0 / kappa * (1.0 + 1e-12));
                    }
                }
            }
        }
    }

    #[test]
    fn b_star_moves_terms_oppositely(b1 in 0.05f64..0.9, db in 0.01f64..0.09, kexp in 1.0f64..30.0) {
        let beta = BetaFunction::closed(0.5, |r| 1.0 + 1.0 / (r - 0.5));
        let kappa = 10f64.powf(-kexp);
        let psi = psi_default(kappa);
        let (f1, s1) = profile_terms(&beta, 1.0, kappa, psi, psi, b1).unwrap();
        let (f2, s2) = profile_terms(&beta, 1.0, kappa, psi, psi, b1 + db).unwrap();
        prop_assert!(f2 > f1);
        prop_assert!(s2 < s1);
    }

    #[test]
    fn round_trip_threshold(r0 in 0.3f64..3.0) {
        let beta = BetaFunction::closed(r0, move |r| 1.0 / (r - r0));
        let b_star = 0.01;
        let prof = spi_to_mc(&beta, 1.0, &|x: f64| x.sqrt(), b_star, &geometric_grid(1e-300, 0.5, 200)).unwrap();
        let back = mc_to_spi(&prof).unwrap();
        let exact = 8.0 * r0 / (1.0 - b_star) / (1.0 - b_star);
        prop_assert!((back.r0 / exact - 1.0).abs() < 1e-6, "{} vs {exact}", back.r0);
        prop_assert!(back.eval(exact * 0.999).is_none());
        prop_assert!(back.eval(exact * 1.05).is_some());
    }
}

#[test]
fn poincare_from_spectral_spi_holds_on_random_functions() {
    let m = Measure1D::build(Potential::Gaussian, (-10.0, 10.0), 2001, 1e-10).unwrap();
    let spec = low_spectrum(&m, 16, Some(f64::INFINITY)).unwrap();
    // L¹ SPI: β(r) = Σ_{λ_i ≤ 1/r} ‖f_i‖²_∞
    let r_grid = geometric_grid(0.08, 20.0, 80);
    let entries: Vec<(f64, f64)> = r_grid
        .iter()
        .map(|&r| {
            let b = spec
                .eigenvalues
                .iter()
                .zip(&spec.eigenvectors)
                .filter(|(l, _)| **l <= 1.0 / r)
                .map(|(_, v)| v.iter().fold(0.0f64, |a, x| a.max(x.abs())).powi(2))
                .sum();
            (r, b)
        })
        .collect();
    let beta = BetaFunction::table(0.0, entries).unwrap();
    for &r in &[0.1, 0.5, 2.0] {
        assert!(verify_spi(&m, &SpiTarget::L1(&beta), r, 200, 4).unwrap().pass);
    }
    let (c, _) = spi_to_poincare(&beta, &r_grid).unwrap();
    assert!(c >= 1.0 - 1e-9, "C = {c} is below the sharp constant");
    let sampler = bulk_sampler(&m, 9).unwrap();
    let w = m.lumped_masses();
    for i in 0..500 {
        let f = sampler.draw(i).sample(m.nodes());
        let mean: f64 = f.iter().zip(w).map(|(a, b)| a * b).sum();
        let var: f64 = f.iter().zip(w).map(|(a, b)| b * (a - mean).powi(2)).sum();
        let energy = m.grid_dirichlet_energy(&f).unwrap();
        assert!(var <= c * energy * (1.0 + 1e-9), "trial {i}");
    }
}
