use std::f64::consts::PI;

use proptest::prelude::*;

use ledstat::g2::{g2_closed, g2_from_relative_increase};
use ledstat::grid::{FrequencyGrid, SpectralDensity, SpectrumKind};
use ledstat::model::{LedModel, ModelParams};
use ledstat::photon::{default_integration, mean_photon_closed, mean_photon_quadrature, ConvolutionMode};
use ledstat::quadrature::{integrate_1d, spectral_convolution, IntegrationSpec};

fn below_threshold() -> impl Strategy<Value = LedModel> {
    (-1.0f64..1.0, -3.0f64..0.0, 0.0f64..2.0, 1.0f64..20.0, 1.0f64..100.0).prop_filter_map(
        "inversion at or above threshold",
        |(log_r, log_gpar, pump, nth, n0)| {
            LedModel::new(ModelParams::from_kappa_ratio(10f64.powf(log_r), 10f64.powf(log_gpar), pump, nth, n0)).ok()
        },
    )
}

fn spectrum_integral(f: impl Fn(f64) -> f64 + Sync, scale: f64) -> f64 {
    let spec = IntegrationSpec::with_tolerance(1e-10).scaled(scale);
    integrate_1d(f, &spec).unwrap().value / (2.0 * PI)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn commutator_spectrum_is_normalised(model in below_threshold()) {
        let mass = spectrum_integral(|w| model.commutator_spectrum(w), model.widest_rate());
        prop_assert!((mass - 1.0).abs() < 1e-7, "mass {}", mass);
    }

    #[test]
    fn population_spectrum_integrates_to_dispersion(model in below_threshold()) {
        let pops = *model.populations();
        let mass = spectrum_integral(|w| model.population_spectrum(w), pops.gamma_p);
        prop_assert!((mass - pops.delta2_ne).abs() <= 1e-7 * pops.delta2_ne.max(1e-300));
    }

    #[test]
    fn spectra_are_even_and_nonnegative(model in below_threshold(), w in -50.0f64..50.0) {
        for f in [LedModel::commutator_spectrum, LedModel::population_spectrum] {
            let (a, b) = (f(&model, w), f(&model, -w));
            prop_assert!(a >= 0.0);
            prop_assert_eq!(a, b);
        }
        prop_assert_eq!(model.loop_denominator(w), model.loop_denominator(-w).conj());
    }

    #[test]
    fn populations_close(model in below_threshold()) {
        let p = model.params();
        let pops = model.populations();
        prop_assert!((pops.n_excited + pops.n_ground - p.n_emitters).abs() <= 1e-12 * p.n_emitters);
        prop_assert!((pops.n_excited - p.pump * pops.n_ground).abs() <= 1e-12 * p.n_emitters);
        prop_assert!(pops.delta2_ne >= 0.0 && pops.delta2_ne <= pops.n_excited);
        prop_assert!(pops.inversion < p.n_threshold);
    }

    #[test]
    fn g2_is_bounded(model in below_threshold()) {
        let r = g2_closed(&model);
        let dn = mean_photon_closed(&model).delta_n;
        if dn == 0.0 {
            prop_assert_eq!(r.g2, 2.0);
        } else {
            prop_assert!(r.g2 > 2.0 && r.g2 <= 6.0, "g2 {}", r.g2);
        }
    }

    #[test]
    fn g2_grows_with_relative_increase(a in 0.0f64..1e3, b in 0.0f64..1e3) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(g2_from_relative_increase(lo) <= g2_from_relative_increase(hi));
        prop_assert!(g2_from_relative_increase(hi) <= 6.0);
    }

    #[test]
    fn closed_form_matches_quadrature(model in below_threshold()) {
        let closed = mean_photon_closed(&model);
        let quad = mean_photon_quadrature(&model, ConvolutionMode::DeltaApprox, &default_integration(&model)).unwrap();
        prop_assert!((closed.n_total - quad.n_total).abs() <= 1e-6 * closed.n_total.max(1e-300));
    }

    #[test]
    fn convolution_is_commutative_and_conserves_mass(
        w1 in 0.2f64..2.0, w2 in 0.2f64..2.0, shift in -3.0f64..3.0
    ) {
        let grid = FrequencyGrid::new(40.0, 2001).unwrap();
        let f = SpectralDensity::sample(grid, SpectrumKind::Other, |w| (-(w - shift).powi(2) / (2.0 * w1 * w1)).exp());
        let g = SpectralDensity::sample(grid, SpectrumKind::Other, |w| (-(w * w) / (2.0 * w2 * w2)).exp() * (1.0 + 0.3 * w.sin()));
        let fg = spectral_convolution(&f, &g).unwrap().density;
        let gf = spectral_convolution(&g, &f).unwrap().density;
        let peak = fg.peak();
        for (a, b) in fg.values.iter().zip(&gf.values) {
            prop_assert!((a - b).abs() <= 1e-12 * peak);
        }
        prop_assert!((fg.mass() - f.mass() * g.mass()).abs() <= 1e-9 * fg.mass());
    }
}
