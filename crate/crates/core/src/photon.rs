//! Photon-number spectrum `n(ω)` and the mean photon number `n = n₀(1+Δₙ)`.
//!
//! Three routes are available:
//!
//! * closed form: the integral of `n(ω)` done analytically under the
//!   δ-approximation `S_bNe(ω) ≈ c(ω)·δ²N_e`;
//! * quadrature under the same approximation;
//! * quadrature with the exact convolution `S_bNe = c * δ²N_e(ω)`, built on an
//!   FFT grid fine enough to resolve the population linewidth.
//!
//! The closed form follows from the quartic `|s|² = (A−ω²)² + B²ω²`:
//! `(2π)⁻¹∫dω/|s|² = 1/(2AB)`, `(2π)⁻¹∫ω²dω/|s|⁴ = 1/(4AB³)` and
//! `(2π)⁻¹∫dω/|s|⁴ = (1/(A³B) + 1/(A²B³))/4`, which give
//! `Δₙ = (δ²N_e/N_e)(2/N_th)[r/(1+r) + 1/(1−N/N_th)]` with `r = 2κ/γ⊥`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{sample_model_spectrum, FrequencyGrid, SpectralDensity, SpectrumKind};
use crate::model::LedModel;
use crate::quadrature::{integrate_1d, integrate_2d, spectral_convolution, IntegrationSpec, EDGE_DECAY_LIMIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhotonMethod {
    ClosedForm,
    QuadratureDeltaApprox,
    QuadratureExactConvolution,
}

/// How the product-noise spectrum `S_bNe` is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConvolutionMode {
    /// `S_bNe(ω) ≈ c(ω)·δ²N_e`
    DeltaApprox,
    /// `S_bNe = c * δ²N_e(ω)` in full.
    ExactConvolution,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanPhotonResult {
    pub n0: f64,
    pub delta_n: f64,
    pub n_total: f64,
    pub method: PhotonMethod,
    /// Absolute error estimate on `n_total`.
    pub error: f64,
    /// An input spectrum was not negligible at the edge of the convolution grid.
    pub tail_truncated: bool,
}

/// `n(ω) = [κγ⊥²N_e/(2N_th) + δ²N_e(κγ⊥/N_th)² c(ω)] / |s(ω)|²`.
pub fn photon_number_spectrum(model: &LedModel, omega: f64) -> f64 {
    let k = model.fluctuation_coupling();
    (model.zero_order_strength() + model.populations().delta2_ne * k * k * model.commutator_spectrum(omega))
        / model.loop_denominator_norm_sqr(omega)
}

/// Per-emitter zero-order strength `κγ⊥²/(2N_th)`.
fn zero_order_per_emitter(model: &LedModel) -> f64 {
    let p = model.params();
    0.5 * p.kappa * p.gamma_perp * p.gamma_perp / p.n_threshold
}

/// Zero-order photon number `n₀ = N_e / [(1 + 2κ/γ⊥)(N_th − N)]`.
pub fn zero_order_photon_number(model: &LedModel) -> f64 {
    let p = model.params();
    let pops = model.populations();
    pops.n_excited / ((1.0 + p.kappa_ratio()) * (p.n_threshold - pops.inversion))
}

/// Closed-form `Δₙ`.
pub fn relative_increase(model: &LedModel) -> f64 {
    let r = model.params().kappa_ratio();
    model.relative_dispersion() * (2.0 / model.params().n_threshold)
        * (r / (1.0 + r) + 1.0 / (1.0 - model.inversion_ratio()))
}

pub fn mean_photon_closed(model: &LedModel) -> MeanPhotonResult {
    let n0 = zero_order_photon_number(model);
    let delta_n = relative_increase(model);
    MeanPhotonResult {
        n0,
        delta_n,
        n_total: n0 * (1.0 + delta_n),
        method: PhotonMethod::ClosedForm,
        error: 0.0,
        tail_truncated: false,
    }
}

/// Integration defaults sized to the model.
pub fn default_integration(model: &LedModel) -> IntegrationSpec {
    IntegrationSpec::with_tolerance(1e-11).scaled(model.widest_rate())
}

/// `(2π)⁻¹ ∫ dω / |s(ω)|²`.
pub fn inverse_loop_integral(model: &LedModel, spec: &IntegrationSpec) -> Result<(f64, f64)> {
    let e = integrate_1d(|w| 1.0 / model.loop_denominator_norm_sqr(w), spec)?;
    Ok((e.value / (2.0 * PI), e.error / (2.0 * PI)))
}

/// `(2π)⁻¹ ∫ c(ω) / |s(ω)|² dω`.
pub fn commutator_loop_integral(model: &LedModel, spec: &IntegrationSpec) -> Result<(f64, f64)> {
    let e = integrate_1d(|w| model.commutator_spectrum(w) / model.loop_denominator_norm_sqr(w), spec)?;
    Ok((e.value / (2.0 * PI), e.error / (2.0 * PI)))
}

/// Assembles `n₀`, `Δₙ` from the zero-order integral and the fluctuation integral
/// per unit dispersion, so that nothing divides by `N_e`.
fn assemble(
    model: &LedModel,
    inv_loop: (f64, f64),
    fluct_per_dispersion: (f64, f64),
    method: PhotonMethod,
    tail_truncated: bool,
) -> MeanPhotonResult {
    let k = model.fluctuation_coupling();
    let per_emitter = zero_order_per_emitter(model);
    let n0 = model.zero_order_strength() * inv_loop.0;
    let ratio = model.relative_dispersion() * k * k / per_emitter;
    let delta_n = ratio * fluct_per_dispersion.0 / inv_loop.0;
    let rel_err = fluct_per_dispersion.1 / fluct_per_dispersion.0.abs().max(f64::MIN_POSITIVE) + inv_loop.1 / inv_loop.0;
    let n_total = n0 * (1.0 + delta_n);
    MeanPhotonResult {
        n0,
        delta_n,
        n_total,
        method,
        error: n0 * inv_loop.1 / inv_loop.0 + n0 * delta_n * rel_err,
        tail_truncated,
    }
}

pub fn mean_photon_quadrature(model: &LedModel, mode: ConvolutionMode, spec: &IntegrationSpec) -> Result<MeanPhotonResult> {
    let inv = inverse_loop_integral(model, spec)?;
    match mode {
        ConvolutionMode::DeltaApprox => {
            let fl = commutator_loop_integral(model, spec)?;
            Ok(assemble(model, inv, fl, PhotonMethod::QuadratureDeltaApprox, false))
        }
        ConvolutionMode::ExactConvolution => {
            let grid = convolution_grid(model, 1.0)?;
            let (fine, truncated) = fluctuation_on_grid(model, grid)?;
            let coarse_grid = convolution_grid(model, 2.0)?;
            let (coarse, _) = fluctuation_on_grid(model, coarse_grid)?;
            let err = (fine - coarse).abs();
            Ok(assemble(model, inv, (fine, err), PhotonMethod::QuadratureExactConvolution, truncated))
        }
    }
}

/// Grid resolving both the loop scale and the population linewidth.
/// `coarsening` multiplies the spacing; used for the refinement error estimate.
pub fn convolution_grid(model: &LedModel, coarsening: f64) -> Result<FrequencyGrid> {
    let spacing = (model.populations().gamma_p / 4.0).min(model.widest_rate() / 200.0);
    FrequencyGrid::for_model_with_spacing(model, spacing * coarsening)
}

/// Unit-dispersion copy of the population spectrum.
fn unit_population_spectrum(model: &LedModel, grid: FrequencyGrid) -> SpectralDensity {
    let g = model.populations().gamma_p;
    SpectralDensity::sample(grid, SpectrumKind::Population, |w| 2.0 * g / (w * w + g * g))
}

/// `(2π)⁻¹ Σ S_bNe(ω)/|s(ω)|² dω` with `S_bNe = c * δ²N_e` at unit dispersion.
fn fluctuation_on_grid(model: &LedModel, grid: FrequencyGrid) -> Result<(f64, bool)> {
    let c = sample_model_spectrum(model, grid, SpectrumKind::Commutator);
    let pop = unit_population_spectrum(model, grid);
    let conv = spectral_convolution(&c, &pop)?;
    let weighted = SpectralDensity::from_values(
        grid,
        SpectrumKind::Other,
        conv.density
            .values
            .iter()
            .zip(grid.omegas())
            .map(|(s, w)| s / model.loop_denominator_norm_sqr(w))
            .collect(),
    )?;
    // c has an ω⁻² tail, so only the weighted integrand decides whether the edge matters
    let truncated = conv.tail_truncated && weighted.edge_ratio() > EDGE_DECAY_LIMIT;
    Ok((weighted.mass(), truncated))
}

/// Product-noise spectrum `S_bNe = c * δ²N_e(ω)` on a grid.
pub fn product_noise_spectrum(model: &LedModel, grid: FrequencyGrid) -> Result<SpectralDensity> {
    let c = sample_model_spectrum(model, grid, SpectrumKind::Commutator);
    let pop = sample_model_spectrum(model, grid, SpectrumKind::Population);
    Ok(spectral_convolution(&c, &pop)?.density)
}

/// Exact-convolution fluctuation integral per unit dispersion by nested
/// adaptive quadrature, `(2π)⁻² ∬ L(ω′) c(ω−ω′) / |s(ω)|² dω′ dω`, with `L` the
/// unit-dispersion Lorentzian. Independent of the FFT grid route.
pub fn exact_fluctuation_by_quadrature(model: &LedModel, spec: &IntegrationSpec) -> Result<(f64, f64)> {
    let g = model.populations().gamma_p;
    let outer = spec.scaled(g);
    let inner = IntegrationSpec { rel_tol: spec.rel_tol * 0.1, ..*spec };
    let est = integrate_2d(
        |wp, w| {
            let lor = 2.0 * g / (wp * wp + g * g);
            lor * model.commutator_spectrum(w - wp) / model.loop_denominator_norm_sqr(w)
        },
        &outer,
        &inner,
    )?;
    let norm = (2.0 * PI) * (2.0 * PI);
    Ok((est.value / norm, est.error / norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelParams, Populations};
    use approx::assert_relative_eq;

    fn ex1() -> LedModel {
        LedModel::new(ModelParams::default()).unwrap()
    }

    #[test]
    fn spectrum_without_fluctuations_is_zero_order_line() {
        let m = ex1().without_fluctuations();
        for w in [0.0, 0.4, -3.0] {
            assert_relative_eq!(
                photon_number_spectrum(&m, w),
                m.zero_order_strength() / m.loop_denominator_norm_sqr(w),
                max_relative = 1e-15
            );
        }
        let q = mean_photon_quadrature(&m, ConvolutionMode::DeltaApprox, &default_integration(&m)).unwrap();
        assert_relative_eq!(q.n_total, zero_order_photon_number(&m), max_relative = 1e-6);
    }

    #[test]
    fn closed_form_reference_point() {
        // frozen from a 30-digit quadrature of the n(ω) integral (mpmath)
        let r = mean_photon_closed(&ex1());
        assert_relative_eq!(r.n0, 0.0425531914893617, max_relative = 1e-12);
        assert_relative_eq!(r.delta_n, 0.26692456479690524, max_relative = 1e-12);
        assert_relative_eq!(r.n_total, 0.05391168360837894, max_relative = 1e-12);
    }

    #[test]
    fn closed_form_zero_pump_limit() {
        // N = 0 imposed, N_th = 4, r = 1, δ²/N_e = 1: (2/4)[1/2 + 1] = 0.75
        let params = ModelParams { kappa: 0.5, n_threshold: 4.0, pump: 0.0, ..Default::default() };
        let pops = Populations {
            n_excited: 0.0,
            n_ground: 20.0,
            inversion: 0.0,
            delta2_ne: 1e-30,
            gamma_p: 0.1,
            two_d_nene: 0.0,
        };
        let m = LedModel::with_populations(params, pops).unwrap();
        assert_relative_eq!(relative_increase(&m), 0.75, max_relative = 1e-14);
    }

    #[test]
    fn closed_form_without_fluctuations() {
        let r = mean_photon_closed(&ex1().without_fluctuations());
        assert_eq!(r.delta_n, 0.0);
        assert_eq!(r.n_total, r.n0);
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let m = ex1();
        let q = mean_photon_quadrature(&m, ConvolutionMode::DeltaApprox, &default_integration(&m)).unwrap();
        let c = mean_photon_closed(&m);
        assert_relative_eq!(q.n_total, c.n_total, max_relative = 1e-9);
        assert_relative_eq!(q.delta_n, c.delta_n, max_relative = 1e-9);
        assert!(q.error < 1e-9 * q.n_total);
    }

    #[test]
    fn integral_of_spectrum_is_mean_photon_number() {
        let m = ex1();
        let e = integrate_1d(|w| photon_number_spectrum(&m, w), &default_integration(&m)).unwrap();
        assert_relative_eq!(e.value / (2.0 * PI), mean_photon_closed(&m).n_total, max_relative = 1e-9);
    }

    #[test]
    fn zero_pump_quadrature_has_finite_delta() {
        let m = LedModel::new(ModelParams { pump: 0.0, ..Default::default() }).unwrap();
        let q = mean_photon_quadrature(&m, ConvolutionMode::DeltaApprox, &default_integration(&m)).unwrap();
        assert_eq!(q.n_total, 0.0);
        assert_relative_eq!(q.delta_n, relative_increase(&m), max_relative = 1e-9);
    }

    #[test]
    fn exact_convolution_close_to_delta_for_narrow_population_line() {
        let m = LedModel::new(ModelParams { gamma_par: 0.001, ..Default::default() }).unwrap();
        let spec = default_integration(&m);
        let d = mean_photon_quadrature(&m, ConvolutionMode::DeltaApprox, &spec).unwrap();
        let x = mean_photon_quadrature(&m, ConvolutionMode::ExactConvolution, &spec).unwrap();
        assert!(((x.n_total - d.n_total) / d.n_total).abs() < 5e-3);
        assert!(x.n_total < d.n_total);
    }

    #[test]
    fn exact_convolution_two_routes_agree() {
        let m = ex1();
        let grid = convolution_grid(&m, 1.0).unwrap();
        let (fft, truncated) = fluctuation_on_grid(&m, grid).unwrap();
        assert!(!truncated);
        let (quad, err) = exact_fluctuation_by_quadrature(&m, &IntegrationSpec::with_tolerance(1e-9).scaled(1.0)).unwrap();
        assert!(err < 1e-7 * quad);
        assert_relative_eq!(fft, quad, max_relative = 1e-5);
    }

    #[test]
    fn exact_convolution_without_fluctuations_is_zero_order() {
        let m = ex1().without_fluctuations();
        let x = mean_photon_quadrature(&m, ConvolutionMode::ExactConvolution, &default_integration(&m)).unwrap();
        assert_eq!(x.delta_n, 0.0);
        assert_relative_eq!(x.n_total, zero_order_photon_number(&m), max_relative = 1e-9);
    }
}
