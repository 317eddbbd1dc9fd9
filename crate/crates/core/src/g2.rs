//! Zero-delay second-order correlation `g₂`.
//!
//! The closed form is `g₂ = 2[1 + 2(Δₙ/(1+Δₙ))²]`. The brute-force route
//! assembles `g₂ = 2 + (κγ⊥/N_th)⁴ C_g / n²` from the fourth-order cumulant
//!
//! `C_g = 4 (2π)⁻² ∬ c(x) c(y) |J(x, y)|² dx dy`,
//! `J(x, y) = (2π)⁻¹ ∫ δ²N_e(ω) dω / [s(ω + y) s*(ω + x)]`,
//!
//! using only `c`, `s` and the population spectrum. In delta mode the
//! population spectrum collapses to `2π δ²N_e δ(ω)`.
//!
//! Internally every quantity is carried per unit dispersion and per emitter
//! so that the zero-pump limit stays finite.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::LedModel;
use crate::photon::{
    exact_fluctuation_by_quadrature, inverse_loop_integral, mean_photon_closed, mean_photon_quadrature,
    ConvolutionMode,
};
use crate::quadrature::{integrate_1d_with_points, integrate_2d, IntegrationSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum G2Method {
    ClosedForm,
    CumulantDelta,
    CumulantFull,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CumulantMode {
    Delta,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct G2Result {
    pub g2: f64,
    /// `C_g`.
    pub cumulant: f64,
    /// Mean photon number used in the normalisation.
    pub n_total: f64,
    pub method: G2Method,
    /// Absolute error estimate on `g2`.
    pub error: f64,
}

/// `2[1 + 2(Δ/(1+Δ))²]`; tends to 6 as `Δ → ∞`.
pub fn g2_from_relative_increase(delta_n: f64) -> f64 {
    if delta_n.is_infinite() {
        return 6.0;
    }
    let x = delta_n / (1.0 + delta_n);
    2.0 * (1.0 + 2.0 * x * x)
}

/// `(2π)⁻¹ ∫ c/|s|² dω = 1/(2AB²) + γ⊥/(4A²B)`.
fn commutator_loop_closed(model: &LedModel) -> f64 {
    let (a, b) = model.quartic_coefficients();
    1.0 / (2.0 * a * b * b) + model.params().gamma_perp / (4.0 * a * a * b)
}

/// Delta-mode cumulant in closed form, `(δ²N_e)² [2 (2π)⁻¹∫c/|s|²]²`.
pub fn cumulant_closed(model: &LedModel) -> f64 {
    let d = model.populations().delta2_ne;
    let i = commutator_loop_closed(model);
    d * d * 4.0 * i * i
}

pub fn g2_closed(model: &LedModel) -> G2Result {
    let mean = mean_photon_closed(model);
    G2Result {
        g2: g2_from_relative_increase(mean.delta_n),
        cumulant: cumulant_closed(model),
        n_total: mean.n_total,
        method: G2Method::ClosedForm,
        error: 0.0,
    }
}

/// Unit-dispersion Lorentzian `2γ_P/(ω² + γ_P²)`.
fn unit_lorentzian(model: &LedModel, omega: f64) -> f64 {
    let g = model.populations().gamma_p;
    2.0 * g / (omega * omega + g * g)
}

fn j_integrand(model: &LedModel, x: f64, y: f64, omega: f64) -> Complex64 {
    unit_lorentzian(model, omega) / (model.loop_denominator(omega + y) * model.loop_denominator(omega + x).conj())
}

/// `J(x, y)` per unit dispersion, with its error estimate.
fn j_unit(model: &LedModel, x: f64, y: f64, mode: CumulantMode, spec: &IntegrationSpec) -> Result<(Complex64, f64)> {
    match mode {
        CumulantMode::Delta => Ok((1.0 / (model.loop_denominator(y) * model.loop_denominator(x).conj()), 0.0)),
        CumulantMode::Full => {
            // the loop factors peak near ω = −x and ω = −y, far out in the Lorentzian tail
            let w = model.widest_rate();
            let points = [-x - w, -x, -x + w, -y - w, -y, -y + w];
            let e = integrate_1d_with_points(
                |o| j_integrand(model, x, y, o),
                &spec.scaled(model.populations().gamma_p),
                &points,
            )?;
            Ok((e.value / (2.0 * PI), e.error / (2.0 * PI)))
        }
    }
}

/// `J(ω₃′, ω₄′)`.
pub fn j_g_integral(
    model: &LedModel,
    omega3: f64,
    omega4: f64,
    mode: CumulantMode,
    spec: &IntegrationSpec,
) -> Result<Complex64> {
    let (j, _) = j_unit(model, omega3, omega4, mode, spec)?;
    Ok(j * model.populations().delta2_ne)
}

/// Tolerances for the nested cumulant integrals, derived from the outer request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CumulantSpec {
    pub outer: IntegrationSpec,
    pub inner: IntegrationSpec,
    pub population: IntegrationSpec,
}

impl CumulantSpec {
    /// Absolute tolerances are pinned to the delta-mode magnitudes so that
    /// negligible far-tail rows are not refined to full relative accuracy.
    pub fn for_model(model: &LedModel, rel_tol: f64) -> Self {
        let w = model.widest_rate();
        let j0 = 1.0 / model.loop_denominator_norm_sqr(0.0);
        let i = commutator_loop_closed(model);
        // ∬ c c |J|² in delta mode is (2π I)²
        let total = (2.0 * PI * i).powi(2);
        let inner_tol = rel_tol * 0.1;
        let pop_tol = rel_tol * 0.01;
        CumulantSpec {
            outer: IntegrationSpec::with_tolerance(rel_tol).scaled(w).parallel(true),
            inner: IntegrationSpec { abs_tol: inner_tol * 1e-3 * total / w, ..IntegrationSpec::with_tolerance(inner_tol).scaled(w) },
            population: IntegrationSpec { abs_tol: pop_tol * 1e-3 * j0, ..IntegrationSpec::with_tolerance(pop_tol) },
        }
    }
}

/// `C_g` per unit dispersion squared.
fn cumulant_unit(model: &LedModel, mode: CumulantMode, spec: &CumulantSpec) -> Result<(f64, f64)> {
    let pop_failure = std::sync::OnceLock::new();
    let est = integrate_2d(
        |x, y| match j_unit(model, x, y, mode, &spec.population) {
            Ok((j, _)) => model.commutator_spectrum(x) * model.commutator_spectrum(y) * j.norm_sqr(),
            Err(e) => {
                let _ = pop_failure.set(e);
                0.0
            }
        },
        &spec.outer,
        &spec.inner,
    )?;
    if let Some(e) = pop_failure.into_inner() {
        return Err(e);
    }
    let norm = 4.0 / (4.0 * PI * PI);
    Ok((est.value * norm, est.error * norm))
}

/// `C_g = 4 (2π)⁻² ∬ c(x) c(y) |J(x, y)|² dx dy`, with its error estimate.
pub fn cumulant_cg(model: &LedModel, mode: CumulantMode, spec: &CumulantSpec) -> Result<(f64, f64)> {
    let d = model.populations().delta2_ne;
    if d == 0.0 {
        return Ok((0.0, 0.0));
    }
    let (c, e) = cumulant_unit(model, mode, spec)?;
    Ok((c * d * d, e * d * d))
}

/// `g₂ = 2 + (κγ⊥/N_th)⁴ C_g / n²` with `n` from the mean-photon method matching `mode`.
pub fn g2_bruteforce(model: &LedModel, mode: CumulantMode, spec: &CumulantSpec) -> Result<G2Result> {
    let method = match mode {
        CumulantMode::Delta => G2Method::CumulantDelta,
        CumulantMode::Full => G2Method::CumulantFull,
    };
    let rd = model.relative_dispersion();
    let photon_spec = IntegrationSpec::with_tolerance(spec.inner.rel_tol).scaled(model.widest_rate());
    let mean = mean_photon_quadrature(model, ConvolutionMode::DeltaApprox, &photon_spec)?;
    if rd == 0.0 {
        return Ok(G2Result { g2: 2.0, cumulant: 0.0, n_total: mean.n0, method, error: 0.0 });
    }

    // n per emitter: κγ⊥²/(2N_th)·[I₀ + (δ²/N_e)(k²·2N_th/(κγ⊥²))·F]
    let p = model.params();
    let per_emitter = 0.5 * p.kappa * p.gamma_perp * p.gamma_perp / p.n_threshold;
    let k = model.fluctuation_coupling();
    let (i0, i0_err) = inverse_loop_integral(model, &photon_spec)?;
    let (fluct, fluct_err) = match mode {
        CumulantMode::Delta => crate::photon::commutator_loop_integral(model, &photon_spec)?,
        CumulantMode::Full => exact_fluctuation_by_quadrature(model, &photon_spec)?,
    };
    let n_pe = per_emitter * i0 + rd * k * k * fluct;
    let n_pe_err = per_emitter * i0_err + rd * k * k * fluct_err;

    let (cu, cu_err) = cumulant_unit(model, mode, spec)?;
    let excess = k.powi(4) * rd * rd * cu / (n_pe * n_pe);
    let error = excess * (cu_err / cu + 2.0 * n_pe_err / n_pe);
    let n_e = model.populations().n_excited;
    let d = model.populations().delta2_ne;
    Ok(G2Result {
        g2: 2.0 + excess,
        cumulant: cu * d * d,
        n_total: if mode == CumulantMode::Delta { mean.n_total } else { n_pe * n_e },
        method,
        error,
    })
}
