//! Physical parameters of a below-threshold two-level LED, the steady-state
//! populations they imply, and the two spectral building blocks: the loop
//! denominator `s(ω)` and the commutator spectrum `c(ω)`.
//!
//! Rates and frequencies are measured in units of the polarisation decay
//! rate. [`ModelParams::in_gamma_perp_units`] rescales a parameter set that
//! was entered in other units.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One LED configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Cavity decay rate κ.
    pub kappa: f64,
    /// Polarisation decay rate γ⊥.
    pub gamma_perp: f64,
    /// Population decay rate γ∥.
    pub gamma_par: f64,
    /// Dimensionless pump P.
    pub pump: f64,
    /// Threshold inversion N_th.
    pub n_threshold: f64,
    /// Total emitter count N₀.
    pub n_emitters: f64,
    /// Polarisation factor f.
    pub f_factor: f64,
}

pub const DEFAULT_F_FACTOR: f64 = 0.5;

impl Default for ModelParams {
    /// The reference configuration used throughout the tests.
    fn default() -> Self {
        ModelParams {
            kappa: 0.5,
            gamma_perp: 1.0,
            gamma_par: 0.1,
            pump: 0.1,
            n_threshold: 5.0,
            n_emitters: 20.0,
            f_factor: DEFAULT_F_FACTOR,
        }
    }
}

impl ModelParams {
    /// Builds a parameter set from the adiabaticity parameter `2κ/γ⊥` with `γ⊥ = 1`.
    pub fn from_kappa_ratio(
        kappa_ratio: f64,
        gamma_par: f64,
        pump: f64,
        n_threshold: f64,
        n_emitters: f64,
    ) -> Self {
        ModelParams {
            kappa: 0.5 * kappa_ratio,
            gamma_perp: 1.0,
            gamma_par,
            pump,
            n_threshold,
            n_emitters,
            f_factor: DEFAULT_F_FACTOR,
        }
    }

    pub fn kappa_ratio(&self) -> f64 {
        2.0 * self.kappa / self.gamma_perp
    }

    /// Rescales every rate so that `γ⊥ = 1`.
    pub fn in_gamma_perp_units(&self) -> Self {
        let g = self.gamma_perp;
        ModelParams {
            kappa: self.kappa / g,
            gamma_perp: 1.0,
            gamma_par: self.gamma_par / g,
            ..*self
        }
    }

    /// Vacuum Rabi frequency derived from `N_th = κγ⊥ / (2fΩ²)`.
    pub fn coupling(&self) -> f64 {
        (self.kappa * self.gamma_perp / (2.0 * self.f_factor * self.n_threshold)).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("kappa", self.kappa),
            ("gamma_perp", self.gamma_perp),
            ("gamma_par", self.gamma_par),
            ("n_threshold", self.n_threshold),
            ("f_factor", self.f_factor),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if !(self.pump.is_finite() && self.pump >= 0.0) {
            return Err(Error::InvalidParams(format!("pump must be finite and >= 0, got {}", self.pump)));
        }
        if !(self.n_emitters.is_finite() && self.n_emitters >= 1.0) {
            return Err(Error::InvalidParams(format!(
                "n_emitters must be finite and >= 1, got {}",
                self.n_emitters
            )));
        }
        let omega = self.coupling();
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidParams(format!("derived coupling is not positive: {omega}")));
        }
        Ok(())
    }
}

/// Steady-state populations and the population-noise parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Populations {
    pub n_excited: f64,
    pub n_ground: f64,
    /// Inversion `N_e - N_g`.
    pub inversion: f64,
    /// Dispersion of the upper-state population, `δ²N_e`.
    pub delta2_ne: f64,
    /// Pump-broadened population decay rate.
    pub gamma_p: f64,
    /// Langevin diffusion `2D_{NeNe}`.
    pub two_d_nene: f64,
}

/// Closed-form populations. Fails when the inversion reaches threshold.
pub fn derive_populations(params: &ModelParams) -> Result<Populations> {
    params.validate()?;
    let p = params.pump;
    let n0 = params.n_emitters;
    let n_excited = p * n0 / (p + 1.0);
    let n_ground = n0 - n_excited;
    let inversion = n_excited - n_ground;
    if inversion >= params.n_threshold {
        return Err(Error::AboveThreshold {
            inversion,
            threshold: params.n_threshold,
        });
    }
    Ok(Populations {
        n_excited,
        n_ground,
        inversion,
        delta2_ne: n_excited / (p + 1.0),
        gamma_p: params.gamma_par * (p + 1.0),
        two_d_nene: params.gamma_par * (p * n_ground + n_excited),
    })
}

/// `γ∥ / √(κγ⊥)`; the δ-approximation for the population spectrum needs this ≪ 1.
pub fn validity_ratio(params: &ModelParams) -> f64 {
    params.gamma_par / (params.kappa * params.gamma_perp).sqrt()
}

/// Ratio above which results relying on the δ-approximation are flagged.
pub const VALIDITY_WARNING: f64 = 0.1;

/// A validated parameter set together with its populations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedModel {
    params: ModelParams,
    pops: Populations,
}

impl LedModel {
    pub fn new(params: ModelParams) -> Result<Self> {
        let pops = derive_populations(&params)?;
        Ok(LedModel { params, pops })
    }

    /// Bypasses the population formulas; used to switch population noise on or off
    /// and by tests probing limits the physical parameters cannot reach.
    pub fn with_populations(params: ModelParams, pops: Populations) -> Result<Self> {
        params.validate()?;
        if pops.inversion >= params.n_threshold {
            return Err(Error::AboveThreshold {
                inversion: pops.inversion,
                threshold: params.n_threshold,
            });
        }
        if !(pops.delta2_ne >= 0.0 && pops.n_excited >= 0.0 && pops.gamma_p > 0.0) {
            return Err(Error::InvalidParams("populations out of range".into()));
        }
        Ok(LedModel { params, pops })
    }

    /// Same configuration with the population fluctuations switched off.
    pub fn without_fluctuations(&self) -> Self {
        LedModel {
            params: self.params,
            pops: Populations {
                delta2_ne: 0.0,
                ..self.pops
            },
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn populations(&self) -> &Populations {
        &self.pops
    }

    /// `N / N_th`, always < 1.
    pub fn inversion_ratio(&self) -> f64 {
        self.pops.inversion / self.params.n_threshold
    }

    /// `s(ω) = (iω−κ)(iω−γ⊥/2) − (κγ⊥/2)·N/N_th`.
    pub fn loop_denominator(&self, omega: f64) -> Complex64 {
        let p = &self.params;
        let i_omega = Complex64::new(0.0, omega);
        (i_omega - p.kappa) * (i_omega - 0.5 * p.gamma_perp)
            - 0.5 * p.kappa * p.gamma_perp * self.inversion_ratio()
    }

    /// `|s(ω)|²` expanded as a real quartic.
    pub fn loop_denominator_norm_sqr(&self, omega: f64) -> f64 {
        let (a, b) = self.quartic_coefficients();
        let w2 = omega * omega;
        (a - w2) * (a - w2) + b * b * w2
    }

    /// `(A, B)` with `|s(ω)|² = (A − ω²)² + B²ω²`.
    pub fn quartic_coefficients(&self) -> (f64, f64) {
        let p = &self.params;
        let a = 0.5 * p.kappa * p.gamma_perp * (1.0 - self.inversion_ratio());
        let b = p.kappa + 0.5 * p.gamma_perp;
        (a, b)
    }

    /// Commutator spectrum `c(ω)`; integrates to `2π` over the real line.
    pub fn commutator_spectrum(&self, omega: f64) -> f64 {
        let p = &self.params;
        let num = 2.0 * p.kappa * omega * omega
            + 0.5 * p.kappa * p.gamma_perp * p.gamma_perp * (1.0 - self.inversion_ratio());
        num / self.loop_denominator_norm_sqr(omega)
    }

    /// Lorentzian population-fluctuation spectrum `2γ_P δ²N_e / (ω² + γ_P²)`.
    pub fn population_spectrum(&self, omega: f64) -> f64 {
        let g = self.pops.gamma_p;
        2.0 * g * self.pops.delta2_ne / (omega * omega + g * g)
    }

    /// Spontaneous-emission strength `κγ⊥²N_e / (2N_th)` in the numerator of `n(ω)`.
    pub fn zero_order_strength(&self) -> f64 {
        let p = &self.params;
        0.5 * p.kappa * p.gamma_perp * p.gamma_perp * self.pops.n_excited / p.n_threshold
    }

    /// Coupling `κγ⊥/N_th` of the population-noise term into the field.
    pub fn fluctuation_coupling(&self) -> f64 {
        self.params.kappa * self.params.gamma_perp / self.params.n_threshold
    }

    /// `δ²N_e / N_e`, taken as `1/(P+1)` so that it stays finite at zero pump.
    /// Zero when fluctuations were switched off.
    pub fn relative_dispersion(&self) -> f64 {
        if self.pops.delta2_ne == 0.0 {
            0.0
        } else if self.pops.n_excited > 0.0 {
            self.pops.delta2_ne / self.pops.n_excited
        } else {
            1.0 / (self.params.pump + 1.0)
        }
    }

    /// `γ_P` relative to the narrowest loop rate `A/B` of `|s(ω)|²`. The
    /// δ-approximation needs this small as well as [`validity_ratio`];
    /// for `κ ≪ γ⊥` it is the stricter of the two.
    pub fn population_line_ratio(&self) -> f64 {
        let (a, b) = self.quartic_coefficients();
        self.pops.gamma_p * b / a
    }

    /// Widest spectral scale of the model, used to size grids.
    pub fn widest_rate(&self) -> f64 {
        let p = &self.params;
        let collective = (p.kappa * p.gamma_perp * (1.0 + self.inversion_ratio().abs())).sqrt();
        p.kappa.max(p.gamma_perp).max(collective)
    }

    /// Residual `2κn − γ∥[P(N₀−N_e) − N_e]` of the energy balance for a given photon number.
    pub fn energy_balance_residual(&self, photon_number: f64) -> f64 {
        let p = &self.params;
        2.0 * p.kappa * photon_number
            - p.gamma_par * (p.pump * (p.n_emitters - self.pops.n_excited) - self.pops.n_excited)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ex1() -> LedModel {
        LedModel::new(ModelParams::default()).unwrap()
    }

    #[test]
    fn populations_at_unit_pump() {
        let params = ModelParams {
            pump: 1.0,
            n_emitters: 100.0,
            n_threshold: 5.0,
            ..Default::default()
        };
        let pops = derive_populations(&params).unwrap();
        assert_eq!(pops.n_excited, 50.0);
        assert_eq!(pops.n_ground, 50.0);
        assert_eq!(pops.inversion, 0.0);
        assert_eq!(pops.delta2_ne, 25.0);
    }

    #[test]
    fn populations_at_zero_pump() {
        let params = ModelParams {
            pump: 0.0,
            ..Default::default()
        };
        let pops = derive_populations(&params).unwrap();
        assert_eq!(pops.n_excited, 0.0);
        assert_eq!(pops.n_ground, 20.0);
        assert_eq!(pops.inversion, -20.0);
        assert_eq!(pops.delta2_ne, 0.0);
        assert_eq!(pops.gamma_p, params.gamma_par);
    }

    #[test]
    fn populations_reference_point() {
        // rational oracle: N_e = 2/1.1, N = 2N_e - 20, δ² = N_e/1.1, γ_P = 0.1·1.1
        let pops = *ex1().populations();
        assert_relative_eq!(pops.n_excited, 20.0 / 11.0, max_relative = 1e-14);
        assert_relative_eq!(pops.inversion, -180.0 / 11.0, max_relative = 1e-14);
        assert_relative_eq!(pops.delta2_ne, 200.0 / 121.0, max_relative = 1e-14);
        assert_relative_eq!(pops.gamma_p, 0.11, max_relative = 1e-14);
        assert_relative_eq!(pops.n_excited, 1.81818, epsilon = 1e-5);
        assert_relative_eq!(pops.inversion, -16.36364, epsilon = 1e-5);
        assert_relative_eq!(pops.delta2_ne, 1.65289, epsilon = 1e-5);
        // 2D = γ∥(P·N_g + N_e)
        assert_relative_eq!(pops.two_d_nene, 0.1 * (0.1 * 200.0 / 11.0 + 20.0 / 11.0), max_relative = 1e-14);
    }

    #[test]
    fn above_threshold_is_rejected() {
        let params = ModelParams {
            pump: 10.0,
            n_emitters: 20.0,
            n_threshold: 5.0,
            ..Default::default()
        };
        assert!(matches!(derive_populations(&params), Err(Error::AboveThreshold { .. })));
        // exactly at threshold: P = 1.5 gives N_e = 12, N = 4
        let at = ModelParams {
            pump: 1.5,
            n_threshold: 4.0,
            ..Default::default()
        };
        assert!(matches!(derive_populations(&at), Err(Error::AboveThreshold { .. })));
    }

    #[test]
    fn invalid_rates_are_rejected() {
        for bad in [
            ModelParams { kappa: 0.0, ..Default::default() },
            ModelParams { gamma_par: -1.0, ..Default::default() },
            ModelParams { pump: -0.1, ..Default::default() },
            ModelParams { n_emitters: 0.5, ..Default::default() },
            ModelParams { f_factor: f64::NAN, ..Default::default() },
        ] {
            assert!(matches!(derive_populations(&bad), Err(Error::InvalidParams(_))), "{bad:?}");
        }
    }

    #[test]
    fn loop_denominator_at_zero_is_real() {
        let m = ex1();
        let s0 = m.loop_denominator(0.0);
        assert_eq!(s0.im, 0.0);
        let (a, _) = m.quartic_coefficients();
        assert_relative_eq!(s0.re, a, max_relative = 1e-14);
        assert_relative_eq!(s0.re, 1.068182, epsilon = 1e-6);
    }

    #[test]
    fn loop_denominator_quartic_matches_complex_form() {
        let m = ex1();
        for w in [-7.0, -0.3, 0.0, 0.11, 2.5, 40.0] {
            assert_relative_eq!(m.loop_denominator(w).norm_sqr(), m.loop_denominator_norm_sqr(w), max_relative = 1e-12);
        }
        // |s|² ~ ω⁴ at large ω
        let w = 1e5;
        assert_relative_eq!(m.loop_denominator_norm_sqr(w) / w.powi(4), 1.0, max_relative = 1e-8);
    }

    #[test]
    fn commutator_spectrum_at_zero() {
        let m = ex1();
        let expected = 2.0 / (0.5 * (1.0 - m.inversion_ratio()));
        assert_relative_eq!(m.commutator_spectrum(0.0), expected, max_relative = 1e-13);
        assert_relative_eq!(m.commutator_spectrum(0.0), 0.93617, epsilon = 1e-5);
    }

    #[test]
    fn population_spectrum_limits() {
        let m = ex1();
        let p = m.populations();
        assert_relative_eq!(m.population_spectrum(0.0), 2.0 * p.delta2_ne / p.gamma_p, max_relative = 1e-14);
        let dark = LedModel::new(ModelParams { pump: 0.0, ..Default::default() }).unwrap();
        assert_eq!(dark.population_spectrum(0.0), 0.0);
        assert_eq!(dark.population_spectrum(3.0), 0.0);
    }

    #[test]
    fn validity_ratio_examples() {
        assert_relative_eq!(validity_ratio(&ModelParams::default()), 0.141421, epsilon = 1e-6);
        let p = ModelParams { kappa: 2.0, gamma_par: 0.01, ..Default::default() };
        assert_relative_eq!(validity_ratio(&p), 0.0070711, epsilon = 1e-7);
        let p = ModelParams { gamma_par: 1e-300, ..Default::default() };
        assert!(validity_ratio(&p) < 1e-299);
    }

    #[test]
    fn unit_rescaling_preserves_dimensionless_groups() {
        let p = ModelParams { kappa: 3.0, gamma_perp: 2.0, gamma_par: 0.4, ..Default::default() };
        let q = p.in_gamma_perp_units();
        assert_eq!(q.gamma_perp, 1.0);
        assert_relative_eq!(q.kappa_ratio(), p.kappa_ratio());
        assert_relative_eq!(validity_ratio(&q), validity_ratio(&p), max_relative = 1e-14);
    }

    #[test]
    fn coupling_reproduces_threshold() {
        let p = ModelParams::default();
        let omega = p.coupling();
        assert_relative_eq!(p.kappa * p.gamma_perp / (2.0 * p.f_factor * omega * omega), p.n_threshold, max_relative = 1e-14);
    }

    #[test]
    fn energy_balance_residual_vanishes_at_zero_photons() {
        // with N_e = PN₀/(P+1) the right-hand side is identically zero
        let m = ex1();
        assert!(m.energy_balance_residual(0.0).abs() < 1e-14);
        assert_relative_eq!(m.energy_balance_residual(0.05), 2.0 * 0.5 * 0.05, max_relative = 1e-12);
    }
}
