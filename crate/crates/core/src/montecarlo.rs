//! Classical stochastic analog of the linear field equation
//!
//! `a(ω) = [F(ω) + (κγ⊥/N_th)(b* δN_e)(ω)] / s(ω)`,
//!
//! with `b` a complex Gaussian process of spectrum `c(ω)`, `δN_e` an
//! Ornstein–Uhlenbeck path with the Lorentzian population spectrum and `F`
//! white noise of strength `κγ⊥²N_e/(2N_th)`. Records are synthesized on a
//! periodic grid: `x(t_j) = Σ_k X_k e^{−iω_k t_j}` with `E|X_k|² = S(ω_k)/T`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{FrequencyGrid, SpectralDensity};
use crate::model::LedModel;

/// Largest `γ_P·dt` accepted by the population recursion.
pub const MAX_POPULATION_STEP: f64 = 0.1;
/// Nyquist frequency of a record in units of the widest model rate.
pub const NYQUIST_FACTOR: f64 = 20.0;
/// Fewest records [`estimate_moments`] accepts.
pub const MIN_RECORDS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    /// Record length `T` in units of `1/γ⊥`.
    pub duration: f64,
    /// Samples per record, a power of two.
    pub samples: usize,
    pub records: usize,
    pub seed: u64,
    /// Fraction of each record discarded at the start.
    pub burn_in: f64,
}

impl MonteCarloConfig {
    /// Sized so that `2π/T` resolves `γ_P` (`T ≥ 50/γ_P`) and the Nyquist
    /// frequency is at least [`NYQUIST_FACTOR`] times the widest model rate.
    pub fn for_model(model: &LedModel, records: usize, seed: u64) -> Self {
        let burn_in = 0.05;
        let gamma_p = model.populations().gamma_p;
        let duration = 50.0 / gamma_p / (1.0 - burn_in);
        let nyquist = NYQUIST_FACTOR * model.widest_rate();
        let dt = (PI / nyquist).min(0.5 * MAX_POPULATION_STEP / gamma_p);
        let samples = ((duration / dt).ceil() as usize).next_power_of_two().max(16);
        MonteCarloConfig { duration, samples, records, seed, burn_in }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::InvalidParams(format!("record duration must be > 0, got {}", self.duration)));
        }
        if self.samples < 16 || !self.samples.is_power_of_two() {
            return Err(Error::InvalidParams(format!("samples must be a power of two >= 16, got {}", self.samples)));
        }
        if !(0.0..0.5).contains(&self.burn_in) {
            return Err(Error::InvalidParams(format!("burn-in fraction must lie in [0, 0.5), got {}", self.burn_in)));
        }
        Ok(())
    }

    pub fn time_step(&self) -> f64 {
        self.duration / self.samples as f64
    }

    /// Grid of the record's Fourier frequencies, `ω_k = 2πk/T` for `|k| ≤ M/2`.
    pub fn frequency_grid(&self) -> Result<FrequencyGrid> {
        FrequencyGrid::new(PI / self.time_step(), self.samples + 1)
    }

    fn kept_range(&self) -> std::ops::Range<usize> {
        ((self.burn_in * self.samples as f64).ceil() as usize)..self.samples
    }
}

/// Independent stream for record `index` of the ensemble seeded by `seed`.
pub fn record_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let sd = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(sd * re, sd * im)
}

/// FFT bin of grid index `i`; the `+ω_max` node aliases `−ω_max` and is dropped.
fn bin_of(i: usize, m: usize) -> usize {
    (i + m / 2) % m
}

fn plans(m: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    let mut planner = FftPlanner::new();
    (planner.plan_fft_forward(m), planner.plan_fft_inverse(m))
}

/// Draws Fourier amplitudes with `E|X_k|² = S(ω_k)/T`.
fn colored_amplitudes<R: Rng + ?Sized>(values: &[f64], config: &MonteCarloConfig, rng: &mut R) -> Vec<Complex64> {
    let m = config.samples;
    let mut amp = vec![Complex64::new(0.0, 0.0); m];
    for (i, s) in values.iter().take(m).enumerate() {
        amp[bin_of(i, m)] = complex_normal(rng, s.max(0.0) / config.duration);
    }
    amp
}

/// Stationary complex Gaussian series with power spectrum `spectrum`.
pub fn synthesize_colored_noise<R: Rng + ?Sized>(
    spectrum: &SpectralDensity,
    config: &MonteCarloConfig,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    config.validate()?;
    if spectrum.grid != config.frequency_grid()? {
        return Err(Error::GridMismatch);
    }
    let mut x = colored_amplitudes(&spectrum.values, config, rng);
    plans(config.samples).0.process(&mut x);
    Ok(x)
}

/// Stationary Ornstein–Uhlenbeck path with rate `γ_P` and variance `δ²N_e`,
/// sampled exactly: `x_{j+1} = ρ x_j + √(δ²(1−ρ²)) ξ_j`, `ρ = e^{−γ_P dt}`.
pub fn ou_population_path<R: Rng + ?Sized>(model: &LedModel, config: &MonteCarloConfig, rng: &mut R) -> Result<Vec<f64>> {
    config.validate()?;
    let pops = model.populations();
    let dt = config.time_step();
    let product = pops.gamma_p * dt;
    if product > MAX_POPULATION_STEP {
        return Err(Error::StepTooLarge { product, limit: MAX_POPULATION_STEP });
    }
    let var = pops.delta2_ne;
    if var == 0.0 {
        return Ok(vec![0.0; config.samples]);
    }
    let rho = (-product).exp();
    let kick = (var * (1.0 - rho * rho)).sqrt();
    let mut path = Vec::with_capacity(config.samples);
    let z: f64 = rng.sample(StandardNormal);
    let mut x = var.sqrt() * z;
    path.push(x);
    for _ in 1..config.samples {
        let z: f64 = rng.sample(StandardNormal);
        x = rho * x + kick * z;
        path.push(x);
    }
    Ok(path)
}

/// Precomputed spectra and transforms shared by all records of an ensemble.
pub struct FieldSimulator {
    model: LedModel,
    config: MonteCarloConfig,
    commutator: Vec<f64>,
    inverse_loop: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FieldSimulator {
    pub fn new(model: &LedModel, config: &MonteCarloConfig) -> Result<Self> {
        config.validate()?;
        let grid = config.frequency_grid()?;
        let m = config.samples;
        let mut inverse_loop = vec![Complex64::new(0.0, 0.0); m];
        for (i, w) in grid.omegas().take(m).enumerate() {
            inverse_loop[bin_of(i, m)] = 1.0 / model.loop_denominator(w);
        }
        let (forward, inverse) = plans(m);
        Ok(FieldSimulator {
            model: *model,
            config: *config,
            commutator: grid.omegas().map(|w| model.commutator_spectrum(w)).collect(),
            inverse_loop,
            forward,
            inverse,
        })
    }

    /// One field record with the burn-in removed.
    pub fn record<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<Complex64>> {
        let m = self.config.samples;
        let mut b = colored_amplitudes(&self.commutator, &self.config, rng);
        self.forward.process(&mut b);

        let drive_var = self.model.zero_order_strength() / self.config.duration;
        let mut field: Vec<Complex64> = (0..m).map(|_| complex_normal(rng, drive_var)).collect();

        let pop = ou_population_path(&self.model, &self.config, rng)?;
        let k = self.model.fluctuation_coupling();
        // analysis transform X_k = M⁻¹ Σ_j x_j e^{+iω_k t_j}
        let mut product: Vec<Complex64> = b.iter().zip(&pop).map(|(b, n)| b.conj() * *n).collect();
        self.inverse.process(&mut product);
        let scale = k / m as f64;
        for ((f, p), h) in field.iter_mut().zip(&product).zip(&self.inverse_loop) {
            *f = (*f + *p * scale) * *h;
        }
        self.forward.process(&mut field);
        Ok(field[self.config.kept_range()].to_vec())
    }
}

pub fn simulate_field_record<R: Rng + ?Sized>(
    model: &LedModel,
    config: &MonteCarloConfig,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    FieldSimulator::new(model, config)?.record(rng)
}

/// Time averages of `|a|²` and `|a|⁴` over one record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecordMoments {
    pub intensity: f64,
    pub intensity_sq: f64,
}

impl RecordMoments {
    pub fn of(series: &[Complex64]) -> Self {
        let len = series.len().max(1) as f64;
        let (s2, s4) = series.iter().fold((0.0, 0.0), |(s2, s4), a| {
            let i = a.norm_sqr();
            (s2 + i, s4 + i * i)
        });
        RecordMoments { intensity: s2 / len, intensity_sq: s4 / len }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub n: f64,
    pub g2: f64,
    pub n_se: f64,
    pub g2_se: f64,
    pub records: usize,
}

/// Ensemble `n` and `g₂ = ⟨|a|⁴⟩/n²` with standard errors from the
/// record-to-record scatter (delta method for the ratio).
pub fn estimate_from_record_moments(moments: &[RecordMoments]) -> Result<MomentEstimate> {
    let r = moments.len();
    if r < MIN_RECORDS {
        return Err(Error::TooFewRecords { required: MIN_RECORDS, got: r });
    }
    let rf = r as f64;
    let m2 = moments.iter().map(|m| m.intensity).sum::<f64>() / rf;
    let m4 = moments.iter().map(|m| m.intensity_sq).sum::<f64>() / rf;
    let (mut v22, mut v44, mut v24) = (0.0, 0.0, 0.0);
    for m in moments {
        let (d2, d4) = (m.intensity - m2, m.intensity_sq - m4);
        v22 += d2 * d2;
        v44 += d4 * d4;
        v24 += d2 * d4;
    }
    let denom = (rf - 1.0) * rf;
    let (v22, v44, v24) = (v22 / denom, v44 / denom, v24 / denom);
    let g2 = m4 / (m2 * m2);
    let (d4, d2) = (1.0 / (m2 * m2), -2.0 * m4 / (m2 * m2 * m2));
    let g2_var = d4 * d4 * v44 + d2 * d2 * v22 + 2.0 * d2 * d4 * v24;
    Ok(MomentEstimate { n: m2, g2, n_se: v22.sqrt(), g2_se: g2_var.max(0.0).sqrt(), records: r })
}

pub fn estimate_moments(records: &[Vec<Complex64>]) -> Result<MomentEstimate> {
    let moments: Vec<RecordMoments> = records.iter().map(|r| RecordMoments::of(r)).collect();
    estimate_from_record_moments(&moments)
}

/// Simulates `config.records` independent records in parallel and reduces them
/// in record order, so the result depends only on the seed.
pub fn run_ensemble(model: &LedModel, config: &MonteCarloConfig) -> Result<MomentEstimate> {
    let sim = FieldSimulator::new(model, config)?;
    let moments: Vec<RecordMoments> = (0..config.records as u64)
        .into_par_iter()
        .map(|i| sim.record(&mut record_rng(config.seed, i)).map(|r| RecordMoments::of(&r)))
        .collect::<Result<_>>()?;
    estimate_from_record_moments(&moments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SpectrumKind;
    use crate::model::ModelParams;

    fn ex1() -> LedModel {
        LedModel::new(ModelParams::default()).unwrap()
    }

    fn small_config() -> MonteCarloConfig {
        MonteCarloConfig { duration: 100.0, samples: 1024, records: 40, seed: 7, burn_in: 0.0 }
    }

    #[test]
    fn config_for_reference_point() {
        let m = ex1();
        let c = MonteCarloConfig::for_model(&m, 500, 1);
        c.validate().unwrap();
        assert!(c.duration * (1.0 - c.burn_in) >= 50.0 / m.populations().gamma_p);
        assert!(PI / c.time_step() >= NYQUIST_FACTOR * m.widest_rate());
        assert!(m.populations().gamma_p * c.time_step() <= MAX_POPULATION_STEP);
    }

    #[test]
    fn config_validation() {
        let ok = small_config();
        assert!(MonteCarloConfig { samples: 1000, ..ok }.validate().is_err());
        assert!(MonteCarloConfig { duration: 0.0, ..ok }.validate().is_err());
        assert!(MonteCarloConfig { burn_in: 0.5, ..ok }.validate().is_err());
    }

    #[test]
    fn zero_spectrum_gives_zero_series() {
        let c = small_config();
        let s = SpectralDensity::sample(c.frequency_grid().unwrap(), SpectrumKind::Other, |_| 0.0);
        let x = synthesize_colored_noise(&s, &c, &mut record_rng(1, 0)).unwrap();
        assert!(x.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn spectrum_on_foreign_grid_is_rejected() {
        let c = small_config();
        let s = SpectralDensity::sample(FrequencyGrid::new(1.0, 1025).unwrap(), SpectrumKind::Other, |_| 1.0);
        assert_eq!(synthesize_colored_noise(&s, &c, &mut record_rng(1, 0)).unwrap_err(), Error::GridMismatch);
    }

    #[test]
    fn population_step_limit() {
        let m = ex1();
        let c = MonteCarloConfig { duration: 1000.0, samples: 1024, ..small_config() };
        assert!(matches!(ou_population_path(&m, &c, &mut record_rng(1, 0)), Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn no_fluctuations_gives_zero_path() {
        let m = ex1().without_fluctuations();
        let p = ou_population_path(&m, &small_config(), &mut record_rng(1, 0)).unwrap();
        assert!(p.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn dark_emitters_give_zero_field() {
        let m = LedModel::new(ModelParams { pump: 0.0, ..Default::default() }).unwrap();
        let a = simulate_field_record(&m, &small_config(), &mut record_rng(3, 0)).unwrap();
        assert!(a.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn too_few_records() {
        let recs = vec![vec![Complex64::new(1.0, 0.0); 8]; 29];
        assert_eq!(estimate_moments(&recs).unwrap_err(), Error::TooFewRecords { required: 30, got: 29 });
    }

    #[test]
    fn constant_amplitude_is_coherent() {
        let recs = vec![vec![Complex64::new(0.6, 0.8); 64]; 30];
        let e = estimate_moments(&recs).unwrap();
        assert!((e.g2 - 1.0).abs() < 1e-12);
        assert!((e.n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ensemble_is_seed_deterministic() {
        let m = ex1();
        let c = MonteCarloConfig { records: 32, ..MonteCarloConfig::for_model(&m, 32, 11) };
        let a = run_ensemble(&m, &c).unwrap();
        let b = run_ensemble(&m, &c).unwrap();
        assert_eq!(a.g2.to_bits(), b.g2.to_bits());
        assert_eq!(a.n.to_bits(), b.n.to_bits());
        let other = run_ensemble(&m, &MonteCarloConfig { seed: 12, ..c }).unwrap();
        assert_ne!(a.g2.to_bits(), other.g2.to_bits());
    }
}
