//! Uniform symmetric frequency grids and spectra sampled on them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::LedModel;

/// Half-width multiple of the widest model rate.
pub const HALF_WIDTH_FACTOR: f64 = 20.0;

/// Largest grid the automatic sizing will produce.
pub const MAX_GRID_POINTS: usize = (1 << 22) + 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    omega_max: f64,
    n_points: usize,
}

impl FrequencyGrid {
    pub fn new(omega_max: f64, n_points: usize) -> Result<Self> {
        if !(omega_max.is_finite() && omega_max > 0.0) {
            return Err(Error::InvalidParams(format!("grid half-width must be > 0, got {omega_max}")));
        }
        if n_points < 3 || n_points.is_multiple_of(2) {
            return Err(Error::InvalidParams(format!("grid point count must be odd and >= 3, got {n_points}")));
        }
        Ok(FrequencyGrid { omega_max, n_points })
    }

    /// Grid spanning `20×` the widest model rate.
    pub fn for_model(model: &LedModel, n_points: usize) -> Result<Self> {
        Self::new(HALF_WIDTH_FACTOR * model.widest_rate(), n_points)
    }

    /// Grid spanning `20×` the widest rate with spacing no coarser than `max_spacing`.
    pub fn for_model_with_spacing(model: &LedModel, max_spacing: f64) -> Result<Self> {
        let omega_max = HALF_WIDTH_FACTOR * model.widest_rate();
        let intervals = (2.0 * omega_max / max_spacing).ceil();
        if !intervals.is_finite() || intervals as usize + 1 > MAX_GRID_POINTS {
            return Err(Error::InvalidParams(format!(
                "grid with half-width {omega_max} and spacing {max_spacing} exceeds {MAX_GRID_POINTS} points"
            )));
        }
        let mut n = intervals as usize + 1;
        if n.is_multiple_of(2) {
            n += 1;
        }
        Self::new(omega_max, n.max(3))
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.omega_max / (self.n_points - 1) as f64
    }

    /// Index of `ω = 0`.
    pub fn center(&self) -> usize {
        (self.n_points - 1) / 2
    }

    pub fn omega(&self, i: usize) -> f64 {
        // measured from the centre so that ω(center ± k) = ±k·dω exactly
        (i as f64 - self.center() as f64) * self.spacing()
    }

    pub fn omegas(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.omega(i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpectrumKind {
    /// `c(ω)`
    Commutator,
    /// `δ²N_e(ω)`
    Population,
    /// `n(ω)`
    PhotonNumber,
    /// `S_bNe(ω) = (c * δ²N_e)(ω)`
    ProductNoise,
    Other,
}

/// Real spectrum sampled on a [`FrequencyGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity {
    pub grid: FrequencyGrid,
    pub values: Vec<f64>,
    pub kind: SpectrumKind,
}

impl SpectralDensity {
    pub fn sample(grid: FrequencyGrid, kind: SpectrumKind, f: impl Fn(f64) -> f64) -> Self {
        SpectralDensity {
            grid,
            values: grid.omegas().map(f).collect(),
            kind,
        }
    }

    pub fn from_values(grid: FrequencyGrid, kind: SpectrumKind, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(SpectralDensity { grid, values, kind })
    }

    /// `(2π)⁻¹ ∫ S(ω) dω` over the grid by the trapezoid rule.
    pub fn mass(&self) -> f64 {
        let n = self.values.len();
        let inner: f64 = self.values[1..n - 1].iter().sum();
        (inner + 0.5 * (self.values[0] + self.values[n - 1])) * self.grid.spacing() / (2.0 * PI)
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Largest edge value relative to the peak.
    pub fn edge_ratio(&self) -> f64 {
        let peak = self.peak();
        if peak == 0.0 {
            return 0.0;
        }
        let n = self.values.len();
        self.values[0].abs().max(self.values[n - 1].abs()) / peak
    }

    /// Largest `|S(ω) − S(−ω)|` relative to the peak.
    pub fn max_asymmetry(&self) -> f64 {
        let peak = self.peak();
        if peak == 0.0 {
            return 0.0;
        }
        let n = self.values.len();
        (0..n / 2)
            .map(|i| (self.values[i] - self.values[n - 1 - i]).abs())
            .fold(0.0, f64::max)
            / peak
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|v| *v >= 0.0)
    }
}

/// Samples the model spectra on a grid.
pub fn sample_model_spectrum(model: &LedModel, grid: FrequencyGrid, kind: SpectrumKind) -> SpectralDensity {
    match kind {
        SpectrumKind::Commutator => SpectralDensity::sample(grid, kind, |w| model.commutator_spectrum(w)),
        SpectrumKind::Population => SpectralDensity::sample(grid, kind, |w| model.population_spectrum(w)),
        SpectrumKind::PhotonNumber => {
            SpectralDensity::sample(grid, kind, |w| crate::photon::photon_number_spectrum(model, w))
        }
        SpectrumKind::ProductNoise => SpectralDensity::sample(grid, kind, |w| {
            model.commutator_spectrum(w) * model.populations().delta2_ne
        }),
        SpectrumKind::Other => SpectralDensity::sample(grid, kind, |_| 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_even_or_tiny_grids() {
        assert!(FrequencyGrid::new(1.0, 4).is_err());
        assert!(FrequencyGrid::new(1.0, 1).is_err());
        assert!(FrequencyGrid::new(0.0, 5).is_err());
        assert!(FrequencyGrid::new(1.0, 3).is_ok());
    }

    #[test]
    fn grid_is_symmetric() {
        let g = FrequencyGrid::new(3.0, 101).unwrap();
        assert_eq!(g.omega(g.center()), 0.0);
        assert_relative_eq!(g.omega(0), -3.0, max_relative = 1e-14);
        assert_relative_eq!(g.omega(100), 3.0, max_relative = 1e-14);
        for i in 0..g.len() {
            assert_eq!(g.omega(i), -g.omega(g.len() - 1 - i));
        }
    }

    #[test]
    fn model_grid_covers_widest_rate() {
        let m = LedModel::new(ModelParams::default()).unwrap();
        let g = FrequencyGrid::for_model(&m, 1025).unwrap();
        assert!(g.omega_max() >= 20.0 * 0.5_f64.max(1.0));
        let fine = FrequencyGrid::for_model_with_spacing(&m, 0.01).unwrap();
        assert!(fine.spacing() <= 0.01);
        assert_eq!(fine.len() % 2, 1);
    }

    #[test]
    fn sampled_spectra_are_even_and_nonnegative() {
        let m = LedModel::new(ModelParams::default()).unwrap();
        let g = FrequencyGrid::for_model(&m, 4001).unwrap();
        for kind in [SpectrumKind::Commutator, SpectrumKind::Population, SpectrumKind::PhotonNumber] {
            let s = sample_model_spectrum(&m, g, kind);
            assert!(s.is_nonnegative());
            assert!(s.max_asymmetry() < 1e-15, "{kind:?}");
        }
    }

    #[test]
    fn lorentzian_grid_mass() {
        let m = LedModel::new(ModelParams::default()).unwrap();
        let g = FrequencyGrid::for_model_with_spacing(&m, 0.01).unwrap();
        let s = sample_model_spectrum(&m, g, SpectrumKind::Population);
        // relative Lorentzian mass beyond ±W is 2γ_P/(πW)
        let tail = 2.0 * m.populations().gamma_p / (PI * g.omega_max());
        assert_relative_eq!(s.mass(), m.populations().delta2_ne * (1.0 - tail), max_relative = 1e-4);
    }
}
