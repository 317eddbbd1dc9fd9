//! Below-threshold photon statistics of a small superradiant LED.
//!
//! [`model`] holds the parameters and the spectral building blocks,
//! [`photon`] and [`g2`] the closed forms with their quadrature oracles,
//! [`montecarlo`] a stochastic oracle, and [`sweep`], [`figures`] and
//! [`validation`] drive parameter scans and the acceptance checks.

pub mod error;
pub mod figures;
pub mod g2;
pub mod grid;
pub mod model;
pub mod montecarlo;
pub mod photon;
pub mod quadrature;
pub mod sweep;
pub mod validation;

pub use error::{Error, Result};
pub use g2::{g2_bruteforce, g2_closed, CumulantMode, CumulantSpec, G2Method, G2Result};
pub use grid::{FrequencyGrid, SpectralDensity, SpectrumKind};
pub use model::{derive_populations, validity_ratio, LedModel, ModelParams, Populations};
pub use montecarlo::{run_ensemble, MomentEstimate, MonteCarloConfig};
pub use photon::{mean_photon_closed, mean_photon_quadrature, ConvolutionMode, MeanPhotonResult, PhotonMethod};
pub use quadrature::{integrate_1d, integrate_2d, spectral_convolution, IntegrationSpec};
pub use sweep::{run_sweep, SweepRow, SweepSpec, SweepVariable};
