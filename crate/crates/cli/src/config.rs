//! Parameter resolution: command-line flags override the config file, which
//! overrides the built-in reference configuration.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use ledstat::model::{ModelParams, DEFAULT_F_FACTOR};

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// Adiabaticity parameter 2κ/γ⊥
    #[arg(long)]
    pub kappa_ratio: Option<f64>,
    /// Dimensionless pump P
    #[arg(long)]
    pub pump: Option<f64>,
    /// Threshold inversion N_th
    #[arg(long = "n-th")]
    pub n_threshold: Option<f64>,
    /// Population decay rate γ∥ in units of γ⊥
    #[arg(long)]
    pub gamma_par: Option<f64>,
    /// Total emitter count N₀
    #[arg(long)]
    pub n_emitters: Option<f64>,
    /// Polarisation factor f
    #[arg(long = "f")]
    pub f_factor: Option<f64>,
    /// Config file of `key = value` lines
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Keys accepted in a config file.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub kappa_ratio: Option<f64>,
    pub pump: Option<f64>,
    pub n_th: Option<f64>,
    pub gamma_par: Option<f64>,
    pub n_emitters: Option<f64>,
    pub f: Option<f64>,
    pub seed: Option<u64>,
    pub records: Option<usize>,
    pub method: Option<String>,
    pub grid_omega_max: Option<f64>,
    pub grid_points: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

impl ModelArgs {
    pub fn file(&self) -> Result<FileConfig, String> {
        match &self.config {
            Some(p) => FileConfig::load(p),
            None => Ok(FileConfig::default()),
        }
    }

    /// Parameters with `γ⊥ = 1`.
    pub fn resolve(&self, file: &FileConfig) -> ModelParams {
        let d = ModelParams::default();
        let kappa_ratio = self.kappa_ratio.or(file.kappa_ratio).unwrap_or(d.kappa_ratio());
        ModelParams {
            kappa: 0.5 * kappa_ratio,
            gamma_perp: 1.0,
            gamma_par: self.gamma_par.or(file.gamma_par).unwrap_or(d.gamma_par),
            pump: self.pump.or(file.pump).unwrap_or(d.pump),
            n_threshold: self.n_threshold.or(file.n_th).unwrap_or(d.n_threshold),
            n_emitters: self.n_emitters.or(file.n_emitters).unwrap_or(d.n_emitters),
            f_factor: self.f_factor.or(file.f).unwrap_or(DEFAULT_F_FACTOR),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_override_defaults() {
        let file: FileConfig = toml::from_str("pump = 0.3\nn_th = 7\ngamma_par = 0.02").unwrap();
        let args = ModelArgs { pump: Some(0.5), ..Default::default() };
        let p = args.resolve(&file);
        assert_eq!(p.pump, 0.5);
        assert_eq!(p.n_threshold, 7.0);
        assert_eq!(p.gamma_par, 0.02);
        assert_eq!(p.kappa, ModelParams::default().kappa);
        assert_eq!(p.n_emitters, 20.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<FileConfig>("pmup = 0.3").is_err());
    }
}
