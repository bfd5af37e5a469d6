//! Run configuration: one TOML file, every field defaulted.

use std::path::Path;

use curved2body::integrate::check_tolerance;
use curved2body::reduction::{MassPair, Model, ScaledOrbit};
use curved2body::secular::AverageMode;
use curved2body::CurvedSpace;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurvatureKind {
    Sphere,
    Hyperbolic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub curvature: CurvatureKind,
    pub rho: f64,
}

impl Default for SpaceConfig {
    fn default() -> Self {
        Self { curvature: CurvatureKind::Sphere, rho: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassConfig {
    pub m1: f64,
    pub m2: f64,
}

impl Default for MassConfig {
    fn default() -> Self {
        Self { m1: 0.3, m2: 0.7 }
    }
}

/// Scaled Delaunay data of the initial osculating orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrbitConfig {
    pub l_hat: f64,
    pub g_hat: f64,
    pub c_hat: f64,
    pub ell: f64,
    pub g: f64,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        Self { l_hat: 1.0, g_hat: 0.6, c_hat: 1.2, ell: 0.0, g: 0.0 }
    }
}

/// A single Kepler orbit, given by its actions or by its curved axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConicInput {
    Actions { l: f64, g_action: f64 },
    Shape { alpha: f64, epsilon: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KeplerConfig {
    pub conic: ConicInput,
    pub g: f64,
    pub periods: f64,
    pub samples: usize,
}

impl Default for KeplerConfig {
    fn default() -> Self {
        Self { conic: ConicInput::Actions { l: 0.08, g_action: 0.05 }, g: 0.0, periods: 1.0, samples: 256 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Full,
    Truncated,
}

impl From<ModelKind> for Model {
    fn from(m: ModelKind) -> Self {
        match m {
            ModelKind::Full => Model::Full,
            ModelKind::Truncated => Model::Truncated,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub model: ModelKind,
    /// Length of the run in fast (Kepler) periods.
    pub periods: f64,
    pub samples: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self { model: ModelKind::Full, periods: 100.0, samples: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SecularConfig {
    pub eps_list: Vec<f64>,
    pub order: usize,
    pub nodes: usize,
    /// Portrait half-height as a fraction of `min(L̂, Ĉ)`.
    pub g_hat_fraction: f64,
    pub samples: usize,
    pub seeds: usize,
}

impl Default for SecularConfig {
    fn default() -> Self {
        Self { eps_list: vec![0.08, 0.04, 0.02], order: 4, nodes: 512, g_hat_fraction: 0.9, samples: 21, seeds: 9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PeriodicConfig {
    pub l_hat: f64,
    pub c_hat: f64,
    pub m: u32,
    pub n: u32,
    pub g0: f64,
    /// Fast periods of the lifted two-body orbit.
    pub lift_periods: f64,
    pub samples: usize,
}

impl Default for PeriodicConfig {
    fn default() -> Self {
        Self { l_hat: 0.3, c_hat: 0.5, m: 400, n: 1, g0: 0.0, lift_periods: 5.0, samples: 500 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AverageModeKind {
    Mean,
    FlatEccentric,
}

impl From<AverageModeKind> for AverageMode {
    fn from(m: AverageModeKind) -> Self {
        match m {
            AverageModeKind::Mean => AverageMode::MeanAnomaly,
            AverageModeKind::FlatEccentric => AverageMode::FlatEccentric,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AverageConfig {
    pub eps_list: Vec<f64>,
    pub nodes: usize,
    pub mode: AverageModeKind,
    pub order: usize,
}

impl Default for AverageConfig {
    fn default() -> Self {
        Self { eps_list: vec![0.08, 0.04, 0.02], nodes: 512, mode: AverageModeKind::Mean, order: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LiftConfig {
    pub periods: f64,
    pub samples: usize,
}

impl Default for LiftConfig {
    fn default() -> Self {
        Self { periods: 10.0, samples: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub space: SpaceConfig,
    pub masses: MassConfig,
    pub eps: f64,
    pub tol: f64,
    pub orbit: OrbitConfig,
    pub kepler: KeplerConfig,
    pub simulate: SimulateConfig,
    pub secular: SecularConfig,
    pub periodic: PeriodicConfig,
    pub average: AverageConfig,
    pub lift: LiftConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            space: SpaceConfig::default(),
            masses: MassConfig::default(),
            eps: 0.02,
            tol: 1e-12,
            orbit: OrbitConfig::default(),
            kepler: KeplerConfig::default(),
            simulate: SimulateConfig::default(),
            secular: SecularConfig::default(),
            periodic: PeriodicConfig::default(),
            average: AverageConfig::default(),
            lift: LiftConfig::default(),
        }
    }
}

pub fn config_error(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

pub fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

pub fn at_least(name: &str, v: usize, min: usize) -> Result<(), CliError> {
    if v >= min {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be at least {min}, got {v}")))
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
            }
        }
    }

    pub fn space(&self) -> Result<CurvedSpace, CliError> {
        match self.space.curvature {
            CurvatureKind::Sphere => CurvedSpace::sphere(self.space.rho),
            CurvatureKind::Hyperbolic => CurvedSpace::hyperbolic(self.space.rho),
        }
        .map_err(config_error)
    }

    pub fn masses(&self) -> Result<MassPair, CliError> {
        MassPair::new(self.masses.m1, self.masses.m2).map_err(config_error)
    }

    pub fn scaled_orbit(&self) -> Result<ScaledOrbit, CliError> {
        let o = &self.orbit;
        ScaledOrbit::new(o.l_hat, o.g_hat, o.c_hat, self.masses()?, self.space()?, self.eps).map_err(config_error)
    }

    /// Checks what every command needs.
    pub fn validate_common(&self) -> Result<(), CliError> {
        self.space()?;
        self.masses()?;
        positive("eps", self.eps)?;
        check_tolerance(self.tol).map_err(config_error)
    }

    /// SHA-256 of the resolved configuration and the command name.
    pub fn digest(&self, command: &str) -> String {
        let text = serde_json::to_string(self).expect("configuration serializes");
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update([0u8]);
        h.update(text.as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let c = RunConfig::default();
        let back: RunConfig = toml::from_str(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn partial_files_fill_defaults() {
        let c: RunConfig = toml::from_str("eps = 0.05\n[orbit]\ng_hat = 0.3\n[kepler]\nconic = { alpha = 0.3, epsilon = 0.0 }\n").unwrap();
        assert_eq!(c.eps, 0.05);
        assert_eq!(c.orbit.g_hat, 0.3);
        assert_eq!(c.orbit.l_hat, 1.0);
        assert_eq!(c.kepler.conic, ConicInput::Shape { alpha: 0.3, epsilon: 0.0 });
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("epsilon = 0.05\n").is_err());
        assert!(toml::from_str::<RunConfig>("[space]\ncurvature = \"flat\"\nrho = 1.0\n").is_err());
    }

    #[test]
    fn digest_tracks_content() {
        let a = RunConfig::default();
        let b = RunConfig { eps: 0.03, ..a.clone() };
        assert_eq!(a.digest("kepler"), a.digest("kepler"));
        assert_ne!(a.digest("kepler"), b.digest("kepler"));
        assert_ne!(a.digest("kepler"), a.digest("simulate"));
        assert_eq!(a.digest("kepler").len(), 64);
    }
}
