use super::SimError;
use crate::channel::{GeometryConfig, PathlossParams};
use crate::compression::{CompressionConfig, CompressionMethod};
use crate::iq::TopologyConfig;
use crate::phy::McsConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// An MCS given either as a 1-based table row or in full.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum McsSpec {
    Index(usize),
    Custom(McsConfig),
}

impl McsSpec {
    pub fn resolve(&self) -> Result<McsConfig, SimError> {
        match *self {
            McsSpec::Index(i) => McsConfig::from_index(i)
                .ok_or_else(|| SimError::Config(format!("MCS index {i} outside 1..=4"))),
            McsSpec::Custom(m) => Ok(m),
        }
    }
}

fn default_mcs() -> McsSpec {
    McsSpec::Index(2)
}
fn default_codec() -> CompressionConfig {
    CompressionConfig::none()
}
fn default_n_tbs() -> usize {
    1000
}
fn default_max_errors() -> usize {
    200
}
fn default_delay_spread_ns() -> f64 {
    30.0
}
fn default_backoff_db() -> f64 {
    18.0
}

/// One BLER sweep: a codec and an MCS over a list of TX-SNR points.
///
/// Loaded from JSON; every field except `snr_points` has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default)]
    pub topology: TopologyConfig,
    #[serde(default = "default_mcs")]
    pub mcs: McsSpec,
    #[serde(default = "default_codec")]
    pub codec: CompressionConfig,
    /// TX-SNR points in dB, strictly increasing.
    pub snr_points: Vec<f64>,
    /// Transport blocks per point (upper bound with early termination).
    #[serde(default = "default_n_tbs")]
    pub n_tbs: usize,
    /// A point stops once this many blocks have failed.
    #[serde(default = "default_max_errors")]
    pub max_errors: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub pathloss: PathlossParams,
    #[serde(default)]
    pub geometry: GeometryConfig,
    /// `delay_ns,power_db` profile; the shipped TDL-B when absent.
    #[serde(default)]
    pub profile: Option<PathBuf>,
    #[serde(default = "default_delay_spread_ns")]
    pub delay_spread_ns: f64,
    /// RU gain control puts the long-term mean sample power this many dB
    /// below full scale.
    #[serde(default = "default_backoff_db")]
    pub agc_backoff_db: f64,
    /// CSV destination for the CLI.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl SimConfig {
    /// Defaults with the given codec, MCS row and SNR points.
    pub fn new(codec: CompressionConfig, mcs_index: usize, snr_points: Vec<f64>) -> Self {
        Self {
            topology: TopologyConfig::default(),
            mcs: McsSpec::Index(mcs_index),
            codec,
            snr_points,
            n_tbs: default_n_tbs(),
            max_errors: default_max_errors(),
            master_seed: 0,
            pathloss: PathlossParams::default(),
            geometry: GeometryConfig::default(),
            profile: None,
            delay_spread_ns: default_delay_spread_ns(),
            agc_backoff_db: default_backoff_db(),
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let cfg: SimConfig = serde_json::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let cfg_err = SimError::Config;
        self.topology.validate().map_err(cfg_err)?;
        self.codec.validate().map_err(|e| SimError::Config(e.to_string()))?;
        self.mcs.resolve()?.validate().map_err(cfg_err)?;
        self.pathloss.validate().map_err(|e| SimError::Config(e.to_string()))?;
        if self.n_tbs == 0 {
            return Err(SimError::Config("n_tbs must be at least 1".into()));
        }
        if self.max_errors == 0 {
            return Err(SimError::Config("max_errors must be at least 1".into()));
        }
        if self.snr_points.is_empty() || self.snr_points.iter().any(|s| !s.is_finite()) {
            return Err(SimError::Config("snr_points must be a non-empty list of finite values".into()));
        }
        if self.snr_points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SimError::Config("snr_points must be strictly increasing".into()));
        }
        if !(self.delay_spread_ns >= 0.0) || !self.agc_backoff_db.is_finite() {
            return Err(SimError::Config("delay spread and AGC backoff must be finite".into()));
        }
        Ok(())
    }

    /// Short label such as `bs-2` or `none`.
    pub fn codec_label(&self) -> String {
        match self.codec.method {
            CompressionMethod::None => "none".into(),
            m => format!("{}-{}", m.as_str(), self.codec.m_bits),
        }
    }
}
