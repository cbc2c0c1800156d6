//! Monte-Carlo BLER sweeps over the full uplink chain.

pub mod config;
pub mod fronthaul;
pub mod stats;
pub mod sweep;
pub mod trial;

pub use config::{McsSpec, SimConfig};
pub use stats::{snr_at_target, snr_difference, wilson_interval, TARGET_BLER, CurveSummary, SnrDifference};
pub use sweep::{metadata_path, run_sweep, write_csv, write_metadata, CsvSink, SimPoint, SweepResult};
pub use trial::{run_trial, SimContext, SimMetadata};

use crate::channel::ChannelError;
use crate::compression::CodecError;
use crate::iq::IqError;
use crate::phy::PhyError;
use crate::receiver::ReceiverError;
use crate::wire::WireError;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    /// Bad or inconsistent configuration.
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Iq(#[from] IqError),
    #[error(transparent)]
    Wire(#[from] WireError),
    #[error(transparent)]
    Phy(#[from] PhyError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Receiver(#[from] ReceiverError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Runtime(String),
}

impl SimError {
    pub fn is_config(&self) -> bool {
        matches!(self, SimError::Config(_))
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of one trial. Depends only on its coordinates, so results do not
/// depend on scheduling or thread count.
pub fn trial_seed(master_seed: u64, snr_index: usize, trial_index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ snr_index as u64) ^ trial_index)
}

const DROP_TAG: u64 = 0x6472_6f70;

/// Seed of the per-sweep geometry and shadowing draw.
pub fn drop_seed(master_seed: u64) -> u64 {
    splitmix64(master_seed ^ DROP_TAG)
}
