//! Complex IQ samples, PRB blocks and the per-slot resource grid.
//!
//! Samples live in a normalized full-scale domain: `±1.0` on either
//! component is the largest amplitude the fronthaul can represent. All codecs
//! in [`crate::compression`] work in this domain.
//!
//! A [`ResourceGrid`] stores one slot of frequency-domain samples for a set of
//! antennas. The layout is subcarrier-major within a symbol so that the twelve
//! subcarriers of a PRB are contiguous in memory.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of subcarriers (and IQ samples) in one physical resource block.
pub const SUBCARRIERS_PER_PRB: usize = 12;

/// OFDM symbols per slot with normal cyclic prefix.
pub const SYMBOLS_PER_SLOT: usize = 14;

/// One complex baseband sample.
pub type Sample = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IqError {
    #[error("antenna index {index} out of range (grid has {count})")]
    AntennaOutOfRange { index: usize, count: usize },
    #[error("symbol index {index} out of range (grid has {count})")]
    SymbolOutOfRange { index: usize, count: usize },
    #[error("{n_subcarriers} subcarriers is not a whole number of PRBs")]
    PartialPrb { n_subcarriers: usize },
    #[error("expected {expected} PRB blocks, got {got}")]
    BlockCountMismatch { expected: usize, got: usize },
    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite sample at position {0}")]
    NonFinite(usize),
}

/// Returns true when both components are finite.
#[inline]
pub fn is_finite(s: Sample) -> bool {
    s.re.is_finite() && s.im.is_finite()
}

/// The twelve IQ samples of one PRB on one symbol and antenna; the unit of
/// fronthaul compression.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PrbBlock {
    pub samples: [Sample; SUBCARRIERS_PER_PRB],
}

impl PrbBlock {
    pub const ZERO: PrbBlock = PrbBlock {
        samples: [Sample::new(0.0, 0.0); SUBCARRIERS_PER_PRB],
    };

    pub fn new(samples: [Sample; SUBCARRIERS_PER_PRB]) -> Self {
        Self { samples }
    }

    /// Builds a block from a slice of exactly twelve samples.
    pub fn from_slice(samples: &[Sample]) -> Result<Self, IqError> {
        let arr: [Sample; SUBCARRIERS_PER_PRB] =
            samples.try_into().map_err(|_| IqError::LengthMismatch {
                expected: SUBCARRIERS_PER_PRB,
                got: samples.len(),
            })?;
        Ok(Self { samples: arr })
    }

    /// Largest absolute I or Q component in the block.
    pub fn max_component(&self) -> f64 {
        self.samples
            .iter()
            .fold(0.0f64, |m, s| m.max(s.re.abs()).max(s.im.abs()))
    }

    /// Checks the finiteness invariant.
    pub fn validate(&self) -> Result<(), IqError> {
        match self.samples.iter().position(|s| !is_finite(*s)) {
            Some(i) => Err(IqError::NonFinite(i)),
            None => Ok(()),
        }
    }

    /// Interleaved components `I0, Q0, I1, Q1, ...`.
    pub fn components(&self) -> [f64; 2 * SUBCARRIERS_PER_PRB] {
        let mut out = [0.0; 2 * SUBCARRIERS_PER_PRB];
        for (i, s) in self.samples.iter().enumerate() {
            out[2 * i] = s.re;
            out[2 * i + 1] = s.im;
        }
        out
    }

    /// Inverse of [`PrbBlock::components`].
    pub fn from_components(c: &[f64; 2 * SUBCARRIERS_PER_PRB]) -> Self {
        let mut samples = [Sample::new(0.0, 0.0); SUBCARRIERS_PER_PRB];
        for (i, s) in samples.iter_mut().enumerate() {
            *s = Sample::new(c[2 * i], c[2 * i + 1]);
        }
        Self { samples }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = *self;
        out.samples.iter_mut().for_each(|s| *s *= factor);
        out
    }
}

/// One slot of frequency-domain samples for `n_antennas` antennas.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceGrid {
    n_subcarriers: usize,
    n_symbols: usize,
    n_antennas: usize,
    data: Vec<Sample>,
}

impl ResourceGrid {
    /// Zero-filled grid. `n_subcarriers` must be a multiple of 12.
    pub fn zeros(n_subcarriers: usize, n_symbols: usize, n_antennas: usize) -> Result<Self, IqError> {
        if n_subcarriers % SUBCARRIERS_PER_PRB != 0 {
            return Err(IqError::PartialPrb { n_subcarriers });
        }
        Ok(Self {
            n_subcarriers,
            n_symbols,
            n_antennas,
            data: vec![Sample::new(0.0, 0.0); n_subcarriers * n_symbols * n_antennas],
        })
    }

    /// Grid over `n_prb` PRBs and a full slot.
    pub fn for_prbs(n_prb: usize, n_antennas: usize) -> Self {
        Self::zeros(n_prb * SUBCARRIERS_PER_PRB, SYMBOLS_PER_SLOT, n_antennas)
            .expect("whole PRBs")
    }

    /// Wraps existing data laid out as `[antenna][symbol][subcarrier]`.
    pub fn from_vec(
        n_subcarriers: usize,
        n_symbols: usize,
        n_antennas: usize,
        data: Vec<Sample>,
    ) -> Result<Self, IqError> {
        if n_subcarriers % SUBCARRIERS_PER_PRB != 0 {
            return Err(IqError::PartialPrb { n_subcarriers });
        }
        let expected = n_subcarriers * n_symbols * n_antennas;
        if data.len() != expected {
            return Err(IqError::LengthMismatch { expected, got: data.len() });
        }
        Ok(Self { n_subcarriers, n_symbols, n_antennas, data })
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }
    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }
    pub fn n_antennas(&self) -> usize {
        self.n_antennas
    }
    pub fn n_prb(&self) -> usize {
        self.n_subcarriers / SUBCARRIERS_PER_PRB
    }
    pub fn data(&self) -> &[Sample] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [Sample] {
        &mut self.data
    }

    #[inline]
    fn offset(&self, n: usize, l: usize, antenna: usize) -> usize {
        debug_assert!(n < self.n_subcarriers && l < self.n_symbols && antenna < self.n_antennas);
        (antenna * self.n_symbols + l) * self.n_subcarriers + n
    }

    #[inline]
    pub fn get(&self, n: usize, l: usize, antenna: usize) -> Sample {
        self.data[self.offset(n, l, antenna)]
    }

    #[inline]
    pub fn set(&mut self, n: usize, l: usize, antenna: usize, value: Sample) {
        let o = self.offset(n, l, antenna);
        self.data[o] = value;
    }

    fn check(&self, antenna: usize, symbol: usize) -> Result<(), IqError> {
        if antenna >= self.n_antennas {
            return Err(IqError::AntennaOutOfRange { index: antenna, count: self.n_antennas });
        }
        if symbol >= self.n_symbols {
            return Err(IqError::SymbolOutOfRange { index: symbol, count: self.n_symbols });
        }
        Ok(())
    }

    /// All subcarriers of one (symbol, antenna) column.
    pub fn column(&self, antenna: usize, symbol: usize) -> Result<&[Sample], IqError> {
        self.check(antenna, symbol)?;
        let start = self.offset(0, symbol, antenna);
        Ok(&self.data[start..start + self.n_subcarriers])
    }

    pub fn column_mut(&mut self, antenna: usize, symbol: usize) -> Result<&mut [Sample], IqError> {
        self.check(antenna, symbol)?;
        let start = self.offset(0, symbol, antenna);
        let n = self.n_subcarriers;
        Ok(&mut self.data[start..start + n])
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|s| *s *= factor);
    }

    /// Mean `|y|^2` over all samples.
    pub fn mean_power(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.data.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.data.len() as f64
    }
}

/// Splits one (antenna, symbol) column into PRB blocks, block `b` covering
/// subcarriers `12b ..= 12b + 11`.
pub fn grid_to_prb_blocks(
    grid: &ResourceGrid,
    antenna: usize,
    symbol: usize,
) -> Result<Vec<PrbBlock>, IqError> {
    let col = grid.column(antenna, symbol)?;
    Ok(col
        .chunks_exact(SUBCARRIERS_PER_PRB)
        .map(|c| PrbBlock::from_slice(c).expect("chunk of 12"))
        .collect())
}

/// Writes PRB blocks back into one (antenna, symbol) column of `grid`.
pub fn prb_blocks_to_grid(
    blocks: &[PrbBlock],
    antenna: usize,
    symbol: usize,
    grid: &mut ResourceGrid,
) -> Result<(), IqError> {
    let expected = grid.n_prb();
    if blocks.len() != expected {
        return Err(IqError::BlockCountMismatch { expected, got: blocks.len() });
    }
    let col = grid.column_mut(antenna, symbol)?;
    for (dst, block) in col.chunks_exact_mut(SUBCARRIERS_PER_PRB).zip(blocks) {
        dst.copy_from_slice(&block.samples);
    }
    Ok(())
}

/// Bytes per sample in a raw IQ file: little-endian `f32` re then im.
pub const RAW_SAMPLE_BYTES: usize = 8;

/// Parses a raw IQ file (little-endian `f32` pairs, no header).
pub fn samples_from_le_f32(bytes: &[u8]) -> Result<Vec<Sample>, IqError> {
    if bytes.len() % RAW_SAMPLE_BYTES != 0 {
        return Err(IqError::LengthMismatch {
            expected: bytes.len().div_ceil(RAW_SAMPLE_BYTES) * RAW_SAMPLE_BYTES,
            got: bytes.len(),
        });
    }
    let f = |b: &[u8]| f32::from_le_bytes(b.try_into().expect("4 bytes")) as f64;
    let out: Vec<Sample> = bytes.chunks_exact(RAW_SAMPLE_BYTES).map(|c| Sample::new(f(&c[..4]), f(&c[4..]))).collect();
    match out.iter().position(|s| !is_finite(*s)) {
        Some(i) => Err(IqError::NonFinite(i)),
        None => Ok(out),
    }
}

/// Inverse of [`samples_from_le_f32`]; components are rounded to `f32`.
pub fn samples_to_le_f32(samples: &[Sample]) -> Vec<u8> {
    let mut out = Vec::with_capacity(samples.len() * RAW_SAMPLE_BYTES);
    for s in samples {
        out.extend_from_slice(&(s.re as f32).to_le_bytes());
        out.extend_from_slice(&(s.im as f32).to_le_bytes());
    }
    out
}

/// Deployment counts for one DU coordination region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyConfig {
    /// RUs in the coordination region.
    pub m_coor: usize,
    /// Antennas per RU.
    pub n_r: usize,
    /// Users whose data the DU decodes.
    pub k_serv: usize,
    /// Users transmitting inside the coordination region.
    pub k_coor: usize,
    /// Interfering users outside the region.
    pub k_int: usize,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        Self { m_coor: 8, n_r: 1, k_serv: 2, k_coor: 2, k_int: 0 }
    }
}

impl TopologyConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.n_r == 0 {
            return Err("n_r must be at least 1".into());
        }
        if self.m_coor == 0 {
            return Err("m_coor must be at least 1".into());
        }
        if self.k_serv > self.k_coor {
            return Err(format!("k_serv ({}) exceeds k_coor ({})", self.k_serv, self.k_coor));
        }
        if self.k_serv == 0 {
            return Err("k_serv must be at least 1".into());
        }
        Ok(())
    }

    /// Stacked receive dimension seen by the DU.
    pub fn receive_dims(&self) -> usize {
        self.m_coor * self.n_r
    }
}
