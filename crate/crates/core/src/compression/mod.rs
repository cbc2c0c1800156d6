//! Per-PRB IQ compression codecs.
//!
//! Four lossy codecs operate on a [`PrbBlock`] of 12 complex samples and emit
//! a [`CompressedBlock`]: a per-block side parameter plus 24 signed integer
//! codes (I then Q for each sample).
//!
//! | method          | side info            | reconstruction                      |
//! |-----------------|----------------------|-------------------------------------|
//! | Block floating  | 4-bit exponent `e`   | `code * 2^(1-m) * 2^e`              |
//! | Block scaling   | linear scale `S`     | `code * S / (2^(m-1) - 1)`          |
//! | mu-law          | 4-bit left shift `s` | `expand(code * 2^(1-m)) * 2^-s`     |
//! | Uniform         | static step `D`      | `(code + 1/2) * D`                  |
//!
//! `None` stores the samples as plain `m`-bit fixed point with no block
//! parameter; it is the uncompressed fronthaul baseline.
//!
//! All rounding is half-away-from-zero ([`f64::round`]).

mod analysis;
mod bfp;
mod block_scaling;
mod mulaw;
mod uniform;

pub use analysis::{bussgang_estimate, sqnr, BussgangStats};
pub use bfp::{bfp_compress, BFP_EXPONENT_MAX, BFP_EXPONENT_MIN};
pub use block_scaling::{bs_compress, optimize_lambda};
pub use mulaw::{mulaw_compand, mulaw_compress, mulaw_expand, MULAW_MAX_SHIFT};
pub use uniform::{optimize_delta, uniform_compress, uniform_dequantize, uniform_quantize};

use crate::iq::{IqError, PrbBlock, Sample, SUBCARRIERS_PER_PRB};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Number of integer codes in one compressed PRB (I and Q of 12 samples).
pub const CODES_PER_BLOCK: usize = 2 * SUBCARRIERS_PER_PRB;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodecError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("codec {expected} called with a {got} configuration")]
    MethodMismatch { expected: CompressionMethod, got: CompressionMethod },
    #[error("uniform quantizer step is unresolved; set `delta` or call optimize_delta")]
    UnresolvedStep,
    #[error("side information does not match method {0}")]
    MalformedSideInfo(CompressionMethod),
    #[error("code {code} does not fit in {m_bits} bits")]
    CodeOutOfRange { code: i32, m_bits: u8 },
    #[error("sequence lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("reference signal has zero power")]
    ZeroPower,
    #[error(transparent)]
    Iq(#[from] IqError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompressionMethod {
    None,
    Bfp,
    #[serde(alias = "bs", rename = "block_scaling")]
    BlockScaling,
    #[serde(alias = "mu_law", alias = "mul")]
    MuLaw,
    Uniform,
}

impl CompressionMethod {
    pub const ALL: [CompressionMethod; 5] = [
        CompressionMethod::None,
        CompressionMethod::Bfp,
        CompressionMethod::BlockScaling,
        CompressionMethod::MuLaw,
        CompressionMethod::Uniform,
    ];

    /// Short lowercase name used in CSV output and on the command line.
    pub fn as_str(&self) -> &'static str {
        match self {
            CompressionMethod::None => "none",
            CompressionMethod::Bfp => "bfp",
            CompressionMethod::BlockScaling => "bs",
            CompressionMethod::MuLaw => "mulaw",
            CompressionMethod::Uniform => "uniform",
        }
    }
}

impl fmt::Display for CompressionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CompressionMethod {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "off" => Ok(CompressionMethod::None),
            "bfp" => Ok(CompressionMethod::Bfp),
            "bs" | "block_scaling" | "blockscaling" => Ok(CompressionMethod::BlockScaling),
            "mulaw" | "mu_law" | "mu-law" | "mul" => Ok(CompressionMethod::MuLaw),
            "uniform" | "uq" => Ok(CompressionMethod::Uniform),
            other => Err(CodecError::InvalidConfig(format!("unknown method `{other}`"))),
        }
    }
}

fn default_lambda() -> f64 {
    1.0
}
fn default_mu() -> f64 {
    8.0
}

/// Codec selection and parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompressionConfig {
    pub method: CompressionMethod,
    /// Mantissa / code width in bits, 2..=16.
    pub m_bits: u8,
    /// Block-scaling target: `S = max / lambda`.
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    /// mu-law curvature.
    #[serde(default = "default_mu")]
    pub mu: f64,
    /// Uniform quantizer step; optimized for the input power when absent.
    #[serde(default)]
    pub delta: Option<f64>,
}

impl CompressionConfig {
    pub fn new(method: CompressionMethod, m_bits: u8) -> Self {
        Self { method, m_bits, lambda: 1.0, mu: 8.0, delta: None }
    }

    pub fn none() -> Self {
        Self::new(CompressionMethod::None, 16)
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = Some(delta);
        self
    }

    pub fn validate(&self) -> Result<(), CodecError> {
        if !(2..=16).contains(&self.m_bits) {
            return Err(CodecError::InvalidConfig(format!(
                "m_bits must be in 2..=16, got {}",
                self.m_bits
            )));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(CodecError::InvalidConfig(format!("lambda must be > 0, got {}", self.lambda)));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(CodecError::InvalidConfig(format!("mu must be > 0, got {}", self.mu)));
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d.is_finite()) {
                return Err(CodecError::InvalidConfig(format!("delta must be > 0, got {d}")));
            }
        }
        Ok(())
    }

    fn expect(&self, method: CompressionMethod) -> Result<(), CodecError> {
        if self.method != method {
            return Err(CodecError::MethodMismatch { expected: method, got: self.method });
        }
        self.validate()
    }
}

/// Per-block side parameter.
///
/// `Bfp` and `MuLaw` shifts travel on the wire as-is. The block-scaling scale
/// is held unquantized here; the wire format rounds it separately. The
/// mu-law curvature and the uniform step are static link parameters that both
/// ends know in advance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SideInfo {
    None,
    Exponent(i8),
    Scale(f64),
    Shift { shift: u8, mu: f64 },
    Step(f64),
}

/// A compressed PRB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressedBlock {
    pub method: CompressionMethod,
    pub m_bits: u8,
    pub side_info: SideInfo,
    pub codes: [i32; CODES_PER_BLOCK],
}

impl CompressedBlock {
    /// Checks that the side info variant matches the method and every code
    /// fits in `m_bits` two's complement.
    pub fn validate(&self) -> Result<(), CodecError> {
        let side_ok = matches!(
            (self.method, self.side_info),
            (CompressionMethod::None, SideInfo::None)
                | (CompressionMethod::Bfp, SideInfo::Exponent(_))
                | (CompressionMethod::BlockScaling, SideInfo::Scale(_))
                | (CompressionMethod::MuLaw, SideInfo::Shift { .. })
                | (CompressionMethod::Uniform, SideInfo::Step(_))
        );
        if !side_ok {
            return Err(CodecError::MalformedSideInfo(self.method));
        }
        if !(2..=16).contains(&self.m_bits) {
            return Err(CodecError::InvalidConfig(format!("m_bits {}", self.m_bits)));
        }
        let (lo, hi) = twos_complement_range(self.m_bits);
        if let Some(&code) = self.codes.iter().find(|&&c| c < lo || c > hi) {
            return Err(CodecError::CodeOutOfRange { code, m_bits: self.m_bits });
        }
        Ok(())
    }
}

/// Inclusive range of an `m`-bit two's complement integer.
pub fn twos_complement_range(m_bits: u8) -> (i32, i32) {
    let half = 1i32 << (m_bits - 1);
    (-half, half - 1)
}

/// Largest magnitude of the symmetric mid-tread code range, `2^(m-1) - 1`.
#[inline]
pub(crate) fn symmetric_max(m_bits: u8) -> i32 {
    (1i32 << (m_bits - 1)) - 1
}

/// Mid-tread step on `[-1, 1]`: `2^(1-m)`.
#[inline]
pub(crate) fn mantissa_step(m_bits: u8) -> f64 {
    (2.0f64).powi(1 - m_bits as i32)
}

/// Rounds half away from zero and clamps to `[-max, max]`.
#[inline]
pub(crate) fn round_clamp(x: f64, max: i32) -> i32 {
    let r = x.round();
    let m = max as f64;
    r.clamp(-m, m) as i32
}

/// Plain fixed-point (no block parameter) used for `CompressionMethod::None`.
fn fixed_point_compress(block: &PrbBlock, cfg: &CompressionConfig) -> Result<CompressedBlock, CodecError> {
    cfg.expect(CompressionMethod::None)?;
    block.validate()?;
    let max = symmetric_max(cfg.m_bits);
    let mut codes = [0i32; CODES_PER_BLOCK];
    for (c, y) in codes.iter_mut().zip(block.components()) {
        *c = round_clamp(y * max as f64, max);
    }
    Ok(CompressedBlock { method: CompressionMethod::None, m_bits: cfg.m_bits, side_info: SideInfo::None, codes })
}

/// Compresses one block with the codec named in `cfg`.
pub fn compress(block: &PrbBlock, cfg: &CompressionConfig) -> Result<CompressedBlock, CodecError> {
    match cfg.method {
        CompressionMethod::None => fixed_point_compress(block, cfg),
        CompressionMethod::Bfp => bfp_compress(block, cfg),
        CompressionMethod::BlockScaling => bs_compress(block, cfg),
        CompressionMethod::MuLaw => mulaw_compress(block, cfg),
        CompressionMethod::Uniform => uniform_compress(block, cfg),
    }
}

/// Reconstructs a block from its codes and side information.
pub fn decompress(cb: &CompressedBlock) -> Result<PrbBlock, CodecError> {
    cb.validate()?;
    let mut out = [0.0f64; CODES_PER_BLOCK];
    match cb.side_info {
        SideInfo::None => {
            let max = symmetric_max(cb.m_bits) as f64;
            for (o, &c) in out.iter_mut().zip(&cb.codes) {
                *o = c as f64 / max;
            }
        }
        SideInfo::Exponent(e) => {
            let scale = mantissa_step(cb.m_bits) * (2.0f64).powi(e as i32);
            for (o, &c) in out.iter_mut().zip(&cb.codes) {
                *o = c as f64 * scale;
            }
        }
        SideInfo::Scale(s) => {
            let scale = s / symmetric_max(cb.m_bits) as f64;
            for (o, &c) in out.iter_mut().zip(&cb.codes) {
                *o = c as f64 * scale;
            }
        }
        SideInfo::Shift { shift, mu } => {
            let step = mantissa_step(cb.m_bits);
            let unshift = (2.0f64).powi(-(shift as i32));
            for (o, &c) in out.iter_mut().zip(&cb.codes) {
                *o = mulaw_expand(c as f64 * step, mu) * unshift;
            }
        }
        SideInfo::Step(step) => {
            for (o, &c) in out.iter_mut().zip(&cb.codes) {
                *o = uniform_dequantize(c, step);
            }
        }
    }
    Ok(PrbBlock::from_components(&out))
}

/// Compress-then-decompress of a whole sample sequence, PRB by PRB.
/// `samples.len()` must be a multiple of 12.
pub fn roundtrip_samples(samples: &[Sample], cfg: &CompressionConfig) -> Result<Vec<Sample>, CodecError> {
    if samples.len() % SUBCARRIERS_PER_PRB != 0 {
        return Err(CodecError::Iq(IqError::PartialPrb { n_subcarriers: samples.len() }));
    }
    let mut out = Vec::with_capacity(samples.len());
    for chunk in samples.chunks_exact(SUBCARRIERS_PER_PRB) {
        let block = PrbBlock::from_slice(chunk)?;
        let rec = decompress(&compress(&block, cfg)?)?;
        out.extend_from_slice(&rec.samples);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(method: CompressionMethod, m: u8) -> CompressionConfig {
        let c = CompressionConfig::new(method, m);
        if method == CompressionMethod::Uniform {
            c.with_delta(0.05)
        } else {
            c
        }
    }

    #[test]
    fn zero_block_all_methods() {
        for method in CompressionMethod::ALL {
            for m in [2u8, 8, 16] {
                let cb = compress(&PrbBlock::ZERO, &cfg(method, m)).unwrap();
                let rec = decompress(&cb).unwrap();
                if method == CompressionMethod::Uniform {
                    // mid-rise quantizer has no zero level
                    assert!(rec.samples.iter().all(|s| s.re == 0.025 && s.im == 0.025));
                } else {
                    assert_eq!(cb.codes, [0; CODES_PER_BLOCK]);
                    assert_eq!(rec, PrbBlock::ZERO);
                }
            }
        }
    }

    #[test]
    fn malformed_side_info_rejected() {
        let cb = CompressedBlock {
            method: CompressionMethod::Bfp,
            m_bits: 8,
            side_info: SideInfo::Scale(1.0),
            codes: [0; CODES_PER_BLOCK],
        };
        assert_eq!(decompress(&cb), Err(CodecError::MalformedSideInfo(CompressionMethod::Bfp)));
        let mut cb = compress(&PrbBlock::ZERO, &cfg(CompressionMethod::Bfp, 4)).unwrap();
        cb.codes[3] = 8;
        assert!(matches!(decompress(&cb), Err(CodecError::CodeOutOfRange { code: 8, m_bits: 4 })));
    }

    #[test]
    fn config_validation() {
        assert!(CompressionConfig::new(CompressionMethod::Bfp, 1).validate().is_err());
        assert!(CompressionConfig::new(CompressionMethod::Bfp, 17).validate().is_err());
        let mut c = CompressionConfig::new(CompressionMethod::BlockScaling, 8);
        c.lambda = 0.0;
        assert!(c.validate().is_err());
        let c = CompressionConfig::new(CompressionMethod::Uniform, 8).with_delta(-1.0);
        assert!(c.validate().is_err());
        let c = CompressionConfig::new(CompressionMethod::Bfp, 8);
        assert!(matches!(
            bs_compress(&PrbBlock::ZERO, &c),
            Err(CodecError::MethodMismatch { .. })
        ));
    }

    #[test]
    fn non_finite_rejected() {
        let mut b = PrbBlock::ZERO;
        b.samples[4].im = f64::NAN;
        for method in CompressionMethod::ALL {
            assert!(compress(&b, &cfg(method, 8)).is_err(), "{method}");
        }
    }

    #[test]
    fn method_names_parse() {
        for method in CompressionMethod::ALL {
            assert_eq!(method.as_str().parse::<CompressionMethod>().unwrap(), method);
        }
        assert!("zip".parse::<CompressionMethod>().is_err());
    }

    #[test]
    fn config_json() {
        let c: CompressionConfig = serde_json::from_str(r#"{"method":"bs","m_bits":2}"#).unwrap();
        assert_eq!(c, CompressionConfig::new(CompressionMethod::BlockScaling, 2));
        let c: CompressionConfig =
            serde_json::from_str(r#"{"method":"uniform","m_bits":5,"delta":0.1}"#).unwrap();
        assert_eq!(c.delta, Some(0.1));
    }

    #[test]
    fn fixed_point_full_scale() {
        let mut b = PrbBlock::ZERO;
        b.samples[0] = Sample::new(1.0, -1.0);
        let cb = compress(&b, &CompressionConfig::none()).unwrap();
        assert_eq!(cb.codes[0], 32767);
        assert_eq!(cb.codes[1], -32767);
        assert_eq!(decompress(&cb).unwrap(), b);
    }
}
