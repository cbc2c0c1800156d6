//! Bit-exact fronthaul section format for compressed PRBs.
//!
//! One section carries one PRB:
//!
//! ```text
//! byte 0   method (high nibble) | m_bits mod 16 (low nibble, 0 means 16)
//! byte 1   block-scaling shift (high nibble, two's complement) | reserved 0
//! byte 2-3 PRB index, big endian
//! byte 4   compression parameter
//! byte 5.. 24 codes, m_bits each, two's complement, MSB first, I then Q
//! ```
//!
//! The compression parameter byte is `0000eeee` with `e + 8` for block
//! floating point, the Q1.7 scale mantissa for block scaling, `0000ssss` for
//! the mu-law shift, and zero for uniform and uncompressed sections.
//!
//! Everything after the four header bytes is the payload: `8 + 24 m` bits,
//! always a whole number of bytes. This layout is self-contained and is not
//! interoperable with real O-RAN radio units.

use crate::compression::{
    twos_complement_range, CodecError, CompressedBlock, CompressionConfig, CompressionMethod,
    SideInfo, CODES_PER_BLOCK,
};
use thiserror::Error;

/// Section header length in bytes.
pub const HEADER_BYTES: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WireError {
    #[error("section length {got} bytes, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("reserved bits set in {0}")]
    ReservedBits(&'static str),
    #[error("unknown method code {0}")]
    UnknownMethod(u8),
    #[error("section carries {got} with {got_bits} bits, expected {expected} with {expected_bits} bits")]
    FormatMismatch {
        expected: CompressionMethod,
        expected_bits: u8,
        got: CompressionMethod,
        got_bits: u8,
    },
    #[error("uniform sections need the static step size")]
    MissingStep,
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// Static parameters both ends agree on before any section is exchanged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WireFormat {
    pub method: CompressionMethod,
    pub m_bits: u8,
    pub mu: f64,
    pub uniform_step: Option<f64>,
}

impl WireFormat {
    pub fn new(method: CompressionMethod, m_bits: u8) -> Self {
        Self { method, m_bits, mu: 8.0, uniform_step: None }
    }

    pub fn from_config(cfg: &CompressionConfig) -> Self {
        Self { method: cfg.method, m_bits: cfg.m_bits, mu: cfg.mu, uniform_step: cfg.delta }
    }

    pub fn section_bytes(&self) -> usize {
        section_bytes(self.m_bits)
    }
}

pub fn method_code(method: CompressionMethod) -> u8 {
    match method {
        CompressionMethod::None => 0,
        CompressionMethod::Bfp => 1,
        CompressionMethod::BlockScaling => 2,
        CompressionMethod::MuLaw => 3,
        CompressionMethod::Uniform => 4,
    }
}

pub fn method_from_code(code: u8) -> Result<CompressionMethod, WireError> {
    Ok(match code {
        0 => CompressionMethod::None,
        1 => CompressionMethod::Bfp,
        2 => CompressionMethod::BlockScaling,
        3 => CompressionMethod::MuLaw,
        4 => CompressionMethod::Uniform,
        c => return Err(WireError::UnknownMethod(c)),
    })
}

/// Payload bits per PRB: one parameter byte plus 24 codes.
pub const fn payload_bits(m_bits: u8) -> usize {
    8 + CODES_PER_BLOCK * m_bits as usize
}

/// Payload bytes per PRB (always byte aligned).
pub const fn payload_bytes(m_bits: u8) -> usize {
    payload_bits(m_bits).div_ceil(8)
}

/// Header plus payload.
pub const fn section_bytes(m_bits: u8) -> usize {
    HEADER_BYTES + payload_bytes(m_bits)
}

/// Fronthaul payload bits per slot for the given allocation.
pub fn fronthaul_load(n_prb: u64, n_symbols: u64, n_antennas: u64, m_bits: u8) -> u64 {
    n_prb * n_symbols * n_antennas * payload_bits(m_bits) as u64
}

/// 8-bit Q1.7 mantissa with a 4-bit two's complement exponent:
/// `value = mantissa / 128 * 2^shift`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Q17Scale {
    pub shift: i8,
    pub mantissa: u8,
}

impl Q17Scale {
    pub const SHIFT_MIN: i8 = -8;
    pub const SHIFT_MAX: i8 = 7;

    /// Nearest representable scale; the mantissa is normalized into
    /// `[128, 255]` whenever the shift range allows.
    pub fn quantize(value: f64) -> Self {
        if !(value > 0.0) {
            return Self { shift: 0, mantissa: 0 };
        }
        let mut shift = (value.log2().floor() as i32).clamp(Self::SHIFT_MIN as i32, Self::SHIFT_MAX as i32);
        let mant = |s: i32| (value * (2.0f64).powi(-s) * 128.0).round();
        let mut m = mant(shift);
        if m > 255.0 && shift < Self::SHIFT_MAX as i32 {
            shift += 1;
            m = mant(shift);
        }
        Self { shift: shift as i8, mantissa: m.min(255.0) as u8 }
    }

    pub fn value(&self) -> f64 {
        self.mantissa as f64 / 128.0 * (2.0f64).powi(self.shift as i32)
    }

    fn shift_nibble(&self) -> u8 {
        (self.shift as u8) & 0x0f
    }

    fn from_parts(nibble: u8, mantissa: u8) -> Self {
        // sign-extend the 4-bit field
        let shift = ((nibble << 4) as i8) >> 4;
        Self { shift, mantissa }
    }
}

struct BitWriter {
    bytes: Vec<u8>,
    acc: u64,
    n: u32,
}

impl BitWriter {
    fn with_capacity(cap: usize) -> Self {
        Self { bytes: Vec::with_capacity(cap), acc: 0, n: 0 }
    }

    fn push(&mut self, value: u32, bits: u32) {
        self.acc = (self.acc << bits) | (value as u64 & ((1u64 << bits) - 1));
        self.n += bits;
        while self.n >= 8 {
            self.n -= 8;
            self.bytes.push((self.acc >> self.n) as u8);
        }
    }

    fn finish(mut self) -> Vec<u8> {
        if self.n > 0 {
            self.bytes.push((self.acc << (8 - self.n)) as u8);
        }
        self.bytes
    }
}

struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
    acc: u64,
    n: u32,
}

impl<'a> BitReader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0, acc: 0, n: 0 }
    }

    fn read(&mut self, bits: u32) -> u32 {
        while self.n < bits {
            self.acc = (self.acc << 8) | self.bytes[self.pos] as u64;
            self.pos += 1;
            self.n += 8;
        }
        self.n -= bits;
        ((self.acc >> self.n) & ((1u64 << bits) - 1)) as u32
    }

    fn read_signed(&mut self, bits: u32) -> i32 {
        let raw = self.read(bits) as i32;
        let shift = 32 - bits;
        (raw << shift) >> shift
    }
}

/// Serializes one compressed PRB into a section.
pub fn pack(cb: &CompressedBlock, prb_index: u16) -> Result<Vec<u8>, WireError> {
    cb.validate()?;
    let (bs_shift, param) = match cb.side_info {
        SideInfo::None | SideInfo::Step(_) => (0u8, 0u8),
        SideInfo::Exponent(e) => (0, (e + 8) as u8 & 0x0f),
        SideInfo::Scale(s) => {
            let q = Q17Scale::quantize(s);
            (q.shift_nibble(), q.mantissa)
        }
        SideInfo::Shift { shift, .. } => (0, shift & 0x0f),
    };
    let mut w = BitWriter::with_capacity(section_bytes(cb.m_bits));
    w.push(((method_code(cb.method) << 4) | (cb.m_bits & 0x0f)) as u32, 8);
    w.push((bs_shift << 4) as u32, 8);
    w.push(prb_index as u32, 16);
    w.push(param as u32, 8);
    for &c in &cb.codes {
        w.push(c as u32, cb.m_bits as u32);
    }
    let out = w.finish();
    debug_assert_eq!(out.len(), section_bytes(cb.m_bits));
    Ok(out)
}

/// Parses one section; returns its PRB index and the compressed block.
pub fn unpack(bytes: &[u8], fmt: &WireFormat) -> Result<(u16, CompressedBlock), WireError> {
    let expected = section_bytes(fmt.m_bits);
    if bytes.len() != expected {
        return Err(WireError::LengthMismatch { expected, got: bytes.len() });
    }
    let method = method_from_code(bytes[0] >> 4)?;
    let m_bits = match bytes[0] & 0x0f {
        0 => 16,
        b => b,
    };
    if method != fmt.method || m_bits != fmt.m_bits {
        return Err(WireError::FormatMismatch {
            expected: fmt.method,
            expected_bits: fmt.m_bits,
            got: method,
            got_bits: m_bits,
        });
    }
    if bytes[1] & 0x0f != 0 || (method != CompressionMethod::BlockScaling && bytes[1] != 0) {
        return Err(WireError::ReservedBits("header"));
    }
    let prb_index = u16::from_be_bytes([bytes[2], bytes[3]]);
    let param = bytes[4];
    let side_info = match method {
        CompressionMethod::None | CompressionMethod::Uniform => {
            if param != 0 {
                return Err(WireError::ReservedBits("parameter byte"));
            }
            if method == CompressionMethod::Uniform {
                SideInfo::Step(fmt.uniform_step.ok_or(WireError::MissingStep)?)
            } else {
                SideInfo::None
            }
        }
        CompressionMethod::Bfp => {
            if param & 0xf0 != 0 {
                return Err(WireError::ReservedBits("parameter byte"));
            }
            SideInfo::Exponent(param as i8 - 8)
        }
        CompressionMethod::BlockScaling => {
            SideInfo::Scale(Q17Scale::from_parts(bytes[1] >> 4, param).value())
        }
        CompressionMethod::MuLaw => {
            if param & 0xf0 != 0 {
                return Err(WireError::ReservedBits("parameter byte"));
            }
            SideInfo::Shift { shift: param, mu: fmt.mu }
        }
    };
    let mut r = BitReader::new(&bytes[HEADER_BYTES + 1..]);
    let mut codes = [0i32; CODES_PER_BLOCK];
    for c in codes.iter_mut() {
        *c = r.read_signed(m_bits as u32);
    }
    let cb = CompressedBlock { method, m_bits, side_info, codes };
    debug_assert!({
        let (lo, hi) = twos_complement_range(m_bits);
        cb.codes.iter().all(|c| (lo..=hi).contains(c))
    });
    Ok((prb_index, cb))
}

/// Packs consecutive PRBs with indices `0, 1, 2, ...`.
pub fn pack_sections(blocks: &[CompressedBlock]) -> Result<Vec<u8>, WireError> {
    let mut out = Vec::new();
    for (i, cb) in blocks.iter().enumerate() {
        out.extend(pack(cb, i as u16)?);
    }
    Ok(out)
}

/// Inverse of [`pack_sections`].
pub fn unpack_sections(bytes: &[u8], fmt: &WireFormat) -> Result<Vec<CompressedBlock>, WireError> {
    let n = fmt.section_bytes();
    if bytes.len() % n != 0 {
        return Err(WireError::LengthMismatch { expected: (bytes.len() / n + 1) * n, got: bytes.len() });
    }
    bytes.chunks_exact(n).map(|s| unpack(s, fmt).map(|(_, cb)| cb)).collect()
}
