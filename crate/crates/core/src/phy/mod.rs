//! Transmit and receive bit pipeline: transport block with CRC, systematic
//! LDPC coding with circular-buffer rate matching, Gray QAM mapping, max-log
//! demapping and min-sum decoding.

pub mod fec;
pub mod ldpc;
pub mod mcs;
pub mod modulation;

pub use fec::{CodeBank, FecPlan, Nominal};
pub use mcs::{McsConfig, Rational};
pub use modulation::{modulate, soft_demap, Constellation, Modulation, LLR_LIMIT};

use crc::{Crc, CRC_16_IBM_3740};
use thiserror::Error;

/// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection.
const CRC16: Crc<u16> = Crc::<u16>::new(&CRC_16_IBM_3740);

pub const CRC_BITS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhyError {
    #[error("invalid MCS: {0}")]
    InvalidMcs(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("expected {expected} bits, got {got}")]
    Length { expected: usize, got: usize },
    #[error(transparent)]
    Ldpc(#[from] ldpc::LdpcError),
}

fn bits_to_bytes(bits: &[u8]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | (b << (7 - i))))
        .collect()
}

pub fn crc16(bits: &[u8]) -> u16 {
    debug_assert!(bits.len() % 8 == 0);
    CRC16.checksum(&bits_to_bytes(bits))
}

/// Information bits plus their CRC-16.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportBlock {
    payload: Vec<u8>,
    crc: u16,
}

impl TransportBlock {
    /// Payload bits must be 0/1 and a whole number of bytes.
    pub fn new(payload: Vec<u8>) -> Self {
        assert!(payload.len() % 8 == 0, "payload must be byte aligned");
        let crc = crc16(&payload);
        Self { payload, crc }
    }

    pub fn random(tbs: usize, rng: &mut impl rand::Rng) -> Self {
        Self::new((0..tbs).map(|_| rng.random_range(0..2u8)).collect())
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }
    pub fn crc(&self) -> u16 {
        self.crc
    }

    /// Payload followed by the CRC, MSB first.
    pub fn bits_with_crc(&self) -> Vec<u8> {
        let mut v = self.payload.clone();
        v.extend((0..CRC_BITS).rev().map(|i| ((self.crc >> i) & 1) as u8));
        v
    }

    /// Splits decoded bits into payload and received CRC; returns the block
    /// and whether the CRC matched.
    pub fn from_bits_with_crc(bits: &[u8]) -> (Self, bool) {
        let (p, c) = bits.split_at(bits.len() - CRC_BITS);
        let rx = c.iter().fold(0u16, |acc, &b| (acc << 1) | b as u16);
        let tb = Self::new(p.to_vec());
        let ok = tb.crc == rx;
        (tb, ok)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn crc_check_value() {
        // standard check value over ASCII "123456789"
        let bits: Vec<u8> = b"123456789".iter().flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1)).collect();
        assert_eq!(crc16(&bits), 0x29B1);
    }

    #[test]
    fn crc_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let tb = TransportBlock::random(848, &mut rng);
        let (back, ok) = TransportBlock::from_bits_with_crc(&tb.bits_with_crc());
        assert!(ok);
        assert_eq!(back, tb);
    }

    #[test]
    fn crc_detects_bursts_up_to_16_bits() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let tb = TransportBlock::random(256, &mut rng);
            let bits = tb.bits_with_crc();
            for len in 1..=16usize {
                for start in (0..bits.len() - len).step_by(7) {
                    // burst: first and last bit flipped, interior random
                    let mut e = bits.clone();
                    e[start] ^= 1;
                    if len > 1 {
                        e[start + len - 1] ^= 1;
                        for b in &mut e[start + 1..start + len - 1] {
                            *b ^= rng.random_range(0..2u8);
                        }
                    }
                    assert!(!TransportBlock::from_bits_with_crc(&e).1, "len {len} at {start}");
                }
            }
        }
    }
}
