//! Gray-mapped square QAM with unit average power and max-log soft
//! demapping.
//!
//! Bit-to-symbol mapping follows the NR uplink convention: even-indexed bits
//! select the in-phase amplitude, odd-indexed bits the quadrature amplitude,
//! and each axis is a binary-reflected Gray PAM.

use crate::iq::Sample;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// LLR magnitude clamp.
pub const LLR_LIMIT: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Modulation {
    #[serde(alias = "qpsk", alias = "QPSK")]
    Qpsk,
    #[serde(alias = "16qam", alias = "qam16", alias = "16QAM")]
    Qam16,
    #[serde(alias = "64qam", alias = "qam64", alias = "64QAM")]
    Qam64,
    #[serde(alias = "256qam", alias = "qam256", alias = "256QAM")]
    Qam256,
}

impl Modulation {
    pub fn bits_per_symbol(&self) -> usize {
        match self {
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
            Modulation::Qam64 => 6,
            Modulation::Qam256 => 8,
        }
    }

    fn bits_per_axis(&self) -> usize {
        self.bits_per_symbol() / 2
    }

    /// `sqrt(2 (4^k - 1) / 3)` for `k` bits per axis.
    fn norm(&self) -> f64 {
        let levels = (1u32 << self.bits_per_axis()) as f64;
        (2.0 * (levels * levels - 1.0) / 3.0).sqrt()
    }

    /// Amplitude levels of one axis indexed by their Gray label (label bit
    /// `i` is the `i`-th bit of that axis, most significant first).
    fn axis_levels(&self) -> Vec<f64> {
        let k = self.bits_per_axis();
        let norm = self.norm();
        (0..1usize << k)
            .map(|label| {
                let bit = |i: usize| ((label >> (k - 1 - i)) & 1) as f64;
                // (1-2b0)(2^(k-1) - (1-2b1)(2^(k-2) - (1-2b2)(...)))
                let mut amp = 1.0;
                for i in (1..k).rev() {
                    amp = (1u32 << (k - i)) as f64 - (1.0 - 2.0 * bit(i)) * amp;
                }
                (1.0 - 2.0 * bit(0)) * amp / norm
            })
            .collect()
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Modulation::Qpsk => "QPSK",
            Modulation::Qam16 => "16QAM",
            Modulation::Qam64 => "64QAM",
            Modulation::Qam256 => "256QAM",
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Modulation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "QPSK" => Ok(Modulation::Qpsk),
            "16QAM" | "QAM16" => Ok(Modulation::Qam16),
            "64QAM" | "QAM64" => Ok(Modulation::Qam64),
            "256QAM" | "QAM256" => Ok(Modulation::Qam256),
            _ => Err(format!("unknown modulation `{s}`")),
        }
    }
}

/// Precomputed constellation for one modulation order.
#[derive(Debug, Clone)]
pub struct Constellation {
    modulation: Modulation,
    levels: Vec<f64>,
}

impl Constellation {
    pub fn new(modulation: Modulation) -> Self {
        Self { modulation, levels: modulation.axis_levels() }
    }

    pub fn modulation(&self) -> Modulation {
        self.modulation
    }

    /// Every constellation point indexed by its `Qm`-bit label.
    pub fn points(&self) -> Vec<Sample> {
        let qm = self.modulation.bits_per_symbol();
        (0..1usize << qm)
            .map(|label| {
                let bits: Vec<u8> = (0..qm).map(|i| ((label >> (qm - 1 - i)) & 1) as u8).collect();
                self.map_symbol(&bits)
            })
            .collect()
    }

    fn axis_label(bits: &[u8], offset: usize, k: usize) -> usize {
        (0..k).fold(0, |acc, i| (acc << 1) | bits[2 * i + offset] as usize)
    }

    fn map_symbol(&self, bits: &[u8]) -> Sample {
        let k = self.modulation.bits_per_axis();
        Sample::new(
            self.levels[Self::axis_label(bits, 0, k)],
            self.levels[Self::axis_label(bits, 1, k)],
        )
    }

    /// Maps bits to symbols; the bit count must be a multiple of `Qm`.
    pub fn modulate(&self, bits: &[u8]) -> Result<Vec<Sample>, String> {
        let qm = self.modulation.bits_per_symbol();
        if bits.len() % qm != 0 {
            return Err(format!("{} bits is not a multiple of {qm}", bits.len()));
        }
        Ok(bits.chunks_exact(qm).map(|c| self.map_symbol(c)).collect())
    }

    /// Max-log LLRs for one axis value, appended to `out` at the axis bit
    /// positions. `inv_n0` is the reciprocal complex noise variance.
    fn demap_axis(&self, r: f64, inv_n0: f64, offset: usize, out: &mut [f64]) {
        let k = self.modulation.bits_per_axis();
        let mut best0 = [f64::INFINITY; 4];
        let mut best1 = [f64::INFINITY; 4];
        for (label, &a) in self.levels.iter().enumerate() {
            let d = (r - a) * (r - a);
            for i in 0..k {
                if (label >> (k - 1 - i)) & 1 == 0 {
                    best0[i] = best0[i].min(d);
                } else {
                    best1[i] = best1[i].min(d);
                }
            }
        }
        for i in 0..k {
            out[2 * i + offset] = ((best1[i] - best0[i]) * inv_n0).clamp(-LLR_LIMIT, LLR_LIMIT);
        }
    }

    /// Max-log LLRs (positive favours bit 0) for each symbol given its
    /// complex noise variance.
    pub fn soft_demap(&self, symbols: &[Sample], noise_var: &[f64]) -> Vec<f64> {
        assert_eq!(symbols.len(), noise_var.len(), "one noise variance per symbol");
        let qm = self.modulation.bits_per_symbol();
        let mut out = vec![0.0; symbols.len() * qm];
        for ((s, &nv), chunk) in symbols.iter().zip(noise_var).zip(out.chunks_exact_mut(qm)) {
            let inv = 1.0 / nv.max(1e-300);
            self.demap_axis(s.re, inv, 0, chunk);
            self.demap_axis(s.im, inv, 1, chunk);
        }
        out
    }
}

/// Convenience wrapper around [`Constellation::modulate`].
pub fn modulate(bits: &[u8], modulation: Modulation) -> Result<Vec<Sample>, String> {
    Constellation::new(modulation).modulate(bits)
}

/// Convenience wrapper around [`Constellation::soft_demap`].
pub fn soft_demap(symbols: &[Sample], noise_var: &[f64], modulation: Modulation) -> Vec<f64> {
    Constellation::new(modulation).soft_demap(symbols, noise_var)
}
