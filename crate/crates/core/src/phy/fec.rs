//! Transport-block coding: code selection, shortening and circular-buffer
//! rate matching around the LDPC codes shipped in `codes/`.
//!
//! A transport block (payload + CRC-16) fills the first `tbs + 16`
//! information bits of the selected code; the remaining information bits are
//! shortened (known zeros, never sent). The transmitted stream is the used
//! information bits followed by all parity bits, read circularly until the
//! allocation is full: tail parity is punctured when the allocation is
//! smaller than the stream and the stream is repeated when it is larger.
//!
//! Codes are at most 8192 bits long. A transport block that does not fit is
//! scaled down to the largest size the code holds, and the number of resource
//! elements it occupies is scaled by the same factor so the coded rate is
//! preserved.

use super::ldpc::{LdpcCode, QcIraParams};
use super::{McsConfig, PhyError, TransportBlock, CRC_BITS, LLR_LIMIT};
use std::path::Path;
use std::sync::OnceLock;

pub const DECODER_MAX_ITERATIONS: usize = 25;
pub const DECODER_NORMALIZATION: f32 = 0.75;

/// The nominal mother-code rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Nominal {
    R1_8,
    R1_2,
    R5_8,
    R2_3,
}

impl Nominal {
    pub const ALL: [Nominal; 4] = [Nominal::R1_8, Nominal::R1_2, Nominal::R5_8, Nominal::R2_3];

    pub fn rate(&self) -> f64 {
        match self {
            Nominal::R1_8 => 1.0 / 8.0,
            Nominal::R1_2 => 0.5,
            Nominal::R5_8 => 5.0 / 8.0,
            Nominal::R2_3 => 2.0 / 3.0,
        }
    }

    pub fn file_name(&self) -> &'static str {
        match self {
            Nominal::R1_8 => "qc_ira_r1_8.alist",
            Nominal::R1_2 => "qc_ira_r1_2.alist",
            Nominal::R5_8 => "qc_ira_r5_8.alist",
            Nominal::R2_3 => "qc_ira_r2_3.alist",
        }
    }

    /// Generator parameters of the shipped code files.
    pub fn generator_params(&self) -> QcIraParams {
        match self {
            Nominal::R1_8 => QcIraParams { kb: 8, mb: 56, z: 108, info_degree: 3, core_rows: 8, ext_degree: 3, seed: 18 },
            Nominal::R1_2 => QcIraParams { kb: 16, mb: 16, z: 256, info_degree: 3, core_rows: 16, ext_degree: 0, seed: 12 },
            Nominal::R5_8 => QcIraParams { kb: 20, mb: 12, z: 256, info_degree: 3, core_rows: 12, ext_degree: 0, seed: 58 },
            Nominal::R2_3 => QcIraParams { kb: 16, mb: 8, z: 320, info_degree: 3, core_rows: 8, ext_degree: 0, seed: 23 },
        }
    }

    fn embedded(&self) -> &'static str {
        match self {
            Nominal::R1_8 => include_str!("../../codes/qc_ira_r1_8.alist"),
            Nominal::R1_2 => include_str!("../../codes/qc_ira_r1_2.alist"),
            Nominal::R5_8 => include_str!("../../codes/qc_ira_r5_8.alist"),
            Nominal::R2_3 => include_str!("../../codes/qc_ira_r2_3.alist"),
        }
    }
}

/// One code per nominal rate.
#[derive(Debug, Clone)]
pub struct CodeBank {
    codes: Vec<(Nominal, LdpcCode)>,
}

impl CodeBank {
    /// The codes compiled into the library from `codes/`.
    pub fn builtin() -> &'static CodeBank {
        static BANK: OnceLock<CodeBank> = OnceLock::new();
        BANK.get_or_init(|| CodeBank {
            codes: Nominal::ALL
                .iter()
                .map(|n| (*n, LdpcCode::from_alist(n.embedded()).expect("shipped code parses")))
                .collect(),
        })
    }

    /// Loads the four code files from a directory.
    pub fn from_dir(dir: &Path) -> Result<CodeBank, PhyError> {
        let mut codes = Vec::new();
        for n in Nominal::ALL {
            let path = dir.join(n.file_name());
            let text = std::fs::read_to_string(&path)
                .map_err(|e| PhyError::Infeasible(format!("{}: {e}", path.display())))?;
            codes.push((n, LdpcCode::from_alist(&text)?));
        }
        Ok(CodeBank { codes })
    }

    pub fn code(&self, nominal: Nominal) -> &LdpcCode {
        &self.codes.iter().find(|(n, _)| *n == nominal).expect("all nominal rates present").1
    }

    /// Lowest nominal rate at or above `rate`; the highest code otherwise.
    pub fn select(&self, rate: f64) -> Nominal {
        Nominal::ALL
            .iter()
            .copied()
            .find(|n| n.rate() >= rate)
            .unwrap_or(Nominal::R2_3)
    }

    /// Sizes a transport block for `mcs` on this bank.
    pub fn plan(&self, mcs: &McsConfig) -> Result<FecPlan<'_>, PhyError> {
        mcs.validate().map_err(PhyError::InvalidMcs)?;
        let nominal = self.select(mcs.code_rate.value());
        let code = self.code(nominal);
        let max_tbs = (code.k() - CRC_BITS) / 8 * 8;
        let data_res = mcs.data_res();
        let (tbs, used_res) = if mcs.tbs <= max_tbs {
            (mcs.tbs, data_res)
        } else {
            let scale = max_tbs as f64 / mcs.tbs as f64;
            (max_tbs, (data_res as f64 * scale).round() as usize)
        };
        let qm = mcs.modulation.bits_per_symbol();
        let capacity_bits = used_res * qm;
        if tbs + CRC_BITS >= capacity_bits {
            return Err(PhyError::Infeasible(format!(
                "{} information bits in {capacity_bits} coded bits",
                tbs + CRC_BITS
            )));
        }
        Ok(FecPlan { code, nominal, tbs, used_res, capacity_bits, tbs_scale: tbs as f64 / mcs.tbs as f64 })
    }
}

/// Sizing of one transport block on one code.
#[derive(Debug, Clone)]
pub struct FecPlan<'a> {
    pub code: &'a LdpcCode,
    pub nominal: Nominal,
    /// Information bits actually carried (possibly scaled down).
    pub tbs: usize,
    /// Resource elements the codeword occupies.
    pub used_res: usize,
    /// Transmitted coded bits.
    pub capacity_bits: usize,
    /// `tbs / mcs.tbs`; 1 when the configured size was honored.
    pub tbs_scale: f64,
}

impl FecPlan<'_> {
    fn k_used(&self) -> usize {
        self.tbs + CRC_BITS
    }

    fn stream_len(&self) -> usize {
        self.k_used() + self.code.m()
    }

    /// Codeword index of stream position `i`.
    #[inline]
    fn stream_to_codeword(&self, i: usize) -> usize {
        if i < self.k_used() {
            i
        } else {
            self.code.k() + (i - self.k_used())
        }
    }

    /// Effective code rate on the channel.
    pub fn coded_rate(&self) -> f64 {
        self.k_used() as f64 / self.capacity_bits as f64
    }

    /// Encodes and rate-matches a transport block to `capacity_bits` bits.
    pub fn encode(&self, tb: &TransportBlock) -> Result<Vec<u8>, PhyError> {
        if tb.payload().len() != self.tbs {
            return Err(PhyError::Length { expected: self.tbs, got: tb.payload().len() });
        }
        let mut info = tb.bits_with_crc();
        info.resize(self.code.k(), 0);
        let cw = self.code.encode(&info)?;
        let len = self.stream_len();
        Ok((0..self.capacity_bits).map(|j| cw[self.stream_to_codeword(j % len)]).collect())
    }

    /// De-rate-matches, decodes and checks the CRC. Returns the decoded block
    /// and the pass flag (parity satisfied and CRC match).
    pub fn decode(&self, llrs: &[f64]) -> Result<(TransportBlock, bool), PhyError> {
        if llrs.len() != self.capacity_bits {
            return Err(PhyError::Length { expected: self.capacity_bits, got: llrs.len() });
        }
        let mut full = vec![0f32; self.code.n()];
        for v in &mut full[self.k_used()..self.code.k()] {
            *v = LLR_LIMIT as f32;
        }
        let len = self.stream_len();
        for (j, &l) in llrs.iter().enumerate() {
            full[self.stream_to_codeword(j % len)] += l as f32;
        }
        let out = self.code.decode(&full, DECODER_MAX_ITERATIONS, DECODER_NORMALIZATION)?;
        let (tb, crc_ok) = TransportBlock::from_bits_with_crc(&out.bits[..self.k_used()]);
        Ok((tb, out.parity_ok && crc_ok))
    }
}

#[cfg(test)]
mod tests {
    use super::super::ldpc::generate_qc_ira;
    use super::super::modulation::Constellation;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shipped_codes_match_generator() {
        for n in Nominal::ALL {
            let regenerated = generate_qc_ira(&n.generator_params());
            assert_eq!(regenerated.to_alist(), n.embedded(), "{}", n.file_name());
            let code = CodeBank::builtin().code(n);
            assert!(code.n() <= 8192);
            assert!((code.rate() - n.rate()).abs() < 1e-12);
        }
    }

    #[test]
    fn selection() {
        let bank = CodeBank::builtin();
        let sel: Vec<Nominal> = McsConfig::table().iter().map(|m| bank.select(m.code_rate.value())).collect();
        assert_eq!(sel, Nominal::ALL.to_vec());
    }

    #[test]
    fn mcs1_fits_without_scaling() {
        let bank = CodeBank::builtin();
        let plan = bank.plan(&McsConfig::table()[0]).unwrap();
        assert_eq!(plan.tbs, 848);
        assert_eq!(plan.tbs_scale, 1.0);
        assert!(plan.capacity_bits <= 300 * 12 * 2);
    }

    #[test]
    fn scaled_plans_keep_the_rate() {
        let bank = CodeBank::builtin();
        for mcs in McsConfig::table() {
            let plan = bank.plan(&mcs).unwrap();
            let nominal = (mcs.tbs + CRC_BITS) as f64 / mcs.capacity_bits() as f64;
            assert!((plan.coded_rate() - nominal).abs() < 0.01, "{} vs {nominal}", plan.coded_rate());
            assert!(plan.used_res <= mcs.data_res());
        }
    }

    #[test]
    fn noiseless_loopback_all_mcs() {
        let bank = CodeBank::builtin();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for mcs in McsConfig::table() {
            let plan = bank.plan(&mcs).unwrap();
            let tb = TransportBlock::random(plan.tbs, &mut rng);
            let bits = plan.encode(&tb).unwrap();
            assert_eq!(bits.len(), plan.capacity_bits);
            let c = Constellation::new(mcs.modulation);
            let syms = c.modulate(&bits).unwrap();
            let llr = c.soft_demap(&syms, &vec![1e-3; syms.len()]);
            let (back, ok) = plan.decode(&llr).unwrap();
            assert!(ok, "{}", mcs.modulation);
            assert_eq!(back, tb);
        }
    }

    #[test]
    fn erasures_fail() {
        let plan = CodeBank::builtin().plan(&McsConfig::table()[1]).unwrap();
        let (_, ok) = plan.decode(&vec![0.0; plan.capacity_bits]).unwrap();
        assert!(!ok);
    }

    #[test]
    fn wrong_lengths() {
        let plan = CodeBank::builtin().plan(&McsConfig::table()[0]).unwrap();
        assert!(plan.decode(&[0.0; 3]).is_err());
        assert!(plan.encode(&TransportBlock::new(vec![0; 8])).is_err());
    }
}
