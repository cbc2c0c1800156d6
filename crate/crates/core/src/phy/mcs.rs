use super::modulation::Modulation;
use crate::iq::SUBCARRIERS_PER_PRB;
use serde::{Deserialize, Serialize};

/// Code rate as a fraction, e.g. `682.5 / 1024` is `1365 / 2048`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rational {
    pub num: u32,
    pub den: u32,
}

impl Rational {
    pub const fn new(num: u32, den: u32) -> Self {
        Self { num, den }
    }
    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn default_data_symbols() -> usize {
    12
}

/// Modulation and coding scheme with its transport block size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McsConfig {
    pub modulation: Modulation,
    pub code_rate: Rational,
    pub n_prb: usize,
    /// Transport block size in information bits (multiple of 8).
    pub tbs: usize,
    /// Symbols per slot carrying data (the rest hold reference signals).
    #[serde(default = "default_data_symbols")]
    pub n_data_symbols: usize,
}

impl McsConfig {
    /// The four uplink configurations: QPSK 120/1024, 16QAM 434/1024,
    /// 64QAM 616/1024 and 256QAM 682.5/1024 on 25 PRBs.
    pub fn table() -> [McsConfig; 4] {
        let mk = |modulation, code_rate, tbs| McsConfig {
            modulation,
            code_rate,
            n_prb: 25,
            tbs,
            n_data_symbols: 12,
        };
        [
            mk(Modulation::Qpsk, Rational::new(120, 1024), 848),
            mk(Modulation::Qam16, Rational::new(434, 1024), 6016),
            mk(Modulation::Qam64, Rational::new(616, 1024), 13064),
            mk(Modulation::Qam256, Rational::new(1365, 2048), 18960),
        ]
    }

    /// Row `index` (1-based, as in the MCS table) of [`McsConfig::table`].
    pub fn from_index(index: usize) -> Option<McsConfig> {
        Self::table().get(index.checked_sub(1)?).copied()
    }

    pub fn data_res(&self) -> usize {
        SUBCARRIERS_PER_PRB * self.n_prb * self.n_data_symbols
    }

    /// Coded bits the data resource elements can carry.
    pub fn capacity_bits(&self) -> usize {
        self.data_res() * self.modulation.bits_per_symbol()
    }

    pub fn validate(&self) -> Result<(), String> {
        let r = self.code_rate.value();
        if !(r > 0.0 && r < 1.0) {
            return Err(format!("code rate {r} outside (0, 1)"));
        }
        if self.tbs == 0 || self.tbs % 8 != 0 {
            return Err(format!("tbs {} must be a positive multiple of 8", self.tbs));
        }
        if self.n_prb == 0 || self.n_data_symbols == 0 || self.n_data_symbols > crate::iq::SYMBOLS_PER_SLOT {
            return Err("empty allocation".into());
        }
        if self.tbs + super::CRC_BITS >= self.capacity_bits() {
            return Err(format!(
                "tbs {} does not fit in {} coded bits",
                self.tbs,
                self.capacity_bits()
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows() {
        let t = McsConfig::table();
        assert_eq!(t[0].capacity_bits(), 7200);
        assert_eq!(t[3].code_rate.value(), 682.5 / 1024.0);
        for m in t {
            m.validate().unwrap();
            // coded rate on the full grid tracks the nominal code rate
            let eff = (m.tbs + 16) as f64 / m.capacity_bits() as f64;
            assert!((eff - m.code_rate.value()).abs() < 0.02, "{eff}");
        }
        assert_eq!(McsConfig::from_index(2).unwrap().tbs, 6016);
        assert!(McsConfig::from_index(0).is_none());
        assert!(McsConfig::from_index(5).is_none());
    }

    #[test]
    fn infeasible() {
        let mut m = McsConfig::table()[0];
        m.tbs = 7200;
        assert!(m.validate().is_err());
        m.tbs = 801;
        assert!(m.validate().is_err());
    }

    #[test]
    fn json() {
        let m: McsConfig = serde_json::from_str(
            r#"{"modulation":"256QAM","code_rate":{"num":1365,"den":2048},"n_prb":25,"tbs":18960}"#,
        )
        .unwrap();
        assert_eq!(m, McsConfig::table()[3]);
    }
}
