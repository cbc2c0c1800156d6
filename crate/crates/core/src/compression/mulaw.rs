use super::{
    mantissa_step, round_clamp, symmetric_max, CodecError, CompressedBlock, CompressionConfig,
    CompressionMethod, SideInfo, CODES_PER_BLOCK,
};
use crate::iq::PrbBlock;

/// Largest block left shift carried in the 4-bit shift field.
pub const MULAW_MAX_SHIFT: u8 = 15;

/// `F(v) = sgn(v) ln(1 + mu|v|) / ln(1 + mu)` for `|v| <= 1`.
#[inline]
pub fn mulaw_compand(v: f64, mu: f64) -> f64 {
    v.signum() * (mu * v.abs()).ln_1p() / mu.ln_1p()
}

/// Inverse of [`mulaw_compand`]: `sgn(u) ((1 + mu)^|u| - 1) / mu`.
#[inline]
pub fn mulaw_expand(u: f64, mu: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    u.signum() * (u.abs() * mu.ln_1p()).exp_m1() / mu
}

/// Smallest left shift that lifts the block maximum to at least one half.
fn block_shift(max: f64) -> u8 {
    let mut s = 0u8;
    while s < MULAW_MAX_SHIFT && max * (2.0f64).powi(s as i32) < 0.5 {
        s += 1;
    }
    s
}

/// mu-law: block left shift, logarithmic companding, then `m`-bit mid-tread
/// quantization of the companded value.
pub fn mulaw_compress(block: &PrbBlock, cfg: &CompressionConfig) -> Result<CompressedBlock, CodecError> {
    cfg.expect(CompressionMethod::MuLaw)?;
    block.validate()?;
    let max = block.max_component();
    let mut codes = [0i32; CODES_PER_BLOCK];
    if max == 0.0 {
        return Ok(CompressedBlock {
            method: CompressionMethod::MuLaw,
            m_bits: cfg.m_bits,
            side_info: SideInfo::Shift { shift: MULAW_MAX_SHIFT, mu: cfg.mu },
            codes,
        });
    }
    let shift = block_shift(max);
    let gain = (2.0f64).powi(shift as i32);
    let inv_step = 1.0 / mantissa_step(cfg.m_bits);
    let cmax = symmetric_max(cfg.m_bits);
    for (c, y) in codes.iter_mut().zip(block.components()) {
        let v = (y * gain).clamp(-1.0, 1.0);
        *c = round_clamp(mulaw_compand(v, cfg.mu) * inv_step, cmax);
    }
    Ok(CompressedBlock {
        method: CompressionMethod::MuLaw,
        m_bits: cfg.m_bits,
        side_info: SideInfo::Shift { shift, mu: cfg.mu },
        codes,
    })
}

#[cfg(test)]
mod tests {
    use super::super::decompress;
    use super::*;
    use crate::iq::Sample;
    use proptest::prelude::*;

    fn cfg(m: u8) -> CompressionConfig {
        CompressionConfig::new(CompressionMethod::MuLaw, m)
    }

    #[test]
    fn boundary_identities() {
        for mu in [1.0, 8.0, 255.0] {
            assert_eq!(mulaw_compand(0.0, mu), 0.0);
            assert!((mulaw_compand(1.0, mu) - 1.0).abs() < 1e-15);
            assert!((mulaw_compand(-1.0, mu) + 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn half_scale_mu8() {
        let f = mulaw_compand(0.5, 8.0);
        assert!((f - 5f64.ln() / 9f64.ln()).abs() < 1e-12);
        assert!((f - 0.73249).abs() < 1e-5);
        assert!((mulaw_expand(f, 8.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn shift_rule() {
        assert_eq!(block_shift(0.7), 0);
        assert_eq!(block_shift(0.5), 0);
        assert_eq!(block_shift(0.49), 1);
        assert_eq!(block_shift(0.1), 3);
        assert_eq!(block_shift(1e-9), 15);
    }

    #[test]
    fn zero_block_sentinel() {
        let cb = mulaw_compress(&PrbBlock::ZERO, &cfg(9)).unwrap();
        assert_eq!(cb.side_info, SideInfo::Shift { shift: 15, mu: 8.0 });
        assert_eq!(decompress(&cb).unwrap(), PrbBlock::ZERO);
    }

    #[test]
    fn half_scale_round_trip() {
        let mut b = PrbBlock::ZERO;
        b.samples[0] = Sample::new(0.5, 0.0);
        let m = 9;
        let cb = mulaw_compress(&b, &cfg(m)).unwrap();
        let step = mantissa_step(m);
        assert_eq!(cb.codes[0], (mulaw_compand(0.5, 8.0) / step).round() as i32);
        let rec = decompress(&cb).unwrap().samples[0].re;
        // half a step in the companded domain, mapped through the expander slope
        let slope = 9f64.ln() * 9f64.powf(mulaw_compand(0.5, 8.0)) / 8.0;
        assert!((rec - 0.5).abs() <= step / 2.0 * slope * 1.01);
    }

    #[test]
    fn oversized_input_is_clamped() {
        let b = PrbBlock::new([Sample::new(3.0, -3.0); 12]);
        let cb = mulaw_compress(&b, &cfg(8)).unwrap();
        assert!(cb.codes.iter().all(|c| c.abs() == 127));
    }

    proptest! {
        #[test]
        fn compand_is_odd_and_monotone(a in -1.0f64..1.0, b in -1.0f64..1.0, mu in 0.5f64..300.0) {
            prop_assert_eq!(mulaw_compand(-a, mu), -mulaw_compand(a, mu));
            if a < b {
                prop_assert!(mulaw_compand(a, mu) < mulaw_compand(b, mu));
            }
            prop_assert!((mulaw_expand(mulaw_compand(a, mu), mu) - a).abs() <= 1e-12);
        }

        #[test]
        fn shifted_scale_covariance(vals in prop::array::uniform24(-1.0f64..1.0), m in 4u8..=12, s in 1i32..=6) {
            let b = PrbBlock::from_components(&vals).scaled(0.5);
            let k = 2.0f64.powi(-s);
            let a = mulaw_compress(&b, &cfg(m)).unwrap();
            let c = mulaw_compress(&b.scaled(k), &cfg(m)).unwrap();
            prop_assert_eq!(a.codes, c.codes);
        }
    }
}
