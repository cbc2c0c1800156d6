use super::{
    mantissa_step, round_clamp, symmetric_max, CodecError, CompressedBlock, CompressionConfig,
    CompressionMethod, SideInfo, CODES_PER_BLOCK,
};
use crate::iq::PrbBlock;

/// Exponent range of the 4-bit signed exponent field.
pub const BFP_EXPONENT_MIN: i8 = -8;
pub const BFP_EXPONENT_MAX: i8 = 7;

/// Smallest exponent whose mantissas all round inside the code range.
///
/// The largest code is `2^(m-1) - 1`, i.e. mantissa `1 - step`, so the block
/// maximum must scale strictly below `1 - step/2` to avoid saturating.
fn block_exponent(max: f64, m_bits: u8) -> i8 {
    let limit = 1.0 - mantissa_step(m_bits) / 2.0;
    let fits = |e: i32| max * (2.0f64).powi(-e) < limit;
    let mut e = max.log2().ceil() as i32;
    e = e.clamp(BFP_EXPONENT_MIN as i32 - 1, BFP_EXPONENT_MAX as i32 + 1);
    while !fits(e) && e <= BFP_EXPONENT_MAX as i32 {
        e += 1;
    }
    while e > BFP_EXPONENT_MIN as i32 && fits(e - 1) {
        e -= 1;
    }
    e.clamp(BFP_EXPONENT_MIN as i32, BFP_EXPONENT_MAX as i32) as i8
}

/// Block floating point: a shared power-of-two exponent and `m`-bit mantissas
/// quantized with step `2^(1-m)`.
pub fn bfp_compress(block: &PrbBlock, cfg: &CompressionConfig) -> Result<CompressedBlock, CodecError> {
    cfg.expect(CompressionMethod::Bfp)?;
    block.validate()?;
    let max = block.max_component();
    let mut codes = [0i32; CODES_PER_BLOCK];
    if max == 0.0 {
        return Ok(CompressedBlock {
            method: CompressionMethod::Bfp,
            m_bits: cfg.m_bits,
            side_info: SideInfo::Exponent(BFP_EXPONENT_MIN),
            codes,
        });
    }
    let e = block_exponent(max, cfg.m_bits);
    let inv = (2.0f64).powi(-(e as i32)) / mantissa_step(cfg.m_bits);
    let cmax = symmetric_max(cfg.m_bits);
    for (c, y) in codes.iter_mut().zip(block.components()) {
        *c = round_clamp(y * inv, cmax);
    }
    Ok(CompressedBlock {
        method: CompressionMethod::Bfp,
        m_bits: cfg.m_bits,
        side_info: SideInfo::Exponent(e),
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
        CompressionConfig::new(CompressionMethod::Bfp, m)
    }

    fn exponent(cb: &CompressedBlock) -> i8 {
        match cb.side_info {
            SideInfo::Exponent(e) => e,
            _ => panic!("not bfp"),
        }
    }

    #[test]
    fn zero_block_sentinel() {
        let cb = bfp_compress(&PrbBlock::ZERO, &cfg(8)).unwrap();
        assert_eq!(exponent(&cb), -8);
        assert_eq!(cb.codes, [0; 24]);
        assert_eq!(decompress(&cb).unwrap(), PrbBlock::ZERO);
    }

    #[test]
    fn full_scale_sample() {
        // max = 1.0 does not fit below 1 - 2^-9 at e = 0, so the exponent
        // moves up to 1 and the sample is carried exactly as mantissa 0.5.
        let mut b = PrbBlock::ZERO;
        b.samples[0] = Sample::new(1.0, 0.0);
        let cb = bfp_compress(&b, &cfg(9)).unwrap();
        assert_eq!(exponent(&cb), 1);
        assert_eq!(cb.codes[0], 128);
        let rec = decompress(&cb).unwrap();
        assert!((rec.samples[0].re - 1.0).abs() <= 2.0f64.powi(-8));
    }

    #[test]
    fn exponent_is_ceil_log2_when_it_fits() {
        let mut b = PrbBlock::ZERO;
        b.samples[3] = Sample::new(0.0, -0.3);
        let cb = bfp_compress(&b, &cfg(8)).unwrap();
        assert_eq!(exponent(&cb), -1);
        // 0.3 / 0.5 = 0.6 -> round(0.6 * 128) = 77
        assert_eq!(cb.codes[7], -77);
    }

    #[test]
    fn tiny_blocks_clamp_exponent() {
        let mut b = PrbBlock::ZERO;
        b.samples[0] = Sample::new(1e-6, 0.0);
        let cb = bfp_compress(&b, &cfg(8)).unwrap();
        assert_eq!(exponent(&cb), BFP_EXPONENT_MIN);
        assert_eq!(cb.codes[0], 0);
    }

    #[test]
    fn large_blocks_clamp_exponent() {
        let mut b = PrbBlock::ZERO;
        b.samples[0] = Sample::new(1000.0, 0.0);
        let cb = bfp_compress(&b, &cfg(8)).unwrap();
        assert_eq!(exponent(&cb), BFP_EXPONENT_MAX);
        assert_eq!(cb.codes[0], 127);
    }

    proptest! {
        #[test]
        fn error_bound(vals in prop::array::uniform24(-1.0f64..1.0), m in 2u8..=12, scale_exp in -6i32..=0) {
            let scale = 2.0f64.powi(scale_exp);
            let comps: [f64; 24] = vals.map(|v| v * scale);
            let b = PrbBlock::from_components(&comps);
            let cb = bfp_compress(&b, &cfg(m)).unwrap();
            let e = exponent(&cb);
            let bound = 2.0f64.powi(e as i32) * mantissa_step(m) / 2.0;
            let rec = decompress(&cb).unwrap().components();
            for (y, r) in comps.iter().zip(rec.iter()) {
                prop_assert!((y - r).abs() <= bound * (1.0 + 1e-12));
            }
        }

        #[test]
        fn deterministic(vals in prop::array::uniform24(-1.0f64..1.0), m in 2u8..=16) {
            let b = PrbBlock::from_components(&vals);
            prop_assert_eq!(bfp_compress(&b, &cfg(m)).unwrap(), bfp_compress(&b, &cfg(m)).unwrap());
        }
    }
}
