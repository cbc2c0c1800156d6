use super::{
    twos_complement_range, CodecError, CompressedBlock, CompressionConfig, CompressionMethod,
    SideInfo, CODES_PER_BLOCK,
};
use crate::iq::PrbBlock;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Mid-rise `m`-bit quantizer code: `floor(y / step)` clipped to the
/// two's complement range. The reconstruction levels are `(code + 1/2) step`,
/// so the output is limited to `±(step/2)(2^m - 1)`.
///
/// Accepts `m_bits = 1` (levels `±step/2`) for step-size analysis.
#[inline]
pub fn uniform_quantize(y: f64, step: f64, m_bits: u8) -> i32 {
    let half = (1i64 << (m_bits - 1)) as f64;
    (y / step).floor().clamp(-half, half - 1.0) as i32
}

#[inline]
pub fn uniform_dequantize(code: i32, step: f64) -> f64 {
    (code as f64 + 0.5) * step
}

/// Uniform scalar quantization with a fixed (not per-block) step size.
pub fn uniform_compress(block: &PrbBlock, cfg: &CompressionConfig) -> Result<CompressedBlock, CodecError> {
    cfg.expect(CompressionMethod::Uniform)?;
    block.validate()?;
    let step = cfg.delta.ok_or(CodecError::UnresolvedStep)?;
    let mut codes = [0i32; CODES_PER_BLOCK];
    for (c, y) in codes.iter_mut().zip(block.components()) {
        *c = uniform_quantize(y, step, cfg.m_bits);
    }
    debug_assert!({
        let (lo, hi) = twos_complement_range(cfg.m_bits);
        codes.iter().all(|c| (lo..=hi).contains(c))
    });
    Ok(CompressedBlock {
        method: CompressionMethod::Uniform,
        m_bits: cfg.m_bits,
        side_info: SideInfo::Step(step),
        codes,
    })
}

const DELTA_SEARCH_SEED: u64 = 0x0f1c_de17a;
const DELTA_SEARCH_SAMPLES: usize = 100_000;

/// Step size minimizing the mean-squared error of the `m`-bit uniform
/// quantizer for a zero-mean circular Gaussian input of power `input_power`
/// (so each component has variance `input_power / 2`).
///
/// Golden-section search over `ln(step)` on a fixed-seed sample set; the
/// result is deterministic.
pub fn optimize_delta(m_bits: u8, input_power: f64) -> Result<f64, CodecError> {
    if !(1..=16).contains(&m_bits) {
        return Err(CodecError::InvalidConfig(format!("m_bits must be in 1..=16, got {m_bits}")));
    }
    if !(input_power > 0.0 && input_power.is_finite()) {
        return Err(CodecError::InvalidConfig(format!("input power must be > 0, got {input_power}")));
    }
    let sigma = (input_power / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(DELTA_SEARCH_SEED);
    let samples: Vec<f64> = (0..2 * DELTA_SEARCH_SAMPLES)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * sigma
        })
        .collect();

    let mse = |ln_step: f64| {
        let step = ln_step.exp();
        samples
            .iter()
            .map(|&y| {
                let e = uniform_dequantize(uniform_quantize(y, step, m_bits), step) - y;
                e * e
            })
            .sum::<f64>()
    };

    // Optimal clipping range lies between ~0.5 sigma (1 bit) and ~6 sigma (16 bits).
    let levels_half = (1u64 << (m_bits - 1)) as f64;
    let mut lo = (0.25 * sigma / levels_half).ln();
    let mut hi = (8.0 * sigma / levels_half).ln();
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = mse(x1);
    let mut f2 = mse(x2);
    while hi - lo > 1e-6 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = mse(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = mse(x2);
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

#[cfg(test)]
mod tests {
    use super::super::decompress;
    use super::*;
    use crate::iq::Sample;

    fn cfg(m: u8, delta: f64) -> CompressionConfig {
        CompressionConfig::new(CompressionMethod::Uniform, m).with_delta(delta)
    }

    #[test]
    fn mid_rise_levels() {
        // y = 0.6, step 0.5: floor(1.2) = 1 -> level 1.5 * 0.5
        assert_eq!(uniform_quantize(0.6, 0.5, 8), 1);
        assert_eq!(uniform_dequantize(1, 0.5), 0.75);
        // zero sits on a decision boundary and maps to the first positive level
        assert_eq!(uniform_quantize(0.0, 0.5, 8), 0);
        assert_eq!(uniform_dequantize(0, 0.5), 0.25);
        assert_eq!(uniform_quantize(-0.1, 0.5, 8), -1);
        assert_eq!(uniform_dequantize(-1, 0.5), -0.25);
    }

    #[test]
    fn overload_clamps_to_range() {
        // m = 3, step 0.25: range is ±(0.25/2)(2^3 - 1) = ±0.875
        let mut b = PrbBlock::ZERO;
        b.samples[0] = Sample::new(5.0, -5.0);
        let cb = uniform_compress(&b, &cfg(3, 0.25)).unwrap();
        assert_eq!(&cb.codes[..2], &[3, -4]);
        let rec = decompress(&cb).unwrap();
        assert_eq!(rec.samples[0], Sample::new(0.875, -0.875));
    }

    #[test]
    fn unresolved_step() {
        let c = CompressionConfig::new(CompressionMethod::Uniform, 4);
        assert_eq!(uniform_compress(&PrbBlock::ZERO, &c), Err(CodecError::UnresolvedStep));
    }

    #[test]
    fn granular_error_bound() {
        let step = 0.01;
        for i in -4000..4000 {
            let y = i as f64 * 1.37e-4;
            let r = uniform_dequantize(uniform_quantize(y, step, 8), step);
            assert!((r - y).abs() <= step / 2.0 + 1e-15);
        }
    }

    #[test]
    fn one_bit_matches_lloyd_max() {
        // Independent oracle: the MSE-optimal two-level quantizer of a
        // unit-variance Gaussian has levels ±E|Z| = ±sqrt(2/pi) = ±0.7979.
        let delta = optimize_delta(1, 2.0).unwrap();
        let level = delta / 2.0;
        assert!((level - 0.7979).abs() / 0.7979 < 0.02, "level {level}");
    }

    #[test]
    fn scale_equivariance() {
        let a = optimize_delta(4, 1.0).unwrap();
        let b = optimize_delta(4, 2.0).unwrap();
        assert!((b / a - 2f64.sqrt()).abs() < 1e-3, "{a} {b}");
    }

    #[test]
    fn local_optimality() {
        for m in [2u8, 5, 8] {
            let p = 0.3;
            let d = optimize_delta(m, p).unwrap();
            let sigma = (p / 2.0).sqrt();
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            let xs: Vec<f64> = (0..200_000)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z * sigma
                })
                .collect();
            let mse = |s: f64| {
                xs.iter()
                    .map(|&y| (uniform_dequantize(uniform_quantize(y, s, m), s) - y).powi(2))
                    .sum::<f64>()
            };
            assert!(mse(d) <= mse(0.9 * d), "m={m}");
            assert!(mse(d) <= mse(1.1 * d), "m={m}");
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(optimize_delta(0, 1.0).is_err());
        assert!(optimize_delta(4, 0.0).is_err());
    }
}
