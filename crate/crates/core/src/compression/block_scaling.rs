use super::{
    symmetric_max, twos_complement_range, CodecError, CompressedBlock, CompressionConfig,
    CompressionMethod, SideInfo, CODES_PER_BLOCK,
};
use crate::iq::{PrbBlock, Sample};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Block scaling: divide by the linear scale `S = max / lambda`, quantize to
/// `round(y / S * (L/2 - 1))` with `L = 2^m`, clip to `[-L/2, L/2 - 1]`.
pub fn bs_compress(block: &PrbBlock, cfg: &CompressionConfig) -> Result<CompressedBlock, CodecError> {
    cfg.expect(CompressionMethod::BlockScaling)?;
    block.validate()?;
    let max = block.max_component();
    let mut codes = [0i32; CODES_PER_BLOCK];
    if max == 0.0 {
        return Ok(CompressedBlock {
            method: CompressionMethod::BlockScaling,
            m_bits: cfg.m_bits,
            side_info: SideInfo::Scale(0.0),
            codes,
        });
    }
    let scale = max / cfg.lambda;
    let levels = symmetric_max(cfg.m_bits) as f64;
    let (lo, hi) = twos_complement_range(cfg.m_bits);
    for (c, y) in codes.iter_mut().zip(block.components()) {
        *c = ((y / scale) * levels).round().clamp(lo as f64, hi as f64) as i32;
    }
    Ok(CompressedBlock {
        method: CompressionMethod::BlockScaling,
        m_bits: cfg.m_bits,
        side_info: SideInfo::Scale(scale),
        codes,
    })
}

const LAMBDA_SEARCH_SEED: u64 = 0x1a3b_da;
const LAMBDA_SEARCH_BLOCKS: usize = 20_000;

/// `lambda` minimizing the mean-squared error of `m`-bit block scaling on
/// circular Gaussian PRBs.
///
/// Block scaling is scale-invariant, so the result does not depend on input
/// power. Golden-section search over `[1, 4]` on a fixed-seed block set.
pub fn optimize_lambda(m_bits: u8) -> Result<f64, CodecError> {
    let mut cfg = CompressionConfig::new(CompressionMethod::BlockScaling, m_bits);
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(LAMBDA_SEARCH_SEED);
    let blocks: Vec<PrbBlock> = (0..LAMBDA_SEARCH_BLOCKS)
        .map(|_| {
            let mut b = PrbBlock::ZERO;
            for s in b.samples.iter_mut() {
                *s = Sample::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
            }
            b
        })
        .collect();

    let mut mse = |lambda: f64| {
        cfg.lambda = lambda;
        blocks
            .iter()
            .map(|b| {
                let rec = super::decompress(&bs_compress(b, &cfg).expect("finite")).expect("well formed");
                b.samples.iter().zip(rec.samples).map(|(y, q)| (y - q).norm_sqr()).sum::<f64>()
            })
            .sum::<f64>()
    };

    let (mut lo, mut hi) = (1.0f64, 4.0f64);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = mse(x1);
    let mut f2 = mse(x2);
    while hi - lo > 1e-4 {
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
    // the MSE curve has a kink at lambda = 1; do not let the bracket miss it
    let best = 0.5 * (lo + hi);
    Ok(if mse(1.0) <= mse(best) { 1.0 } else { best })
}
