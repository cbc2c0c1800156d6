//! RU-side gain control and the compress / serialize / parse / decompress
//! round trip of every PRB, followed by a per-antenna Bussgang fit.

use super::SimError;
use crate::compression::bussgang_estimate;
use crate::compression::{compress, decompress, CompressionConfig, CompressionMethod};
use crate::iq::{PrbBlock, ResourceGrid, SUBCARRIERS_PER_PRB};
use crate::receiver::QuantizationModel;
use crate::wire::{pack, unpack, WireFormat};

/// Passes every RU grid through the fronthaul in place and returns the
/// Bussgang model the DU should assume.
///
/// `gains[m]` is the RU's fixed gain into full-scale units. Grids are
/// returned in the original (pre-gain) units and the distortion powers are
/// referred to them. `CompressionMethod::None` leaves the grids untouched.
pub fn transport(
    grids: &mut [ResourceGrid],
    gains: &[f64],
    codec: &CompressionConfig,
) -> Result<QuantizationModel, SimError> {
    let n_r = grids.first().map_or(0, |g| g.n_antennas());
    let dims = grids.len() * n_r;
    if codec.method == CompressionMethod::None {
        return Ok(QuantizationModel::none(dims));
    }
    let fmt = WireFormat::from_config(codec);
    let mut model = QuantizationModel { alpha: Vec::with_capacity(dims), distortion: Vec::with_capacity(dims) };
    for (grid, &gain) in grids.iter_mut().zip(gains) {
        let n_sym = grid.n_symbols();
        for r in 0..n_r {
            let mut original = Vec::with_capacity(grid.n_subcarriers() * n_sym);
            let mut received = Vec::with_capacity(original.capacity());
            for l in 0..n_sym {
                let col = grid.column_mut(r, l).expect("in range");
                for (p, chunk) in col.chunks_exact_mut(SUBCARRIERS_PER_PRB).enumerate() {
                    let block = PrbBlock::from_slice(chunk)?.scaled(gain);
                    let section = pack(&compress(&block, codec)?, p as u16)?;
                    let (_, cb) = unpack(&section, &fmt)?;
                    let rec = decompress(&cb)?;
                    original.extend_from_slice(&block.samples);
                    received.extend_from_slice(&rec.samples);
                    for (y, q) in chunk.iter_mut().zip(rec.samples) {
                        *y = q / gain;
                    }
                }
            }
            let stats = bussgang_estimate(&original, &received)?;
            model.alpha.push(stats.alpha);
            model.distortion.push(stats.distortion_power / (gain * gain));
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::complex_gaussian;
    use crate::compression::CompressionMethod;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grids(seed: u64) -> Vec<ResourceGrid> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..2)
            .map(|_| ResourceGrid::from_vec(120, 14, 1, (0..120 * 14).map(|_| complex_gaussian(&mut rng) * 1e-4).collect()).unwrap())
            .collect()
    }

    #[test]
    fn none_is_transparent() {
        let mut g = grids(1);
        let orig = g.clone();
        let q = transport(&mut g, &[1e3, 1e3], &CompressionConfig::none()).unwrap();
        assert_eq!(g, orig);
        assert_eq!(q, QuantizationModel::none(2));
    }

    #[test]
    fn distortion_is_referred_to_input_units() {
        let mut g = grids(2);
        let orig = g.clone();
        let gain = 0.125 / 1e-4;
        let cfg = CompressionConfig::new(CompressionMethod::Bfp, 4);
        let q = transport(&mut g, &[gain, gain], &cfg).unwrap();
        for (m, (a, b)) in g.iter().zip(&orig).enumerate() {
            let err: f64 = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>() / a.data().len() as f64;
            // LS residual power never exceeds the raw error power
            assert!(q.distortion[m] <= err * (1.0 + 1e-9));
            assert!(q.distortion[m] > 0.1 * err);
            assert!((q.alpha[m] - 1.0).abs() < 0.05);
        }
    }
}
