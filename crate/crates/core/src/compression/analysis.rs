use super::CodecError;
use crate::iq::Sample;

/// Minimum sequence length for a meaningful Bussgang fit.
pub const BUSSGANG_MIN_SAMPLES: usize = 1000;

/// Linear-gain-plus-distortion decomposition `y_hat = alpha * y + delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BussgangStats {
    /// Real part of the least-squares gain. The imaginary part vanishes in
    /// expectation for componentwise quantizers.
    pub alpha: f64,
    /// Mean `|delta|^2` per sample.
    pub distortion_power: f64,
    /// `|sum delta conj(y)| / sqrt(sum |delta|^2 * sum |y|^2)`.
    pub cross_corr: f64,
}

/// Fits the Bussgang decomposition of `quantized` against `original`.
///
/// The gain is the least-squares coefficient `sum(y_hat conj(y)) / sum|y|^2`,
/// which makes the residual orthogonal to the input.
pub fn bussgang_estimate(original: &[Sample], quantized: &[Sample]) -> Result<BussgangStats, CodecError> {
    if original.len() != quantized.len() {
        return Err(CodecError::LengthMismatch(original.len(), quantized.len()));
    }
    if original.len() < BUSSGANG_MIN_SAMPLES {
        return Err(CodecError::TooFewSamples { min: BUSSGANG_MIN_SAMPLES, got: original.len() });
    }
    let power: f64 = original.iter().map(|y| y.norm_sqr()).sum();
    if power == 0.0 {
        return Err(CodecError::ZeroPower);
    }
    let cross: Sample = original.iter().zip(quantized).map(|(y, q)| q * y.conj()).sum();
    let alpha = cross / power;

    let mut dist = 0.0;
    let mut corr = Sample::new(0.0, 0.0);
    for (y, q) in original.iter().zip(quantized) {
        let d = q - alpha * y;
        dist += d.norm_sqr();
        corr += d * y.conj();
    }
    let cross_corr = if dist == 0.0 { 0.0 } else { corr.norm() / (dist * power).sqrt() };
    Ok(BussgangStats {
        alpha: alpha.re,
        distortion_power: dist / original.len() as f64,
        cross_corr: cross_corr.min(1.0),
    })
}

/// Signal-to-quantization-noise ratio in dB; `+inf` when the two sequences
/// are identical.
pub fn sqnr(original: &[Sample], quantized: &[Sample]) -> Result<f64, CodecError> {
    if original.len() != quantized.len() {
        return Err(CodecError::LengthMismatch(original.len(), quantized.len()));
    }
    let signal: f64 = original.iter().map(|y| y.norm_sqr()).sum();
    let noise: f64 = original.iter().zip(quantized).map(|(y, q)| (q - y).norm_sqr()).sum();
    if noise == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (signal / noise).log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(n: usize, seed: u64) -> Vec<Sample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                Sample::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
            })
            .collect()
    }

    #[test]
    fn identity() {
        let y = gaussian(2000, 1);
        let s = bussgang_estimate(&y, &y).unwrap();
        assert!((s.alpha - 1.0).abs() < 1e-12);
        assert!(s.distortion_power < 1e-25);
        assert_eq!(sqnr(&y, &y).unwrap(), f64::INFINITY);
    }

    #[test]
    fn pure_scaling() {
        let y = gaussian(2000, 2);
        let q: Vec<Sample> = y.iter().map(|v| v * 0.5).collect();
        let s = bussgang_estimate(&y, &q).unwrap();
        assert!((s.alpha - 0.5).abs() < 1e-12);
        assert!(s.distortion_power < 1e-25);
    }

    #[test]
    fn equal_power_error_is_zero_db() {
        let y = gaussian(1000, 3);
        // error sequence with exactly the same energy: a rotated copy
        let q: Vec<Sample> = y.iter().map(|v| v + v * Sample::new(0.0, 1.0)).collect();
        assert!(sqnr(&y, &q).unwrap().abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let y = gaussian(10, 4);
        assert!(matches!(bussgang_estimate(&y, &y), Err(CodecError::TooFewSamples { .. })));
        assert!(matches!(bussgang_estimate(&y, &y[..5]), Err(CodecError::LengthMismatch(10, 5))));
        let z = vec![Sample::new(0.0, 0.0); 1000];
        assert_eq!(bussgang_estimate(&z, &z), Err(CodecError::ZeroPower));
        assert!(sqnr(&y, &y[..3]).is_err());
    }
}
