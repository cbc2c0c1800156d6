//! Browser bindings for the fronthaul codecs.
//!
//! Three operations back the demo page: compress one PRB and show what
//! comes back, sweep SQNR against bit width, and trace the mu-law curve with
//! its quantization staircase.

use fhc::channel::complex_gaussian;
use fhc::compression::{
    compress, decompress, mulaw_compand, mulaw_expand, optimize_delta, sqnr, CompressionConfig, CompressionMethod,
};
use fhc::iq::{PrbBlock, Sample, SUBCARRIERS_PER_PRB};
use fhc::wire::pack;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

fn codec(method: &str, bits: u8, power: f64) -> Result<CompressionConfig, String> {
    let method: CompressionMethod = method.parse().map_err(|e: fhc::compression::CodecError| e.to_string())?;
    let cfg = CompressionConfig::new(method, bits);
    cfg.validate().map_err(|e| e.to_string())?;
    if method == CompressionMethod::Uniform {
        return Ok(cfg.with_delta(optimize_delta(bits, power).map_err(|e| e.to_string())?));
    }
    Ok(cfg)
}

fn dbfs_to_power(power_dbfs: f64) -> f64 {
    10f64.powf(power_dbfs / 10.0)
}

/// Twelve Gaussian samples at the given mean power, interleaved re, im.
pub fn gaussian_prb(seed: u64, power_dbfs: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amp = dbfs_to_power(power_dbfs).sqrt();
    (0..SUBCARRIERS_PER_PRB)
        .flat_map(|_| {
            let s = complex_gaussian(&mut rng) * amp;
            [s.re, s.im]
        })
        .collect()
}

/// One PRB through a codec and onto the wire.
#[wasm_bindgen]
pub struct PrbRoundTrip {
    reconstructed: Vec<f64>,
    section: Vec<u8>,
    sqnr_db: f64,
    side_info: String,
}

#[wasm_bindgen]
impl PrbRoundTrip {
    /// Interleaved re, im of the decompressed block.
    #[wasm_bindgen(getter)]
    pub fn reconstructed(&self) -> Vec<f64> {
        self.reconstructed.clone()
    }

    /// The packed section, header included.
    #[wasm_bindgen(getter)]
    pub fn section(&self) -> Vec<u8> {
        self.section.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn sqnr_db(&self) -> f64 {
        self.sqnr_db
    }

    #[wasm_bindgen(getter)]
    pub fn side_info(&self) -> String {
        self.side_info.clone()
    }
}

pub fn round_trip(interleaved: &[f64], method: &str, bits: u8) -> Result<PrbRoundTrip, String> {
    let components: &[f64; 2 * SUBCARRIERS_PER_PRB] = interleaved
        .try_into()
        .map_err(|_| format!("a PRB is {} values, got {}", 2 * SUBCARRIERS_PER_PRB, interleaved.len()))?;
    let block = PrbBlock::from_components(components);
    let power = block.samples.iter().map(Sample::norm_sqr).sum::<f64>() / SUBCARRIERS_PER_PRB as f64;
    let cfg = codec(method, bits, power.max(f64::MIN_POSITIVE))?;
    let cb = compress(&block, &cfg).map_err(|e| e.to_string())?;
    let rec = decompress(&cb).map_err(|e| e.to_string())?;
    Ok(PrbRoundTrip {
        reconstructed: rec.components().to_vec(),
        section: pack(&cb, 0).map_err(|e| e.to_string())?,
        sqnr_db: sqnr(&block.samples, &rec.samples).map_err(|e| e.to_string())?,
        side_info: format!("{:?}", cb.side_info),
    })
}

/// SQNR in dB for each width in `min_bits..=max_bits` over `blocks`
/// Gaussian PRBs.
pub fn sqnr_curve(method: &str, min_bits: u8, max_bits: u8, blocks: usize, power_dbfs: f64) -> Result<Vec<f64>, String> {
    if min_bits > max_bits || blocks == 0 {
        return Err("need min_bits <= max_bits and at least one block".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let amp = dbfs_to_power(power_dbfs).sqrt();
    let input: Vec<PrbBlock> = (0..blocks)
        .map(|_| {
            let mut b = PrbBlock::ZERO;
            for s in b.samples.iter_mut() {
                *s = complex_gaussian(&mut rng) * amp;
            }
            b
        })
        .collect();
    let original: Vec<Sample> = input.iter().flat_map(|b| b.samples).collect();
    (min_bits..=max_bits)
        .map(|m| {
            let cfg = codec(method, m, dbfs_to_power(power_dbfs))?;
            let mut rebuilt = Vec::with_capacity(original.len());
            for b in &input {
                let cb = compress(b, &cfg).map_err(|e| e.to_string())?;
                rebuilt.extend(decompress(&cb).map_err(|e| e.to_string())?.samples);
            }
            sqnr(&original, &rebuilt).map_err(|e| e.to_string())
        })
        .collect()
}

/// `points` inputs on `[0, 1]` followed by their companded values and the
/// reconstruction after `bits`-bit quantization of the companded value.
pub fn mulaw_curve(mu: f64, bits: u8, points: usize) -> Result<Vec<f64>, String> {
    if !(mu > 0.0) || !(2..=16).contains(&bits) || points < 2 {
        return Err("need mu > 0, bits in 2..=16 and at least two points".into());
    }
    let step = 2f64.powi(1 - bits as i32);
    let top = (1i32 << (bits - 1)) - 1;
    let xs: Vec<f64> = (0..points).map(|i| i as f64 / (points - 1) as f64).collect();
    let companded: Vec<f64> = xs.iter().map(|&x| mulaw_compand(x, mu)).collect();
    let staircase = companded.iter().map(|&u| mulaw_expand(((u / step).round() as i32).min(top) as f64 * step, mu));
    Ok(xs.iter().copied().chain(companded.iter().copied()).chain(staircase).collect())
}

#[wasm_bindgen(js_name = gaussianPrb)]
pub fn gaussian_prb_js(seed: u32, power_dbfs: f64) -> Vec<f64> {
    gaussian_prb(seed as u64, power_dbfs)
}

#[wasm_bindgen(js_name = roundTrip)]
pub fn round_trip_js(interleaved: &[f64], method: &str, bits: u8) -> Result<PrbRoundTrip, JsError> {
    round_trip(interleaved, method, bits).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = sqnrCurve)]
pub fn sqnr_curve_js(method: &str, min_bits: u8, max_bits: u8, blocks: usize, power_dbfs: f64) -> Result<Vec<f64>, JsError> {
    sqnr_curve(method, min_bits, max_bits, blocks, power_dbfs).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = mulawCurve)]
pub fn mulaw_curve_js(mu: f64, bits: u8, points: usize) -> Result<Vec<f64>, JsError> {
    mulaw_curve(mu, bits, points).map_err(|e| JsError::new(&e))
}
