#![allow(dead_code)]

use fhc::channel::complex_gaussian;
use fhc::compression::{compress, CompressionConfig, CompressionMethod};
use fhc::iq::{PrbBlock, Sample};
use fhc::wire::pack_sections;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;

/// Set to regenerate the files under `testdata/wire`.
pub const BLESS_VAR: &str = "FHC_BLESS";

pub const GOLDEN_STEP: f64 = 0.05;

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("testdata").join("wire")
}

/// Every (method, width) pair with a reference file.
pub fn golden_cases() -> Vec<CompressionConfig> {
    let mut out = vec![CompressionConfig::none()];
    for method in [CompressionMethod::Bfp, CompressionMethod::BlockScaling, CompressionMethod::MuLaw, CompressionMethod::Uniform] {
        for m in [2u8, 4, 8, 9] {
            let cfg = CompressionConfig::new(method, m);
            out.push(if method == CompressionMethod::Uniform { cfg.with_delta(GOLDEN_STEP) } else { cfg });
        }
    }
    out
}

pub fn golden_name(cfg: &CompressionConfig) -> String {
    format!("{}_m{}.bin", cfg.method.as_str(), cfg.m_bits)
}

/// Fixed input: a zero block, a full-scale block and six Gaussian blocks at
/// decreasing power.
pub fn golden_blocks() -> Vec<PrbBlock> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x601d);
    let mut out = vec![PrbBlock::ZERO, PrbBlock::new([Sample::new(1.0, -1.0); 12])];
    for k in 0..6 {
        let amp = 0.3 * 0.25f64.powi(k);
        let mut b = PrbBlock::ZERO;
        for s in b.samples.iter_mut() {
            *s = complex_gaussian(&mut rng) * amp;
        }
        out.push(b);
    }
    out
}

pub fn golden_bytes(cfg: &CompressionConfig) -> Vec<u8> {
    let blocks: Vec<_> = golden_blocks().iter().map(|b| compress(b, cfg).unwrap()).collect();
    pack_sections(&blocks).unwrap()
}

/// Compares every case against its file, rewriting the files when blessing.
/// Returns the names that differ.
pub fn check_golden_files() -> Vec<String> {
    let bless = std::env::var_os(BLESS_VAR).is_some();
    let dir = golden_dir();
    let mut bad = Vec::new();
    for cfg in golden_cases() {
        let path = dir.join(golden_name(&cfg));
        let bytes = golden_bytes(&cfg);
        if bless {
            std::fs::create_dir_all(&dir).unwrap();
            std::fs::write(&path, &bytes).unwrap();
        } else if std::fs::read(&path).ok().as_deref() != Some(&bytes[..]) {
            bad.push(golden_name(&cfg));
        }
    }
    bad
}
