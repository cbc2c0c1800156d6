//! Tapped-delay-line power delay profiles and their frequency responses.

use super::ChannelError;
use crate::iq::Sample;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;

/// NR numerology 0.
pub const SUBCARRIER_SPACING_HZ: f64 = 15e3;

const TDL_B_CSV: &str = include_str!("../../profiles/tdl-b.csv");

/// Tap delays and powers of a TDL profile.
#[derive(Debug, Clone, PartialEq)]
pub struct TdlProfile {
    /// Tap delays in seconds.
    pub delays: Vec<f64>,
    /// Linear tap powers, summing to one.
    pub powers: Vec<f64>,
    /// RMS delay spread in seconds.
    pub delay_spread: f64,
    /// Always 0; the channel is static within a slot.
    pub doppler: f64,
}

impl TdlProfile {
    /// Parses `delay_ns,power_db` rows (`#` comments and a header line are
    /// skipped), normalizes powers to unit sum and rescales delays so the
    /// RMS delay spread equals `delay_spread` seconds.
    pub fn from_csv(text: &str, delay_spread: f64) -> Result<Self, ChannelError> {
        let mut delays = Vec::new();
        let mut powers_db = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("delay") {
                continue;
            }
            let bad = || ChannelError::Profile(format!("line {}: `{line}`", i + 1));
            let (d, p) = line.split_once(',').ok_or_else(bad)?;
            let d: f64 = d.trim().parse().map_err(|_| bad())?;
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            if !(d >= 0.0) || !p.is_finite() {
                return Err(bad());
            }
            delays.push(d * 1e-9);
            powers_db.push(p);
        }
        if delays.is_empty() {
            return Err(ChannelError::Profile("no taps".into()));
        }
        let lin: Vec<f64> = powers_db.iter().map(|p| 10f64.powf(p / 10.0)).collect();
        let total: f64 = lin.iter().sum();
        let powers: Vec<f64> = lin.iter().map(|p| p / total).collect();
        let mut profile = Self { delays, powers, delay_spread: 0.0, doppler: 0.0 };
        let rms = profile.rms_delay_spread();
        if rms > 0.0 {
            let k = delay_spread / rms;
            profile.delays.iter_mut().for_each(|d| *d *= k);
        } else if delay_spread > 0.0 {
            return Err(ChannelError::Profile("single-delay profile cannot be given a delay spread".into()));
        }
        profile.delay_spread = profile.rms_delay_spread();
        Ok(profile)
    }

    /// The shipped TDL-B profile at the given RMS delay spread.
    pub fn tdl_b(delay_spread: f64) -> Self {
        Self::from_csv(TDL_B_CSV, delay_spread).expect("shipped profile parses")
    }

    /// One unit-power tap at zero delay (flat fading).
    pub fn single_tap() -> Self {
        Self { delays: vec![0.0], powers: vec![1.0], delay_spread: 0.0, doppler: 0.0 }
    }

    pub fn rms_delay_spread(&self) -> f64 {
        let mean: f64 = self.powers.iter().zip(&self.delays).map(|(p, d)| p * d).sum();
        let var: f64 = self.powers.iter().zip(&self.delays).map(|(p, d)| p * (d - mean).powi(2)).sum();
        var.max(0.0).sqrt()
    }

    /// `E[h(f + df) conj(h(f))] = sum_p p_p exp(-j 2 pi df tau_p)`.
    pub fn frequency_correlation(&self, df: f64) -> Sample {
        self.powers
            .iter()
            .zip(&self.delays)
            .map(|(&p, &t)| Sample::from_polar(p, -2.0 * PI * df * t))
            .sum()
    }
}

/// Tap-to-subcarrier phasors `exp(-j 2 pi f_n tau_p)` for one profile and
/// band, with `f_n = (n - N/2) * spacing`.
#[derive(Debug, Clone)]
pub struct FrequencyResponse {
    n_subcarriers: usize,
    amplitudes: Vec<f64>,
    // [n * taps + p]
    phasors: Vec<Sample>,
}

impl FrequencyResponse {
    pub fn new(profile: &TdlProfile, n_subcarriers: usize, spacing_hz: f64) -> Self {
        let taps = profile.delays.len();
        let mut phasors = Vec::with_capacity(n_subcarriers * taps);
        for n in 0..n_subcarriers {
            let f = (n as f64 - (n_subcarriers / 2) as f64) * spacing_hz;
            phasors.extend(profile.delays.iter().map(|&t| Sample::from_polar(1.0, -2.0 * PI * f * t)));
        }
        Self { n_subcarriers, amplitudes: profile.powers.iter().map(|p| p.sqrt()).collect(), phasors }
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }

    pub fn n_taps(&self) -> usize {
        self.amplitudes.len()
    }

    /// Draws one set of Rayleigh tap gains and writes `scale * h(n)` to
    /// `out[n * stride]` for every subcarrier.
    pub fn draw_into(&self, rng: &mut impl Rng, scale: f64, out: &mut [Sample], stride: usize) {
        let taps: Vec<Sample> = self
            .amplitudes
            .iter()
            .map(|&a| complex_gaussian(rng) * a)
            .collect();
        for (n, ph) in self.phasors.chunks_exact(taps.len()).enumerate() {
            let h: Sample = ph.iter().zip(&taps).map(|(e, a)| e * a).sum();
            out[n * stride] = h * scale;
        }
    }
}

/// Circular complex Gaussian with unit variance.
#[inline]
pub fn complex_gaussian(rng: &mut impl Rng) -> Sample {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Sample::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}
