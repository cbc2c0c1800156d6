//! DU-side joint MMSE combining over the stacked RU antennas, equalization
//! and post-combining noise bookkeeping for the demapper.

use crate::channel::{ChannelRealization, NoiseConfig};
use crate::iq::{ResourceGrid, Sample};
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReceiverError {
    #[error("covariance is singular at subcarrier {0}; a positive noise variance is required")]
    RegularizationRequired(usize),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("reference has zero power")]
    ZeroPower,
}

/// MMSE weights per subcarrier and served user. The channel is static over
/// the slot, so one weight vector serves every symbol of a subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinerWeights {
    n_subcarriers: usize,
    dims: usize,
    n_users: usize,
    // [(n * n_users + k) * dims + d]
    w: Vec<Sample>,
}

impl CombinerWeights {
    pub fn n_users(&self) -> usize {
        self.n_users
    }
    pub fn dims(&self) -> usize {
        self.dims
    }
    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }

    pub fn weight(&self, k: usize, n: usize) -> &[Sample] {
        let i = (n * self.n_users + k) * self.dims;
        &self.w[i..i + self.dims]
    }
}

/// `R = sum_k g_k g_k^H + sum_j g_I,j g_I,j^H + sigma^2 I` on subcarrier `n`.
pub fn covariance(realization: &ChannelRealization, noise: &NoiseConfig, n: usize) -> DMatrix<Sample> {
    let dims = realization.dims();
    let mut r = DMatrix::<Sample>::from_diagonal_element(dims, dims, Sample::new(noise.sigma_z_sq, 0.0));
    let users = (0..realization.n_users()).map(|k| realization.user(k, n));
    let interferers = (0..realization.n_interferers()).map(|j| realization.interferer(j, n));
    for g in users.chain(interferers) {
        for i in 0..dims {
            for j in 0..dims {
                r[(i, j)] += g[i] * g[j].conj();
            }
        }
    }
    r
}

const PIVOT_TOLERANCE: f64 = 1e-13;

/// Solves `R w_k = g_k` for the first `served` coordinated users on every
/// subcarrier with a Cholesky factorization of `R`.
pub fn mmse_weights(
    realization: &ChannelRealization,
    noise: &NoiseConfig,
    served: usize,
) -> Result<CombinerWeights, ReceiverError> {
    if served > realization.n_users() {
        return Err(ReceiverError::Shape(format!(
            "{served} served users but only {} coordinated",
            realization.n_users()
        )));
    }
    let n_sc = realization.n_subcarriers();
    let dims = realization.dims();
    let mut w = Vec::with_capacity(n_sc * served * dims);
    for n in 0..n_sc {
        let r = covariance(realization, noise, n);
        let scale = (0..dims).map(|i| r[(i, i)].re).fold(0.0, f64::max);
        let chol = r.cholesky().ok_or(ReceiverError::RegularizationRequired(n))?;
        if noise.sigma_z_sq == 0.0 {
            // rounding can leave tiny positive pivots on a singular matrix
            let min_pivot = (0..dims).map(|i| chol.l_dirty()[(i, i)].norm_sqr()).fold(f64::INFINITY, f64::min);
            if !(min_pivot > PIVOT_TOLERANCE * scale) {
                return Err(ReceiverError::RegularizationRequired(n));
            }
        }
        for k in 0..served {
            let g = DVector::from_column_slice(realization.user(k, n));
            w.extend(chol.solve(&g).iter());
        }
    }
    Ok(CombinerWeights { n_subcarriers: n_sc, dims, n_users: served, w })
}

/// Per-receive-dimension Bussgang model of the fronthaul: the DU sees
/// `alpha_d y_d + delta_d` with `E|delta_d|^2 = distortion_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizationModel {
    pub alpha: Vec<f64>,
    pub distortion: Vec<f64>,
}

impl QuantizationModel {
    /// Transparent fronthaul.
    pub fn none(dims: usize) -> Self {
        Self { alpha: vec![1.0; dims], distortion: vec![0.0; dims] }
    }
}

/// Combiner output for one served user.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualizedStream {
    n_subcarriers: usize,
    n_symbols: usize,
    // [l * n_subcarriers + n]
    x_hat: Vec<Sample>,
    eff_gain: Vec<Sample>,
    eff_noise_var: Vec<f64>,
}

impl EqualizedStream {
    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }
    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    /// `w^H y` on RE `(n, l)`.
    pub fn x_hat(&self, n: usize, l: usize) -> Sample {
        self.x_hat[l * self.n_subcarriers + n]
    }

    /// Effective gain `sum_d alpha_d conj(w_d) g_d` on subcarrier `n`
    /// (`w^H g` for a transparent fronthaul).
    pub fn eff_gain(&self, n: usize) -> Sample {
        self.eff_gain[n]
    }

    /// Interference, noise and quantization distortion power at the
    /// combiner output on subcarrier `n`.
    pub fn eff_noise_var(&self, n: usize) -> f64 {
        self.eff_noise_var[n]
    }

    /// Unbiased symbol estimate `x_hat / eff_gain`.
    pub fn normalized(&self, n: usize, l: usize) -> Sample {
        self.x_hat(n, l) / self.eff_gain[n]
    }

    /// Noise variance of [`EqualizedStream::normalized`].
    pub fn normalized_noise_var(&self, n: usize) -> f64 {
        (self.eff_noise_var[n] / self.eff_gain[n].norm_sqr()).max(f64::MIN_POSITIVE)
    }
}

fn weighted_inner(w: &[Sample], alpha: &[f64], g: &[Sample]) -> Sample {
    w.iter().zip(alpha).zip(g).map(|((w, a), g)| w.conj() * g * *a).sum()
}

/// `x_hat_k = w_k^H y_hat` with `y_hat` stacked over the RU grids, plus the
/// effective gain and noise of every served user.
pub fn equalize(
    weights: &CombinerWeights,
    received: &[ResourceGrid],
    realization: &ChannelRealization,
    noise: &NoiseConfig,
    quantization: &QuantizationModel,
) -> Result<Vec<EqualizedStream>, ReceiverError> {
    let dims = realization.dims();
    let n_r = realization.n_r();
    let n_sc = realization.n_subcarriers();
    if weights.dims != dims || weights.n_subcarriers != n_sc {
        return Err(ReceiverError::Shape("weights do not match the channel".into()));
    }
    if quantization.alpha.len() != dims || quantization.distortion.len() != dims {
        return Err(ReceiverError::Shape("quantization model does not match the channel".into()));
    }
    if received.len() != realization.m_coor()
        || received.iter().any(|g| g.n_subcarriers() != n_sc || g.n_antennas() != n_r)
    {
        return Err(ReceiverError::Shape("received grids do not match the channel".into()));
    }
    let n_sym = received.first().map_or(0, |g| g.n_symbols());
    if received.iter().any(|g| g.n_symbols() != n_sym) {
        return Err(ReceiverError::Shape("received grids differ in length".into()));
    }
    let alpha = &quantization.alpha;
    let mut out = Vec::with_capacity(weights.n_users);
    for k in 0..weights.n_users {
        let mut eff_gain = Vec::with_capacity(n_sc);
        let mut eff_noise_var = Vec::with_capacity(n_sc);
        for n in 0..n_sc {
            let w = weights.weight(k, n);
            eff_gain.push(weighted_inner(w, alpha, realization.user(k, n)));
            let mut v = 0.0;
            for j in (0..realization.n_users()).filter(|&j| j != k) {
                v += weighted_inner(w, alpha, realization.user(j, n)).norm_sqr();
            }
            for j in 0..realization.n_interferers() {
                v += weighted_inner(w, alpha, realization.interferer(j, n)).norm_sqr();
            }
            for d in 0..dims {
                let wd = w[d].norm_sqr();
                v += wd * (alpha[d] * alpha[d] * noise.sigma_z_sq + quantization.distortion[d]);
            }
            eff_noise_var.push(v.max(f64::MIN_POSITIVE));
        }
        let mut x_hat = vec![Sample::new(0.0, 0.0); n_sc * n_sym];
        for (m, grid) in received.iter().enumerate() {
            for r in 0..n_r {
                let d = m * n_r + r;
                for l in 0..n_sym {
                    let col = grid.column(r, l).expect("checked shape");
                    let row = &mut x_hat[l * n_sc..(l + 1) * n_sc];
                    for (n, (acc, y)) in row.iter_mut().zip(col).enumerate() {
                        *acc += weights.weight(k, n)[d].conj() * y;
                    }
                }
            }
        }
        out.push(EqualizedStream { n_subcarriers: n_sc, n_symbols: n_sym, x_hat, eff_gain, eff_noise_var });
    }
    Ok(out)
}

/// `100 sqrt(sum |x_hat / gain - x|^2 / sum |x|^2)` over every RE of a
/// single-antenna reference grid.
pub fn evm(equalized: &EqualizedStream, reference: &ResourceGrid) -> Result<f64, ReceiverError> {
    if reference.n_subcarriers() != equalized.n_subcarriers
        || reference.n_symbols() != equalized.n_symbols
        || reference.n_antennas() != 1
    {
        return Err(ReceiverError::Shape("reference does not match the stream".into()));
    }
    let mut err = 0.0;
    let mut power = 0.0;
    for l in 0..equalized.n_symbols {
        for n in 0..equalized.n_subcarriers {
            let x = reference.get(n, l, 0);
            err += (equalized.normalized(n, l) - x).norm_sqr();
            power += x.norm_sqr();
        }
    }
    if power == 0.0 {
        return Err(ReceiverError::ZeroPower);
    }
    Ok(100.0 * (err / power).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{apply_channel, complex_gaussian, realize_channel, FrequencyResponse, LargeScale, TdlProfile, SUBCARRIER_SPACING_HZ};
    use crate::iq::TopologyConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Flat single-antenna channel over one PRB.
    fn scalar(g: Sample) -> ChannelRealization {
        ChannelRealization::from_parts(12, 1, 1, vec![vec![g; 12]], vec![]).unwrap()
    }

    fn random_grid(rng: &mut ChaCha8Rng, n_sc: usize) -> ResourceGrid {
        ResourceGrid::from_vec(n_sc, 14, 1, (0..n_sc * 14).map(|_| complex_gaussian(rng)).collect()).unwrap()
    }

    fn tdl(topo: &TopologyConfig, n_sc: usize, seed: u64) -> ChannelRealization {
        let fr = FrequencyResponse::new(&TdlProfile::tdl_b(30e-9), n_sc, SUBCARRIER_SPACING_HZ);
        realize_channel(&fr, topo, &LargeScale::unit(topo.m_coor, topo.k_coor, topo.k_int), seed).unwrap()
    }

    #[test]
    fn scalar_closed_form() {
        let g = Sample::new(0.3, -1.2);
        for s2 in [0.01, 0.5, 3.0] {
            let w = mmse_weights(&scalar(g), &NoiseConfig::new(s2), 1).unwrap();
            let expect = g / (g.norm_sqr() + s2);
            assert!((w.weight(0, 0)[0] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn residual_is_tiny() {
        let topo = TopologyConfig { k_int: 2, ..Default::default() };
        let ch = tdl(&topo, 24, 1);
        let noise = NoiseConfig::new(0.05);
        let w = mmse_weights(&ch, &noise, 2).unwrap();
        for n in 0..24 {
            let r = covariance(&ch, &noise, n);
            for k in 0..2 {
                let g = DVector::from_column_slice(ch.user(k, n));
                let res = &r * DVector::from_column_slice(w.weight(k, n)) - &g;
                assert!(res.norm() / g.norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn matched_filter_limit() {
        let topo = TopologyConfig::default();
        let ch = tdl(&topo, 4, 2);
        let w = mmse_weights(&ch, &NoiseConfig::new(1e8), 1).unwrap();
        let (a, g) = (w.weight(0, 2), ch.user(0, 2));
        let dot: Sample = a.iter().zip(g).map(|(x, y)| x.conj() * y).sum();
        let na = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let ng = g.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        assert!(dot.norm() / (na * ng) >= 1.0 - 1e-6);
    }

    #[test]
    fn orthogonal_users() {
        let e = |d: usize| vec![Sample::new(f64::from(u8::from(d == 0)), 0.0), Sample::new(f64::from(u8::from(d == 1)), 0.0)];
        let ch = ChannelRealization::from_parts(1, 1, 2, vec![e(0), e(1)], vec![]).unwrap();
        let w = mmse_weights(&ch, &NoiseConfig::new(1.0), 2).unwrap();
        for k in 0..2 {
            let other = ch.user(1 - k, 0);
            let cross: Sample = w.weight(k, 0).iter().zip(other).map(|(a, b)| a.conj() * b).sum();
            assert_eq!(cross.norm(), 0.0);
        }
    }

    #[test]
    fn singular_without_noise() {
        let topo = TopologyConfig::default();
        let ch = tdl(&topo, 2, 3);
        assert_eq!(mmse_weights(&ch, &NoiseConfig::new(0.0), 1), Err(ReceiverError::RegularizationRequired(0)));
    }

    #[test]
    fn shrinkage_on_identity_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random_grid(&mut rng, 12);
        let ch = scalar(Sample::new(1.0, 0.0));
        let noise = NoiseConfig::new(0.25);
        let w = mmse_weights(&ch, &noise, 1).unwrap();
        let y = apply_channel(&[x.clone()], &[], &ch, &NoiseConfig::new(0.0), 0).unwrap();
        let eq = equalize(&w, &y, &ch, &noise, &QuantizationModel::none(1)).unwrap();
        for l in 0..14 {
            for n in 0..12 {
                assert!((eq[0].x_hat(n, l) - x.get(n, l, 0) * 0.8).norm() < 1e-12);
            }
        }
        assert!((eq[0].eff_gain(0).re - 0.8).abs() < 1e-12);
    }

    #[test]
    fn evm_vanishes_at_high_snr() {
        let topo = TopologyConfig::default();
        let n_sc = 24;
        let ch = tdl(&topo, n_sc, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let tx = [random_grid(&mut rng, n_sc), random_grid(&mut rng, n_sc)];
        let mut last = f64::INFINITY;
        for snr in [10.0, 30.0, 50.0, 70.0] {
            let noise = NoiseConfig::from_tx_snr_db(snr);
            let y = apply_channel(&tx, &[], &ch, &noise, 7).unwrap();
            let w = mmse_weights(&ch, &noise, 1).unwrap();
            let eq = equalize(&w, &y, &ch, &noise, &QuantizationModel::none(8)).unwrap();
            let e = evm(&eq[0], &tx[0]).unwrap();
            assert!(e < last, "{e} at {snr}");
            last = e;
        }
        assert!(last < 0.1, "{last}");
    }

    #[test]
    fn evm_definition() {
        let ch = scalar(Sample::new(1.0, 0.0));
        let x = ResourceGrid::from_vec(12, 14, 1, vec![Sample::new(1.0, 0.0); 12 * 14]).unwrap();
        let w = mmse_weights(&ch, &NoiseConfig::new(1e-300), 1).unwrap();
        let mut y = x.clone();
        let eq0 = equalize(&w, &[y.clone()], &ch, &NoiseConfig::new(0.0), &QuantizationModel::none(1)).unwrap();
        assert!(evm(&eq0[0], &x).unwrap() < 1e-9);
        y.data_mut().iter_mut().for_each(|v| *v += Sample::new(0.0, 0.1));
        let eq1 = equalize(&w, &[y], &ch, &NoiseConfig::new(0.0), &QuantizationModel::none(1)).unwrap();
        assert!((evm(&eq1[0], &x).unwrap() - 10.0).abs() < 1e-6);
        let zero = ResourceGrid::zeros(12, 14, 1).unwrap();
        assert_eq!(evm(&eq1[0], &zero), Err(ReceiverError::ZeroPower));
    }

    #[test]
    fn distortion_raises_noise() {
        let topo = TopologyConfig::default();
        let ch = tdl(&topo, 12, 8);
        let noise = NoiseConfig::new(0.1);
        let w = mmse_weights(&ch, &noise, 1).unwrap();
        let y = apply_channel(&[ResourceGrid::zeros(12, 14, 1).unwrap(), ResourceGrid::zeros(12, 14, 1).unwrap()], &[], &ch, &noise, 1).unwrap();
        let clean = equalize(&w, &y, &ch, &noise, &QuantizationModel::none(8)).unwrap();
        let q = QuantizationModel { alpha: vec![0.95; 8], distortion: vec![0.02; 8] };
        let dirty = equalize(&w, &y, &ch, &noise, &q).unwrap();
        for n in 0..12 {
            assert!(dirty[0].normalized_noise_var(n) > clean[0].normalized_noise_var(n));
        }
    }
}
