use super::{drop_seed, fronthaul, trial_seed, SimConfig, SimError};
use crate::channel::{
    apply_channel, realize_channel, FrequencyResponse, LargeScale, Layout, NoiseConfig, TdlProfile,
    SUBCARRIER_SPACING_HZ,
};
use crate::compression::{optimize_delta, CompressionConfig, CompressionMethod};
use crate::iq::{ResourceGrid, Sample, SUBCARRIERS_PER_PRB, SYMBOLS_PER_SLOT};
use crate::phy::{CodeBank, Constellation, FecPlan, McsConfig, Modulation, TransportBlock};
use crate::receiver::{equalize, mmse_weights};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Reference-signal symbols, taken in this order when a slot has fewer than
/// 14 data symbols.
const REFERENCE_SYMBOL_ORDER: [usize; SYMBOLS_PER_SLOT] = [2, 11, 7, 4, 9, 0, 13, 5, 3, 10, 1, 12, 6, 8];

/// Everything about a sweep that does not change between trials: the MCS
/// plan, the drop, the resource mapping and the resolved codec.
#[derive(Debug, Clone)]
pub struct SimContext {
    pub config: SimConfig,
    pub mcs: McsConfig,
    pub plan: FecPlan<'static>,
    /// Codec with the uniform step resolved.
    pub codec: CompressionConfig,
    pub layout: Layout,
    pub large_scale: LargeScale,
    response: FrequencyResponse,
    constellation: Constellation,
    qpsk: Constellation,
    /// `(subcarrier, symbol)` of every RE that carries the codeword.
    used_res: Vec<(usize, usize)>,
    reference_symbols: Vec<usize>,
    target_power: f64,
}

/// Sweep-level facts written next to the CSV.
#[derive(Debug, Clone, Serialize)]
pub struct SimMetadata {
    pub codec: String,
    pub m_bits: u8,
    pub uniform_step: Option<f64>,
    pub modulation: String,
    pub code_rate: f64,
    pub configured_tbs: usize,
    pub simulated_tbs: usize,
    pub tbs_scale: f64,
    pub used_res: usize,
    pub coded_rate: f64,
    pub mother_code_rate: f64,
    pub master_seed: u64,
    pub agc_backoff_db: f64,
    pub placement: String,
    pub ru_positions_m: Vec<[f64; 2]>,
    pub user_positions_m: Vec<[f64; 2]>,
    pub beta_db: Vec<Vec<f64>>,
    pub demapper_noise: String,
    pub reported_user: usize,
}

impl SimContext {
    pub fn new(config: &SimConfig) -> Result<Self, SimError> {
        config.validate()?;
        let mcs = config.mcs.resolve()?;
        let plan = CodeBank::builtin().plan(&mcs)?;
        let delay_spread = config.delay_spread_ns * 1e-9;
        let profile = match &config.profile {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
                TdlProfile::from_csv(&text, delay_spread).map_err(|e| SimError::Config(e.to_string()))?
            }
            None => TdlProfile::tdl_b(delay_spread),
        };
        let n_sc = SUBCARRIERS_PER_PRB * mcs.n_prb;
        let response = FrequencyResponse::new(&profile, n_sc, SUBCARRIER_SPACING_HZ);

        let mut drop_rng = ChaCha8Rng::seed_from_u64(drop_seed(config.master_seed));
        let layout = Layout::random(&config.topology, &config.geometry, &mut drop_rng)
            .map_err(|e| SimError::Config(e.to_string()))?;
        let large_scale = LargeScale::from_layout(&layout, &config.pathloss, &mut drop_rng)?;

        let target_power = 10f64.powf(-config.agc_backoff_db / 10.0);
        let mut codec = config.codec;
        if codec.method == CompressionMethod::Uniform && codec.delta.is_none() {
            codec.delta = Some(optimize_delta(codec.m_bits, target_power)?);
        }

        let reference_symbols: Vec<usize> =
            REFERENCE_SYMBOL_ORDER[..SYMBOLS_PER_SLOT - mcs.n_data_symbols].to_vec();
        let data_res: Vec<(usize, usize)> = (0..SYMBOLS_PER_SLOT)
            .filter(|l| !reference_symbols.contains(l))
            .flat_map(|l| (0..n_sc).map(move |n| (n, l)))
            .collect();
        debug_assert_eq!(data_res.len(), mcs.data_res());
        // spread a shortened allocation evenly over the data REs
        let used_res = (0..plan.used_res).map(|i| data_res[i * data_res.len() / plan.used_res]).collect();

        Ok(Self {
            config: config.clone(),
            mcs,
            plan,
            codec,
            layout,
            large_scale,
            response,
            constellation: Constellation::new(mcs.modulation),
            qpsk: Constellation::new(Modulation::Qpsk),
            used_res,
            reference_symbols,
            target_power,
        })
    }

    pub fn n_subcarriers(&self) -> usize {
        self.response.n_subcarriers()
    }

    pub fn metadata(&self) -> SimMetadata {
        SimMetadata {
            codec: self.codec.method.as_str().into(),
            m_bits: self.codec.m_bits,
            uniform_step: self.codec.delta.filter(|_| self.codec.method == CompressionMethod::Uniform),
            modulation: self.mcs.modulation.to_string(),
            code_rate: self.mcs.code_rate.value(),
            configured_tbs: self.mcs.tbs,
            simulated_tbs: self.plan.tbs,
            tbs_scale: self.plan.tbs_scale,
            used_res: self.plan.used_res,
            coded_rate: self.plan.coded_rate(),
            mother_code_rate: self.plan.nominal.rate(),
            master_seed: self.config.master_seed,
            agc_backoff_db: self.config.agc_backoff_db,
            placement: format!(
                "uniform in a {} m disc, one drop per sweep, min RU distance {} m",
                self.config.geometry.region_radius_m, self.config.geometry.min_distance_m
            ),
            ru_positions_m: self.layout.rus.clone(),
            user_positions_m: self.layout.users.clone(),
            beta_db: self
                .large_scale
                .beta
                .iter()
                .map(|row| row.iter().map(|b| 10.0 * b.log10()).collect())
                .collect(),
            demapper_noise: "combiner noise + interference + per-slot Bussgang distortion".into(),
            reported_user: 0,
        }
    }

    fn random_point(c: &Constellation, rng: &mut impl Rng) -> Sample {
        let qm = c.modulation().bits_per_symbol();
        let bits: Vec<u8> = (0..qm).map(|_| rng.random_range(0..2u8)).collect();
        c.modulate(&bits).expect("whole symbol")[0]
    }

    /// A slot of random symbols: QPSK on reference symbols, the MCS
    /// constellation elsewhere.
    fn filler_grid(&self, rng: &mut impl Rng) -> ResourceGrid {
        let n_sc = self.n_subcarriers();
        let mut g = ResourceGrid::zeros(n_sc, SYMBOLS_PER_SLOT, 1).expect("valid shape");
        for l in 0..SYMBOLS_PER_SLOT {
            let c = if self.reference_symbols.contains(&l) { &self.qpsk } else { &self.constellation };
            for v in g.column_mut(0, l).expect("in range") {
                *v = Self::random_point(c, rng);
            }
        }
        g
    }

    /// Per-RU fixed gains that put the long-term mean power at the AGC target.
    pub fn agc_gains(&self, noise: &NoiseConfig) -> Vec<f64> {
        (0..self.config.topology.m_coor)
            .map(|m| (self.target_power / (self.large_scale.received_power(m) + noise.sigma_z_sq)).sqrt())
            .collect()
    }

    /// One transport block of the served user at SNR point `snr_index`.
    pub fn run_trial(&self, snr_index: usize, trial_index: u64) -> Result<bool, SimError> {
        let snr_db = *self
            .config
            .snr_points
            .get(snr_index)
            .ok_or_else(|| SimError::Config(format!("no SNR point {snr_index}")))?;
        self.run_trial_at(snr_db, trial_seed(self.config.master_seed, snr_index, trial_index))
    }

    /// One transport block at an explicit TX-SNR and seed.
    pub fn run_trial_at(&self, snr_db: f64, seed: u64) -> Result<bool, SimError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let topo = &self.config.topology;

        let tb = TransportBlock::random(self.plan.tbs, &mut rng);
        let bits = self.plan.encode(&tb)?;
        let symbols = self.constellation.modulate(&bits).map_err(SimError::Runtime)?;
        let mut tx: Vec<ResourceGrid> = (0..topo.k_coor).map(|_| self.filler_grid(&mut rng)).collect();
        for (&(n, l), &s) in self.used_res.iter().zip(&symbols) {
            tx[0].set(n, l, 0, s);
        }
        let interferers: Vec<ResourceGrid> = (0..topo.k_int)
            .map(|_| {
                let mut g = ResourceGrid::zeros(self.n_subcarriers(), SYMBOLS_PER_SLOT, 1).expect("valid shape");
                g.data_mut().iter_mut().for_each(|v| *v = Self::random_point(&self.qpsk, &mut rng));
                g
            })
            .collect();

        let channel_seed = rng.next_u64();
        let noise_seed = rng.next_u64();
        let noise = NoiseConfig::from_tx_snr_db(snr_db);
        let channel = realize_channel(&self.response, topo, &self.large_scale, channel_seed)?;
        let mut rx = apply_channel(&tx, &interferers, &channel, &noise, noise_seed)?;

        let quantization = fronthaul::transport(&mut rx, &self.agc_gains(&noise), &self.codec)?;

        let weights = mmse_weights(&channel, &noise, 1)?;
        let stream = &equalize(&weights, &rx, &channel, &noise, &quantization)?[0];
        let (eq, var): (Vec<Sample>, Vec<f64>) = self
            .used_res
            .iter()
            .map(|&(n, l)| (stream.normalized(n, l), stream.normalized_noise_var(n)))
            .unzip();
        let llrs = self.constellation.soft_demap(&eq, &var);
        let (decoded, ok) = self.plan.decode(&llrs)?;
        Ok(ok && decoded == tb)
    }
}

/// Convenience wrapper: builds the context and runs one trial.
pub fn run_trial(config: &SimConfig, snr_index: usize, trial_index: u64) -> Result<bool, SimError> {
    SimContext::new(config)?.run_trial(snr_index, trial_index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compression::CompressionMethod;

    fn cfg(codec: CompressionConfig, mcs: usize, snr: f64) -> SimConfig {
        SimConfig::new(codec, mcs, vec![snr])
    }

    #[test]
    fn noiseless_loopback_every_mcs() {
        for mcs in 1..=4 {
            let ctx = SimContext::new(&cfg(CompressionConfig::none(), mcs, 150.0)).unwrap();
            for t in 0..2 {
                assert!(ctx.run_trial(0, t).unwrap(), "mcs {mcs} trial {t}");
            }
        }
    }

    #[test]
    fn deterministic() {
        let ctx = SimContext::new(&cfg(CompressionConfig::new(CompressionMethod::Bfp, 4), 2, 75.0)).unwrap();
        for t in 0..4 {
            assert_eq!(ctx.run_trial(0, t).unwrap(), ctx.run_trial(0, t).unwrap());
        }
    }

    #[test]
    fn sixteen_bit_bfp_is_transparent() {
        let none = SimContext::new(&cfg(CompressionConfig::none(), 2, 70.0)).unwrap();
        let bfp = SimContext::new(&cfg(CompressionConfig::new(CompressionMethod::Bfp, 16), 2, 70.0)).unwrap();
        for t in 0..6 {
            assert_eq!(none.run_trial(0, t).unwrap(), bfp.run_trial(0, t).unwrap(), "trial {t}");
        }
    }

    #[test]
    fn reference_symbols_excluded() {
        let ctx = SimContext::new(&cfg(CompressionConfig::none(), 1, 0.0)).unwrap();
        assert_eq!(ctx.reference_symbols, vec![2, 11]);
        assert!(ctx.used_res.iter().all(|(_, l)| *l != 2 && *l != 11));
        assert_eq!(ctx.used_res.len(), ctx.plan.used_res);
    }

    #[test]
    fn uniform_step_is_resolved() {
        let ctx = SimContext::new(&cfg(CompressionConfig::new(CompressionMethod::Uniform, 2), 1, 0.0)).unwrap();
        assert!(ctx.codec.delta.unwrap() > 0.0);
        assert!(ctx.metadata().uniform_step.is_some());
    }
}
