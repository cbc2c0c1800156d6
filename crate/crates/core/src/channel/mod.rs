//! Large-scale pathloss, TDL small-scale fading and received-signal
//! synthesis for a cluster of RUs.

pub mod tdl;

pub use tdl::{complex_gaussian, FrequencyResponse, TdlProfile, SUBCARRIER_SPACING_HZ};

use crate::iq::{ResourceGrid, Sample, TopologyConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const BOLTZMANN: f64 = 1.380_649e-23;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("zero distance between RU {ru} and user {user}")]
    ZeroDistance { ru: usize, user: usize },
    #[error("bad profile: {0}")]
    Profile(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

/// Log-distance pathloss with log-normal shadowing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PathlossParams {
    /// Loss at the reference distance, dB.
    pub pl0_db: f64,
    /// Reference distance, m.
    pub d0_m: f64,
    pub exponent: f64,
    /// Shadowing standard deviation, dB.
    pub shadow_sigma_db: f64,
}

impl Default for PathlossParams {
    fn default() -> Self {
        Self { pl0_db: 15.3, d0_m: 1.0, exponent: 3.76, shadow_sigma_db: 8.0 }
    }
}

impl PathlossParams {
    /// Mean pathloss in dB at distance `d` metres.
    pub fn pathloss_db(&self, d: f64) -> f64 {
        self.pl0_db + 10.0 * self.exponent * (d / self.d0_m).log10()
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        if !(self.d0_m > 0.0) || !self.pl0_db.is_finite() || !self.exponent.is_finite() || !(self.shadow_sigma_db >= 0.0) {
            return Err(ChannelError::Parameter(format!("{self:?}")));
        }
        Ok(())
    }
}

pub type Position = [f64; 2];

fn distance(a: Position, b: Position) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// `beta[m][k] = 10^(-(PL(d_mk) + X_mk) / 10)` with independent shadowing
/// `X_mk ~ N(0, sigma^2)` dB.
pub fn pathloss_beta(
    rus: &[Position],
    users: &[Position],
    params: &PathlossParams,
    rng: &mut impl Rng,
) -> Result<Vec<Vec<f64>>, ChannelError> {
    params.validate()?;
    let shadow = Normal::new(0.0, params.shadow_sigma_db).expect("validated sigma");
    rus.iter()
        .enumerate()
        .map(|(m, &r)| {
            users
                .iter()
                .enumerate()
                .map(|(k, &u)| {
                    let d = distance(r, u);
                    if !(d > 0.0) {
                        return Err(ChannelError::ZeroDistance { ru: m, user: k });
                    }
                    let x = if params.shadow_sigma_db > 0.0 { shadow.sample(rng) } else { 0.0 };
                    Ok(10f64.powf(-(params.pathloss_db(d) + x) / 10.0))
                })
                .collect()
        })
        .collect()
}

/// Drop geometry: RUs and coordinated users uniform in a disc, interferers
/// uniform in the ring just outside it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeometryConfig {
    pub region_radius_m: f64,
    /// Minimum RU-to-user distance; users are redrawn until it holds.
    pub min_distance_m: f64,
    /// Outer radius of the interferer ring.
    pub interferer_radius_m: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self { region_radius_m: 50.0, min_distance_m: 5.0, interferer_radius_m: 100.0 }
    }
}

/// Node positions of one drop.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Layout {
    pub rus: Vec<Position>,
    pub users: Vec<Position>,
    pub interferers: Vec<Position>,
}

fn point_in_ring(rng: &mut impl Rng, r_in: f64, r_out: f64) -> Position {
    let r = (rng.random_range(r_in * r_in..=r_out * r_out)).sqrt();
    let phi = rng.random_range(0.0..std::f64::consts::TAU);
    [r * phi.cos(), r * phi.sin()]
}

fn draw_clear_of(
    rng: &mut impl Rng,
    rus: &[Position],
    min_distance: f64,
    r_in: f64,
    r_out: f64,
    count: usize,
) -> Result<Vec<Position>, ChannelError> {
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > 10_000 * count {
            return Err(ChannelError::Parameter("cannot satisfy the minimum RU distance".into()));
        }
        let p = point_in_ring(rng, r_in, r_out);
        if rus.iter().all(|&q| distance(p, q) >= min_distance && distance(p, q) > 0.0) {
            out.push(p);
        }
    }
    Ok(out)
}

impl Layout {
    pub fn random(topology: &TopologyConfig, geom: &GeometryConfig, rng: &mut impl Rng) -> Result<Self, ChannelError> {
        let r = geom.region_radius_m;
        if !(r > 0.0) || !(geom.min_distance_m >= 0.0) || geom.interferer_radius_m < r {
            return Err(ChannelError::Parameter(format!("{geom:?}")));
        }
        let rus: Vec<Position> = (0..topology.m_coor).map(|_| point_in_ring(rng, 0.0, r)).collect();
        let users = draw_clear_of(rng, &rus, geom.min_distance_m, 0.0, r, topology.k_coor)?;
        let interferers = draw_clear_of(rng, &rus, geom.min_distance_m, r, geom.interferer_radius_m, topology.k_int)?;
        Ok(Self { rus, users, interferers })
    }
}

/// Large-scale gains `beta[m][k]` for the coordinated users and the
/// interferers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LargeScale {
    pub beta: Vec<Vec<f64>>,
    pub beta_int: Vec<Vec<f64>>,
}

impl LargeScale {
    pub fn from_layout(layout: &Layout, params: &PathlossParams, rng: &mut impl Rng) -> Result<Self, ChannelError> {
        Ok(Self {
            beta: pathloss_beta(&layout.rus, &layout.users, params, rng)?,
            beta_int: pathloss_beta(&layout.rus, &layout.interferers, params, rng)?,
        })
    }

    /// All gains equal to one.
    pub fn unit(m_coor: usize, k_coor: usize, k_int: usize) -> Self {
        Self { beta: vec![vec![1.0; k_coor]; m_coor], beta_int: vec![vec![1.0; k_int]; m_coor] }
    }

    /// Mean received power per antenna at RU `m`, excluding noise.
    pub fn received_power(&self, m: usize) -> f64 {
        self.beta[m].iter().sum::<f64>() + self.beta_int.get(m).map_or(0.0, |b| b.iter().sum())
    }
}

/// Per-RE receiver noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Complex noise variance per antenna per RE.
    pub sigma_z_sq: f64,
}

impl NoiseConfig {
    pub fn new(sigma_z_sq: f64) -> Self {
        Self { sigma_z_sq }
    }

    /// Noise at the given TX-SNR for unit transmit power per RE.
    pub fn from_tx_snr_db(snr_db: f64) -> Self {
        Self { sigma_z_sq: 10f64.powf(-snr_db / 10.0) }
    }

    /// Thermal noise `k T B` in watts over one subcarrier.
    pub fn thermal(temperature_k: f64, bandwidth_hz: f64) -> Self {
        Self { sigma_z_sq: BOLTZMANN * temperature_k * bandwidth_hz }
    }
}

/// Frequency-domain channel of one slot. Doppler is zero, so each vector is
/// shared by all symbols of its subcarrier.
///
/// Vectors are stacked over RUs: receive dimension `d = m * n_r + r`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    n_subcarriers: usize,
    m_coor: usize,
    n_r: usize,
    // [k][n * dims + d]
    users: Vec<Vec<Sample>>,
    interferers: Vec<Vec<Sample>>,
}

impl ChannelRealization {
    /// Builds a realization from explicit per-user vectors laid out as
    /// `[n * dims + d]`.
    pub fn from_parts(
        n_subcarriers: usize,
        m_coor: usize,
        n_r: usize,
        users: Vec<Vec<Sample>>,
        interferers: Vec<Vec<Sample>>,
    ) -> Result<Self, ChannelError> {
        let len = n_subcarriers * m_coor * n_r;
        if users.iter().chain(&interferers).any(|g| g.len() != len) {
            return Err(ChannelError::Shape(format!("channel vectors must have {len} entries")));
        }
        Ok(Self { n_subcarriers, m_coor, n_r, users, interferers })
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }
    pub fn m_coor(&self) -> usize {
        self.m_coor
    }
    pub fn n_r(&self) -> usize {
        self.n_r
    }
    pub fn dims(&self) -> usize {
        self.m_coor * self.n_r
    }
    pub fn n_users(&self) -> usize {
        self.users.len()
    }
    pub fn n_interferers(&self) -> usize {
        self.interferers.len()
    }

    /// Stacked channel of coordinated user `k` on subcarrier `n`.
    pub fn user(&self, k: usize, n: usize) -> &[Sample] {
        let d = self.dims();
        &self.users[k][n * d..(n + 1) * d]
    }

    pub fn interferer(&self, j: usize, n: usize) -> &[Sample] {
        let d = self.dims();
        &self.interferers[j][n * d..(n + 1) * d]
    }
}

/// Draws `g = sqrt(beta) h` for every RU antenna, coordinated user and
/// interferer with independent Rayleigh taps.
pub fn realize_channel(
    response: &FrequencyResponse,
    topology: &TopologyConfig,
    large_scale: &LargeScale,
    seed: u64,
) -> Result<ChannelRealization, ChannelError> {
    let (m_coor, n_r) = (topology.m_coor, topology.n_r);
    if large_scale.beta.len() != m_coor
        || large_scale.beta.iter().any(|b| b.len() != topology.k_coor)
        || large_scale.beta_int.iter().any(|b| b.len() != topology.k_int)
        || (topology.k_int > 0 && large_scale.beta_int.len() != m_coor)
    {
        return Err(ChannelError::Shape("large-scale gains do not match the topology".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_sc = response.n_subcarriers();
    let dims = m_coor * n_r;
    let mut draw = |beta: &dyn Fn(usize) -> f64| {
        let mut g = vec![Sample::new(0.0, 0.0); n_sc * dims];
        for m in 0..m_coor {
            let scale = beta(m).sqrt();
            for r in 0..n_r {
                let d = m * n_r + r;
                response.draw_into(&mut rng, scale, &mut g[d..], dims);
            }
        }
        g
    };
    let users = (0..topology.k_coor).map(|k| draw(&|m| large_scale.beta[m][k])).collect();
    let interferers = (0..topology.k_int).map(|j| draw(&|m| large_scale.beta_int[m][j])).collect();
    Ok(ChannelRealization { n_subcarriers: n_sc, m_coor, n_r, users, interferers })
}

/// `y_m = sum_k g_mk x_k + sum_j g_I,mj x_I,j + z_m` on every RE; returns
/// one grid per RU with `n_r` antennas. Transmit grids have one antenna.
pub fn apply_channel(
    tx: &[ResourceGrid],
    interferers: &[ResourceGrid],
    realization: &ChannelRealization,
    noise: &NoiseConfig,
    seed: u64,
) -> Result<Vec<ResourceGrid>, ChannelError> {
    if tx.len() != realization.n_users() || interferers.len() != realization.n_interferers() {
        return Err(ChannelError::Shape(format!(
            "{} users and {} interferers for a channel with {} and {}",
            tx.len(),
            interferers.len(),
            realization.n_users(),
            realization.n_interferers()
        )));
    }
    let n_sc = realization.n_subcarriers();
    let first = tx.first().or(interferers.first()).ok_or_else(|| ChannelError::Shape("no transmitters".into()))?;
    let n_sym = first.n_symbols();
    if tx.iter().chain(interferers).any(|g| g.n_subcarriers() != n_sc || g.n_symbols() != n_sym || g.n_antennas() != 1) {
        return Err(ChannelError::Shape("transmit grids must be single-antenna and match the channel".into()));
    }
    if !(noise.sigma_z_sq >= 0.0) {
        return Err(ChannelError::Parameter(format!("noise variance {}", noise.sigma_z_sq)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise_std = noise.sigma_z_sq.sqrt();
    let n_r = realization.n_r();
    let mut out = Vec::with_capacity(realization.m_coor());
    for m in 0..realization.m_coor() {
        let mut grid = ResourceGrid::zeros(n_sc, n_sym, n_r).expect("valid shape");
        for r in 0..n_r {
            let d = m * n_r + r;
            for l in 0..n_sym {
                let col = grid.column_mut(r, l).expect("in range");
                for (n, y) in col.iter_mut().enumerate() {
                    let mut acc = Sample::new(0.0, 0.0);
                    for (k, x) in tx.iter().enumerate() {
                        acc += realization.user(k, n)[d] * x.get(n, l, 0);
                    }
                    for (j, x) in interferers.iter().enumerate() {
                        acc += realization.interferer(j, n)[d] * x.get(n, l, 0);
                    }
                    if noise_std > 0.0 {
                        acc += complex_gaussian(&mut rng) * noise_std;
                    }
                    *y = acc;
                }
            }
        }
        out.push(grid);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn random_grid(rng: &mut impl Rng, n_sc: usize) -> ResourceGrid {
        let data = (0..n_sc * 14).map(|_| complex_gaussian(rng)).collect();
        ResourceGrid::from_vec(n_sc, 14, 1, data).unwrap()
    }

    #[test]
    fn reference_distance() {
        let p = PathlossParams { shadow_sigma_db: 0.0, ..Default::default() };
        let b = pathloss_beta(&[[0.0, 0.0]], &[[1.0, 0.0]], &p, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!((b[0][0] - 10f64.powf(-1.53)).abs() < 1e-15);
    }

    #[test]
    fn doubling_distance() {
        let p = PathlossParams { shadow_sigma_db: 0.0, ..Default::default() };
        let b = pathloss_beta(&[[0.0, 0.0]], &[[10.0, 0.0], [20.0, 0.0]], &p, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let drop_db = 10.0 * (b[0][0] / b[0][1]).log10();
        assert!((drop_db - 11.32).abs() < 0.005, "{drop_db}");
    }

    #[test]
    fn zero_distance_rejected() {
        let e = pathloss_beta(&[[1.0, 1.0]], &[[1.0, 1.0]], &PathlossParams::default(), &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(e, Err(ChannelError::ZeroDistance { ru: 0, user: 0 }));
    }

    #[test]
    fn shadowing_mean() {
        let p = PathlossParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let users = vec![[30.0, 40.0]; 100_000];
        let b = pathloss_beta(&[[0.0, 0.0]], &users, &p, &mut rng).unwrap();
        let mean_db = b[0].iter().map(|x| 10.0 * x.log10()).sum::<f64>() / b[0].len() as f64;
        assert!((mean_db + p.pathloss_db(50.0)).abs() < 0.1, "{mean_db}");
    }

    #[test]
    fn layout_respects_geometry() {
        let topo = TopologyConfig { k_int: 3, ..Default::default() };
        let geom = GeometryConfig::default();
        let l = Layout::random(&topo, &geom, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!((l.rus.len(), l.users.len(), l.interferers.len()), (8, 2, 3));
        for u in &l.users {
            assert!(distance(*u, [0.0, 0.0]) <= geom.region_radius_m);
            assert!(l.rus.iter().all(|r| distance(*r, *u) >= geom.min_distance_m));
        }
        for i in &l.interferers {
            let d = distance(*i, [0.0, 0.0]);
            assert!(d >= geom.region_radius_m && d <= geom.interferer_radius_m);
        }
    }

    #[test]
    fn identity_channel_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = random_grid(&mut rng, 24);
        let ch = ChannelRealization::from_parts(24, 1, 1, vec![vec![Sample::new(1.0, 0.0); 24]], vec![]).unwrap();
        let y = apply_channel(&[x.clone()], &[], &ch, &NoiseConfig::new(0.0), 1).unwrap();
        assert_eq!(y[0], x);
    }

    #[test]
    fn noise_power() {
        let n_sc = 7200;
        let zero = ResourceGrid::zeros(n_sc, 14, 1).unwrap();
        let ch = ChannelRealization::from_parts(n_sc, 1, 1, vec![vec![Sample::new(1.0, 0.0); n_sc]], vec![]).unwrap();
        let y = apply_channel(&[zero], &[], &ch, &NoiseConfig::new(1.0), 7).unwrap();
        let p = y[0].mean_power();
        assert!((p - 1.0).abs() < 0.02, "{p}");
    }

    #[test]
    fn orthogonal_users_are_decoupled() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n_sc = 12;
        let (x1, x2) = (random_grid(&mut rng, n_sc), random_grid(&mut rng, n_sc));
        let e = |d: usize| (0..n_sc).flat_map(|_| (0..2).map(move |i| Sample::new(f64::from(u8::from(i == d)), 0.0))).collect::<Vec<_>>();
        let ch = ChannelRealization::from_parts(n_sc, 1, 2, vec![e(0), e(1)], vec![]).unwrap();
        let y = apply_channel(&[x1.clone(), x2.clone()], &[], &ch, &NoiseConfig::new(0.0), 0).unwrap();
        for l in 0..14 {
            assert_eq!(y[0].column(0, l).unwrap(), x1.column(0, l).unwrap());
            assert_eq!(y[0].column(1, l).unwrap(), x2.column(0, l).unwrap());
        }
    }

    #[test]
    fn linear_and_superposing() {
        let topo = TopologyConfig { m_coor: 3, n_r: 2, k_serv: 2, k_coor: 2, k_int: 1 };
        let fr = FrequencyResponse::new(&TdlProfile::tdl_b(30e-9), 24, SUBCARRIER_SPACING_HZ);
        let ch = realize_channel(&fr, &topo, &LargeScale::unit(3, 2, 1), 9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let (a, b, i) = (random_grid(&mut rng, 24), random_grid(&mut rng, 24), random_grid(&mut rng, 24));
        let zero = ResourceGrid::zeros(24, 14, 1).unwrap();
        let quiet = NoiseConfig::new(0.0);
        let full = apply_channel(&[a.clone(), b.clone()], &[i.clone()], &ch, &quiet, 0).unwrap();
        let only_a = apply_channel(&[a.clone(), zero.clone()], &[zero.clone()], &ch, &quiet, 0).unwrap();
        let only_b = apply_channel(&[zero.clone(), b.clone()], &[zero.clone()], &ch, &quiet, 0).unwrap();
        let only_i = apply_channel(&[zero.clone(), zero.clone()], &[i.clone()], &ch, &quiet, 0).unwrap();
        let mut scaled_a = a.clone();
        scaled_a.scale(-2.5);
        let sa = apply_channel(&[scaled_a, zero.clone()], &[zero], &ch, &quiet, 0).unwrap();
        for m in 0..3 {
            for ((f, (x, y)), z) in full[m].data().iter().zip(only_a[m].data().iter().zip(only_b[m].data())).zip(only_i[m].data()) {
                assert!((f - (x + y + z)).norm() < 1e-12);
            }
            for (s, x) in sa[m].data().iter().zip(only_a[m].data()) {
                assert!((s - x * -2.5).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn reproducible() {
        let topo = TopologyConfig::default();
        let fr = FrequencyResponse::new(&TdlProfile::tdl_b(30e-9), 36, SUBCARRIER_SPACING_HZ);
        let ls = LargeScale::unit(8, 2, 0);
        let a = realize_channel(&fr, &topo, &ls, 11).unwrap();
        assert_eq!(a, realize_channel(&fr, &topo, &ls, 11).unwrap());
        assert_ne!(a, realize_channel(&fr, &topo, &ls, 12).unwrap());
        let x = ResourceGrid::zeros(36, 14, 1).unwrap();
        let n = NoiseConfig::new(0.3);
        let y1 = apply_channel(&[x.clone(), x.clone()], &[], &a, &n, 5).unwrap();
        assert_eq!(y1, apply_channel(&[x.clone(), x], &[], &a, &n, 5).unwrap());
    }

    #[test]
    fn realization_power_carries_beta() {
        let topo = TopologyConfig { m_coor: 2, n_r: 1, k_serv: 1, k_coor: 1, k_int: 0 };
        let fr = FrequencyResponse::new(&TdlProfile::tdl_b(30e-9), 12, SUBCARRIER_SPACING_HZ);
        let ls = LargeScale { beta: vec![vec![1.0], vec![0.01]], beta_int: vec![vec![], vec![]] };
        let mut p = [0.0; 2];
        for s in 0..4000 {
            let ch = realize_channel(&fr, &topo, &ls, s).unwrap();
            for (m, acc) in p.iter_mut().enumerate() {
                *acc += ch.user(0, 3)[m].norm_sqr() / 4000.0;
            }
        }
        assert!((p[0] - 1.0).abs() < 0.07 && (p[1] / 0.01 - 1.0).abs() < 0.07, "{p:?}");
    }

    #[test]
    fn shape_errors() {
        let ch = ChannelRealization::from_parts(12, 1, 1, vec![vec![Sample::new(1.0, 0.0); 12]], vec![]).unwrap();
        let g = ResourceGrid::zeros(24, 14, 1).unwrap();
        assert!(apply_channel(&[g], &[], &ch, &NoiseConfig::new(0.0), 0).is_err());
        assert!(ChannelRealization::from_parts(12, 2, 1, vec![vec![Sample::new(1.0, 0.0); 12]], vec![]).is_err());
    }
}
