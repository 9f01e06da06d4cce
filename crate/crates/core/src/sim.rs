//! Monte Carlo harness: evolves the true channel over coherence blocks,
//! simulates the two pilots of every block, runs the selected estimator and
//! accumulates NMSE and SE statistics.
//!
//! Every trial owns a set of named random substreams derived from the master
//! seed and the trial index, so schemes sharing a seed see the same channel
//! trajectory and the same noise, and a trial gives identical results whether
//! it runs alone or inside a batch.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, PI};
use std::ops::Range;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    build_geometry, complex_normal, evolve_state, synthesize_g_m, ChannelState, DynamicsParams, ItsGeometry,
    NlosCorrelation, StaticChannel,
};
use crate::control::{dft_codebook, exploratory_select, myopic_select, se_max_config, spectral_efficiency, Codebook, PilotConfigPair};
use crate::error::{Result, TrackError};
use crate::estimator::{map_estimate_with, MapSettings, MlSearch, ObservationContext, PhiGrid};
use crate::priors::{build_priors, draw_mismatch, penalty_weights, MismatchKind, MismatchRegime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// MAP tracking with the two best-aligned codewords.
    MapMyopic,
    /// MAP tracking with one aligned and one random in-interval codeword.
    MapExploratory,
    /// Per-block ML estimate without priors, myopic codewords.
    MlMyopic,
    /// Genie reference: the estimate is the true channel.
    PerfectCsi,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::MapMyopic, Scheme::MapExploratory, Scheme::MlMyopic, Scheme::PerfectCsi];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::MapMyopic => "map_myopic",
            Scheme::MapExploratory => "map_exploratory",
            Scheme::MlMyopic => "ml_myopic",
            Scheme::PerfectCsi => "perfect_csi",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How the pilot codewords relate to the feed channel `h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodebookKind {
    /// Plain DFT codewords.
    Dft,
    /// DFT codewords with the phase of `h` removed (see [`Codebook::compensate_feed`]).
    FeedCompensated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub num_elements: usize,
    pub carrier_frequency: f64,
    pub antenna_position: [f64; 3],
    pub rho0: f64,
    /// NLoS power relative to the mean LoS element power.
    pub nlos_ratio: f64,
    pub nlos_correlation: NlosCorrelation,
    pub codebook: CodebookKind,
    pub dynamics: DynamicsParams,
    pub initial_beta: f64,
    /// Initial AoA is uniform on `[-initial_phi_range, initial_phi_range]`.
    pub initial_phi_range: f64,
    pub pilot_power: f64,
    pub num_blocks: usize,
    pub num_trials: usize,
    pub snr_grid_db: Vec<f64>,
    pub scheme: Scheme,
    pub mismatch: MismatchKind,
    pub seed: u64,
    pub phi_grid_points: usize,
    pub ml_grid_points: usize,
    pub map: MapSettings,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            num_elements: 64,
            carrier_frequency: 30e9,
            antenna_position: [-1.0, 0.0, 0.0],
            rho0: 1.0,
            nlos_ratio: 0.1,
            nlos_correlation: NlosCorrelation::Identity,
            codebook: CodebookKind::Dft,
            dynamics: DynamicsParams::default(),
            initial_beta: 5e-5,
            initial_phi_range: FRAC_PI_4,
            pilot_power: 1.0,
            num_blocks: 50,
            num_trials: 1000,
            snr_grid_db: vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
            scheme: Scheme::MapMyopic,
            mismatch: MismatchKind::Conservative,
            seed: 1,
            phi_grid_points: 201,
            ml_grid_points: 2001,
            map: MapSettings::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        build_geometry(self.num_elements, self.carrier_frequency, self.antenna_position)?;
        self.dynamics.validate()?;
        self.nlos_correlation.matrix(2)?;
        let positive = |field: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(TrackError::param(field, format!("must be positive and finite, got {v}")))
            }
        };
        positive("channel.pilot_power", self.pilot_power)?;
        positive("channel.initial_beta", self.initial_beta)?;
        if !(0.0..=1.0).contains(&self.rho0) {
            return Err(TrackError::param("geometry.rho0", format!("must lie in [0, 1], got {}", self.rho0)));
        }
        if !(self.nlos_ratio.is_finite() && self.nlos_ratio >= 0.0) {
            return Err(TrackError::param("channel.nlos_ratio", "must be non-negative"));
        }
        if !(self.initial_phi_range.is_finite() && (0.0..=PI / 2.0).contains(&self.initial_phi_range)) {
            return Err(TrackError::param("channel.initial_phi_range", "must lie in [0, pi/2]"));
        }
        if self.num_blocks < 1 {
            return Err(TrackError::param("simulation.num_blocks", "must be at least 1"));
        }
        if self.num_trials < 1 {
            return Err(TrackError::param("simulation.num_trials", "must be at least 1"));
        }
        if self.snr_grid_db.is_empty() || self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return Err(TrackError::param("simulation.snr_grid_db", "must be a non-empty list of finite values"));
        }
        if self.phi_grid_points < 2 {
            return Err(TrackError::param("estimator.phi_grid_points", "must be at least 2"));
        }
        if self.ml_grid_points < 2 {
            return Err(TrackError::param("estimator.ml_grid_points", "must be at least 2"));
        }
        if self.map.max_iterations < 1 {
            return Err(TrackError::param("estimator.max_iterations", "must be at least 1"));
        }
        if !(self.map.tolerance.is_finite() && self.map.tolerance >= 0.0) {
            return Err(TrackError::param("estimator.tolerance", "must be non-negative"));
        }
        Ok(())
    }
}

/// Independent random substreams of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Substream {
    /// Initial state and Markov evolution of the true channel.
    Truth = 1,
    /// Receiver noise on the pilots.
    Noise = 2,
    /// Estimator hyperparameter mismatch factors.
    Mismatch = 3,
    /// Random codeword of the exploratory scheme.
    Explore = 4,
    /// NLoS part of the feed channel.
    Feed = 5,
}

/// Counter-based seed of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSeed {
    pub master: u64,
    pub trial: u64,
}

impl TrialSeed {
    pub fn new(master: u64, trial: u64) -> Self {
        TrialSeed { master, trial }
    }

    pub fn stream(&self, which: Substream) -> ChaCha12Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.master.to_le_bytes());
        key[8..16].copy_from_slice(&self.trial.to_le_bytes());
        let mut rng = ChaCha12Rng::from_seed(key);
        rng.set_stream(which as u64);
        rng
    }
}

/// True initial state and the (accurate) initial estimate.
pub fn initial_state<R: Rng + ?Sized>(initial_beta: f64, phi_range: f64, rng: &mut R) -> (ChannelState, ChannelState) {
    let omega = rng.random_range(-PI..PI);
    let phi = if phi_range > 0.0 {
        rng.random_range(-phi_range..=phi_range)
    } else {
        0.0
    };
    let truth = ChannelState::new(initial_beta, omega, phi);
    (truth, truth)
}

/// `y_l = sqrt(P) theta_l^T (h ⊙ g) + n_l` with `n_l ~ CN(0, sigma2)`.
///
/// Unit-variance noise is always drawn and then scaled, so the random stream
/// advances identically for every noise level.
pub fn simulate_pilots<R: Rng + ?Sized>(
    g: &[Complex64],
    configs: &PilotConfigPair,
    h: &StaticChannel,
    pilot_power: f64,
    sigma2: f64,
    rng: &mut R,
) -> Vec<Complex64> {
    let hg = h.apply(g);
    let amp = pilot_power.sqrt();
    let sigma = sigma2.sqrt();
    [&configs.theta1, &configs.theta2]
        .into_iter()
        .map(|theta| {
            let clean: Complex64 = theta.iter().zip(&hg).map(|(t, v)| t * v).sum();
            let n = complex_normal(rng);
            clean * amp + n * sigma
        })
        .collect()
}

/// Noise variance giving the requested average pilot SNR under uniformly
/// random ITS phases: `sigma2 = P |h ⊙ g_ref|^2 / 10^(snr/10)`.
pub fn snr_to_sigma2(snr_db: f64, h: &StaticChannel, g_ref: &[Complex64], pilot_power: f64) -> Result<f64> {
    let energy: f64 = h.apply(g_ref).iter().map(|v| v.norm_sqr()).sum();
    if energy <= 0.0 {
        return Err(TrackError::param("g_ref", "reference channel has zero energy through h"));
    }
    Ok(pilot_power * energy / 10f64.powf(snr_db / 10.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub truth: ChannelState,
    pub estimate: ChannelState,
    pub codeword_indices: (usize, usize),
    /// Coordinate-descent sweeps (0 for ML and perfect CSI).
    pub iterations: usize,
    pub trace_len: usize,
    pub converged: bool,
    /// SE of the configuration built from the estimate, on the true channel.
    pub se: f64,
    /// SE of the configuration built from the true channel.
    pub se_perfect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: u64,
    pub sigma2: f64,
    pub mismatch: MismatchRegime,
    pub blocks: Vec<BlockRecord>,
    /// `|g_hat_T - g_T|^2` at the last block.
    pub channel_sq_error: f64,
    /// `|g_T|^2` at the last block.
    pub channel_sq_norm: f64,
    pub aoa_sq_error: f64,
    pub aoa_sq_norm: f64,
}

impl TrialResult {
    pub fn sums(&self) -> TrialSums {
        TrialSums {
            channel_sq_error: self.channel_sq_error,
            channel_sq_norm: self.channel_sq_norm,
            aoa_sq_error: self.aoa_sq_error,
            aoa_sq_norm: self.aoa_sq_norm,
            se_sum: self.blocks.iter().map(|b| b.se).sum(),
            se_perfect_sum: self.blocks.iter().map(|b| b.se_perfect).sum(),
            blocks: self.blocks.len(),
            non_converged: self.blocks.iter().filter(|b| !b.converged).count(),
        }
    }
}

/// Per-trial contributions to the Monte Carlo statistics.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TrialSums {
    pub channel_sq_error: f64,
    pub channel_sq_norm: f64,
    pub aoa_sq_error: f64,
    pub aoa_sq_norm: f64,
    pub se_sum: f64,
    pub se_perfect_sum: f64,
    pub blocks: usize,
    pub non_converged: usize,
}

/// Collects per-trial sums keyed by trial index. Reductions always run in
/// trial order, so the result does not depend on insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsAccumulator {
    trials: BTreeMap<u64, TrialSums>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub snr_db: f64,
    pub nmse_channel: f64,
    pub nmse_aoa: f64,
    pub mean_se: f64,
    pub mean_se_perfect_csi: f64,
    pub trials: usize,
    pub non_converged: usize,
}

impl MetricsAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, trial: u64, sums: TrialSums) {
        self.trials.insert(trial, sums);
    }

    pub fn merge(&mut self, other: MetricsAccumulator) {
        self.trials.extend(other.trials);
    }

    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    /// NMSE values are ratios of sums over trials; SE is averaged over every
    /// block of every trial.
    pub fn finalize(&self, snr_db: f64) -> MetricsRow {
        let mut total = TrialSums::default();
        for s in self.trials.values() {
            total.channel_sq_error += s.channel_sq_error;
            total.channel_sq_norm += s.channel_sq_norm;
            total.aoa_sq_error += s.aoa_sq_error;
            total.aoa_sq_norm += s.aoa_sq_norm;
            total.se_sum += s.se_sum;
            total.se_perfect_sum += s.se_perfect_sum;
            total.blocks += s.blocks;
            total.non_converged += s.non_converged;
        }
        let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
        MetricsRow {
            snr_db,
            nmse_channel: ratio(total.channel_sq_error, total.channel_sq_norm),
            nmse_aoa: ratio(total.aoa_sq_error, total.aoa_sq_norm),
            mean_se: ratio(total.se_sum, total.blocks as f64),
            mean_se_perfect_csi: ratio(total.se_perfect_sum, total.blocks as f64),
            trials: self.trials.len(),
            non_converged: total.non_converged,
        }
    }
}

/// AoA track of one designated trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub snr_db: f64,
    pub trial: u64,
    pub true_phi: Vec<f64>,
    pub estimated_phi: Vec<f64>,
}

impl Trajectory {
    pub fn from_trial(snr_db: f64, result: &TrialResult) -> Self {
        Trajectory {
            snr_db,
            trial: result.trial,
            true_phi: result.blocks.iter().map(|b| b.truth.phi).collect(),
            estimated_phi: result.blocks.iter().map(|b| b.estimate.phi).collect(),
        }
    }

    pub fn mean_abs_error(&self) -> f64 {
        let n = self.true_phi.len().max(1) as f64;
        self.true_phi
            .iter()
            .zip(&self.estimated_phi)
            .map(|(t, e)| (t - e).abs())
            .sum::<f64>()
            / n
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub scheme: Scheme,
    pub mismatch: MismatchKind,
    pub rows: Vec<MetricsRow>,
    /// Trajectory of trial 0 at every SNR.
    pub trajectories: Vec<Trajectory>,
}

/// Immutable per-configuration state shared by all trials.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: SimConfig,
    geometry: ItsGeometry,
    codebook: Codebook,
    ml_grid: PhiGrid,
}

impl Simulator {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let geometry = build_geometry(cfg.num_elements, cfg.carrier_frequency, cfg.antenna_position)?;
        let codebook = dft_codebook(&geometry)?;
        let ml_grid = PhiGrid::full(cfg.ml_grid_points)?;
        Ok(Simulator {
            cfg,
            geometry,
            codebook,
            ml_grid,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn geometry(&self) -> &ItsGeometry {
        &self.geometry
    }

    /// Feed channel of a trial; identical for every block and every scheme.
    pub fn static_channel(&self, seed: TrialSeed) -> Result<StaticChannel> {
        StaticChannel::generate(
            &self.geometry,
            self.cfg.rho0,
            self.cfg.nlos_ratio,
            self.cfg.nlos_correlation,
            &mut seed.stream(Substream::Feed),
        )
    }

    pub fn run_trial(&self, snr_db: f64, trial: u64) -> Result<TrialResult> {
        let cfg = &self.cfg;
        let m = cfg.num_elements;
        let seed = TrialSeed::new(cfg.seed, trial);
        let mut truth_rng = seed.stream(Substream::Truth);
        let mut noise_rng = seed.stream(Substream::Noise);
        let mut explore_rng = seed.stream(Substream::Explore);

        let h = self.static_channel(seed)?;
        let codebook = match cfg.codebook {
            CodebookKind::Dft => self.codebook.clone(),
            CodebookKind::FeedCompensated => self.codebook.compensate_feed(&h),
        };
        let mismatch = draw_mismatch(cfg.mismatch, &mut seed.stream(Substream::Mismatch));
        let (mut truth, mut estimate) = initial_state(cfg.initial_beta, cfg.initial_phi_range, &mut truth_rng);
        let sigma2 = snr_to_sigma2(snr_db, &h, &synthesize_g_m(&truth, m), cfg.pilot_power)?;
        let ml_search = (cfg.scheme == Scheme::MlMyopic).then(|| MlSearch::new(&h, self.ml_grid.clone()));

        let mut blocks = Vec::with_capacity(cfg.num_blocks);
        let mut g = Vec::new();
        for _ in 0..cfg.num_blocks {
            truth = evolve_state(&truth, &cfg.dynamics, &mut truth_rng);
            g = synthesize_g_m(&truth, m);
            let priors = build_priors(&estimate, &cfg.dynamics, &mismatch);
            let theta_bar = se_max_config(&h.h, &synthesize_g_m(&estimate, m));
            let configs = match cfg.scheme {
                Scheme::MapExploratory => {
                    exploratory_select(&codebook, &theta_bar, priors.search_interval(), &mut explore_rng)
                }
                _ => myopic_select(&codebook, &theta_bar),
            };
            let y = simulate_pilots(&g, &configs, &h, cfg.pilot_power, sigma2, &mut noise_rng);

            let (iterations, trace_len, converged);
            match cfg.scheme {
                Scheme::MapMyopic | Scheme::MapExploratory => {
                    let weights = penalty_weights(sigma2, &priors);
                    let ctx = ObservationContext::new(y, configs.rows(), h.clone(), cfg.pilot_power, sigma2, priors, weights)?;
                    let grid = PhiGrid::around(&priors, cfg.phi_grid_points)?;
                    let est = map_estimate_with(&ctx, &grid, &cfg.map);
                    estimate = est.state;
                    iterations = est.iterations;
                    trace_len = est.trace.len();
                    converged = est.converged;
                }
                Scheme::MlMyopic => {
                    let search = ml_search.as_ref().expect("built for the ML scheme");
                    estimate = search.estimate(&y, &configs.rows(), cfg.pilot_power);
                    (iterations, trace_len, converged) = (0, 0, true);
                }
                Scheme::PerfectCsi => {
                    estimate = truth;
                    (iterations, trace_len, converged) = (0, 0, true);
                }
            }

            let theta_est = se_max_config(&h.h, &synthesize_g_m(&estimate, m));
            let theta_true = se_max_config(&h.h, &g);
            blocks.push(BlockRecord {
                truth,
                estimate,
                codeword_indices: configs.codeword_indices,
                iterations,
                trace_len,
                converged,
                se: spectral_efficiency(&theta_est, &h.h, &g, cfg.pilot_power, sigma2),
                se_perfect: spectral_efficiency(&theta_true, &h.h, &g, cfg.pilot_power, sigma2),
            });
        }

        let g_hat = synthesize_g_m(&estimate, m);
        Ok(TrialResult {
            trial,
            sigma2,
            mismatch,
            blocks,
            channel_sq_error: g_hat.iter().zip(&g).map(|(a, b)| (a - b).norm_sqr()).sum(),
            channel_sq_norm: g.iter().map(|v| v.norm_sqr()).sum(),
            aoa_sq_error: (estimate.phi - truth.phi).powi(2),
            aoa_sq_norm: truth.phi * truth.phi,
        })
    }

    /// Runs the trials in `trials` at one SNR, in parallel.
    pub fn run_trials(&self, snr_db: f64, trials: Range<u64>) -> Result<MetricsAccumulator> {
        let sums: Vec<(u64, TrialSums)> = trials
            .into_par_iter()
            .map(|t| self.run_trial(snr_db, t).map(|r| (t, r.sums())))
            .collect::<Result<_>>()?;
        let mut acc = MetricsAccumulator::new();
        for (t, s) in sums {
            acc.add(t, s);
        }
        Ok(acc)
    }

    pub fn run_monte_carlo(&self) -> Result<MetricsTable> {
        let cfg = &self.cfg;
        let mut rows = Vec::with_capacity(cfg.snr_grid_db.len());
        let mut trajectories = Vec::with_capacity(cfg.snr_grid_db.len());
        for &snr in &cfg.snr_grid_db {
            let results: Vec<(u64, TrialSums, Option<Trajectory>)> = (0..cfg.num_trials as u64)
                .into_par_iter()
                .map(|t| {
                    let r = self.run_trial(snr, t)?;
                    let traj = (t == 0).then(|| Trajectory::from_trial(snr, &r));
                    Ok((t, r.sums(), traj))
                })
                .collect::<Result<_>>()?;
            let mut acc = MetricsAccumulator::new();
            for (t, s, traj) in results {
                acc.add(t, s);
                trajectories.extend(traj);
            }
            rows.push(acc.finalize(snr));
        }
        Ok(MetricsTable {
            scheme: cfg.scheme,
            mismatch: cfg.mismatch,
            rows,
            trajectories,
        })
    }
}

pub fn run_trial(cfg: &SimConfig, snr_db: f64, trial: u64) -> Result<TrialResult> {
    Simulator::new(cfg.clone())?.run_trial(snr_db, trial)
}

pub fn run_monte_carlo(cfg: &SimConfig) -> Result<MetricsTable> {
    Simulator::new(cfg.clone())?.run_monte_carlo()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg(scheme: Scheme) -> SimConfig {
        SimConfig {
            num_trials: 4,
            num_blocks: 5,
            snr_grid_db: vec![10.0],
            scheme,
            ..SimConfig::default()
        }
    }

    #[test]
    fn initial_state_contract() {
        let mut rng = TrialSeed::new(1, 0).stream(Substream::Truth);
        for _ in 0..100_000 {
            let (truth, est) = initial_state(5e-5, FRAC_PI_4, &mut rng);
            assert_eq!(truth.beta, 5e-5);
            assert!(truth.phi.abs() <= FRAC_PI_4);
            assert_eq!(truth, est);
        }
    }

    #[test]
    fn substreams_differ() {
        let s = TrialSeed::new(7, 3);
        let a: u64 = s.stream(Substream::Truth).random();
        let b: u64 = s.stream(Substream::Noise).random();
        let c: u64 = TrialSeed::new(7, 4).stream(Substream::Truth).random();
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, s.stream(Substream::Truth).random::<u64>());
    }

    #[test]
    fn snr_scaling() {
        let h = StaticChannel::new(vec![Complex64::new(0.5, 0.5); 4]);
        let g = vec![Complex64::new(2.0, 0.0); 4];
        let s0 = snr_to_sigma2(0.0, &h, &g, 3.0).unwrap();
        assert!((s0 - 3.0 * 4.0 * 0.5 * 4.0).abs() < 1e-12);
        let s10 = snr_to_sigma2(10.0, &h, &g, 3.0).unwrap();
        assert!((s0 / s10 - 10.0).abs() < 1e-12);
        assert!(snr_to_sigma2(0.0, &h, &[Complex64::new(0.0, 0.0); 4], 1.0).is_err());
    }

    #[test]
    fn noiseless_pilots_are_deterministic() {
        let h = StaticChannel::new(vec![Complex64::new(0.5, 0.5); 4]);
        let g = vec![Complex64::new(1.0, -1.0); 4];
        let cfg = PilotConfigPair {
            theta1: vec![Complex64::new(1.0, 0.0); 4],
            theta2: vec![Complex64::new(0.0, 1.0); 4],
            codeword_indices: (0, 1),
        };
        let mut r1 = TrialSeed::new(1, 1).stream(Substream::Noise);
        let mut r2 = TrialSeed::new(9, 9).stream(Substream::Noise);
        assert_eq!(
            simulate_pilots(&g, &cfg, &h, 2.0, 0.0, &mut r1),
            simulate_pilots(&g, &cfg, &h, 2.0, 0.0, &mut r2)
        );
    }

    #[test]
    fn trial_has_one_record_per_block_and_is_deterministic() {
        for scheme in Scheme::ALL {
            let sim = Simulator::new(small_cfg(scheme)).unwrap();
            let a = sim.run_trial(10.0, 2).unwrap();
            let b = sim.run_trial(10.0, 2).unwrap();
            assert_eq!(a.blocks.len(), 5);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn schemes_share_truth_and_feed() {
        let a = Simulator::new(small_cfg(Scheme::MapMyopic)).unwrap().run_trial(0.0, 1).unwrap();
        let b = Simulator::new(small_cfg(Scheme::MlMyopic)).unwrap().run_trial(0.0, 1).unwrap();
        let truths = |r: &TrialResult| r.blocks.iter().map(|b| b.truth).collect::<Vec<_>>();
        assert_eq!(truths(&a), truths(&b));
        assert_eq!(a.sigma2, b.sigma2);
    }

    #[test]
    fn perfect_csi_se_matches_definition() {
        let cfg = small_cfg(Scheme::PerfectCsi);
        let sim = Simulator::new(cfg.clone()).unwrap();
        let r = sim.run_trial(5.0, 0).unwrap();
        let h = sim.static_channel(TrialSeed::new(cfg.seed, 0)).unwrap();
        for b in &r.blocks {
            let g = synthesize_g_m(&b.truth, cfg.num_elements);
            let s: f64 = h.h.iter().zip(&g).map(|(a, c)| (a * c).norm()).sum();
            let expected = (1.0 + cfg.pilot_power * s * s / r.sigma2).log2();
            assert!((b.se - expected).abs() < 1e-9 * expected);
            assert_eq!(b.se, b.se_perfect);
        }
        assert_eq!(r.channel_sq_error, 0.0);
    }

    #[test]
    fn validation_names_the_field() {
        let cfg = SimConfig { num_trials: 0, ..SimConfig::default() };
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("num_trials"), "{err}");
    }
}
