//! Experiment configuration files.
//!
//! Configurations are TOML with one table per subsystem. Every key is
//! optional; missing keys take the reference scenario values (64 elements at
//! 30 GHz, 50 blocks, 1000 trials, conservative mismatch). A fully resolved
//! configuration serialises back to the same format and is what the run
//! manifest records.

use std::f64::consts::{FRAC_PI_4, PI};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{DynamicsParams, NlosCorrelation};
use crate::error::{Result, TrackError};
use crate::estimator::{MapSettings, PhiSearch};
use crate::priors::MismatchKind;
use crate::sim::{CodebookKind, Scheme, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    NmseVsSnr,
    AoaTrajectory,
    SeVsSnr,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 3] = [
        ExperimentKind::NmseVsSnr,
        ExperimentKind::AoaTrajectory,
        ExperimentKind::SeVsSnr,
    ];

    pub fn file_name(&self) -> &'static str {
        match self {
            ExperimentKind::NmseVsSnr => "nmse_vs_snr.csv",
            ExperimentKind::AoaTrajectory => "aoa_trajectory.csv",
            ExperimentKind::SeVsSnr => "se_vs_snr.csv",
        }
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub experiments: Vec<ExperimentKind>,
    /// Base simulation settings; `sim.scheme` is replaced per scheme run.
    pub sim: SimConfig,
    pub output_dir: PathBuf,
    pub schemes: Vec<Scheme>,
    pub trajectory_snr_db: f64,
    pub trajectory_trial: u64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        FileConfig::default().resolve().expect("defaults are valid")
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.experiments.is_empty() {
            return Err(TrackError::param("experiment.experiments", "must not be empty"));
        }
        if self.schemes.is_empty() {
            return Err(TrackError::param("experiment.schemes", "must not be empty"));
        }
        if !self.trajectory_snr_db.is_finite() {
            return Err(TrackError::param("experiment.trajectory_snr_db", "must be finite"));
        }
        if self.trajectory_trial >= self.sim.num_trials as u64 {
            return Err(TrackError::param(
                "experiment.trajectory_trial",
                format!("must be below num_trials ({})", self.sim.num_trials),
            ));
        }
        self.sim.validate()
    }

    /// The resolved configuration as TOML; parsing it yields this spec again.
    pub fn to_toml(&self) -> String {
        toml::to_string(&FileConfig::from(self)).expect("config serialises")
    }
}

/// Reads and validates an experiment configuration.
pub fn parse_config(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path).map_err(|source| TrackError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text, path)
}

/// Parses configuration text; `origin` only labels error messages.
pub fn parse_config_str(text: &str, origin: &Path) -> Result<ExperimentSpec> {
    let file: FileConfig = toml::from_str(text).map_err(|e| TrackError::ConfigParse {
        path: origin.to_path_buf(),
        message: e.to_string().trim_end().to_string(),
    })?;
    file.resolve()
}

/// Expands `"start:step:stop"` (inclusive) into a list of values.
pub fn expand_range(text: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| TrackError::param("simulation.snr_grid_db", format!("bad range {text:?}: {why}"));
    let normalized = text.replace('\u{2212}', "-");
    let parts: Vec<&str> = normalized.split(':').map(str::trim).collect();
    let nums = parts
        .iter()
        .map(|p| p.parse::<f64>().map_err(|_| bad("expected start:step:stop")))
        .collect::<Result<Vec<f64>>>()?;
    let [start, step, stop] = nums[..] else {
        return Err(bad("expected start:step:stop"));
    };
    if !(start.is_finite() && step.is_finite() && stop.is_finite()) || step == 0.0 {
        return Err(bad("step must be non-zero"));
    }
    let count = ((stop - start) / step + 1e-9).floor();
    if count < 0.0 {
        return Err(bad("step points away from stop"));
    }
    if count > 10_000.0 {
        return Err(bad("too many points"));
    }
    Ok((0..=count as usize).map(|i| start + step * i as f64).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SnrGrid {
    List(Vec<f64>),
    Range(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub experiments: Vec<ExperimentKind>,
    pub schemes: Vec<Scheme>,
    pub output_dir: PathBuf,
    pub trajectory_snr_db: f64,
    pub trajectory_trial: u64,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            experiments: ExperimentKind::ALL.to_vec(),
            schemes: Scheme::ALL.to_vec(),
            output_dir: PathBuf::from("out"),
            trajectory_snr_db: 5.0,
            trajectory_trial: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    pub num_elements: usize,
    pub carrier_frequency_hz: f64,
    pub antenna_position: [f64; 3],
    pub rho0: f64,
    pub codebook: CodebookKind,
}

impl Default for GeometrySection {
    fn default() -> Self {
        GeometrySection {
            num_elements: 64,
            carrier_frequency_hz: 30e9,
            antenna_position: [-1.0, 0.0, 0.0],
            rho0: 1.0,
            codebook: CodebookKind::Dft,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationModel {
    Identity,
    Exponential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub nlos_ratio: f64,
    pub nlos_correlation: CorrelationModel,
    pub nlos_correlation_coefficient: f64,
    pub initial_beta: f64,
    pub initial_phi_range: f64,
    pub pilot_power: f64,
}

impl Default for ChannelSection {
    fn default() -> Self {
        ChannelSection {
            nlos_ratio: 0.1,
            nlos_correlation: CorrelationModel::Identity,
            nlos_correlation_coefficient: 0.0,
            initial_beta: 5e-5,
            initial_phi_range: FRAC_PI_4,
            pilot_power: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsSection {
    pub sigma_phi: f64,
    pub sigma_beta: f64,
    pub kappa: f64,
}

impl Default for DynamicsSection {
    fn default() -> Self {
        DynamicsSection {
            sigma_phi: PI / 360.0,
            sigma_beta: 1e-6,
            kappa: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorSection {
    pub mismatch: MismatchKind,
    pub phi_grid_points: usize,
    pub ml_grid_points: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub phi_search: PhiSearch,
}

impl Default for EstimatorSection {
    fn default() -> Self {
        EstimatorSection {
            mismatch: MismatchKind::Conservative,
            phi_grid_points: 201,
            ml_grid_points: 2001,
            max_iterations: 50,
            tolerance: 1e-9,
            phi_search: PhiSearch::Profiled,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub num_blocks: i64,
    pub num_trials: i64,
    pub snr_grid_db: SnrGrid,
    pub seed: u64,
}

impl Default for SimulationSection {
    fn default() -> Self {
        SimulationSection {
            num_blocks: 50,
            num_trials: 1000,
            snr_grid_db: SnrGrid::Range("-10:5:20".into()),
            seed: 1,
        }
    }
}

/// On-disk layout of a configuration file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub experiment: ExperimentSection,
    pub geometry: GeometrySection,
    pub channel: ChannelSection,
    pub dynamics: DynamicsSection,
    pub estimator: EstimatorSection,
    pub simulation: SimulationSection,
}

fn count(field: &str, v: i64) -> Result<usize> {
    if v < 1 {
        return Err(TrackError::param(field, format!("must be at least 1, got {v}")));
    }
    Ok(v as usize)
}

fn unique<T: PartialEq + Copy>(items: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(items.len());
    for &item in items {
        if !out.contains(&item) {
            out.push(item);
        }
    }
    out
}

impl FileConfig {
    pub fn resolve(&self) -> Result<ExperimentSpec> {
        let snr_grid_db = match &self.simulation.snr_grid_db {
            SnrGrid::List(v) => v.clone(),
            SnrGrid::Range(s) => expand_range(s)?,
        };
        let nlos_correlation = match self.channel.nlos_correlation {
            CorrelationModel::Identity => NlosCorrelation::Identity,
            CorrelationModel::Exponential => NlosCorrelation::Exponential {
                coefficient: self.channel.nlos_correlation_coefficient,
            },
        };
        let sim = SimConfig {
            num_elements: self.geometry.num_elements,
            carrier_frequency: self.geometry.carrier_frequency_hz,
            antenna_position: self.geometry.antenna_position,
            rho0: self.geometry.rho0,
            nlos_ratio: self.channel.nlos_ratio,
            nlos_correlation,
            codebook: self.geometry.codebook,
            dynamics: DynamicsParams {
                sigma_phi: self.dynamics.sigma_phi,
                sigma_beta: self.dynamics.sigma_beta,
                kappa: self.dynamics.kappa,
            },
            initial_beta: self.channel.initial_beta,
            initial_phi_range: self.channel.initial_phi_range,
            pilot_power: self.channel.pilot_power,
            num_blocks: count("simulation.num_blocks", self.simulation.num_blocks)?,
            num_trials: count("simulation.num_trials", self.simulation.num_trials)?,
            snr_grid_db,
            scheme: self.experiment.schemes.first().copied().unwrap_or(Scheme::MapMyopic),
            mismatch: self.estimator.mismatch,
            seed: self.simulation.seed,
            phi_grid_points: self.estimator.phi_grid_points,
            ml_grid_points: self.estimator.ml_grid_points,
            map: MapSettings {
                max_iterations: self.estimator.max_iterations,
                tolerance: self.estimator.tolerance,
                phi_search: self.estimator.phi_search,
            },
        };
        let schemes = unique(&self.experiment.schemes);
        let experiments = unique(&self.experiment.experiments);
        let spec = ExperimentSpec {
            experiments,
            sim,
            output_dir: self.experiment.output_dir.clone(),
            schemes,
            trajectory_snr_db: self.experiment.trajectory_snr_db,
            trajectory_trial: self.experiment.trajectory_trial,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<&ExperimentSpec> for FileConfig {
    fn from(spec: &ExperimentSpec) -> Self {
        let sim = &spec.sim;
        let (nlos_correlation, nlos_correlation_coefficient) = match sim.nlos_correlation {
            NlosCorrelation::Identity => (CorrelationModel::Identity, 0.0),
            NlosCorrelation::Exponential { coefficient } => (CorrelationModel::Exponential, coefficient),
        };
        FileConfig {
            experiment: ExperimentSection {
                experiments: spec.experiments.clone(),
                schemes: spec.schemes.clone(),
                output_dir: spec.output_dir.clone(),
                trajectory_snr_db: spec.trajectory_snr_db,
                trajectory_trial: spec.trajectory_trial,
            },
            geometry: GeometrySection {
                num_elements: sim.num_elements,
                carrier_frequency_hz: sim.carrier_frequency,
                antenna_position: sim.antenna_position,
                rho0: sim.rho0,
                codebook: sim.codebook,
            },
            channel: ChannelSection {
                nlos_ratio: sim.nlos_ratio,
                nlos_correlation,
                nlos_correlation_coefficient,
                initial_beta: sim.initial_beta,
                initial_phi_range: sim.initial_phi_range,
                pilot_power: sim.pilot_power,
            },
            dynamics: DynamicsSection {
                sigma_phi: sim.dynamics.sigma_phi,
                sigma_beta: sim.dynamics.sigma_beta,
                kappa: sim.dynamics.kappa,
            },
            estimator: EstimatorSection {
                mismatch: sim.mismatch,
                phi_grid_points: sim.phi_grid_points,
                ml_grid_points: sim.ml_grid_points,
                max_iterations: sim.map.max_iterations,
                tolerance: sim.map.tolerance,
                phi_search: sim.map.phi_search,
            },
            simulation: SimulationSection {
                num_blocks: sim.num_blocks as i64,
                num_trials: sim.num_trials as i64,
                snr_grid_db: SnrGrid::List(sim.snr_grid_db.clone()),
                seed: sim.seed,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentSpec> {
        parse_config_str(text, Path::new("test.toml"))
    }

    #[test]
    fn empty_config_is_reference_scenario() {
        let spec = parse("").unwrap();
        assert_eq!(spec, ExperimentSpec::default());
        let sim = &spec.sim;
        assert_eq!(sim.num_elements, 64);
        assert_eq!(sim.carrier_frequency, 30e9);
        assert_eq!(sim.num_blocks, 50);
        assert_eq!(sim.num_trials, 1000);
        assert_eq!(sim.dynamics.sigma_phi, PI / 360.0);
        assert_eq!(sim.dynamics.sigma_beta, 1e-6);
        assert_eq!(sim.dynamics.kappa, 100.0);
        assert_eq!(sim.initial_beta, 5e-5);
        assert_eq!(sim.mismatch, MismatchKind::Conservative);
    }

    #[test]
    fn snr_range_expansion() {
        assert_eq!(expand_range("-10:5:20").unwrap(), vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0]);
        assert_eq!(expand_range("\u{2212}10:5:20").unwrap().len(), 7);
        assert_eq!(expand_range("20:-10:0").unwrap(), vec![20.0, 10.0, 0.0]);
        assert!(expand_range("0:0:5").is_err());
        assert!(expand_range("0:1").is_err());
        assert!(expand_range("5:1:0").is_err());
        let spec = parse("[simulation]\nsnr_grid_db = \"-10:10:10\"").unwrap();
        assert_eq!(spec.sim.snr_grid_db, vec![-10.0, 0.0, 10.0]);
        let spec = parse("[simulation]\nsnr_grid_db = [3.0, 4.5]").unwrap();
        assert_eq!(spec.sim.snr_grid_db, vec![3.0, 4.5]);
    }

    #[test]
    fn negative_trials_is_a_validation_error() {
        let err = parse("[simulation]\nnum_trials = -5").unwrap_err();
        assert!(matches!(err, TrackError::InvalidParameter { ref field, .. } if field == "simulation.num_trials"), "{err}");
    }

    #[test]
    fn malformed_file_reports_line() {
        let err = parse("[simulation]\nnum_trials = 10\nseed = = 3\n").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        let err = parse("[geometry]\nbogus = 1\n").unwrap_err().to_string();
        assert!(err.contains("bogus"), "{err}");
    }

    #[test]
    fn resolved_config_round_trips() {
        let spec = parse(
            "[experiment]\nschemes = [\"map_myopic\", \"ml_myopic\"]\n[estimator]\nmismatch = \"over_confident\"\n\
             [channel]\nnlos_correlation = \"exponential\"\nnlos_correlation_coefficient = 0.3\n",
        )
        .unwrap();
        let again = parse(&spec.to_toml()).unwrap();
        assert_eq!(spec, again);
    }

    #[test]
    fn out_of_range_values_name_the_field() {
        let err = parse("[dynamics]\nkappa = -1.0").unwrap_err().to_string();
        assert!(err.contains("dynamics.kappa"), "{err}");
        let err = parse("[geometry]\nnum_elements = 63").unwrap_err().to_string();
        assert!(err.contains("even"), "{err}");
        let err = parse("[experiment]\nschemes = []").unwrap_err().to_string();
        assert!(err.contains("experiment.schemes"), "{err}");
    }
}
