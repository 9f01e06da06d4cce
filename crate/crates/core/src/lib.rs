//! MAP tracking of the line-of-sight channel between a mobile user and an
//! intelligent transmitting surface (ITS) integrated into a base station.
//!
//! The crate is organised along the processing chain:
//!
//! * [`channel`]: surface geometry, feed channel `h`, steering vectors and
//!   the Markov evolution of the user channel.
//! * [`priors`]: Gaussian and von Mises priors and their penalty weights.
//! * [`estimator`]: the MAP coordinate-descent estimator and the ML baseline.
//! * [`control`]: DFT codebook and pilot-configuration selection.
//! * [`sim`]: the Monte Carlo harness.
//! * [`config`] and [`experiment`]: configuration files, CSV output and the
//!   `track` command line.

pub mod channel;
pub mod config;
pub mod control;
pub mod error;
pub mod estimator;
pub mod experiment;
pub mod priors;
pub mod sim;

pub use channel::{ChannelState, DynamicsParams, ItsGeometry, StaticChannel};
pub use error::{Result, TrackError};
pub use estimator::{map_estimate, ml_estimate, MapEstimate, ObservationContext, PhiGrid};
pub use priors::{MismatchKind, PenaltyWeights, PriorSet};
pub use sim::{MetricsTable, Scheme, SimConfig, Simulator, TrialResult};
