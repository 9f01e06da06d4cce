//! Gaussian and von Mises priors of the tracked parameters, and the penalty
//! weights they induce in the scaled negative log-posterior.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::channel::{wrap_angle, ChannelState, DynamicsParams};
use crate::error::{Result, TrackError};

/// Switch-over point between the power series and the asymptotic expansion.
const BESSEL_SERIES_LIMIT: f64 = 15.0;

/// Natural log of the modified Bessel function `I_0(x)` for `x >= 0`.
pub fn ln_bessel_i0(x: f64) -> f64 {
    let x = x.abs();
    if x < BESSEL_SERIES_LIMIT {
        // sum_k ((x/2)^k / k!)^2
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        while term > 1e-17 * sum {
            term *= q / (k * k);
            sum += term;
            k += 1.0;
        }
        sum.ln()
    } else {
        // e^x / sqrt(2 pi x) * sum_k c_k / x^k, c_k = c_{k-1} (2k-1)^2 / (8k)
        let mut term: f64 = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            let kf = k as f64;
            let next = term * (2.0 * kf - 1.0).powi(2) / (8.0 * kf * x);
            if next.abs() >= term.abs() || next.abs() < 1e-17 {
                sum += next;
                break;
            }
            term = next;
            sum += term;
        }
        x - 0.5 * (TAU * x).ln() + sum.ln()
    }
}

/// Log-density of the von Mises distribution on the circle.
pub fn vonmises_logpdf(omega: f64, mu: f64, kappa: f64) -> Result<f64> {
    if !(kappa.is_finite() && kappa >= 0.0) {
        return Err(TrackError::param("kappa", format!("must be finite and >= 0, got {kappa}")));
    }
    Ok(kappa * (omega - mu).cos() - TAU.ln() - ln_bessel_i0(kappa))
}

/// Draws one sample from `vonMises(mu, kappa)` in `[0, 2pi)`.
///
/// Best & Fisher rejection sampler with a wrapped-Cauchy envelope. Very
/// small concentrations are treated as uniform and very large ones use the
/// normal limit `N(mu, 1/kappa)`.
pub fn sample_vonmises<R: Rng + ?Sized>(mu: f64, kappa: f64, rng: &mut R) -> f64 {
    if kappa < 1e-8 {
        return wrap_angle(mu + PI * (2.0 * rng.random::<f64>() - 1.0));
    }
    if kappa > 1e6 {
        let z: f64 = StandardNormal.sample(rng);
        return wrap_angle(mu + z / kappa.sqrt());
    }
    let s = if kappa < 1e-5 {
        1.0 / kappa + kappa
    } else {
        let r = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
        let rho = (r - (2.0 * r).sqrt()) / (2.0 * kappa);
        (1.0 + rho * rho) / (2.0 * rho)
    };
    let w = loop {
        let z = (PI * rng.random::<f64>()).cos();
        let w = (1.0 + s * z) / (s + z);
        let y = kappa * (s - w);
        let v: f64 = rng.random();
        if y * (2.0 - y) - v >= 0.0 || (y / v).ln() + 1.0 - y >= 0.0 {
            break w;
        }
    };
    let offset = w.clamp(-1.0, 1.0).acos();
    let offset = if rng.random::<f64>() < 0.5 { -offset } else { offset };
    wrap_angle(mu + offset)
}

/// Per-block prior means and estimator-side widths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSet {
    pub mu_beta: f64,
    pub sigma_beta_est: f64,
    pub mu_phi: f64,
    pub sigma_phi_est: f64,
    /// Half-width of the AoA search interval, always `3 * sigma_phi_est`.
    pub delta_phi: f64,
    pub mu_omega: f64,
    pub kappa_est: f64,
}

impl PriorSet {
    pub fn new(
        mu_beta: f64,
        sigma_beta_est: f64,
        mu_phi: f64,
        sigma_phi_est: f64,
        mu_omega: f64,
        kappa_est: f64,
    ) -> Self {
        PriorSet {
            mu_beta,
            sigma_beta_est,
            mu_phi: mu_phi.clamp(-FRAC_PI_2, FRAC_PI_2),
            sigma_phi_est,
            delta_phi: 3.0 * sigma_phi_est,
            mu_omega: wrap_angle(mu_omega),
            kappa_est,
        }
    }

    /// AoA search interval: three prior standard deviations around the mean,
    /// intersected with `[-pi/2, pi/2]`.
    pub fn search_interval(&self) -> (f64, f64) {
        (
            (self.mu_phi - self.delta_phi).max(-FRAC_PI_2),
            (self.mu_phi + self.delta_phi).min(FRAC_PI_2),
        )
    }
}

/// Penalties of the prior terms after scaling the negative log-posterior by
/// the noise variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyWeights {
    pub gamma_beta: f64,
    pub gamma_phi: f64,
    pub gamma_omega: f64,
}

impl PenaltyWeights {
    pub const FLAT: PenaltyWeights = PenaltyWeights {
        gamma_beta: 0.0,
        gamma_phi: 0.0,
        gamma_omega: 0.0,
    };
}

pub fn penalty_weights(sigma2: f64, priors: &PriorSet) -> PenaltyWeights {
    PenaltyWeights {
        gamma_beta: sigma2 / (2.0 * priors.sigma_beta_est * priors.sigma_beta_est),
        gamma_phi: sigma2 / (2.0 * priors.sigma_phi_est * priors.sigma_phi_est),
        gamma_omega: sigma2 * priors.kappa_est,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MismatchKind {
    /// Estimator widths wider than the generative ones.
    Conservative,
    /// Estimator widths narrower than the generative ones.
    OverConfident,
    None,
}

impl MismatchKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MismatchKind::Conservative => "conservative",
            MismatchKind::OverConfident => "over_confident",
            MismatchKind::None => "none",
        }
    }
}

/// Realised scale factors applied to the generative hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MismatchRegime {
    pub kind: MismatchKind,
    pub f_phi: f64,
    pub f_beta: f64,
    pub f_kappa: f64,
}

impl MismatchRegime {
    pub const MATCHED: MismatchRegime = MismatchRegime {
        kind: MismatchKind::None,
        f_phi: 1.0,
        f_beta: 1.0,
        f_kappa: 1.0,
    };
}

pub fn draw_mismatch<R: Rng + ?Sized>(kind: MismatchKind, rng: &mut R) -> MismatchRegime {
    let mut uniform = |lo: f64, hi: f64| lo + (hi - lo) * rng.random::<f64>();
    match kind {
        MismatchKind::None => MismatchRegime::MATCHED,
        MismatchKind::Conservative => MismatchRegime {
            kind,
            f_phi: uniform(1.0, 2.0),
            f_beta: uniform(1.0, 2.0),
            f_kappa: uniform(0.5, 1.0),
        },
        MismatchKind::OverConfident => MismatchRegime {
            kind,
            f_phi: uniform(0.5, 1.0),
            f_beta: uniform(0.5, 1.0),
            f_kappa: uniform(1.0, 2.0),
        },
    }
}

/// Priors for block `t`, centred on the estimates of block `t - 1`.
pub fn build_priors(
    prev_estimate: &ChannelState,
    dynamics: &DynamicsParams,
    mismatch: &MismatchRegime,
) -> PriorSet {
    PriorSet::new(
        prev_estimate.beta,
        mismatch.f_beta * dynamics.sigma_beta,
        prev_estimate.phi,
        mismatch.f_phi * dynamics.sigma_phi,
        prev_estimate.omega,
        mismatch.f_kappa * dynamics.kappa,
    )
}
