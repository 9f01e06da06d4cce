//! MAP coordinate-descent estimator and the prior-free ML baseline.
//!
//! Both work on the scaled negative log-posterior
//!
//! ```text
//! J(beta, omega, phi) = P beta^2 |b(phi)|^2 - 2 sqrt(P) beta Re{e^{j omega} y^H b(phi)}
//!                     + g_beta (beta - mu_beta)^2 + g_phi (phi - mu_phi)^2
//!                     - g_omega cos(omega - mu_omega)
//! ```
//!
//! with `b(phi) = Theta diag(h) a(phi)`. The data term depends on `phi` only
//! through `|b|^2` and `y^H b`, which are cached per grid point.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{steering_vector, wrap_angle, ChannelState, StaticChannel};
use crate::error::{Result, TrackError};
use crate::priors::{PenaltyWeights, PriorSet};

/// Cap on the omega/beta alternations used to refit one grid angle.
const REFIT_ITERATIONS: usize = 50;

/// Received pilots of one block together with everything needed to score a
/// candidate channel state against them.
#[derive(Debug, Clone)]
pub struct ObservationContext {
    pub y: Vec<Complex64>,
    /// One ITS configuration per pilot, each of length M.
    pub theta_rows: Vec<Vec<Complex64>>,
    pub h: StaticChannel,
    pub pilot_power: f64,
    pub sigma2: f64,
    pub priors: PriorSet,
    pub weights: PenaltyWeights,
}

impl ObservationContext {
    pub fn new(
        y: Vec<Complex64>,
        theta_rows: Vec<Vec<Complex64>>,
        h: StaticChannel,
        pilot_power: f64,
        sigma2: f64,
        priors: PriorSet,
        weights: PenaltyWeights,
    ) -> Result<Self> {
        if y.is_empty() || y.len() != theta_rows.len() {
            return Err(TrackError::param(
                "y",
                format!("need one ITS configuration per pilot ({} pilots, {} rows)", y.len(), theta_rows.len()),
            ));
        }
        if let Some(row) = theta_rows.iter().find(|r| r.len() != h.len()) {
            return Err(TrackError::param(
                "theta_rows",
                format!("row length {} does not match {} elements", row.len(), h.len()),
            ));
        }
        if theta_rows.iter().flatten().any(|v| (v.norm() - 1.0).abs() > 1e-9) {
            return Err(TrackError::param("theta_rows", "entries must have unit modulus"));
        }
        if !(pilot_power.is_finite() && pilot_power > 0.0) {
            return Err(TrackError::param("pilot_power", "must be positive"));
        }
        if !(sigma2.is_finite() && sigma2 >= 0.0) {
            return Err(TrackError::param("sigma2", "must be non-negative"));
        }
        Ok(ObservationContext {
            y,
            theta_rows,
            h,
            pilot_power,
            sigma2,
            priors,
            weights,
        })
    }

    pub fn num_pilots(&self) -> usize {
        self.y.len()
    }

    /// `b(phi) = Theta diag(h) a(phi)`
    pub fn b_vector(&self, phi: f64) -> Vec<Complex64> {
        let cascaded = self.h.apply(&steering_vector(phi, self.h.len()));
        self.theta_rows
            .iter()
            .map(|row| row.iter().zip(&cascaded).map(|(t, v)| t * v).sum())
            .collect()
    }

    fn projection(&self, phi: f64) -> Projection {
        Projection::new(&self.y, &self.b_vector(phi))
    }

    fn objective_at(&self, beta: f64, omega: f64, phi: f64, proj: &Projection) -> f64 {
        let p = &self.priors;
        let w = &self.weights;
        let sqrt_p = self.pilot_power.sqrt();
        let data = self.pilot_power * beta * beta * proj.norm2
            - 2.0 * sqrt_p * beta * (Complex64::cis(omega) * proj.corr).re;
        data + w.gamma_beta * (beta - p.mu_beta).powi(2) + w.gamma_phi * (phi - p.mu_phi).powi(2)
            - w.gamma_omega * (omega - p.mu_omega).cos()
    }

    fn omega_step(&self, beta: f64, proj: &Projection) -> f64 {
        let z = 2.0 * self.pilot_power.sqrt() * beta * proj.corr
            + self.weights.gamma_omega * Complex64::cis(-self.priors.mu_omega);
        if z == Complex64::new(0.0, 0.0) {
            return self.priors.mu_omega;
        }
        wrap_angle(-z.arg())
    }

    fn beta_step(&self, omega: f64, proj: &Projection) -> f64 {
        let gb = self.weights.gamma_beta;
        let num = self.pilot_power.sqrt() * (Complex64::cis(omega) * proj.corr).re + gb * self.priors.mu_beta;
        let den = self.pilot_power * proj.norm2 + gb;
        if den <= 0.0 {
            // J does not depend on beta at all
            return self.priors.mu_beta.max(0.0);
        }
        (num / den).max(0.0)
    }

    /// Alternates the closed-form `omega` and `beta` updates at a fixed
    /// angle until neither moves.
    fn refit(&self, mut beta: f64, mut omega: f64, phi: f64, proj: &Projection) -> (f64, f64, f64) {
        let mut j = self.objective_at(beta, omega, phi, proj);
        for _ in 0..REFIT_ITERATIONS {
            let omega_new = self.omega_step(beta, proj);
            let beta_new = self.beta_step(omega_new, proj);
            let j_new = self.objective_at(beta_new, omega_new, phi, proj);
            if j_new > j {
                break;
            }
            let settled = (j - j_new) <= 1e-15 * j.abs();
            (beta, omega, j) = (beta_new, omega_new, j_new);
            if settled {
                break;
            }
        }
        (beta, omega, j)
    }

    /// Grid index with the lowest `J` after refitting `omega` and `beta` at
    /// every grid angle, together with the refitted values.
    fn profiled_phi_step(
        &self,
        beta: f64,
        omega: f64,
        grid: &PhiGrid,
        projections: &[Projection],
    ) -> (usize, f64, f64) {
        let mu = self.priors.mu_phi;
        let mut best = (0, beta, omega);
        let mut best_j = f64::INFINITY;
        for (i, (&phi, proj)) in grid.values.iter().zip(projections).enumerate() {
            let (b, w, j) = self.refit(beta, omega, phi, proj);
            let better = j < best_j
                || (j == best_j && {
                    let (d_new, d_old) = ((phi - mu).abs(), (grid.values[best.0] - mu).abs());
                    d_new < d_old || (d_new == d_old && phi < grid.values[best.0])
                });
            if better {
                best = (i, b, w);
                best_j = j;
            }
        }
        best
    }

    /// Index of the grid point minimising `J(beta, omega, .)`.
    fn phi_step(&self, beta: f64, omega: f64, grid: &PhiGrid, projections: &[Projection]) -> usize {
        let mu = self.priors.mu_phi;
        let mut best = 0;
        let mut best_j = f64::INFINITY;
        for (i, (&phi, proj)) in grid.values.iter().zip(projections).enumerate() {
            let j = self.objective_at(beta, omega, phi, proj);
            let better = j < best_j
                || (j == best_j && {
                    let (d_new, d_old) = ((phi - mu).abs(), (grid.values[best] - mu).abs());
                    d_new < d_old || (d_new == d_old && phi < grid.values[best])
                });
            if better {
                best = i;
                best_j = j;
            }
        }
        best
    }
}

/// `|b|^2` and `y^H b` for one candidate angle.
#[derive(Debug, Clone, Copy)]
struct Projection {
    norm2: f64,
    corr: Complex64,
}

impl Projection {
    fn new(y: &[Complex64], b: &[Complex64]) -> Self {
        Projection {
            norm2: b.iter().map(|v| v.norm_sqr()).sum(),
            corr: y.iter().zip(b).map(|(yl, bl)| yl.conj() * bl).sum(),
        }
    }
}

/// Candidate AoA values for the one-dimensional search.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiGrid {
    pub lo: f64,
    pub hi: f64,
    pub values: Vec<f64>,
}

impl PhiGrid {
    /// `num_points` uniformly spaced angles covering `[lo, hi]` including both
    /// endpoints, after clipping to `[-pi/2, pi/2]`.
    pub fn uniform(lo: f64, hi: f64, num_points: usize) -> Result<Self> {
        let lo = lo.max(-FRAC_PI_2);
        let hi = hi.min(FRAC_PI_2);
        if !(lo <= hi) {
            return Err(TrackError::param("phi_grid", format!("empty interval [{lo}, {hi}]")));
        }
        if lo == hi {
            return Ok(PhiGrid::single(lo));
        }
        if num_points < 2 {
            return Err(TrackError::param("phi_grid_points", "need at least 2 points"));
        }
        let step = (hi - lo) / (num_points - 1) as f64;
        let mut values: Vec<f64> = (0..num_points).map(|i| lo + step * i as f64).collect();
        values[num_points - 1] = hi;
        Ok(PhiGrid { lo, hi, values })
    }

    /// Grid over the prior's search interval.
    pub fn around(priors: &PriorSet, num_points: usize) -> Result<Self> {
        let (lo, hi) = priors.search_interval();
        PhiGrid::uniform(lo, hi, num_points)
    }

    /// Grid over the whole visible range `[-pi/2, pi/2]`.
    pub fn full(num_points: usize) -> Result<Self> {
        PhiGrid::uniform(-FRAC_PI_2, FRAC_PI_2, num_points)
    }

    pub fn single(phi: f64) -> Self {
        PhiGrid {
            lo: phi,
            hi: phi,
            values: vec![phi],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step(&self) -> f64 {
        if self.values.len() < 2 {
            0.0
        } else {
            (self.hi - self.lo) / (self.values.len() - 1) as f64
        }
    }

    /// Index of the point closest to `phi`; ties go to the smaller angle.
    pub fn nearest_index(&self, phi: f64) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if (v - phi).abs() < (self.values[best] - phi).abs() {
                best = i;
            }
        }
        best
    }
}

pub fn b_vector(ctx: &ObservationContext, phi: f64) -> Vec<Complex64> {
    ctx.b_vector(phi)
}

/// The scaled negative log-posterior without the constant `|y|^2`.
pub fn objective_j(ctx: &ObservationContext, state: &ChannelState) -> f64 {
    ctx.objective_at(state.beta, state.omega, state.phi, &ctx.projection(state.phi))
}

/// Exact minimiser of `J` over `omega` with `beta` and `phi` fixed.
pub fn update_omega(ctx: &ObservationContext, beta: f64, phi: f64) -> f64 {
    ctx.omega_step(beta, &ctx.projection(phi))
}

/// Exact minimiser of `J` over `beta >= 0` with `omega` and `phi` fixed.
pub fn update_beta(ctx: &ObservationContext, omega: f64, phi: f64) -> f64 {
    ctx.beta_step(omega, &ctx.projection(phi))
}

/// Grid point minimising `J` over `phi` with `beta` and `omega` fixed. Ties
/// go to the point closest to the prior mean, then to the smaller angle.
pub fn update_phi(ctx: &ObservationContext, beta: f64, omega: f64, grid: &PhiGrid) -> f64 {
    let projections: Vec<Projection> = grid.values.iter().map(|&p| ctx.projection(p)).collect();
    grid.values[ctx.phi_step(beta, omega, grid, &projections)]
}

/// How the AoA coordinate is updated inside the coordinate descent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiSearch {
    /// Grid point minimising `J` with `beta` and `omega` held fixed.
    Conditional,
    /// Every grid point is scored after refitting `omega` and `beta` to it
    /// with the closed-form updates, starting from the current values.
    Profiled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapSettings {
    pub max_iterations: usize,
    /// Stop once a full sweep lowers `J` by less than this fraction.
    pub tolerance: f64,
    pub phi_search: PhiSearch,
}

impl Default for MapSettings {
    fn default() -> Self {
        MapSettings {
            max_iterations: 50,
            tolerance: 1e-9,
            phi_search: PhiSearch::Profiled,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapEstimate {
    pub state: ChannelState,
    /// Number of full omega/beta/phi sweeps performed.
    pub iterations: usize,
    /// `J` at the returned state.
    pub objective: f64,
    pub converged: bool,
    /// `J` at the starting point and after every single coordinate update.
    pub trace: Vec<f64>,
}

pub fn map_estimate(ctx: &ObservationContext, grid: &PhiGrid) -> MapEstimate {
    map_estimate_with(ctx, grid, &MapSettings::default())
}

/// Coordinate descent on `J`, starting from the prior means.
pub fn map_estimate_with(ctx: &ObservationContext, grid: &PhiGrid, settings: &MapSettings) -> MapEstimate {
    assert!(!grid.is_empty(), "phi grid must not be empty");
    let projections: Vec<Projection> = grid.values.iter().map(|&p| ctx.projection(p)).collect();

    let mut beta = ctx.priors.mu_beta.max(0.0);
    let mut omega = ctx.priors.mu_omega;
    let mut idx = grid.nearest_index(ctx.priors.mu_phi);
    let score = |beta: f64, omega: f64, idx: usize| ctx.objective_at(beta, omega, grid.values[idx], &projections[idx]);

    let mut current = score(beta, omega, idx);
    let mut trace = Vec::with_capacity(1 + 3 * settings.max_iterations);
    trace.push(current);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < settings.max_iterations {
        iterations += 1;
        let before = current;

        omega = ctx.omega_step(beta, &projections[idx]);
        trace.push(score(beta, omega, idx));
        beta = ctx.beta_step(omega, &projections[idx]);
        trace.push(score(beta, omega, idx));
        match settings.phi_search {
            PhiSearch::Conditional => idx = ctx.phi_step(beta, omega, grid, &projections),
            PhiSearch::Profiled => {
                let stay = score(beta, omega, idx);
                let (i, b, w) = ctx.profiled_phi_step(beta, omega, grid, &projections);
                // refitting at the current angle can only lower J, so this
                // guard only triggers on floating-point ties
                if score(b, w, i) <= stay {
                    (idx, beta, omega) = (i, b, w);
                }
            }
        }
        current = score(beta, omega, idx);
        trace.push(current);

        let decrease = (before - current) / before.abs().max(f64::MIN_POSITIVE);
        if decrease < settings.tolerance {
            converged = true;
            break;
        }
    }

    let state = ChannelState::new(beta, omega, grid.values[idx]);
    MapEstimate {
        state,
        iterations,
        objective: objective_j(ctx, &state),
        converged,
        trace,
    }
}

/// Prior-free ML estimate: the AoA maximises the concentrated criterion
/// `|b^H y|^2 / |b|^2` over `grid`, the complex gain follows in closed form.
/// Ties go to the first (smallest) grid angle.
pub fn ml_estimate(
    y: &[Complex64],
    theta_rows: &[Vec<Complex64>],
    h: &StaticChannel,
    pilot_power: f64,
    grid: &PhiGrid,
) -> ChannelState {
    MlSearch::new(h, grid.clone()).estimate(y, theta_rows, pilot_power)
}

/// ML search with the cascaded steering vectors `diag(h) a(phi)` cached for
/// every grid angle, for reuse across blocks that share `h`.
#[derive(Debug, Clone)]
pub struct MlSearch {
    grid: PhiGrid,
    cascaded: Vec<Vec<Complex64>>,
}

impl MlSearch {
    pub fn new(h: &StaticChannel, grid: PhiGrid) -> Self {
        assert!(!grid.is_empty(), "phi grid must not be empty");
        let cascaded = grid
            .values
            .iter()
            .map(|&phi| h.apply(&steering_vector(phi, h.len())))
            .collect();
        MlSearch { grid, cascaded }
    }

    pub fn grid(&self) -> &PhiGrid {
        &self.grid
    }

    pub fn estimate(&self, y: &[Complex64], theta_rows: &[Vec<Complex64>], pilot_power: f64) -> ChannelState {
        let mut best_idx = 0;
        let mut best_proj = None;
        let mut best_score = f64::NEG_INFINITY;
        for (i, cascaded) in self.cascaded.iter().enumerate() {
            let b: Vec<Complex64> = theta_rows
                .iter()
                .map(|row| row.iter().zip(cascaded).map(|(t, v)| t * v).sum())
                .collect();
            let proj = Projection::new(y, &b);
            let score = if proj.norm2 > 0.0 {
                proj.corr.norm_sqr() / proj.norm2
            } else {
                0.0
            };
            if score > best_score {
                best_score = score;
                best_idx = i;
                best_proj = Some(proj);
            }
        }
        let proj = best_proj.expect("grid is non-empty");
        let gain = if proj.norm2 > 0.0 {
            proj.corr.conj() / (pilot_power.sqrt() * proj.norm2)
        } else {
            Complex64::new(0.0, 0.0)
        };
        let omega = if gain.norm() > 0.0 { gain.arg() } else { 0.0 };
        ChannelState::new(gain.norm(), omega, self.grid.values[best_idx])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::synthesize_g_m;

    fn ones(m: usize) -> Vec<Complex64> {
        vec![Complex64::new(1.0, 0.0); m]
    }

    fn ctx_with(y: Vec<Complex64>, rows: Vec<Vec<Complex64>>, h: Vec<Complex64>, priors: PriorSet, w: PenaltyWeights) -> ObservationContext {
        ObservationContext::new(y, rows, StaticChannel::new(h), 1.0, 1.0, priors, w).unwrap()
    }

    fn some_h(m: usize) -> Vec<Complex64> {
        (0..m).map(|i| Complex64::from_polar(1.0 + 0.1 * i as f64, 0.7 * i as f64)).collect()
    }

    #[test]
    fn b_vector_cases() {
        let h = some_h(6);
        let ctx = ctx_with(vec![Complex64::new(0.0, 0.0)], vec![ones(6)], h.clone(), PriorSet::new(0.0, 1.0, 0.0, 0.1, 0.0, 0.0), PenaltyWeights::FLAT);
        let b = ctx.b_vector(0.0);
        let sum: Complex64 = h.iter().sum();
        assert!((b[0] - sum).norm() < 1e-12);

        // phase-aligned row recovers the L1 norm of h
        let phi = 0.3;
        let cascaded = StaticChannel::new(h.clone()).apply(&steering_vector(phi, 6));
        let row: Vec<Complex64> = cascaded.iter().map(|v| Complex64::cis(-v.arg())).collect();
        let ctx = ctx_with(vec![Complex64::new(0.0, 0.0)], vec![row], h.clone(), ctx.priors, PenaltyWeights::FLAT);
        let l1: f64 = h.iter().map(|v| v.norm()).sum();
        assert!((ctx.b_vector(phi)[0].norm() - l1).abs() < 1e-12);
    }

    #[test]
    fn context_validation() {
        let h = StaticChannel::new(ones(4));
        let p = PriorSet::new(0.0, 1.0, 0.0, 0.1, 0.0, 0.0);
        assert!(ObservationContext::new(vec![], vec![], h.clone(), 1.0, 1.0, p, PenaltyWeights::FLAT).is_err());
        let bad_row = vec![vec![Complex64::new(2.0, 0.0); 4]];
        assert!(ObservationContext::new(vec![Complex64::new(0.0, 0.0)], bad_row, h.clone(), 1.0, 1.0, p, PenaltyWeights::FLAT).is_err());
        assert!(ObservationContext::new(vec![Complex64::new(0.0, 0.0)], vec![ones(4)], h, 0.0, 1.0, p, PenaltyWeights::FLAT).is_err());
    }

    #[test]
    fn objective_special_values() {
        let h = some_h(4);
        let p = PriorSet::new(0.0, 1.0, 0.1, 0.1, 1.3, 5.0);
        let w = PenaltyWeights { gamma_beta: 0.0, gamma_phi: 0.0, gamma_omega: 2.5 };
        let ctx = ctx_with(vec![Complex64::new(0.3, -0.2)], vec![ones(4)], h.clone(), p, w);
        let j = objective_j(&ctx, &ChannelState::new(0.0, 1.3, 0.4));
        assert!((j + 2.5).abs() < 1e-12);

        // noise-free observation with flat priors
        let truth = ChannelState::new(0.8, 2.0, 0.25);
        let rows = vec![ones(4), some_h(4).iter().map(|v| Complex64::cis(v.arg())).collect()];
        let g = synthesize_g_m(&truth, 4);
        let hd = StaticChannel::new(h.clone()).apply(&g);
        let y: Vec<Complex64> = rows.iter().map(|r| r.iter().zip(&hd).map(|(a, b)| a * b).sum()).collect();
        let ctx = ctx_with(y, rows, h, p, PenaltyWeights::FLAT);
        let b = ctx.b_vector(truth.phi);
        let n2: f64 = b.iter().map(|v| v.norm_sqr()).sum();
        let j = objective_j(&ctx, &truth);
        assert!((j + truth.beta * truth.beta * n2).abs() < 1e-12 * n2);
    }

    #[test]
    fn omega_and_beta_limits() {
        let h = some_h(4);
        let p = PriorSet::new(0.4, 1.0, 0.0, 0.1, 1.1, 5.0);
        let w = PenaltyWeights { gamma_beta: 0.0, gamma_phi: 0.0, gamma_omega: 3.0 };
        let y = vec![Complex64::new(0.5, 0.1), Complex64::new(-0.2, 0.3)];
        let rows = vec![ones(4), some_h(4).iter().map(|v| Complex64::cis(2.0 * v.arg())).collect()];
        let ctx = ctx_with(y.clone(), rows.clone(), h.clone(), p, w);
        assert!((update_omega(&ctx, 0.0, 0.2) - 1.1).abs() < 1e-12);

        let flat = ctx_with(y.clone(), rows.clone(), h.clone(), p, PenaltyWeights::FLAT);
        let b = flat.b_vector(0.2);
        let c: Complex64 = y.iter().zip(&b).map(|(a, bb)| a.conj() * bb).sum();
        assert!((update_omega(&flat, 0.7, 0.2) - wrap_angle(-c.arg())).abs() < 1e-12);
        // zero argument falls back to the prior mean
        let zero = ctx_with(vec![Complex64::new(0.0, 0.0); 2], rows.clone(), h.clone(), p, PenaltyWeights::FLAT);
        assert_eq!(update_omega(&zero, 1.0, 0.2), p.mu_omega);

        let heavy = ctx_with(y.clone(), rows.clone(), h.clone(), p, PenaltyWeights { gamma_beta: 1e15, ..PenaltyWeights::FLAT });
        assert!((update_beta(&heavy, 0.3, 0.2) - 0.4).abs() < 1e-9);

        // antipodal observation clamps at zero
        let p0 = PriorSet::new(0.0, 1.0, 0.0, 0.1, 0.0, 5.0);
        let anti = ctx_with(y.clone(), rows.clone(), h.clone(), p0, PenaltyWeights::FLAT);
        let omega_bad = wrap_angle(-c.arg() + std::f64::consts::PI);
        assert_eq!(update_beta(&anti, omega_bad, 0.2), 0.0);
    }

    #[test]
    fn phi_update_with_zero_beta_picks_nearest_to_prior() {
        let h = some_h(4);
        let p = PriorSet::new(0.0, 1.0, 0.033, 0.1, 0.0, 5.0);
        let w = PenaltyWeights { gamma_beta: 0.0, gamma_phi: 1.0, gamma_omega: 0.0 };
        let ctx = ctx_with(vec![Complex64::new(1.0, 1.0)], vec![ones(4)], h, p, w);
        let grid = PhiGrid::uniform(-0.1, 0.1, 21).unwrap();
        let phi = update_phi(&ctx, 0.0, 0.0, &grid);
        assert!((phi - 0.03).abs() < 1e-12);
        assert_eq!(update_phi(&ctx, 1.0, 0.0, &PhiGrid::single(0.2)), 0.2);
    }

    #[test]
    fn flat_prior_tie_prefers_prior_mean_then_smaller() {
        let h = some_h(4);
        let p = PriorSet::new(0.0, 1.0, 0.0, 0.1, 0.0, 5.0);
        let ctx = ctx_with(vec![Complex64::new(1.0, 0.0)], vec![ones(4)], h, p, PenaltyWeights::FLAT);
        // beta = 0 and flat priors: every grid point ties
        let grid = PhiGrid::uniform(-0.2, 0.2, 5).unwrap();
        assert_eq!(update_phi(&ctx, 0.0, 0.0, &grid), 0.0);
        let grid = PhiGrid::uniform(0.1, 0.3, 3).unwrap();
        assert!((update_phi(&ctx, 0.0, 0.0, &grid) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn ml_zero_observation() {
        let h = StaticChannel::new(some_h(8));
        let grid = PhiGrid::full(11).unwrap();
        let est = ml_estimate(&[Complex64::new(0.0, 0.0); 2], &[ones(8), ones(8)], &h, 1.0, &grid);
        assert_eq!(est.beta, 0.0);
        assert_eq!(est.omega, 0.0);
        assert_eq!(est.phi, -FRAC_PI_2);
    }

    #[test]
    fn grid_construction() {
        let g = PhiGrid::uniform(-0.5, 0.5, 201).unwrap();
        assert_eq!(g.len(), 201);
        assert_eq!(g.values[0], -0.5);
        assert_eq!(g.values[200], 0.5);
        assert!((g.step() - 0.005).abs() < 1e-15);
        let clipped = PhiGrid::uniform(1.5, 1.7, 11).unwrap();
        assert_eq!(clipped.hi, FRAC_PI_2);
        assert!(PhiGrid::uniform(0.2, 0.1, 5).is_err());
        assert_eq!(g.nearest_index(0.0026), 101);
    }
}
