//! Geometry of the transmitting surface and the channels around it.
//!
//! The surface is a uniform linear array along the y-axis with
//! half-wavelength spacing, centred at the origin. A single active antenna
//! illuminates it from behind; the user sits in the far field on the other
//! side and is described by a rank-one line-of-sight channel
//! `g = beta * exp(j*omega) * a(phi)`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, TrackError};
use crate::priors::sample_vonmises;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ItsGeometry {
    pub num_elements: usize,
    pub carrier_frequency: f64,
    pub wavelength: f64,
    /// y-coordinate of every element, metres.
    pub element_positions: Vec<f64>,
    pub antenna_position: [f64; 3],
}

/// Builds a centred half-wavelength array of `num_elements` elements.
///
/// The element count must be even and at least two, since the DFT codebook
/// indexes beams symmetrically around broadside.
pub fn build_geometry(
    num_elements: usize,
    carrier_frequency: f64,
    antenna_position: [f64; 3],
) -> Result<ItsGeometry> {
    if num_elements < 2 || !num_elements.is_multiple_of(2) {
        return Err(TrackError::InvalidGeometry(format!(
            "element count must be even and >= 2, got {num_elements}"
        )));
    }
    if !(carrier_frequency.is_finite() && carrier_frequency > 0.0) {
        return Err(TrackError::InvalidGeometry(format!(
            "carrier frequency must be positive, got {carrier_frequency}"
        )));
    }
    if antenna_position.iter().any(|c| !c.is_finite()) || antenna_position[0] == 0.0 {
        return Err(TrackError::InvalidGeometry(
            "antenna must sit off the surface plane (x != 0)".into(),
        ));
    }
    let wavelength = SPEED_OF_LIGHT / carrier_frequency;
    let centre = (num_elements as f64 - 1.0) / 2.0;
    let element_positions = (0..num_elements)
        .map(|m| (m as f64 - centre) * wavelength / 2.0)
        .collect();
    Ok(ItsGeometry {
        num_elements,
        carrier_frequency,
        wavelength,
        element_positions,
        antenna_position,
    })
}

impl ItsGeometry {
    /// Distance from the active antenna to every element.
    pub fn feed_distances(&self) -> Vec<f64> {
        let [ax, ay, az] = self.antenna_position;
        self.element_positions
            .iter()
            .map(|&y| (ax * ax + (y - ay).powi(2) + az * az).sqrt())
            .collect()
    }
}

/// Cosine-squared pattern `G(angle) = 2 cos^2(angle)`, given the cosine.
fn cosine_pattern(cos_angle: f64) -> f64 {
    2.0 * cos_angle * cos_angle
}

/// Line-of-sight antenna-to-surface channel.
///
/// Both the element and the antenna use the cosine pattern; the angle is
/// measured from the surface normal (the x-axis), so seen from either end
/// the cosine is `|x_antenna| / d_m`.
pub fn los_channel(geometry: &ItsGeometry, rho0: f64) -> Result<Vec<Complex64>> {
    if !(0.0..=1.0).contains(&rho0) {
        return Err(TrackError::param("rho0", format!("must lie in [0, 1], got {rho0}")));
    }
    let lambda = geometry.wavelength;
    let ax = geometry.antenna_position[0].abs();
    Ok(geometry
        .feed_distances()
        .into_iter()
        .map(|d| {
            let cos_angle = ax / d;
            let g1 = cosine_pattern(cos_angle);
            let g2 = cosine_pattern(cos_angle);
            let amplitude = rho0 * (g1 * g2).sqrt() * lambda / (4.0 * PI * d);
            Complex64::from_polar(amplitude, -TAU * d / lambda)
        })
        .collect())
}

/// Spatial correlation model on the surface side of the NLoS channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum NlosCorrelation {
    Identity,
    /// `R[m, m'] = r^|m - m'|`
    Exponential { coefficient: f64 },
}

impl NlosCorrelation {
    pub fn matrix(&self, num_elements: usize) -> Result<DMatrix<f64>> {
        match *self {
            NlosCorrelation::Identity => Ok(DMatrix::identity(num_elements, num_elements)),
            NlosCorrelation::Exponential { coefficient } => {
                if !(coefficient.is_finite() && (0.0..1.0).contains(&coefficient.abs())) {
                    return Err(TrackError::param(
                        "nlos_correlation.coefficient",
                        format!("must satisfy |r| < 1, got {coefficient}"),
                    ));
                }
                Ok(DMatrix::from_fn(num_elements, num_elements, |i, j| {
                    coefficient.powi(i.abs_diff(j) as i32)
                }))
            }
        }
    }
}

/// Symmetric square root of a correlation matrix, checking that it is a
/// valid (symmetric, unit-diagonal, PSD) correlation matrix on the way.
pub fn correlation_sqrt(r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = r.nrows();
    if r.ncols() != n {
        return Err(TrackError::param("r_its", "matrix must be square"));
    }
    let scale = r.amax().max(1.0);
    for i in 0..n {
        if (r[(i, i)] - 1.0).abs() > 1e-9 {
            return Err(TrackError::param("r_its", format!("diagonal entry {i} is not 1")));
        }
        for j in 0..i {
            if (r[(i, j)] - r[(j, i)]).abs() > 1e-12 * scale {
                return Err(TrackError::param("r_its", "matrix is not symmetric"));
            }
        }
    }
    let eig = SymmetricEigen::new(r.clone());
    let min_eigenvalue = eig.eigenvalues.min();
    if min_eigenvalue < -1e-10 * scale * n as f64 {
        return Err(TrackError::NotPositiveSemiDefinite { min_eigenvalue });
    }
    let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose())
}

/// One draw of `CN(0, 1)`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Mean per-element power of a channel vector.
pub fn mean_power(h: &[Complex64]) -> f64 {
    if h.is_empty() {
        return 0.0;
    }
    h.iter().map(|v| v.norm_sqr()).sum::<f64>() / h.len() as f64
}

/// Non-line-of-sight antenna-to-surface channel, `nlos_ratio` times weaker
/// than the LoS part whose mean element power is `p_los`.
pub fn nlos_channel<R: Rng + ?Sized>(
    geometry: &ItsGeometry,
    p_los: f64,
    nlos_ratio: f64,
    r_its: &DMatrix<f64>,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let m = geometry.num_elements;
    if r_its.nrows() != m {
        return Err(TrackError::param(
            "r_its",
            format!("expected {m}x{m}, got {}x{}", r_its.nrows(), r_its.ncols()),
        ));
    }
    if !(p_los >= 0.0 && nlos_ratio >= 0.0) {
        return Err(TrackError::param("p_los", "powers must be non-negative"));
    }
    let sqrt_r = correlation_sqrt(r_its)?;
    let rho_nlos = p_los * nlos_ratio;
    let w: Vec<Complex64> = (0..m).map(|_| complex_normal(rng)).collect();
    let amp = rho_nlos.sqrt();
    Ok((0..m)
        .map(|i| {
            let mixed: Complex64 = (0..m).map(|j| w[j] * sqrt_r[(i, j)]).sum();
            mixed * amp
        })
        .collect())
}

/// The fixed, known antenna-to-surface channel `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticChannel {
    pub h: Vec<Complex64>,
}

impl StaticChannel {
    pub fn new(h: Vec<Complex64>) -> Self {
        StaticChannel { h }
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// `diag(h) * v`
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.h.iter().zip(v).map(|(a, b)| a * b).collect()
    }

    /// Draws `h = h_LoS + h_NLoS` for one trial.
    pub fn generate<R: Rng + ?Sized>(
        geometry: &ItsGeometry,
        rho0: f64,
        nlos_ratio: f64,
        correlation: NlosCorrelation,
        rng: &mut R,
    ) -> Result<Self> {
        let los = los_channel(geometry, rho0)?;
        let r = correlation.matrix(geometry.num_elements)?;
        let nlos = nlos_channel(geometry, mean_power(&los), nlos_ratio, &r, rng)?;
        Ok(StaticChannel {
            h: los.iter().zip(&nlos).map(|(a, b)| a + b).collect(),
        })
    }
}

/// Half-wavelength steering vector with the phase reference at the array
/// centre, `a[m] = exp(j*pi*(m - (M-1)/2)*sin(phi))`.
pub fn steering_vector(phi: f64, num_elements: usize) -> Vec<Complex64> {
    let centre = (num_elements as f64 - 1.0) / 2.0;
    let s = phi.sin();
    (0..num_elements)
        .map(|m| Complex64::cis(PI * (m as f64 - centre) * s))
        .collect()
}

pub fn array_response(phi: f64, geometry: &ItsGeometry) -> Vec<Complex64> {
    steering_vector(phi, geometry.num_elements)
}

/// The three parameters of the user-to-surface link in one coherence block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelState {
    pub beta: f64,
    pub omega: f64,
    pub phi: f64,
}

impl ChannelState {
    /// Canonicalises the parameters: `beta` clamped at zero, `omega` wrapped
    /// into `[0, 2pi)` and `phi` clamped to `[-pi/2, pi/2]`.
    pub fn new(beta: f64, omega: f64, phi: f64) -> Self {
        ChannelState {
            beta: beta.max(0.0),
            omega: wrap_angle(omega),
            phi: phi.clamp(-FRAC_PI_2, FRAC_PI_2),
        }
    }
}

/// Wraps an angle into `[0, 2pi)`.
pub fn wrap_angle(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Signed circular difference `a - b` in `(-pi, pi]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

pub fn synthesize_g(state: &ChannelState, geometry: &ItsGeometry) -> Vec<Complex64> {
    synthesize_g_m(state, geometry.num_elements)
}

pub(crate) fn synthesize_g_m(state: &ChannelState, num_elements: usize) -> Vec<Complex64> {
    let gain = Complex64::from_polar(state.beta, state.omega);
    steering_vector(state.phi, num_elements)
        .into_iter()
        .map(|a| a * gain)
        .collect()
}

/// Generative block-to-block dynamics of the tracked parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsParams {
    pub sigma_phi: f64,
    pub sigma_beta: f64,
    pub kappa: f64,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        DynamicsParams {
            sigma_phi: PI / 360.0,
            sigma_beta: 1e-6,
            kappa: 100.0,
        }
    }
}

impl DynamicsParams {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("dynamics.sigma_phi", self.sigma_phi),
            ("dynamics.sigma_beta", self.sigma_beta),
            ("dynamics.kappa", self.kappa),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(TrackError::param(field, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

/// One step of the first-order Markov model.
pub fn evolve_state<R: Rng + ?Sized>(
    state: &ChannelState,
    dynamics: &DynamicsParams,
    rng: &mut R,
) -> ChannelState {
    let phi = Normal::new(state.phi, dynamics.sigma_phi)
        .expect("sigma_phi validated")
        .sample(rng);
    let beta = Normal::new(state.beta, dynamics.sigma_beta)
        .expect("sigma_beta validated")
        .sample(rng);
    let omega = sample_vonmises(state.omega, dynamics.kappa, rng);
    ChannelState::new(beta, omega, phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn reference_geometry() -> ItsGeometry {
        build_geometry(64, 30e9, [-1.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn geometry_positions() {
        let g = reference_geometry();
        assert!((g.wavelength - 9.9931e-3).abs() < 1e-7);
        assert!((g.element_positions[0] + 0.157392).abs() < 1e-5);
        assert!((g.element_positions[63] - g.element_positions[0] - 63.0 * g.wavelength / 2.0).abs() < 1e-12);
        let small = build_geometry(2, 30e9, [-1.0, 0.0, 0.0]).unwrap();
        let q = small.wavelength / 4.0;
        assert!((small.element_positions[0] + q).abs() < 1e-15);
        assert!((small.element_positions[1] - q).abs() < 1e-15);
    }

    #[test]
    fn geometry_rejects_odd_or_tiny() {
        assert!(build_geometry(63, 30e9, [-1.0, 0.0, 0.0]).is_err());
        assert!(build_geometry(0, 30e9, [-1.0, 0.0, 0.0]).is_err());
        assert!(build_geometry(64, -1.0, [-1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn los_centre_magnitude_and_symmetry() {
        let g = reference_geometry();
        let h = los_channel(&g, 1.0).unwrap();
        let expected = 2.0 * g.wavelength / (4.0 * PI);
        assert!((h[31].norm() - expected).abs() / expected < 1e-3);
        for m in 0..32 {
            assert!((h[m].norm() - h[63 - m].norm()).abs() < 1e-18);
        }
        // monotone decay away from the centre
        for m in 32..63 {
            assert!(h[m + 1].norm() < h[m].norm());
        }
        assert!(los_channel(&g, 0.0).unwrap().iter().all(|v| *v == Complex64::new(0.0, 0.0)));
        assert!(los_channel(&g, 1.5).is_err());
    }

    #[test]
    fn nlos_rejects_bad_correlation() {
        let g = build_geometry(4, 30e9, [-1.0, 0.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut r = DMatrix::identity(4, 4);
        r[(0, 1)] = 0.99;
        r[(1, 0)] = 0.99;
        r[(0, 2)] = -0.99;
        r[(2, 0)] = -0.99;
        r[(1, 2)] = 0.99;
        r[(2, 1)] = 0.99;
        assert!(matches!(
            nlos_channel(&g, 1.0, 0.1, &r, &mut rng),
            Err(TrackError::NotPositiveSemiDefinite { .. })
        ));
        let zero = nlos_channel(&g, 0.0, 0.1, &DMatrix::identity(4, 4), &mut rng).unwrap();
        assert!(zero.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn exponential_correlation_sqrt_reconstructs() {
        let r = NlosCorrelation::Exponential { coefficient: 0.7 }.matrix(8).unwrap();
        let s = correlation_sqrt(&r).unwrap();
        assert!((&s * &s - &r).amax() < 1e-12);
    }

    #[test]
    fn array_response_basics() {
        let a = steering_vector(0.0, 16);
        assert!(a.iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-15));
        // sin(phi) - sin(phi') = 2/M gives orthogonal directions
        let m = 8;
        let a1 = steering_vector(0.1f64.asin(), m);
        let a2 = steering_vector((0.1f64 + 0.25).asin(), m);
        let ip: Complex64 = a1.iter().zip(&a2).map(|(x, y)| x.conj() * y).sum();
        assert!(ip.norm() < 1e-12);
    }

    #[test]
    fn synthesize_special_cases() {
        let g = reference_geometry();
        assert!(synthesize_g(&ChannelState::new(0.0, 1.0, 0.3), &g).iter().all(|v| v.norm() == 0.0));
        let ones = synthesize_g(&ChannelState::new(1.0, 0.0, 0.0), &g);
        assert!(ones.iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn evolve_degenerate_dynamics_keep_state() {
        let dynamics = DynamicsParams {
            sigma_phi: 1e-300,
            sigma_beta: 1e-300,
            kappa: 1e300,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = ChannelState::new(5e-5, 1.0, 0.2);
        let next = evolve_state(&s, &dynamics, &mut rng);
        assert!((next.beta - s.beta).abs() < 1e-200);
        assert!((next.phi - s.phi).abs() < 1e-200);
        assert!(angle_diff(next.omega, s.omega).abs() < 1e-100);
    }

    #[test]
    fn evolve_is_reproducible_and_beta_nonnegative() {
        let dynamics = DynamicsParams {
            sigma_beta: 1e-3,
            ..DynamicsParams::default()
        };
        let mut a = ChaCha8Rng::seed_from_u64(11);
        let mut b = ChaCha8Rng::seed_from_u64(11);
        let mut s1 = ChannelState::new(1e-4, 0.0, 0.0);
        let mut s2 = s1;
        for _ in 0..1000 {
            s1 = evolve_state(&s1, &dynamics, &mut a);
            s2 = evolve_state(&s2, &dynamics, &mut b);
            assert!(s1.beta >= 0.0);
            assert!(s1.phi.abs() <= FRAC_PI_2);
        }
        assert_eq!(s1, s2);
    }

    #[test]
    fn angle_helpers() {
        assert_eq!(wrap_angle(-1e-300), 0.0);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((angle_diff(0.1, TAU - 0.1) - 0.2).abs() < 1e-12);
    }
}
