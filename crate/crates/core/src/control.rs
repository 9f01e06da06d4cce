//! ITS configuration: the DFT codebook, the SE-maximising configuration and
//! the two-pilot codeword selection rules.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{ItsGeometry, StaticChannel};
use crate::error::{Result, TrackError};

/// Columns of an orthogonal DFT beam codebook.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    /// `codewords[i]` is the configuration for beam index `k = i - M/2`.
    pub codewords: Vec<Vec<Complex64>>,
    pub beam_sines: Vec<f64>,
    pub beam_angles: Vec<f64>,
}

/// DFT codebook whose codeword `k` (for `k = -M/2 .. M/2 - 1`) is the
/// conjugate of the steering vector towards `arcsin(2k/M)`, so applying it
/// as ITS configuration steers the main beam to that angle.
pub fn dft_codebook(geometry: &ItsGeometry) -> Result<Codebook> {
    let m = geometry.num_elements;
    if m < 2 || !m.is_multiple_of(2) {
        return Err(TrackError::InvalidGeometry(format!(
            "DFT codebook needs an even element count, got {m}"
        )));
    }
    let centre = (m as f64 - 1.0) / 2.0;
    let half = (m / 2) as i64;
    let beam_sines: Vec<f64> = (-half..half).map(|k| 2.0 * k as f64 / m as f64).collect();
    let codewords = beam_sines
        .iter()
        .map(|&s| {
            (0..m)
                .map(|i| Complex64::cis(-PI * (i as f64 - centre) * s))
                .collect()
        })
        .collect();
    Ok(Codebook {
        codewords,
        beam_angles: beam_sines.iter().map(|s| s.asin()).collect(),
        beam_sines,
    })
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    /// Beam index `k` of codeword position `i`.
    pub fn beam_index(&self, i: usize) -> i64 {
        i as i64 - (self.len() / 2) as i64
    }

    /// Codebook with the feed phase `arg(h)` removed from every codeword.
    ///
    /// The element-wise unit-modulus rotation keeps the codewords mutually
    /// orthogonal, and the beam of codeword `k` then points at
    /// `beam_angles[k]` through the cascaded channel `diag(h) a(phi)`.
    pub fn compensate_feed(&self, h: &StaticChannel) -> Codebook {
        let rot: Vec<Complex64> = h
            .h
            .iter()
            .map(|v| if v.norm() > 0.0 { Complex64::cis(-v.arg()) } else { Complex64::new(1.0, 0.0) })
            .collect();
        Codebook {
            codewords: self
                .codewords
                .iter()
                .map(|c| c.iter().zip(&rot).map(|(a, b)| a * b).collect())
                .collect(),
            beam_sines: self.beam_sines.clone(),
            beam_angles: self.beam_angles.clone(),
        }
    }

    /// `|theta_bar^H c|` for every codeword.
    pub fn alignment(&self, theta_bar: &[Complex64]) -> Vec<f64> {
        self.codewords
            .iter()
            .map(|c| {
                theta_bar
                    .iter()
                    .zip(c)
                    .map(|(t, v)| t.conj() * v)
                    .sum::<Complex64>()
                    .norm()
            })
            .collect()
    }
}

/// Configuration that co-phases every element of `h ⊙ g_hat`. Elements with
/// a zero product get phase 0.
pub fn se_max_config(h: &[Complex64], g_hat: &[Complex64]) -> Vec<Complex64> {
    h.iter()
        .zip(g_hat)
        .map(|(a, b)| {
            let v = a * b;
            if v.norm() > 0.0 {
                Complex64::cis(-v.arg())
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
        .collect()
}

/// The two ITS configurations used for the pilots of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotConfigPair {
    pub theta1: Vec<Complex64>,
    pub theta2: Vec<Complex64>,
    /// Codebook positions of `theta1` and `theta2`.
    pub codeword_indices: (usize, usize),
}

impl PilotConfigPair {
    fn from_codebook(codebook: &Codebook, first: usize, second: usize) -> Self {
        PilotConfigPair {
            theta1: codebook.codewords[first].clone(),
            theta2: codebook.codewords[second].clone(),
            codeword_indices: (first, second),
        }
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        vec![self.theta1.clone(), self.theta2.clone()]
    }
}

/// Position of the largest score outside `exclude`; lower index wins ties.
fn best_aligned(scores: &[f64], exclude: Option<usize>) -> usize {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        if Some(i) == exclude {
            continue;
        }
        if best.is_none_or(|b| s > scores[b]) {
            best = Some(i);
        }
    }
    best.expect("codebook needs at least two codewords")
}

/// Best and second-best aligned codewords with `theta_bar`.
pub fn myopic_select(codebook: &Codebook, theta_bar: &[Complex64]) -> PilotConfigPair {
    let scores = codebook.alignment(theta_bar);
    let first = best_aligned(&scores, None);
    let second = best_aligned(&scores, Some(first));
    PilotConfigPair::from_codebook(codebook, first, second)
}

/// Best-aligned codeword plus one drawn uniformly among the other codewords
/// whose beam angle lies in `phi_interval`. Falls back to the myopic second
/// pick when no such codeword exists.
pub fn exploratory_select<R: Rng + ?Sized>(
    codebook: &Codebook,
    theta_bar: &[Complex64],
    phi_interval: (f64, f64),
    rng: &mut R,
) -> PilotConfigPair {
    let scores = codebook.alignment(theta_bar);
    let first = best_aligned(&scores, None);
    let (lo, hi) = phi_interval;
    let candidates: Vec<usize> = codebook
        .beam_angles
        .iter()
        .enumerate()
        .filter(|&(i, &a)| i != first && a >= lo && a <= hi)
        .map(|(i, _)| i)
        .collect();
    let second = if candidates.is_empty() {
        best_aligned(&scores, Some(first))
    } else {
        candidates[rng.random_range(0..candidates.len())]
    };
    PilotConfigPair::from_codebook(codebook, first, second)
}

/// `theta^T (h ⊙ g)`
pub fn effective_channel(theta: &[Complex64], h: &[Complex64], g: &[Complex64]) -> Complex64 {
    theta.iter().zip(h).zip(g).map(|((t, a), b)| t * a * b).sum()
}

/// `log2(1 + P |theta^T (h ⊙ g)|^2 / sigma2)`, no pilot-overhead prelog.
pub fn spectral_efficiency(theta: &[Complex64], h: &[Complex64], g: &[Complex64], power: f64, sigma2: f64) -> f64 {
    (1.0 + power * effective_channel(theta, h, g).norm_sqr() / sigma2).log2()
}
