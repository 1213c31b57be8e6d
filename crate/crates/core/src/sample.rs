//! Deterministic sampling of punctured discs.
//!
//! All sampling-based checks in the crate pull their points from here so
//! that a single seed pins every report. Points are grouped in radial
//! shells: logarithmically spaced radii crossed with unit directions drawn
//! as normalized Gaussians from a counter-based generator.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Configuration for disc sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Generator seed; identical seeds give identical samples.
    pub seed: u64,
    /// Number of logarithmically spaced shells (ignored when
    /// `explicit_radii` is set).
    pub radial_steps: usize,
    /// Smallest shell radius as a fraction of the disc radius.
    pub min_radius_factor: f64,
    /// Directions per shell, per ambient dimension.
    pub directions_per_dim: usize,
    /// Overrides the log-spaced shells with an explicit radius list.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit_radii: Option<Vec<f64>>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            seed: 42,
            radial_steps: 16,
            min_radius_factor: 1e-3,
            directions_per_dim: 64,
            explicit_radii: None,
        }
    }
}

impl SamplerConfig {
    pub fn with_seed(seed: u64) -> Self {
        SamplerConfig { seed, ..Default::default() }
    }

    /// Shell radii, largest first.
    pub fn radii(&self, radius: f64) -> Vec<f64> {
        if let Some(r) = &self.explicit_radii {
            let mut r = r.clone();
            r.sort_by(|a, b| b.partial_cmp(a).unwrap());
            return r;
        }
        log_spaced(radius, radius * self.min_radius_factor, self.radial_steps)
    }
}

/// `count` radii spaced logarithmically from `hi` down to `lo`.
pub fn log_spaced(hi: f64, lo: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![hi];
    }
    let (lh, ll) = (hi.ln(), lo.ln());
    (0..count)
        .map(|k| (lh + (ll - lh) * k as f64 / (count - 1) as f64).exp())
        .collect()
}

/// A shell of sample points at a common radius.
#[derive(Debug, Clone, PartialEq)]
pub struct Shell {
    pub radius: f64,
    pub points: Vec<Vec<f64>>,
}

/// Samples the punctured disc of the given radius: one shell per radius,
/// `directions_per_dim * dim` points per shell. The origin is never
/// sampled (the smallest radius is strictly positive).
pub fn disc_shells(dim: usize, radius: f64, config: &SamplerConfig) -> Vec<Shell> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let per_shell = config.directions_per_dim * dim;
    config
        .radii(radius)
        .into_iter()
        .map(|r| Shell {
            radius: r,
            points: (0..per_shell)
                .map(|_| {
                    let d = unit_direction(dim, &mut rng);
                    d.iter().map(|x| x * r).collect()
                })
                .collect(),
        })
        .collect()
}

/// A unit vector from normalized Gaussian draws.
pub fn unit_direction(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// `count` unit directions from a fresh generator at `seed`.
pub fn unit_directions(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| unit_direction(dim, &mut rng)).collect()
}

/// Euclidean norm helper used throughout the crate.
pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// True when `a` is lexicographically smaller than `b`; used to break ties
/// so "attaining point" fields do not depend on iteration order.
pub fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b.iter()) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}
