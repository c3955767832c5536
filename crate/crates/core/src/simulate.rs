//! Binary image sources driven by a two-state birth-death process.
//!
//! The continuous-time chain with generator `[[-lambda, lambda], [mu, -mu]]`
//! is sampled every `dt` through its exact transition matrix, and the
//! samples are laid out in raster order, so the raster sequence of an image
//! is one stationary discrete Markov chain (rows chain into each other).

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image::{self, BinaryImage, ImageError};

/// Identifies the sampling algorithm in exported manifests.
pub const GENERATOR_VERSION: &str = "chacha8-splitmix64-v1";

/// Flip probabilities of the five built-in cases, strongest correlation first.
pub const CASE_FLIP_PROBS: [f64; 5] = [0.02, 0.05, 0.1, 0.2, 0.4];

#[derive(Debug, Error)]
pub enum SimulateError {
    #[error("invalid birth-death parameters: {0}")]
    BadParams(String),
    #[error("unknown case preset {0} (expected 1..=5)")]
    UnknownCase(usize),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BirthDeathParams {
    /// Rate of 0 -> 1 transitions.
    pub lambda: f64,
    /// Rate of 1 -> 0 transitions.
    pub mu: f64,
    /// Sampling interval.
    pub dt: f64,
}

impl BirthDeathParams {
    pub fn new(lambda: f64, mu: f64, dt: f64) -> Result<Self, SimulateError> {
        let p = BirthDeathParams { lambda, mu, dt };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), SimulateError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.lambda) || !ok(self.mu) || !ok(self.dt) {
            return Err(SimulateError::BadParams(format!(
                "lambda={}, mu={}, dt={} must all be finite and positive",
                self.lambda, self.mu, self.dt
            )));
        }
        let (p01, p10) = transition_probs(self);
        if !(p01 > 0.0 && p01 < 1.0 && p10 > 0.0 && p10 < 1.0) {
            return Err(SimulateError::BadParams(format!(
                "derived probabilities p01={p01}, p10={p10} outside (0, 1)"
            )));
        }
        Ok(())
    }

    /// Parameters whose one-step flip probabilities are exactly `(p01, p10)`.
    /// Requires `p01 + p10 < 1`.
    pub fn from_flip_probs(p01: f64, p10: f64) -> Result<Self, SimulateError> {
        let mix = p01 + p10;
        if !(p01 > 0.0 && p10 > 0.0 && mix < 1.0) {
            return Err(SimulateError::BadParams(format!(
                "need p01, p10 > 0 and p01 + p10 < 1, got {p01}, {p10}"
            )));
        }
        // With r = lambda + mu, p01 + p10 = 1 - exp(-r dt).
        let (lambda, mu) = (p01 / mix, p10 / mix);
        let dt = -(1.0 - mix).ln();
        Self::new(lambda, mu, dt)
    }

    /// Built-in case `1..=5` with `p01 = p10`.
    pub fn case(index: usize) -> Result<Self, SimulateError> {
        let p = *CASE_FLIP_PROBS
            .get(index.wrapping_sub(1))
            .ok_or(SimulateError::UnknownCase(index))?;
        Self::from_flip_probs(p, p)
    }

    /// Stationary probability of a 1.
    pub fn stationary_one(&self) -> f64 {
        self.lambda / (self.lambda + self.mu)
    }
}

/// Exact one-step probabilities `(p01, p10)` of the sampled chain.
pub fn transition_probs(params: &BirthDeathParams) -> (f64, f64) {
    let r = params.lambda + params.mu;
    let mix = -(-r * params.dt).exp_m1();
    (params.lambda / r * mix, params.mu / r * mix)
}

/// SplitMix64 finalizer over `seed + (index + 1) * golden`.
pub fn split_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A raster-ordered sample of `len` chain steps starting from the
/// stationary law.
pub fn generate_sequence(params: &BirthDeathParams, len: usize, seed: u64) -> Result<Vec<u8>, SimulateError> {
    params.validate()?;
    let (p01, p10) = transition_probs(params);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return Ok(out);
    }
    let mut z = rng.random_bool(params.stationary_one()) as u8;
    out.push(z);
    for _ in 1..len {
        let flip = if z == 0 { p01 } else { p10 };
        if rng.random::<f64>() < flip {
            z ^= 1;
        }
        out.push(z);
    }
    Ok(out)
}

pub fn generate_image(
    params: &BirthDeathParams,
    height: usize,
    width: usize,
    seed: u64,
) -> Result<BinaryImage, SimulateError> {
    if height == 0 || width == 0 {
        return Err(ImageError::EmptyDimensions { height, width }.into());
    }
    let seq = generate_sequence(params, height * width, seed)?;
    Ok(BinaryImage::new(height, width, seq)?)
}

/// `count` images; image `i` uses seed `split_seed(seed, i)`.
pub fn generate_corpus(
    params: &BirthDeathParams,
    count: usize,
    height: usize,
    width: usize,
    seed: u64,
) -> Result<Vec<BinaryImage>, SimulateError> {
    params.validate()?;
    (0..count)
        .into_par_iter()
        .map(|i| generate_image(params, height, width, split_seed(seed, i as u64)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub generator: String,
    pub params: BirthDeathParams,
    pub p01: f64,
    pub p10: f64,
    pub height: usize,
    pub width: usize,
    pub seed: u64,
    pub files: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub seed: u64,
}

/// Writes `img_00000.pbm ...` plus `manifest.json` into `dir`.
pub fn export_corpus(
    dir: &Path,
    params: &BirthDeathParams,
    count: usize,
    height: usize,
    width: usize,
    seed: u64,
) -> Result<CorpusManifest, SimulateError> {
    let io = |path: &Path, source| SimulateError::Io {
        path: path.display().to_string(),
        source,
    };
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let corpus = generate_corpus(params, count, height, width, seed)?;
    let mut files = Vec::with_capacity(count);
    for (i, img) in corpus.iter().enumerate() {
        let name = format!("img_{i:05}.pbm");
        image::write_pbm_file(&dir.join(&name), img)?;
        files.push(ManifestEntry {
            file: name,
            seed: split_seed(seed, i as u64),
        });
    }
    let (p01, p10) = transition_probs(params);
    let manifest = CorpusManifest {
        generator: GENERATOR_VERSION.to_string(),
        params: *params,
        p01,
        p10,
        height,
        width,
        seed,
        files,
    };
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json).map_err(|e| io(&path, e))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// exp(Q dt) by a truncated Taylor series with scaling and squaring,
    /// independent of the closed form.
    fn matrix_exp(lambda: f64, mu: f64, dt: f64) -> [[f64; 2]; 2] {
        let steps = 20;
        let h = dt / (1u64 << steps) as f64;
        let q = [[-lambda * h, lambda * h], [mu * h, -mu * h]];
        let mut term = [[1.0, 0.0], [0.0, 1.0]];
        let mut sum = term;
        for n in 1..20 {
            let mut next = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    next[i][j] = (0..2).map(|l| term[i][l] * q[l][j]).sum::<f64>() / n as f64;
                }
            }
            term = next;
            for i in 0..2 {
                for j in 0..2 {
                    sum[i][j] += term[i][j];
                }
            }
        }
        for _ in 0..steps {
            let mut sq = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    sq[i][j] = (0..2).map(|l| sum[i][l] * sum[l][j]).sum();
                }
            }
            sum = sq;
        }
        sum
    }

    #[test]
    fn closed_form_matches_matrix_exponential() {
        let dt = -(0.6f64).ln() / 4.0;
        let p = BirthDeathParams::new(1.0, 3.0, dt).unwrap();
        let (p01, p10) = transition_probs(&p);
        assert!((p01 - 0.1).abs() < 1e-12);
        assert!((p10 - 0.3).abs() < 1e-12);
        let m = matrix_exp(1.0, 3.0, dt);
        assert!((m[0][1] - p01).abs() < 1e-9);
        assert!((m[1][0] - p10).abs() < 1e-9);
    }

    #[test]
    fn long_interval_mixes() {
        let p = BirthDeathParams::new(1.0, 3.0, 5.0).unwrap(); // r dt = 20
        let (p01, p10) = transition_probs(&p);
        assert!((p01 - 0.25).abs() < 1e-8);
        assert!((p10 - 0.75).abs() < 1e-8);
    }

    #[test]
    fn symmetric_rates() {
        for dt in [0.01, 0.3, 2.0] {
            let (a, b) = transition_probs(&BirthDeathParams::new(2.5, 2.5, dt).unwrap());
            assert_eq!(a, b);
        }
    }

    #[test]
    fn presets_hit_target_probs() {
        for (i, &target) in CASE_FLIP_PROBS.iter().enumerate() {
            let p = BirthDeathParams::case(i + 1).unwrap();
            let (p01, p10) = transition_probs(&p);
            assert!((p01 - target).abs() < 1e-12);
            assert!((p10 - target).abs() < 1e-12);
        }
        assert!(matches!(BirthDeathParams::case(0), Err(SimulateError::UnknownCase(0))));
        assert!(matches!(BirthDeathParams::case(6), Err(SimulateError::UnknownCase(6))));
    }

    #[test]
    fn invalid_params() {
        assert!(BirthDeathParams::new(0.0, 1.0, 1.0).is_err());
        assert!(BirthDeathParams::new(1.0, -1.0, 1.0).is_err());
        assert!(BirthDeathParams::new(1.0, 1.0, f64::NAN).is_err());
        assert!(BirthDeathParams::from_flip_probs(0.6, 0.5).is_err());
    }

    #[test]
    fn deterministic_for_seed() {
        let p = BirthDeathParams::case(2).unwrap();
        let a = generate_image(&p, 30, 40, 99).unwrap();
        let b = generate_image(&p, 30, 40, 99).unwrap();
        let c = generate_image(&p, 30, 40, 100).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(generate_image(&p, 0, 4, 1).is_err());
    }

    #[test]
    fn corpus_uses_split_seeds() {
        let p = BirthDeathParams::case(3).unwrap();
        let corpus = generate_corpus(&p, 1, 10, 10, 42).unwrap();
        assert_eq!(corpus[0], generate_image(&p, 10, 10, split_seed(42, 0)).unwrap());
        assert_ne!(split_seed(42, 0), split_seed(42, 1));
    }

    #[test]
    fn symmetric_stationary_fraction() {
        let p = BirthDeathParams::case(4).unwrap();
        let img = generate_image(&p, 1000, 1000, 5).unwrap();
        let frac = img.ones() as f64 / img.len() as f64;
        assert!((frac - 0.5).abs() < 0.01, "{frac}");
    }

    #[test]
    fn export_writes_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let p = BirthDeathParams::case(1).unwrap();
        let m = export_corpus(dir.path(), &p, 3, 5, 6, 7).unwrap();
        assert_eq!(m.files.len(), 3);
        let img = image::read_pbm_file(&dir.path().join(&m.files[2].file)).unwrap();
        assert_eq!(img, generate_image(&p, 5, 6, m.files[2].seed).unwrap());
        let text = fs::read_to_string(dir.path().join("manifest.json")).unwrap();
        let back: CorpusManifest = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }
}
