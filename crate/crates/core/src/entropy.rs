//! Order-k Markov models of binary sequences, entropy-rate estimates, the
//! closed-form rate of a two-state chain, and numeric checks of the two
//! shape/probability inequalities used in the asymptotic argument.
//!
//! All logarithms are base 2.

use thiserror::Error;

use crate::codec::{shape_log2_prob, DecompositionStats};

pub const MAX_ORDER: usize = 16;
/// Additive (Krichevsky-Trofimov) smoothing constant.
pub const DEFAULT_SMOOTHING: f64 = 0.5;
/// Slack allowed when deciding whether an inequality holds, in bits.
pub const LEMMA_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EntropyError {
    #[error("sequence of length {len} is too short for order {k}")]
    TooShort { len: usize, k: usize },
    #[error("order {0} outside 0..={MAX_ORDER}")]
    OrderOutOfRange(usize),
    #[error("model order {model} does not match expected order {expected}")]
    OrderMismatch { model: usize, expected: usize },
    #[error("chain with p01={p01}, p10={p10} is not ergodic")]
    NonErgodic { p01: f64, p10: f64 },
    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),
}

/// Binary entropy h(p) in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Counts of next symbol given the previous `k` symbols. Contexts are packed
/// with the most recent symbol in the lowest bit.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovModel {
    k: usize,
    counts: Vec<[u64; 2]>,
    smoothing: f64,
}

impl MarkovModel {
    pub fn new(k: usize) -> Result<Self, EntropyError> {
        if k > MAX_ORDER {
            return Err(EntropyError::OrderOutOfRange(k));
        }
        Ok(MarkovModel {
            k,
            counts: vec![[0, 0]; 1 << k],
            smoothing: DEFAULT_SMOOTHING,
        })
    }

    /// Tallies all `len - k` sliding (context, next) pairs.
    pub fn fit(seq: &[u8], k: usize) -> Result<Self, EntropyError> {
        let mut model = Self::new(k)?;
        if seq.len() <= k {
            return Err(EntropyError::TooShort { len: seq.len(), k });
        }
        model.update(seq);
        Ok(model)
    }

    /// Adds the sliding counts of another sequence.
    pub fn update(&mut self, seq: &[u8]) {
        if seq.len() <= self.k {
            return;
        }
        let mut ctx = 0u32;
        for &z in &seq[..self.k] {
            ctx = self.push_context(ctx, z);
        }
        for &z in &seq[self.k..] {
            self.counts[ctx as usize][z as usize] += 1;
            ctx = self.push_context(ctx, z);
        }
    }

    /// Merges counts from a model of the same order.
    pub fn merge(&mut self, other: &MarkovModel) -> Result<(), EntropyError> {
        if other.k != self.k {
            return Err(EntropyError::OrderMismatch {
                model: other.k,
                expected: self.k,
            });
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            a[0] += b[0];
            a[1] += b[1];
        }
        Ok(())
    }

    pub fn with_smoothing(mut self, smoothing: f64) -> Self {
        assert!(smoothing > 0.0, "smoothing must be positive");
        self.smoothing = smoothing;
        self
    }

    pub fn order(&self) -> usize {
        self.k
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn counts(&self, ctx: u32) -> [u64; 2] {
        self.counts[ctx as usize]
    }

    pub fn observations(&self) -> u64 {
        self.counts.iter().map(|c| c[0] + c[1]).sum()
    }

    #[inline]
    pub fn push_context(&self, ctx: u32, z: u8) -> u32 {
        if self.k == 0 {
            0
        } else {
            ((ctx << 1) | z as u32) & ((1u32 << self.k) - 1)
        }
    }

    /// Smoothed P(z | ctx).
    #[inline]
    pub fn prob(&self, ctx: u32, z: u8) -> f64 {
        let c = self.counts[ctx as usize];
        (c[z as usize] as f64 + self.smoothing) / ((c[0] + c[1]) as f64 + 2.0 * self.smoothing)
    }

    #[inline]
    pub fn log2_prob(&self, ctx: u32, z: u8) -> f64 {
        self.prob(ctx, z).log2()
    }

    /// Sum of log2 P(z_j | previous k) over positions `k..len`, i.e. the
    /// log of the model product with the first `k` symbols as initial state.
    pub fn log2_likelihood(&self, seq: &[u8]) -> Result<f64, EntropyError> {
        if seq.len() <= self.k {
            return Err(EntropyError::TooShort {
                len: seq.len(),
                k: self.k,
            });
        }
        let mut ctx = 0u32;
        for &z in &seq[..self.k] {
            ctx = self.push_context(ctx, z);
        }
        // log2 of a product of many probabilities: accumulate per context
        // and symbol, then multiply by the log once.
        let mut tally = vec![[0u64; 2]; self.counts.len()];
        for &z in &seq[self.k..] {
            tally[ctx as usize][z as usize] += 1;
            ctx = self.push_context(ctx, z);
        }
        Ok(tally
            .iter()
            .enumerate()
            .flat_map(|(c, t)| {
                (0..2u8)
                    .filter(move |&z| t[z as usize] > 0)
                    .map(move |z| t[z as usize] as f64 * self.log2_prob(c as u32, z))
            })
            .sum())
    }
}

/// Empirical entropy rate in bits per symbol: the mean of
/// `-log2 P(z_j | z_{j-k}..z_{j-1})` over the `len - k` scored positions.
pub fn entropy_rate_estimate(model: &MarkovModel, seq: &[u8]) -> Result<f64, EntropyError> {
    let ll = model.log2_likelihood(seq)?;
    Ok(-ll / (seq.len() - model.order()) as f64)
}

/// Fits an order-`k` model on `seq` and scores the same sequence.
pub fn estimate_entropy_rate(seq: &[u8], k: usize) -> Result<f64, EntropyError> {
    let model = MarkovModel::fit(seq, k)?;
    entropy_rate_estimate(&model, seq)
}

/// Entropy rate of a stationary two-state chain with flip probabilities
/// `p01` (0 -> 1) and `p10` (1 -> 0).
pub fn analytic_entropy_rate(p01: f64, p10: f64) -> Result<f64, EntropyError> {
    let inside = |p: f64| p > 0.0 && p < 1.0;
    if !inside(p01) || !inside(p10) {
        return Err(EntropyError::NonErgodic { p01, p10 });
    }
    let pi0 = p10 / (p01 + p10);
    let pi1 = p01 / (p01 + p10);
    Ok(pi0 * binary_entropy(p01) + pi1 * binary_entropy(p10))
}

/// Outcome of checking `lhs <= rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// rhs - lhs
    pub slack: f64,
}

impl LemmaReport {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        LemmaReport {
            lhs,
            rhs,
            holds: lhs <= rhs + LEMMA_TOLERANCE,
            slack: rhs - lhs,
        }
    }
}

/// Checks `log2 Q_k(z | w_1) <= sum_{l,w} c_lw log2(alpha / c_lw)`.
///
/// The left side is the model product taken in decomposition order: each
/// shape's pixels (row-major within the shape) are scored given the `k`
/// raster bits before its anchor, chaining through the shape. For shapes one
/// row tall this is exactly the raster-order product. `alpha` is the largest
/// per-group sum of `P(s_i | w_i)`, so every group mean is at most
/// `alpha / c_lw`.
pub fn verify_lemma1(
    stats: &DecompositionStats,
    model: &MarkovModel,
    seq: &[u8],
) -> Result<LemmaReport, EntropyError> {
    if model.order() != stats.k {
        return Err(EntropyError::OrderMismatch {
            model: model.order(),
            expected: stats.k,
        });
    }
    if seq.len() != stats.pixels {
        return Err(EntropyError::Inconsistent(format!(
            "sequence has {} symbols, stats cover {}",
            seq.len(),
            stats.pixels
        )));
    }
    let mut lhs = 0.0;
    let mut area = 0usize;
    for pc in &stats.placements {
        if pc.anchor + (pc.height - 1) * stats.image_width + pc.width > seq.len() {
            return Err(EntropyError::Inconsistent("placement outside sequence".into()));
        }
        lhs += shape_log2_prob(model, pc.context, pc.cells(stats.image_width).map(|i| seq[i]));
        area += pc.size();
    }
    if area != seq.len() {
        return Err(EntropyError::Inconsistent(format!(
            "shapes cover {area} of {} pixels",
            seq.len()
        )));
    }
    let rhs = stats
        .groups
        .values()
        .map(|g| {
            let c = g.count as f64;
            c * (stats.log2_alpha - c.log2())
        })
        .sum();
    Ok(LemmaReport::new(lhs, rhs))
}

/// Checks `sum c_lw log2(c / c_lw) <= k c + (t + c) log2(1 + c/t) + c log2(t/c)`.
pub fn verify_lemma2(stats: &DecompositionStats, t: usize, k: usize) -> Result<LemmaReport, EntropyError> {
    let c = stats.groups.values().map(|g| g.count).sum::<u64>() as usize;
    if c == 0 {
        return Err(EntropyError::Inconsistent("no shapes".into()));
    }
    if c > t {
        return Err(EntropyError::Inconsistent(format!("{c} shapes for {t} pixels")));
    }
    let (cf, tf) = (c as f64, t as f64);
    let lhs = stats
        .groups
        .values()
        .map(|g| {
            let n = g.count as f64;
            n * (cf / n).log2()
        })
        .sum();
    let rhs = k as f64 * cf + (tf + cf) * (1.0 + cf / tf).log2() + cf * (tf / cf).log2();
    Ok(LemmaReport::new(lhs, rhs))
}
