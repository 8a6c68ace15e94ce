//! Tokenization and hashed bag-of-ngrams features.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_DIMENSION: usize = 1 << 18;

/// Hashed feature space. Vectors are always L2-normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub dimension: usize,
    pub use_bigrams: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            dimension: DEFAULT_DIMENSION,
            use_bigrams: true,
        }
    }
}

impl FeatureConfig {
    pub fn new(dimension: usize, use_bigrams: bool) -> Result<Self> {
        let cfg = FeatureConfig { dimension, use_bigrams };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension < 2 || !self.dimension.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "feature dimension must be a power of two >= 2, got {}",
                self.dimension
            )));
        }
        if self.dimension > u32::MAX as usize {
            return Err(Error::InvalidArgument("feature dimension exceeds 2^32".into()));
        }
        Ok(())
    }
}

/// Sparse vector with strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    entries: Vec<(u32, f64)>,
}

impl SparseVector {
    /// Builds from `(index, value)` pairs; duplicate indices are summed.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, f64)>) -> Self {
        let mut map = BTreeMap::new();
        for (i, v) in pairs {
            *map.entry(i).or_insert(0.0) += v;
        }
        SparseVector {
            entries: map.into_iter().collect(),
        }
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn get(&self, index: u32) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map(|pos| self.entries[pos].1)
            .unwrap_or(0.0)
    }

    /// Dot product with a dense vector. Summation runs in index order.
    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| dense[i as usize] * v).sum()
    }
}

/// Lowercases, splits on Unicode whitespace and strips ASCII punctuation
/// from both ends of each piece. Interior punctuation is kept.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split_whitespace()
        .map(|piece| piece.trim_matches(|c: char| c.is_ascii_punctuation()))
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// Unigrams plus, if enabled, adjacent pairs joined by `_`.
pub fn ngrams(tokens: &[String], use_bigrams: bool) -> Vec<String> {
    let mut out = tokens.to_vec();
    if use_bigrams {
        out.extend(tokens.windows(2).map(|w| format!("{}_{}", w[0], w[1])));
    }
    out
}

pub fn feature_index(feature: &str, dimension: usize) -> u32 {
    (fnv1a64(feature.as_bytes()) % dimension as u64) as u32
}

/// Hashed, count-accumulated, unit-L2 feature vector of a text. Empty
/// token lists map to the zero vector.
pub fn featurize_text(text: &str, cfg: &FeatureConfig) -> SparseVector {
    let grams = ngrams(&tokenize(text), cfg.use_bigrams);
    let mut v = SparseVector::from_pairs(grams.iter().map(|g| (feature_index(g, cfg.dimension), 1.0)));
    let norm = v.norm();
    if norm > 0.0 {
        for e in &mut v.entries {
            e.1 /= norm;
        }
    }
    v
}

pub fn featurize(question: &crate::dataset::Question, cfg: &FeatureConfig) -> SparseVector {
    featurize_text(&question.text, cfg)
}
