//! Seeded synthetic datasets with a known, hidden teacher.
//!
//! Questions are random token sequences over a seeded vocabulary. The
//! teacher is a logistic model over hashed unigram features, so its score
//! is a pure function of the question text. Correctness labels are drawn
//! `Bernoulli(teacher_score)`, which makes the teacher perfectly calibrated.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Question, SplitTag};
use crate::error::{Error, Result};
use crate::filter::features::{featurize_text, FeatureConfig};
use crate::filter::loss::sigmoid;

const VOCAB_STREAM: u64 = 1;
const WEIGHT_STREAM: u64 = 2;
const QUESTION_STREAM: u64 = 3;
const PERTURB_STREAM: u64 = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub vocab_size: usize,
    pub min_tokens: usize,
    pub max_tokens: usize,
    /// Stddev of Gaussian noise added to each stored teacher score.
    pub noise_std: f64,
    /// Stddev of each teacher weight.
    pub weight_scale: f64,
    pub bias: f64,
    /// Feature space of the hidden teacher.
    pub features: FeatureConfig,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            vocab_size: 20,
            min_tokens: 4,
            max_tokens: 10,
            noise_std: 0.0,
            weight_scale: 0.7,
            bias: 0.0,
            features: FeatureConfig {
                dimension: 1 << 12,
                use_bigrams: false,
            },
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        self.features.validate()?;
        if self.vocab_size == 0 || self.min_tokens == 0 || self.min_tokens > self.max_tokens {
            return Err(Error::InvalidArgument(
                "synthetic config needs vocab_size >= 1 and 1 <= min_tokens <= max_tokens".into(),
            ));
        }
        if !(self.noise_std >= 0.0) || !(self.weight_scale >= 0.0) {
            return Err(Error::InvalidArgument("noise_std and weight_scale must be >= 0".into()));
        }
        Ok(())
    }
}

/// The hidden teacher `sigmoid(w . x(q) + b)` together with the vocabulary
/// its questions are drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTeacherParams {
    pub vocab: Vec<String>,
    pub features: FeatureConfig,
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl SyntheticTeacherParams {
    pub fn sample(cfg: &SynthConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(VOCAB_STREAM);
        let vocab = sample_vocab(&mut rng, cfg.vocab_size);

        rng.set_stream(WEIGHT_STREAM);
        let mut weights = (0..cfg.features.dimension)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                cfg.weight_scale * z
            })
            .collect::<Vec<f64>>();

        // Center the weights the vocabulary can reach so that a random
        // question sits near the decision boundary on average.
        let mut reachable: Vec<usize> = vocab
            .iter()
            .flat_map(|w| featurize_text(w, &cfg.features).entries().iter().map(|&(i, _)| i as usize).collect::<Vec<_>>())
            .collect();
        reachable.sort_unstable();
        reachable.dedup();
        let mean = reachable.iter().map(|&i| weights[i]).sum::<f64>() / reachable.len() as f64;
        for &i in &reachable {
            weights[i] -= mean;
        }
        Ok(SyntheticTeacherParams {
            vocab,
            features: cfg.features,
            weights,
            bias: cfg.bias,
        })
    }

    /// Noise-free teacher score of a text.
    pub fn score_text(&self, text: &str) -> f64 {
        let x = featurize_text(text, &self.features);
        sigmoid(x.dot(&self.weights) + self.bias)
    }

    pub fn score(&self, q: &Question) -> f64 {
        self.score_text(&q.text)
    }

    /// A related teacher over the same vocabulary: every weight gets
    /// independent `N(0, magnitude^2)` noise and the bias moves by
    /// `bias_shift`.
    pub fn shifted(&self, magnitude: f64, bias_shift: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(PERTURB_STREAM);
        let weights = self
            .weights
            .iter()
            .map(|w| {
                let z: f64 = StandardNormal.sample(&mut rng);
                w + magnitude * z
            })
            .collect();
        SyntheticTeacherParams {
            vocab: self.vocab.clone(),
            features: self.features,
            weights,
            bias: self.bias + bias_shift,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("teacher params serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: SyntheticTeacherParams = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        p.features.validate()?;
        if p.weights.len() != p.features.dimension {
            return Err(Error::InvalidArgument(format!(
                "teacher weights length {} does not match dimension {}",
                p.weights.len(),
                p.features.dimension
            )));
        }
        Ok(p)
    }
}

fn sample_vocab(rng: &mut ChaCha8Rng, size: usize) -> Vec<String> {
    let mut vocab: Vec<String> = Vec::with_capacity(size);
    let mut seen = std::collections::HashSet::new();
    while vocab.len() < size {
        let len = rng.random_range(3..=7);
        let word: String = (0..len).map(|_| char::from(b'a' + rng.random_range(0..26u8))).collect();
        if seen.insert(word.clone()) {
            vocab.push(word);
        }
    }
    vocab
}

/// Draws `n` questions labeled by `teacher`. Ids are `{prefix}{index}`.
pub fn generate_from_teacher(
    n: usize,
    cfg: &SynthConfig,
    teacher: &SyntheticTeacherParams,
    seed: u64,
    id_prefix: &str,
) -> Result<Dataset> {
    cfg.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgument("synthetic dataset size must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(QUESTION_STREAM);

    let mut records = Vec::with_capacity(n);
    for i in 0..n {
        let len = rng.random_range(cfg.min_tokens..=cfg.max_tokens);
        let tokens: Vec<&str> = (0..len)
            .map(|_| teacher.vocab[rng.random_range(0..teacher.vocab.len())].as_str())
            .collect();
        let text = format!("{}?", tokens.join(" "));

        let mut score = teacher.score_text(&text);
        if cfg.noise_std > 0.0 {
            let z: f64 = StandardNormal.sample(&mut rng);
            score = (score + cfg.noise_std * z).clamp(0.0, 1.0);
        }
        let correct = rng.random::<f64>() < score;
        let wellformed: f64 = rng.random();

        let mut q = Question::new(format!("{id_prefix}{i:06}"), text)
            .with_teacher_score(score)
            .with_correct(correct);
        q.wellformed = Some(wellformed);
        records.push(q);
    }
    Dataset::new(records, SplitTag::Unsplit)
}

/// Samples a hidden teacher and `n` questions scored by it.
pub fn generate_synthetic(n: usize, cfg: &SynthConfig, seed: u64) -> Result<(Dataset, SyntheticTeacherParams)> {
    let teacher = SyntheticTeacherParams::sample(cfg, seed)?;
    let ds = generate_from_teacher(n, cfg, &teacher, seed, "syn-")?;
    Ok((ds, teacher))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_and_in_range() {
        let cfg = SynthConfig::default();
        let (a, ta) = generate_synthetic(100, &cfg, 3).unwrap();
        let (b, tb) = generate_synthetic(100, &cfg, 3).unwrap();
        assert_eq!(ta, tb);
        for (x, y) in a.iter().zip(&b) {
            let s = x.teacher_score.unwrap();
            assert!((0.0..=1.0).contains(&s));
            assert_eq!(s.to_bits(), y.teacher_score.unwrap().to_bits());
            assert_eq!(x, y);
        }
    }

    #[test]
    fn noise_free_scores_are_the_teacher_function() {
        let (ds, teacher) = generate_synthetic(200, &SynthConfig::default(), 11).unwrap();
        for q in &ds {
            assert_eq!(q.teacher_score.unwrap(), teacher.score(q));
        }
    }

    #[test]
    fn noisy_scores_stay_clamped() {
        let cfg = SynthConfig {
            noise_std: 0.5,
            ..SynthConfig::default()
        };
        let (ds, teacher) = generate_synthetic(500, &cfg, 2).unwrap();
        assert!(ds.iter().all(|q| (0.0..=1.0).contains(&q.teacher_score.unwrap())));
        assert!(ds.iter().any(|q| q.teacher_score.unwrap() != teacher.score(q)));
    }

    #[test]
    fn correct_labels_follow_the_score() {
        let (ds, _) = generate_synthetic(10_000, &SynthConfig::default(), 3).unwrap();
        let mid: Vec<bool> = ds
            .iter()
            .filter(|q| (0.4..=0.6).contains(&q.teacher_score.unwrap()))
            .map(|q| q.correct.unwrap())
            .collect();
        assert!(mid.len() > 500, "{}", mid.len());
        let mean = mid.iter().filter(|&&c| c).count() as f64 / mid.len() as f64;
        assert!((0.45..=0.55).contains(&mean), "{mean}");
    }

    #[test]
    fn scores_are_spread() {
        let (ds, _) = generate_synthetic(2000, &SynthConfig::default(), 5).unwrap();
        let above = ds.iter().filter(|q| q.teacher_score.unwrap() > 0.5).count();
        assert!((500..1500).contains(&above), "{above}");
    }

    #[test]
    fn centered_teacher_is_roughly_balanced() {
        for seed in 0..8 {
            let (ds, _) = generate_synthetic(1000, &SynthConfig::default(), seed).unwrap();
            let above = ds.iter().filter(|q| q.teacher_score.unwrap() > 0.5).count();
            assert!((350..650).contains(&above), "seed {seed}: {above}");
        }
    }

    #[test]
    fn shifted_teacher_keeps_vocab() {
        let t = SyntheticTeacherParams::sample(&SynthConfig::default(), 1).unwrap();
        let s = t.shifted(0.5, 0.3, 2);
        assert_eq!(s.vocab, t.vocab);
        assert_ne!(s.weights, t.weights);
        assert_eq!(s.bias, t.bias + 0.3);
        assert_eq!(SyntheticTeacherParams::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn zero_questions_rejected() {
        assert!(generate_synthetic(0, &SynthConfig::default(), 0).is_err());
    }
}
