use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::features::{featurize, FeatureConfig, SparseVector};
use super::loss::{sigmoid, Head};
use crate::dataset::{Dataset, Question};
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Linear question filter with a sigmoid output.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterModel {
    pub head: Head,
    /// Answer-model threshold a distilled classification head was trained
    /// against. Absent for the regression head and for classifiers trained
    /// on correctness labels.
    pub tau1_trained: Option<f64>,
    pub features: FeatureConfig,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub seed: u64,
    pub epochs_trained: u32,
}

impl FilterModel {
    /// All-zero model; predicts 0.5 everywhere.
    pub fn zeros(head: Head, tau1_trained: Option<f64>, features: FeatureConfig, seed: u64) -> Result<Self> {
        features.validate()?;
        let model = FilterModel {
            head,
            tau1_trained,
            features,
            weights: vec![0.0; features.dimension],
            bias: 0.0,
            seed,
            epochs_trained: 0,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        self.features.validate()?;
        if self.weights.len() != self.features.dimension {
            return Err(Error::InvalidModel(format!(
                "weights length {} does not match dimension {}",
                self.weights.len(),
                self.features.dimension
            )));
        }
        if let Some(t) = self.tau1_trained {
            if self.head != Head::Classification {
                return Err(Error::InvalidModel("tau1_trained is only meaningful for the classification head".into()));
            }
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::InvalidModel(format!("tau1_trained {t} outside [0,1]")));
            }
        }
        if !self.bias.is_finite() || self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidModel("non-finite parameter".into()));
        }
        Ok(())
    }

    pub fn logit(&self, x: &SparseVector) -> f64 {
        x.dot(&self.weights) + self.bias
    }

    pub fn predict_features(&self, x: &SparseVector) -> f64 {
        sigmoid(self.logit(x))
    }

    /// Student score `F(q)`.
    pub fn predict(&self, question: &Question) -> f64 {
        self.predict_features(&featurize(question, &self.features))
    }

    pub fn predict_all(&self, ds: &Dataset) -> Vec<f64> {
        ds.iter().map(|q| self.predict(q)).collect()
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            head: self.head,
            tau1_trained: self.tau1_trained,
            dimension: self.features.dimension,
            use_bigrams: self.features.use_bigrams,
            weights: self.weights.clone(),
            bias: self.bias,
            seed: self.seed,
            epochs_trained: self.epochs_trained,
        };
        serde_json::to_string(&file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Header {
            format_version: u32,
        }
        let parse_err = |e: serde_json::Error| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        };
        let header: Header = serde_json::from_str(text).map_err(parse_err)?;
        if header.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                found: header.format_version,
                expected: MODEL_FORMAT_VERSION,
            });
        }
        let file: ModelFile = serde_json::from_str(text).map_err(parse_err)?;
        let model = FilterModel {
            head: file.head,
            tau1_trained: file.tau1_trained,
            features: FeatureConfig {
                dimension: file.dimension,
                use_bigrams: file.use_bigrams,
            },
            weights: file.weights,
            bias: file.bias,
            seed: file.seed,
            epochs_trained: file.epochs_trained,
        };
        model.validate()?;
        Ok(model)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format_version: u32,
    head: Head,
    tau1_trained: Option<f64>,
    dimension: usize,
    use_bigrams: bool,
    weights: Vec<f64>,
    bias: f64,
    seed: u64,
    epochs_trained: u32,
}

pub fn save_model(model: &FilterModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = model.to_json();
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<FilterModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    FilterModel::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_model() -> FilterModel {
        let mut m = FilterModel::zeros(Head::Classification, Some(0.5), FeatureConfig::new(16, true).unwrap(), 9).unwrap();
        for (i, w) in m.weights.iter_mut().enumerate() {
            *w = (i as f64 * 0.37).sin() / 3.0;
        }
        m.bias = -0.1 / 3.0;
        m
    }

    #[test]
    fn zero_model_predicts_half() {
        let m = FilterModel::zeros(Head::Regression, None, FeatureConfig::default(), 0).unwrap();
        assert_eq!(m.predict(&Question::new("a", "anything at all")), 0.5);
    }

    #[test]
    fn empty_question_gives_sigmoid_of_bias() {
        let mut m = small_model();
        m.bias = 1.25;
        assert_eq!(m.predict(&Question::new("a", "")), sigmoid(1.25));
        m.bias = 20.0;
        assert!(m.predict(&Question::new("a", "")) > 0.9999);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let m = small_model();
        let back = FilterModel::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        for text in ["a b c", "what is love", "", "x y z w", "why?"] {
            let q = Question::new("q", text);
            assert_eq!(back.predict(&q).to_bits(), m.predict(&q).to_bits());
        }
    }

    #[test]
    fn truncated_file_is_parse_error() {
        let json = small_model().to_json();
        let err = FilterModel::from_json(&json[..json.len() / 2]).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
    }

    #[test]
    fn version_mismatch_names_versions() {
        let json = small_model().to_json().replace("\"format_version\":1", "\"format_version\":7");
        let err = FilterModel::from_json(&json).unwrap_err().to_string();
        assert!(err.contains('7') && err.contains('1'), "{err}");
    }

    #[test]
    fn wrong_weight_length_rejected() {
        let json = small_model().to_json().replace("\"dimension\":16", "\"dimension\":32");
        let err = FilterModel::from_json(&json).unwrap_err();
        assert!(matches!(err, Error::InvalidModel(_)), "{err}");
    }

    #[test]
    fn regression_head_rejects_tau1() {
        let json = small_model().to_json().replace("\"classification\"", "\"regression\"");
        assert!(FilterModel::from_json(&json).is_err());
    }
}
