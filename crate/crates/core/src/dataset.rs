//! Question records, JSON-Lines dataset I/O and seeded splitting.
//!
//! A dataset file holds one JSON object per line:
//!
//! ```text
//! {"id":"q1","question":"who wrote hamlet?","gold_answers":["Shakespeare"],"teacher_score":0.91}
//! ```
//!
//! Keys: `id` and `question` are required; `candidates`, `gold_answers`,
//! `teacher_score`, `correct` and `wellformed` are optional. Unknown keys are
//! rejected.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single question and whatever the pipeline already knows about it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Question {
    pub id: String,
    #[serde(rename = "question")]
    pub text: String,
    /// Pre-extracted answer candidates. When absent, a lexical teacher
    /// retrieves them from its corpus.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gold_answers: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub teacher_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correct: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wellformed: Option<f64>,
}

impl Question {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Question {
            id: id.into(),
            text: text.into(),
            candidates: None,
            gold_answers: Vec::new(),
            teacher_score: None,
            correct: None,
            wellformed: None,
        }
    }

    pub fn with_teacher_score(mut self, score: f64) -> Self {
        self.teacher_score = Some(score);
        self
    }

    pub fn with_correct(mut self, correct: bool) -> Self {
        self.correct = Some(correct);
        self
    }

    pub fn with_candidates<S: Into<String>>(mut self, candidates: impl IntoIterator<Item = S>) -> Self {
        self.candidates = Some(candidates.into_iter().map(Into::into).collect());
        self
    }

    pub fn with_gold_answers<S: Into<String>>(mut self, gold: impl IntoIterator<Item = S>) -> Self {
        self.gold_answers = gold.into_iter().map(Into::into).collect();
        self
    }

    /// Checks the per-record invariants.
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::InvalidArgument("question id must be nonempty".into()));
        }
        for (field, value) in [("teacher_score", self.teacher_score), ("wellformed", self.wellformed)] {
            if let Some(v) = value {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::OutOfRange {
                        id: self.id.clone(),
                        field,
                        value: v,
                    });
                }
            }
        }
        Ok(())
    }
}

/// The answer candidates `s1..sm` the answer model sees for one question.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CandidateSet {
    pub question_id: String,
    pub candidates: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    Train,
    Dev,
    Test,
    Unsplit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<Question>,
    split: SplitTag,
}

impl Dataset {
    /// Builds a dataset, rejecting duplicate ids and out-of-range scores.
    pub fn new(records: Vec<Question>, split: SplitTag) -> Result<Self> {
        let mut seen = HashMap::with_capacity(records.len());
        for q in &records {
            q.validate()?;
            if seen.insert(q.id.as_str(), ()).is_some() {
                return Err(Error::DuplicateId(q.id.clone()));
            }
        }
        Ok(Dataset { records, split })
    }

    pub fn records(&self) -> &[Question] {
        &self.records
    }

    pub fn into_records(self) -> Vec<Question> {
        self.records
    }

    pub fn split_tag(&self) -> SplitTag {
        self.split
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Question> {
        self.records.iter()
    }

    /// Serializes to JSON Lines, one record per line, in dataset order.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for q in &self.records {
            out.push_str(&serde_json::to_string(q).expect("question serializes"));
            out.push('\n');
        }
        out
    }

    /// Parses JSON Lines text. Blank lines are skipped but still counted.
    pub fn from_jsonl(text: &str) -> Result<Self> {
        parse_lines(text.lines().map(|l| Ok(l.to_owned())))
    }
}

impl<'a> IntoIterator for &'a Dataset {
    type Item = &'a Question;
    type IntoIter = std::slice::Iter<'a, Question>;

    fn into_iter(self) -> Self::IntoIter {
        self.records.iter()
    }
}

fn parse_lines(lines: impl Iterator<Item = std::io::Result<String>>) -> Result<Dataset> {
    let mut records = Vec::new();
    let mut first_seen: HashMap<String, usize> = HashMap::new();
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let q: Question = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        q.validate().map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        if let Some(prev) = first_seen.insert(q.id.clone(), lineno) {
            return Err(Error::Parse {
                line: lineno,
                message: format!("duplicate question id {:?} (first seen on line {prev})", q.id),
            });
        }
        records.push(q);
    }
    Ok(Dataset {
        records,
        split: SplitTag::Unsplit,
    })
}

/// Reads a JSON-Lines dataset, preserving line order.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_lines(BufReader::new(file).lines())
}

pub fn write_dataset(path: impl AsRef<Path>, ds: &Dataset) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(ds.to_jsonl().as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Fractions of a three-way split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitFractions {
    pub train: f64,
    pub dev: f64,
    pub test: f64,
}

impl SplitFractions {
    pub fn new(train: f64, dev: f64, test: f64) -> Self {
        SplitFractions { train, dev, test }
    }
}

/// Seeded train/dev/test partition.
///
/// Sizes are `floor(N * train)`, `floor(N * dev)` and the remainder. Records
/// are assigned by a seeded permutation; each split keeps the input order
/// of its members.
pub fn split_dataset(ds: &Dataset, fractions: SplitFractions, seed: u64) -> Result<(Dataset, Dataset, Dataset)> {
    let SplitFractions { train, dev, test } = fractions;
    for (name, f) in [("train", train), ("dev", dev), ("test", test)] {
        if !(f >= 0.0) {
            return Err(Error::InvalidArgument(format!("{name} fraction must be >= 0, got {f}")));
        }
    }
    let sum = train + dev + test;
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("split fractions must sum to 1, got {sum}")));
    }

    let n = ds.len();
    // The epsilon absorbs products like 0.29 * 100 = 28.999999999999996.
    let n_train = ((n as f64) * train + 1e-9).floor() as usize;
    let n_dev = (((n as f64) * dev + 1e-9).floor() as usize).min(n - n_train.min(n));
    let n_train = n_train.min(n);

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let take = |idx: &mut [usize], tag| {
        idx.sort_unstable();
        let records = idx.iter().map(|&i| ds.records[i].clone()).collect();
        Dataset { records, split: tag }
    };
    let (tr, rest) = order.split_at_mut(n_train);
    let (dv, te) = rest.split_at_mut(n_dev);
    Ok((take(tr, SplitTag::Train), take(dv, SplitTag::Dev), take(te, SplitTag::Test)))
}
