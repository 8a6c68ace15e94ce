//! The teacher side: a toy retrieve / split / answer pipeline and the
//! alternative score sources (replayed logs, synthetic teacher).
//!
//! The answer model scores each candidate against the question and keeps
//! the best one; `sigma` is that maximum, and the question is answered only
//! when `sigma > tau1`.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{CandidateSet, Dataset, Question};
use crate::error::{Error, Result};
use crate::filter::features::tokenize;
use crate::synthetic::SyntheticTeacherParams;

/// Output of the answer model for one question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub question_id: String,
    pub sigma: f64,
    pub best_candidate_index: Option<usize>,
    pub answered: bool,
    pub correct: Option<bool>,
}

impl Decision {
    /// Same decision re-thresholded at `tau1`.
    pub fn at_threshold(&self, tau1: f64) -> Decision {
        Decision {
            answered: self.sigma > tau1,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocumentLine {
    doc_id: String,
    text: String,
}

#[derive(Debug, Clone)]
pub struct Document {
    pub doc_id: String,
    pub text: String,
    tokens: HashSet<String>,
}

/// Document store searched by [`retrieve`].
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    documents: Vec<Document>,
}

impl Corpus {
    pub fn new<I, S, T>(docs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: Into<String>,
    {
        let mut seen = HashSet::new();
        let mut documents = Vec::new();
        for (id, text) in docs {
            let (doc_id, text) = (id.into(), text.into());
            if !seen.insert(doc_id.clone()) {
                return Err(Error::InvalidArgument(format!("duplicate doc_id {doc_id:?}")));
            }
            let tokens = tokenize(&text).into_iter().collect();
            documents.push(Document { doc_id, text, tokens });
        }
        Ok(Corpus { documents })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    fn get(&self, doc_id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.doc_id == doc_id)
    }
}

/// Reads a corpus file: JSON Lines with keys `doc_id` and `text`.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut docs = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: DocumentLine = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        docs.push((doc.doc_id, doc.text));
    }
    Corpus::new(docs)
}

/// Top-`k` documents by the fraction of question tokens they contain,
/// ties broken by ascending `doc_id`.
pub fn retrieve(corpus: &Corpus, question: &Question, k: usize) -> Result<Vec<String>> {
    if k == 0 {
        return Err(Error::InvalidArgument("retrieval depth k must be >= 1".into()));
    }
    let q: HashSet<String> = tokenize(&question.text).into_iter().collect();
    // Every document shares the denominator |tokens(q)|, so ranking by the
    // raw intersection size is exact.
    let mut ranked: Vec<(usize, &str)> = corpus
        .documents
        .iter()
        .map(|d| (q.intersection(&d.tokens).count(), d.doc_id.as_str()))
        .collect();
    ranked.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    Ok(ranked.into_iter().take(k).map(|(_, id)| id.to_owned()).collect())
}

/// Splits after `.`, `?` or `!` when followed by whitespace or end of text.
/// Abbreviations are not special-cased: `"e.g. x"` splits after `e.g.`.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if matches!(c, '.' | '?' | '!') {
            let boundary = chars.peek().is_none_or(|&(_, next)| next.is_whitespace());
            if boundary {
                let end = i + c.len_utf8();
                out.push(&text[start..end]);
                start = end;
            }
        }
    }
    out.push(&text[start..]);
    out.into_iter()
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Jaccard similarity of the token sets; 0 when both are empty.
pub fn score_candidate(question: &Question, candidate: &str) -> f64 {
    jaccard(&question.text, candidate)
}

fn jaccard(a: &str, b: &str) -> f64 {
    let a: HashSet<String> = tokenize(a).into_iter().collect();
    let b: HashSet<String> = tokenize(b).into_iter().collect();
    let union = a.union(&b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

fn contains_gold(candidate: &str, gold: &[String]) -> bool {
    let cand = candidate.to_lowercase();
    gold.iter().any(|g| cand.contains(&g.to_lowercase()))
}

/// Max-over-candidates answer decision at threshold `tau1`.
pub fn answer(question: &Question, candidates: &CandidateSet, tau1: f64) -> Decision {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in candidates.candidates.iter().enumerate() {
        let s = score_candidate(question, c);
        // Strict `>` keeps the lowest index on ties.
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    let sigma = best.map_or(0.0, |(_, s)| s);
    let correct = if question.gold_answers.is_empty() {
        None
    } else {
        Some(best.is_some_and(|(i, _)| contains_gold(&candidates.candidates[i], &question.gold_answers)))
    };
    Decision {
        question_id: question.id.clone(),
        sigma,
        best_candidate_index: best.map(|(i, _)| i),
        answered: sigma > tau1,
        correct,
    }
}

/// Where teacher scores come from.
#[derive(Debug, Clone)]
pub enum Teacher {
    /// Retrieve, split and answer over a corpus. Questions that already
    /// carry `candidates` are answered over those instead.
    Lexical { corpus: Corpus, k: usize },
    /// Scores logged in each record's `teacher_score`.
    Replay,
    Synthetic(SyntheticTeacherParams),
}

impl Teacher {
    pub fn name(&self) -> &'static str {
        match self {
            Teacher::Lexical { .. } => "lexical",
            Teacher::Replay => "replay",
            Teacher::Synthetic(_) => "synthetic",
        }
    }

    /// Candidate set the lexical teacher answers over.
    pub fn candidates_for(corpus: &Corpus, k: usize, question: &Question) -> Result<CandidateSet> {
        let candidates = match &question.candidates {
            Some(c) => c.clone(),
            None => {
                let mut out = Vec::new();
                for id in retrieve(corpus, question, k)? {
                    let doc = corpus.get(&id).expect("retrieved id exists");
                    out.extend(split_sentences(&doc.text));
                }
                out
            }
        };
        Ok(CandidateSet {
            question_id: question.id.clone(),
            candidates,
        })
    }

    /// Decision for one question at `tau1`.
    pub fn decide(&self, question: &Question, tau1: f64) -> Result<Decision> {
        match self {
            Teacher::Lexical { corpus, k } => {
                let cands = Self::candidates_for(corpus, *k, question)?;
                let mut d = answer(question, &cands, tau1);
                if d.correct.is_none() {
                    d.correct = question.correct;
                }
                Ok(d)
            }
            Teacher::Replay | Teacher::Synthetic(_) => {
                let sigma = teacher_score(self, question)?;
                Ok(Decision {
                    question_id: question.id.clone(),
                    sigma,
                    best_candidate_index: None,
                    answered: sigma > tau1,
                    correct: question.correct,
                })
            }
        }
    }
}

/// The score `sigma` the teacher assigns to `question`.
pub fn teacher_score(kind: &Teacher, question: &Question) -> Result<f64> {
    match kind {
        Teacher::Lexical { .. } => Ok(kind.decide(question, 0.0)?.sigma),
        Teacher::Replay => question.teacher_score.ok_or_else(|| Error::MissingField {
            id: question.id.clone(),
            field: "teacher_score",
            context: "replay teacher".into(),
        }),
        Teacher::Synthetic(params) => Ok(params.score(question)),
    }
}

fn check_tau(tau1: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&tau1) {
        return Err(Error::InvalidArgument(format!("tau1 must lie in [0,1], got {tau1}")));
    }
    Ok(())
}

/// Runs the teacher over every question, in dataset order.
pub fn run_pipeline(ds: &Dataset, kind: &Teacher, tau1: f64) -> Result<Vec<Decision>> {
    check_tau(tau1)?;
    ds.records().par_iter().map(|q| kind.decide(q, tau1)).collect()
}

/// Index decisions by question id.
pub fn decisions_by_id(decisions: &[Decision]) -> HashMap<&str, &Decision> {
    decisions.iter().map(|d| (d.question_id.as_str(), d)).collect()
}
