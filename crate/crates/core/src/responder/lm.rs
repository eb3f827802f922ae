//! Interpolated, additively smoothed n-gram language model.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{dialogue_token_lists, DialoguePair};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::text::{EOS, SEP, UNK};

pub const LM_FORMAT_VERSION: u32 = 1;
const ARTIFACT_KIND: &str = "ngram-lm";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// P(response | context)
    Forward,
    /// P(context | response)
    Reverse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LmConfig {
    pub order: usize,
    pub additive_alpha: f64,
    /// One weight per history length `0..order`; uniform when absent.
    pub interpolation_weights: Option<Vec<f64>>,
}

impl Default for LmConfig {
    fn default() -> Self {
        LmConfig {
            order: 3,
            additive_alpha: 0.1,
            interpolation_weights: None,
        }
    }
}

impl LmConfig {
    pub fn with_order(order: usize) -> Self {
        LmConfig {
            order,
            ..LmConfig::default()
        }
    }

    fn resolved_weights(&self) -> Result<Vec<f64>> {
        if self.order == 0 {
            return Err(Error::InvalidInput("n-gram order must be >= 1".into()));
        }
        if !(self.additive_alpha > 0.0 && self.additive_alpha.is_finite()) {
            return Err(Error::InvalidInput(format!("additive_alpha {} must be > 0", self.additive_alpha)));
        }
        let w = match &self.interpolation_weights {
            None => vec![1.0 / self.order as f64; self.order],
            Some(w) => w.clone(),
        };
        if w.len() != self.order || w.iter().any(|x| x.is_nan() || *x < 0.0) {
            return Err(Error::InvalidInput(format!(
                "need {} non-negative interpolation weights, got {w:?}",
                self.order
            )));
        }
        if (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput("interpolation weights must sum to 1".into()));
        }
        Ok(w)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct ContextCounts {
    total: u64,
    next: BTreeMap<u32, u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NGramLM {
    order: usize,
    direction: Direction,
    alpha: f64,
    weights: Vec<f64>,
    /// Sorted; includes the reserved tokens.
    vocabulary: Vec<String>,
    index: HashMap<String, u32>,
    /// `tables[k]` maps histories of length `k` (shorter at sequence starts)
    /// to next-token counts.
    tables: Vec<BTreeMap<Vec<u32>, ContextCounts>>,
}

impl NGramLM {
    /// Counts every position of every token sequence.
    pub fn from_sequences(sequences: &[Vec<String>], direction: Direction, config: &LmConfig) -> Result<Self> {
        let weights = config.resolved_weights()?;
        let mut vocab: BTreeSet<String> = [SEP, EOS, UNK].iter().map(|s| s.to_string()).collect();
        for seq in sequences {
            vocab.extend(seq.iter().cloned());
        }
        let vocabulary: Vec<String> = vocab.into_iter().collect();
        let index: HashMap<String, u32> = vocabulary
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        let mut tables = vec![BTreeMap::<Vec<u32>, ContextCounts>::new(); config.order];
        for seq in sequences {
            let ids: Vec<u32> = seq.iter().map(|t| index[t]).collect();
            for (i, &tok) in ids.iter().enumerate() {
                for (k, table) in tables.iter_mut().enumerate() {
                    let h = &ids[i.saturating_sub(k)..i];
                    let entry = table.entry(h.to_vec()).or_default();
                    entry.total += 1;
                    *entry.next.entry(tok).or_insert(0) += 1;
                }
            }
        }
        Ok(NGramLM {
            order: config.order,
            direction,
            alpha: config.additive_alpha,
            weights,
            vocabulary,
            index,
            tables,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn additive_alpha(&self) -> f64 {
        self.alpha
    }

    pub fn interpolation_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    /// Token id, with unseen tokens mapped to `<unk>`.
    pub fn token_id(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or_else(|| self.index[UNK])
    }

    pub fn token(&self, id: u32) -> &str {
        &self.vocabulary[id as usize]
    }

    pub fn encode(&self, tokens: &[String]) -> Vec<u32> {
        tokens.iter().map(|t| self.token_id(t)).collect()
    }

    /// Raw count of `token` after `history` in the table for history length `k`.
    pub fn count(&self, k: usize, history: &[u32], token: u32) -> (u64, u64) {
        match self.tables.get(k).and_then(|t| t.get(history)) {
            Some(cc) => (cc.next.get(&token).copied().unwrap_or(0), cc.total),
            None => (0, 0),
        }
    }

    /// Next-token distribution over the whole vocabulary, indexed by token id.
    pub fn next_token_distribution(&self, history: &[u32]) -> Vec<f64> {
        let v = self.vocabulary.len() as f64;
        let mut dist = vec![0.0; self.vocabulary.len()];
        for (k, (table, &lambda)) in self.tables.iter().zip(&self.weights).enumerate() {
            let h = &history[history.len().saturating_sub(k)..];
            let (total, next) = match table.get(h) {
                Some(cc) => (cc.total as f64, Some(&cc.next)),
                None => (0.0, None),
            };
            let denom = total + self.alpha * v;
            let base = lambda * self.alpha / denom;
            for p in dist.iter_mut() {
                *p += base;
            }
            if let Some(next) = next {
                for (&tok, &c) in next {
                    dist[tok as usize] += lambda * c as f64 / denom;
                }
            }
        }
        dist
    }

    /// Probability of a single token after `history`.
    pub fn token_prob(&self, history: &[u32], token: u32) -> f64 {
        let v = self.vocabulary.len() as f64;
        (0..self.order)
            .map(|k| {
                let h = &history[history.len().saturating_sub(k)..];
                let (c, total) = self.count(k, h, token);
                self.weights[k] * (c as f64 + self.alpha) / (total as f64 + self.alpha * v)
            })
            .sum()
    }

    fn to_artifact(&self) -> LmArtifact {
        LmArtifact {
            format_version: LM_FORMAT_VERSION,
            kind: ARTIFACT_KIND.into(),
            direction: self.direction,
            order: self.order,
            additive_alpha: self.alpha,
            interpolation_weights: self.weights.clone(),
            vocabulary: self.vocabulary.clone(),
            tables: self
                .tables
                .iter()
                .map(|t| {
                    t.iter()
                        .map(|(h, cc)| TableRow {
                            history: h.clone(),
                            next: cc.next.iter().map(|(&a, &b)| (a, b)).collect(),
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_artifact())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let a: LmArtifact = serde_json::from_str(s)?;
        if a.kind != ARTIFACT_KIND {
            return Err(Error::InvalidInput(format!("artifact kind {:?} is not an n-gram model", a.kind)));
        }
        if a.format_version != LM_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                artifact: "n-gram model",
                found: a.format_version,
                expected: LM_FORMAT_VERSION,
            });
        }
        let config = LmConfig {
            order: a.order,
            additive_alpha: a.additive_alpha,
            interpolation_weights: Some(a.interpolation_weights),
        };
        let weights = config.resolved_weights()?;
        if a.tables.len() != a.order {
            return Err(Error::InvalidInput("table count does not match order".into()));
        }
        let n = a.vocabulary.len() as u32;
        let mut tables = Vec::with_capacity(a.order);
        for rows in a.tables {
            let mut table = BTreeMap::new();
            for row in rows {
                if row.history.iter().chain(row.next.iter().map(|(t, _)| t)).any(|&t| t >= n) {
                    return Err(Error::InvalidInput("token id out of vocabulary range".into()));
                }
                let next: BTreeMap<u32, u64> = row.next.into_iter().collect();
                let total = next.values().sum();
                table.insert(row.history, ContextCounts { total, next });
            }
            tables.push(table);
        }
        let index = a
            .vocabulary
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Ok(NGramLM {
            order: a.order,
            direction: a.direction,
            alpha: a.additive_alpha,
            weights,
            vocabulary: a.vocabulary,
            index,
            tables,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}

#[derive(Serialize, Deserialize)]
struct TableRow {
    history: Vec<u32>,
    next: Vec<(u32, u64)>,
}

#[derive(Serialize, Deserialize)]
struct LmArtifact {
    format_version: u32,
    kind: String,
    direction: Direction,
    order: usize,
    additive_alpha: f64,
    interpolation_weights: Vec<f64>,
    vocabulary: Vec<String>,
    tables: Vec<Vec<TableRow>>,
}

/// Training sequences for one direction.
///
/// Forward: each dialogue flattened as `u1 <sep> u2 <sep> ... un <eos>`.
/// Reverse: for every prefix context `u1..ui` and its reply `u(i+1)`, the
/// sequence `u(i+1) <sep> u1 <sep> ... ui <eos>`.
pub fn training_sequences(corpus: &Corpus, direction: Direction) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    for d in &corpus.dialogues {
        let utts = dialogue_token_lists(d);
        match direction {
            Direction::Forward => out.push(join_utterances(&utts)),
            Direction::Reverse => {
                for i in 1..utts.len() {
                    let mut seq = utts[i].clone();
                    seq.push(SEP.to_string());
                    seq.extend(join_utterances(&utts[..i]));
                    out.push(seq);
                }
            }
        }
    }
    out
}

fn join_utterances(utts: &[Vec<String>]) -> Vec<String> {
    let mut seq = Vec::new();
    for (i, u) in utts.iter().enumerate() {
        if i > 0 {
            seq.push(SEP.to_string());
        }
        seq.extend(u.iter().cloned());
    }
    seq.push(EOS.to_string());
    seq
}

pub fn train_lm(corpus: &Corpus, direction: Direction, config: &LmConfig) -> Result<NGramLM> {
    if corpus.is_empty() {
        return Err(Error::InvalidInput("cannot train a language model on an empty corpus".into()));
    }
    NGramLM::from_sequences(&training_sequences(corpus, direction), direction, config)
}

/// Sum of log-probabilities of the response tokens, each conditioned on all
/// preceding context and response tokens.
pub fn sequence_log_prob(lm: &NGramLM, pair: &DialoguePair) -> f64 {
    let mut ids = lm.encode(pair.context.tokens());
    let mut total = 0.0;
    for tok in pair.response.tokens() {
        let id = lm.token_id(tok);
        total += lm.token_prob(&ids, id).ln();
        ids.push(id);
    }
    total
}
