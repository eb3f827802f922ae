//! Multinomial logistic regression over bag-of-words counts.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::LabeledText;
use crate::corpus::Sentiment;
use crate::emoji::strip_emojis;
use crate::error::{Error, Result};
use crate::text::tokenize;

pub const SP_FORMAT_VERSION: u32 = 1;
const N_CLASSES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub seed: u64,
    pub min_token_freq: usize,
    pub batch_size: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            learning_rate: 0.5,
            epochs: 10,
            l2: 1e-4,
            seed: 42,
            min_token_freq: 2,
            batch_size: 32,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::InvalidInput(format!("learning_rate {} must be finite and >= 0", self.learning_rate)));
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return Err(Error::InvalidInput(format!("l2 {} must be finite and >= 0", self.l2)));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidInput("epochs and batch_size must be >= 1".into()));
        }
        Ok(())
    }
}

/// Sorted `(feature index, count)` pairs.
pub type SparseFeatures = Vec<(usize, f64)>;

/// Emoji-free bag-of-words counts over `vocabulary`; unknown tokens are dropped.
pub fn featurize(vocabulary: &BTreeMap<String, usize>, text: &str) -> SparseFeatures {
    let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
    for tok in tokenize(&strip_emojis(text)) {
        if let Some(&idx) = vocabulary.get(&tok) {
            *counts.entry(idx).or_insert(0.0) += 1.0;
        }
    }
    counts.into_iter().collect()
}

/// Numerically stable softmax.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

fn class_scores(weights: &[Vec<f64>], x: &SparseFeatures) -> [f64; N_CLASSES] {
    let mut out = [0.0; N_CLASSES];
    for (c, row) in weights.iter().enumerate() {
        let bias = row[row.len() - 1];
        out[c] = bias + x.iter().map(|&(j, v)| row[j] * v).sum::<f64>();
    }
    out
}

/// Mean cross-entropy of `batch` plus `l2 / 2 * ||W||^2` (bias column excluded),
/// with its gradient in the shape of `weights`.
pub fn loss_and_gradient(
    weights: &[Vec<f64>],
    batch: &[(SparseFeatures, usize)],
    l2: f64,
) -> (f64, Vec<Vec<f64>>) {
    let width = weights[0].len();
    let bias = width - 1;
    let mut grad = vec![vec![0.0; width]; weights.len()];
    let mut loss = 0.0;
    let inv_n = 1.0 / batch.len().max(1) as f64;
    for (x, y) in batch {
        let p = softmax(&class_scores(weights, x));
        loss -= p[*y].ln();
        for (c, g) in grad.iter_mut().enumerate() {
            let delta = p[c] - if c == *y { 1.0 } else { 0.0 };
            for &(j, v) in x {
                g[j] += delta * v * inv_n;
            }
            g[bias] += delta * inv_n;
        }
    }
    loss *= inv_n;
    for (row, g) in weights.iter().zip(grad.iter_mut()) {
        for j in 0..bias {
            loss += 0.5 * l2 * row[j] * row[j];
            g[j] += l2 * row[j];
        }
    }
    (loss, grad)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSentimentModel {
    vocabulary: BTreeMap<String, usize>,
    /// One row per sentiment, `vocabulary.len() + 1` columns, bias last.
    weights: Vec<Vec<f64>>,
    config: TrainingConfig,
}

#[derive(Serialize, Deserialize)]
struct ModelArtifact {
    format_version: u32,
    kind: String,
    config: TrainingConfig,
    /// Tokens in feature-index order.
    vocabulary: Vec<String>,
    weights: Vec<Vec<f64>>,
}

const ARTIFACT_KIND: &str = "linear-sentiment-model";

impl LinearSentimentModel {
    /// `vocabulary[i]` is the token for weight column `i`.
    pub fn from_parts(vocabulary: Vec<String>, weights: Vec<Vec<f64>>, config: TrainingConfig) -> Result<Self> {
        if weights.len() != N_CLASSES || weights.iter().any(|r| r.len() != vocabulary.len() + 1) {
            return Err(Error::InvalidInput(format!(
                "weights must be {N_CLASSES} x {} (vocabulary + bias)",
                vocabulary.len() + 1
            )));
        }
        let mut index = BTreeMap::new();
        for (i, tok) in vocabulary.into_iter().enumerate() {
            if index.insert(tok.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate vocabulary token {tok:?}")));
            }
        }
        Ok(LinearSentimentModel {
            vocabulary: index,
            weights,
            config,
        })
    }

    pub fn vocabulary(&self) -> &BTreeMap<String, usize> {
        &self.vocabulary
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn config(&self) -> &TrainingConfig {
        &self.config
    }

    pub fn featurize(&self, text: &str) -> SparseFeatures {
        featurize(&self.vocabulary, text)
    }

    pub fn probabilities(&self, text: &str) -> [f64; N_CLASSES] {
        let p = softmax(&class_scores(&self.weights, &self.featurize(text)));
        [p[0], p[1], p[2]]
    }

    fn predict_features(&self, x: &SparseFeatures) -> Sentiment {
        let scores = class_scores(&self.weights, x);
        let mut best = 0;
        for c in 1..N_CLASSES {
            if scores[c] > scores[best] {
                best = c;
            }
        }
        Sentiment::from_index(best).expect("class index in range")
    }

    /// Argmax class; exact ties resolve toward the lower sentiment.
    pub fn predict(&self, text: &str) -> Sentiment {
        self.predict_features(&self.featurize(text))
    }

    pub fn to_json(&self) -> Result<String> {
        let mut vocab = vec![String::new(); self.vocabulary.len()];
        for (tok, &i) in &self.vocabulary {
            vocab[i] = tok.clone();
        }
        let artifact = ModelArtifact {
            format_version: SP_FORMAT_VERSION,
            kind: ARTIFACT_KIND.into(),
            config: self.config,
            vocabulary: vocab,
            weights: self.weights.clone(),
        };
        Ok(serde_json::to_string(&artifact)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let artifact: ModelArtifact = serde_json::from_str(s)?;
        if artifact.kind != ARTIFACT_KIND {
            return Err(Error::InvalidInput(format!("artifact kind {:?} is not a sentiment model", artifact.kind)));
        }
        if artifact.format_version != SP_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                artifact: "sentiment model",
                found: artifact.format_version,
                expected: SP_FORMAT_VERSION,
            });
        }
        Self::from_parts(artifact.vocabulary, artifact.weights, artifact.config)
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

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub valid_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingHistory {
    /// Mean training loss at initialization, before any update.
    pub initial_loss: f64,
    pub epochs: Vec<EpochRecord>,
    /// 1-based epoch whose weights were kept.
    pub best_epoch: usize,
}

impl TrainingHistory {
    pub fn final_loss(&self) -> f64 {
        self.epochs.last().map_or(self.initial_loss, |e| e.train_loss)
    }
}

fn build_vocabulary(train: &[LabeledText], min_freq: usize) -> BTreeMap<String, usize> {
    let mut freq: BTreeMap<String, usize> = BTreeMap::new();
    for r in train {
        for tok in tokenize(&strip_emojis(&r.text)) {
            *freq.entry(tok).or_insert(0) += 1;
        }
    }
    freq.into_iter()
        .filter(|&(_, n)| n >= min_freq.max(1))
        .enumerate()
        .map(|(i, (tok, _))| (tok, i))
        .collect()
}

fn accuracy(model: &LinearSentimentModel, data: &[(SparseFeatures, usize)]) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    let hits = data
        .iter()
        .filter(|(x, y)| model.predict_features(x).index() == *y)
        .count();
    hits as f64 / data.len() as f64
}

/// Trains from zero weights with seeded mini-batch gradient descent and keeps
/// the weights of the epoch with the best validation accuracy (earliest on ties).
pub fn train_sp(
    train: &[LabeledText],
    valid: &[LabeledText],
    config: &TrainingConfig,
) -> Result<(LinearSentimentModel, TrainingHistory)> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::InvalidInput("training set is empty".into()));
    }
    for s in Sentiment::ALL {
        if !train.iter().any(|r| r.label == s) {
            return Err(Error::InvalidInput(format!("class {s} absent from training data")));
        }
    }

    let vocabulary = build_vocabulary(train, config.min_token_freq);
    let encode = |data: &[LabeledText]| -> Vec<(SparseFeatures, usize)> {
        data.iter()
            .map(|r| (featurize(&vocabulary, &r.text), r.label.index()))
            .collect()
    };
    let train_set = encode(train);
    let valid_set = encode(valid);

    let mut model = LinearSentimentModel {
        weights: vec![vec![0.0; vocabulary.len() + 1]; N_CLASSES],
        vocabulary: vocabulary.clone(),
        config: *config,
    };
    let (initial_loss, _) = loss_and_gradient(&model.weights, &train_set, config.l2);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut best: Option<(f64, usize, Vec<Vec<f64>>)> = None;
    let mut epochs = Vec::with_capacity(config.epochs);
    let mut step = 0;
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            step += 1;
            let batch: Vec<(SparseFeatures, usize)> =
                chunk.iter().map(|&i| train_set[i].clone()).collect();
            let (loss, grad) = loss_and_gradient(&model.weights, &batch, config.l2);
            if !loss.is_finite() {
                return Err(Error::Diverged {
                    step,
                    message: format!("batch loss {loss} in epoch {epoch}"),
                });
            }
            for (row, g) in model.weights.iter_mut().zip(&grad) {
                for (w, d) in row.iter_mut().zip(g) {
                    *w -= config.learning_rate * d;
                }
            }
        }
        let (train_loss, _) = loss_and_gradient(&model.weights, &train_set, config.l2);
        if !train_loss.is_finite() {
            return Err(Error::Diverged {
                step,
                message: format!("training loss {train_loss} after epoch {epoch}"),
            });
        }
        let valid_accuracy = accuracy(&model, &valid_set);
        if best.as_ref().is_none_or(|(acc, _, _)| valid_accuracy > *acc) {
            best = Some((valid_accuracy, epoch, model.weights.clone()));
        }
        epochs.push(EpochRecord {
            epoch,
            train_loss,
            valid_accuracy,
        });
    }

    let (_, best_epoch, weights) = best.expect("at least one epoch");
    model.weights = weights;
    Ok((
        model,
        TrainingHistory {
            initial_loss,
            epochs,
            best_epoch,
        },
    ))
}
