//! The two sentiment voters and their agreement fusion.
//!
//! * the sentiment predictor ([`LinearSentimentModel`]) is trained on review
//!   text labeled from star scores and never sees emojis;
//! * the emoji mapper ([`EmojiSentimentTable`]) labels an utterance from its
//!   most frequent mapped emoji;
//! * an utterance gets a fused label only when both voters agree.

mod emoji_table;
mod sp;

use std::fs::File;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Sentiment, Utterance};
use crate::error::{Error, Result};

pub use emoji_table::{label_by_emoji, EmojiSentimentTable};
pub use sp::{
    featurize, loss_and_gradient, softmax, train_sp, EpochRecord, LinearSentimentModel,
    SparseFeatures, TrainingConfig, TrainingHistory, SP_FORMAT_VERSION,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewRecord {
    pub text: String,
    pub score: u8,
}

impl ReviewRecord {
    pub fn new(text: impl Into<String>, score: u8) -> Result<Self> {
        score_to_label(score)?;
        Ok(ReviewRecord {
            text: text.into(),
            score,
        })
    }

    pub fn label(&self) -> Sentiment {
        score_to_label(self.score).expect("score validated on construction")
    }
}

/// Text with its gold sentiment, the unit the predictor trains on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledText {
    pub text: String,
    pub label: Sentiment,
}

impl From<&ReviewRecord> for LabeledText {
    fn from(r: &ReviewRecord) -> Self {
        LabeledText {
            text: r.text.clone(),
            label: r.label(),
        }
    }
}

/// Star score to sentiment: 1-2 negative, 3 neutral, 4-5 positive.
pub fn score_to_label(score: u8) -> Result<Sentiment> {
    match score {
        1 | 2 => Ok(Sentiment::Negative),
        3 => Ok(Sentiment::Neutral),
        4 | 5 => Ok(Sentiment::Positive),
        s => Err(Error::InvalidInput(format!("review score {s} outside [1,5]"))),
    }
}

/// Reads a `text,score` CSV with header.
pub fn load_reviews(path: impl AsRef<Path>) -> Result<Vec<ReviewRecord>> {
    #[derive(Deserialize)]
    struct Row {
        text: String,
        score: i64,
    }

    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        // header is line 1
        let line = i + 2;
        let row = row.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let score = u8::try_from(row.score)
            .ok()
            .filter(|s| (1..=5).contains(s))
            .ok_or_else(|| Error::Parse {
                line,
                message: format!("review score {} outside [1,5]", row.score),
            })?;
        out.push(ReviewRecord {
            text: row.text,
            score,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSpec {
    pub train: f64,
    pub valid: f64,
    pub test: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train: 0.90,
            valid: 0.05,
            test: 0.05,
            seed: 42,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, f) in [("train", self.train), ("valid", self.valid), ("test", self.test)] {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::InvalidInput(format!("{name} fraction {f} not in (0,1)")));
            }
        }
        let sum = self.train + self.valid + self.test;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("split fractions sum to {sum}, not 1")));
        }
        Ok(())
    }

    /// Part sizes for `n` items: floor for train and valid, remainder to test.
    pub fn sizes(&self, n: usize) -> Result<(usize, usize, usize)> {
        self.validate()?;
        let cut = |f: f64| (n as f64 * f + 1e-9).floor() as usize;
        let n_train = cut(self.train);
        let n_valid = cut(self.valid);
        let n_test = n.saturating_sub(n_train + n_valid);
        if n_train == 0 || n_valid == 0 || n_test == 0 {
            return Err(Error::InvalidInput(format!(
                "split of {n} records gives an empty part ({n_train}/{n_valid}/{n_test})"
            )));
        }
        Ok((n_train, n_valid, n_test))
    }
}

/// Seeded shuffle followed by a contiguous cut into train/valid/test.
pub fn split_reviews<T: Clone>(records: &[T], spec: &SplitSpec) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
    if records.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "need at least 3 records to split, got {}",
            records.len()
        )));
    }
    let (n_train, n_valid, _) = spec.sizes(records.len())?;
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let pick = |idx: &[usize]| idx.iter().map(|&i| records[i].clone()).collect::<Vec<_>>();
    Ok((
        pick(&order[..n_train]),
        pick(&order[n_train..n_train + n_valid]),
        pick(&order[n_train + n_valid..]),
    ))
}

/// Sentiment predictor vote for one utterance text.
pub fn predict_sp(model: &LinearSentimentModel, text: &str) -> Sentiment {
    model.predict(text)
}

/// Sets the fused label from the two voter labels.
pub fn fuse_labels(utterance: &Utterance) -> Result<Utterance> {
    let sp = utterance.sp_label.ok_or_else(|| {
        Error::InvalidInput("fusion requires an sp_label; run the predictor first".into())
    })?;
    let mut out = utterance.clone();
    out.fused_label = (utterance.emoji_label == Some(sp)).then_some(sp);
    Ok(out)
}

/// Runs both voters and fusion over every utterance; dialogue structure is untouched.
pub fn label_corpus(
    corpus: &Corpus,
    model: &LinearSentimentModel,
    table: &EmojiSentimentTable,
) -> Result<Corpus> {
    let mut out = corpus.clone();
    for dialogue in &mut out.dialogues {
        for u in &mut dialogue.utterances {
            u.sp_label = Some(model.predict(&u.text));
            u.emoji_label = label_by_emoji(table, u);
            *u = fuse_labels(u)?;
        }
    }
    out.provenance = format!("{}; labeled (predictor + emoji agreement)", corpus.provenance);
    Ok(out)
}
