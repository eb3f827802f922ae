//! Dialogue data model, JSONL ingestion and descriptive statistics.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::emoji::extract_emojis;
use crate::error::{Error, Result};
use crate::text::word_count;

/// Three-state sentiment, ordered `Negative < Neutral < Positive`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sentiment {
    Negative,
    Neutral,
    Positive,
}

impl Sentiment {
    pub const ALL: [Sentiment; 3] = [Sentiment::Negative, Sentiment::Neutral, Sentiment::Positive];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Sentiment> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sentiment::Negative => "negative",
            Sentiment::Neutral => "neutral",
            Sentiment::Positive => "positive",
        }
    }
}

impl fmt::Display for Sentiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sentiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "negative" => Ok(Sentiment::Negative),
            "neutral" => Ok(Sentiment::Neutral),
            "positive" => Ok(Sentiment::Positive),
            other => Err(Error::InvalidInput(format!("unknown sentiment label {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utterance {
    pub speaker: String,
    pub text: String,
    /// Populated from `text` on load; never serialized.
    #[serde(skip)]
    pub emojis: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sp_label: Option<Sentiment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emoji_label: Option<Sentiment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fused_label: Option<Sentiment>,
}

impl Utterance {
    pub fn new(speaker: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        Utterance {
            speaker: speaker.into(),
            emojis: extract_emojis(&text),
            text,
            sp_label: None,
            emoji_label: None,
            fused_label: None,
        }
    }

    pub fn with_fused(mut self, label: Sentiment) -> Self {
        self.sp_label = Some(label);
        self.emoji_label = Some(label);
        self.fused_label = Some(label);
        self
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.text.trim().is_empty() {
            return Err("utterance text is empty".into());
        }
        if let Some(fused) = self.fused_label {
            if self.sp_label != Some(fused) || self.emoji_label != Some(fused) {
                return Err(format!(
                    "fused_label {fused} without agreeing sp_label and emoji_label"
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dialogue {
    pub id: String,
    pub utterances: Vec<Utterance>,
}

impl Dialogue {
    pub fn validate(&self) -> Result<()> {
        if self.utterances.len() < 2 {
            return Err(Error::Validation(format!(
                "dialogue {:?} has {} utterance(s), at least 2 required",
                self.id,
                self.utterances.len()
            )));
        }
        for (i, u) in self.utterances.iter().enumerate() {
            u.validate()
                .map_err(|m| Error::Validation(format!("dialogue {:?} utterance {i}: {m}", self.id)))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub dialogues: Vec<Dialogue>,
    pub provenance: String,
}

impl Corpus {
    /// Builds a corpus after validating every dialogue and id uniqueness.
    pub fn new(dialogues: Vec<Dialogue>, provenance: impl Into<String>) -> Result<Self> {
        let mut seen = HashSet::new();
        for d in &dialogues {
            d.validate()?;
            if !seen.insert(d.id.as_str()) {
                return Err(Error::Validation(format!("duplicate dialogue id {:?}", d.id)));
            }
        }
        Ok(Corpus {
            dialogues,
            provenance: provenance.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.dialogues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dialogues.is_empty()
    }

    pub fn utterances(&self) -> impl Iterator<Item = &Utterance> {
        self.dialogues.iter().flat_map(|d| d.utterances.iter())
    }
}

/// Reads a JSONL corpus, one dialogue object per line. Blank lines are skipped.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut dialogues = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut dialogue: Dialogue = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        for u in &mut dialogue.utterances {
            u.emojis = extract_emojis(&u.text);
        }
        dialogue.validate().map_err(|e| match e {
            Error::Validation(m) => Error::Validation(format!("line {line_no}: {m}")),
            other => other,
        })?;
        if !seen.insert(dialogue.id.clone()) {
            return Err(Error::Validation(format!(
                "line {line_no}: duplicate dialogue id {:?}",
                dialogue.id
            )));
        }
        dialogues.push(dialogue);
    }
    Ok(Corpus {
        dialogues,
        provenance: format!("loaded from {}", path.display()),
    })
}

pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for d in &corpus.dialogues {
        serde_json::to_writer(&mut w, d)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Fused-label histogram; utterances without a fused label are counted apart.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LabelDistribution {
    pub counts: [usize; 3],
    pub unlabeled: usize,
}

impl LabelDistribution {
    pub fn get(&self, s: Sentiment) -> usize {
        self.counts[s.index()]
    }

    pub fn record(&mut self, label: Option<Sentiment>) {
        match label {
            Some(s) => self.counts[s.index()] += 1,
            None => self.unlabeled += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusStats {
    pub n_dialogues: usize,
    pub n_utterances: usize,
    pub avg_utterances_per_dialogue: f64,
    pub avg_words_per_utterance: f64,
    pub avg_words_per_dialogue: f64,
    pub label_distribution: LabelDistribution,
}

impl CorpusStats {
    /// Derives the averages from raw totals.
    pub fn from_counts(
        n_dialogues: usize,
        n_utterances: usize,
        n_words: usize,
        label_distribution: LabelDistribution,
    ) -> Result<Self> {
        if n_dialogues == 0 || n_utterances == 0 {
            return Err(Error::InvalidInput("statistics of an empty corpus are undefined".into()));
        }
        let avg_utterances_per_dialogue = n_utterances as f64 / n_dialogues as f64;
        let avg_words_per_utterance = n_words as f64 / n_utterances as f64;
        Ok(CorpusStats {
            n_dialogues,
            n_utterances,
            avg_utterances_per_dialogue,
            avg_words_per_utterance,
            avg_words_per_dialogue: n_words as f64 / n_dialogues as f64,
            label_distribution,
        })
    }

    fn rows(&self) -> Vec<(&'static str, String)> {
        let ld = &self.label_distribution;
        vec![
            ("n_dialogues", self.n_dialogues.to_string()),
            ("n_utterances", self.n_utterances.to_string()),
            ("avg_utterances_per_dialogue", format!("{:.4}", self.avg_utterances_per_dialogue)),
            ("avg_words_per_utterance", format!("{:.4}", self.avg_words_per_utterance)),
            ("avg_words_per_dialogue", format!("{:.4}", self.avg_words_per_dialogue)),
            ("label_negative", ld.get(Sentiment::Negative).to_string()),
            ("label_neutral", ld.get(Sentiment::Neutral).to_string()),
            ("label_positive", ld.get(Sentiment::Positive).to_string()),
            ("label_unlabeled", ld.unlabeled.to_string()),
        ]
    }

    /// `key: value` lines.
    pub fn to_report(&self) -> String {
        self.rows()
            .into_iter()
            .map(|(k, v)| format!("{k}: {v}\n"))
            .collect()
    }

    /// Two-column `key,value` CSV with header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("key,value\n");
        for (k, v) in self.rows() {
            out.push_str(&format!("{k},{v}\n"));
        }
        out
    }
}

pub fn compute_stats(corpus: &Corpus) -> Result<CorpusStats> {
    let mut n_utterances = 0;
    let mut n_words = 0;
    let mut labels = LabelDistribution::default();
    for u in corpus.utterances() {
        n_utterances += 1;
        n_words += word_count(&u.text);
        labels.record(u.fused_label);
    }
    CorpusStats::from_counts(corpus.len(), n_utterances, n_words, labels)
}
