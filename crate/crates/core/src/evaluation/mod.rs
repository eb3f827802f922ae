//! Automatic response metrics (context, fluency, BLEU) and the sentiment
//! classifier report.
//!
//! Context is the TF-IDF cosine between query and response with IDF taken
//! from a background corpus. Fluency is `1 / perplexity` of the response under
//! a reference n-gram model. Both are concrete stand-ins for metrics that are
//! usually only described informally.

mod bleu;
mod classification;

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::responder::{sequence_log_prob, DialoguePair, NGramLM, TokenSequence};
use crate::text::tokenize;

pub use bleu::{bleu, modified_precision};
pub use classification::{classification_metrics, f1_score, ClassMetrics, ClassificationReport};

pub const HISTOGRAM_BINS: usize = 20;

/// `exp(mean log p)` of `response` under `lm` with an empty context.
pub fn fluency(response: &[String], lm: &NGramLM) -> Result<f64> {
    if response.is_empty() {
        return Err(Error::InvalidInput("fluency of an empty response is undefined".into()));
    }
    let pair = DialoguePair {
        context: TokenSequence::default(),
        response: TokenSequence::new(response.to_vec()),
    };
    Ok((sequence_log_prob(lm, &pair) / response.len() as f64).exp())
}

/// Smoothed inverse document frequencies over background utterances:
/// `idf(t) = ln((1 + N) / (1 + df(t))) + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdfTable {
    n_docs: usize,
    df: HashMap<String, usize>,
}

impl IdfTable {
    pub fn from_documents<S: AsRef<str>>(docs: impl IntoIterator<Item = S>) -> Self {
        let mut df: HashMap<String, usize> = HashMap::new();
        let mut n_docs = 0;
        for doc in docs {
            n_docs += 1;
            let mut toks = tokenize(doc.as_ref());
            toks.sort_unstable();
            toks.dedup();
            for t in toks {
                *df.entry(t).or_insert(0) += 1;
            }
        }
        IdfTable { n_docs, df }
    }

    pub fn from_corpus(corpus: &Corpus) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::InvalidInput("background corpus is empty".into()));
        }
        Ok(Self::from_documents(corpus.utterances().map(|u| u.text.as_str())))
    }

    pub fn idf(&self, token: &str) -> f64 {
        let df = self.df.get(token).copied().unwrap_or(0);
        ((1 + self.n_docs) as f64 / (1 + df) as f64).ln() + 1.0
    }

    fn vector(&self, text: &str) -> BTreeMap<String, f64> {
        let mut tf: BTreeMap<String, f64> = BTreeMap::new();
        for t in tokenize(text) {
            *tf.entry(t).or_insert(0.0) += 1.0;
        }
        for (t, w) in tf.iter_mut() {
            *w *= self.idf(t);
        }
        tf
    }
}

/// Cosine similarity of the TF-IDF vectors of `query` and `response`; 0 when
/// either vector is empty.
pub fn context_score(query: &str, response: &str, idf: &IdfTable) -> f64 {
    let q = idf.vector(query);
    let r = idf.vector(response);
    let dot: f64 = q.iter().filter_map(|(t, a)| r.get(t).map(|b| a * b)).sum();
    let nq = q.values().map(|x| x * x).sum::<f64>().sqrt();
    let nr = r.values().map(|x| x * x).sum::<f64>().sqrt();
    if nq == 0.0 || nr == 0.0 || dot <= 0.0 {
        0.0
    } else {
        (dot / (nq * nr)).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalExample {
    #[serde(default)]
    pub id: Option<String>,
    pub query: String,
    pub response: String,
    pub reference: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExampleMetrics {
    pub context: f64,
    pub fluency: f64,
    pub bleu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aggregate {
    pub average: f64,
    pub median: f64,
}

/// Mean and median; the median of an even-sized sample averages the middle pair.
pub fn aggregate(values: &[f64]) -> Option<Aggregate> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    Some(Aggregate {
        average: sorted.iter().sum::<f64>() / n as f64,
        median,
    })
}

/// Counts per equal-width bin over [0,1]; 1.0 falls in the last bin.
pub fn histogram(values: &[f64]) -> [usize; HISTOGRAM_BINS] {
    let mut bins = [0; HISTOGRAM_BINS];
    for &v in values {
        let i = ((v.clamp(0.0, 1.0) * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1);
        bins[i] += 1;
    }
    bins
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Context,
    Fluency,
    Bleu,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Context, Metric::Fluency, Metric::Bleu];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Context => "context",
            Metric::Fluency => "fluency",
            Metric::Bleu => "bleu",
        }
    }

    fn definition(self) -> &'static str {
        match self {
            Metric::Context => "stand-in: cosine of TF-IDF vectors (query vs response), IDF over background utterances",
            Metric::Fluency => "stand-in: 1/perplexity of the response under the reference n-gram model",
            Metric::Bleu => "sentence BLEU-4, smoothed zero higher-order precisions, brevity penalty",
        }
    }

    fn of(self, m: &ExampleMetrics) -> f64 {
        match self {
            Metric::Context => m.context,
            Metric::Fluency => m.fluency,
            Metric::Bleu => m.bleu,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub ids: Vec<Option<String>>,
    pub examples: Vec<ExampleMetrics>,
    pub aggregates: BTreeMap<&'static str, Aggregate>,
    pub histograms: BTreeMap<&'static str, [usize; HISTOGRAM_BINS]>,
}

impl MetricReport {
    pub fn values(&self, metric: Metric) -> Vec<f64> {
        self.examples.iter().map(|m| metric.of(m)).collect()
    }

    pub fn aggregate(&self, metric: Metric) -> Aggregate {
        self.aggregates[metric.name()]
    }

    pub fn per_example_csv(&self) -> String {
        let mut out = String::from("index,id,context,fluency,bleu\n");
        for (i, (id, m)) in self.ids.iter().zip(&self.examples).enumerate() {
            writeln!(
                out,
                "{i},{},{:.6},{:.6},{:.6}",
                id.as_deref().unwrap_or(""),
                m.context,
                m.fluency,
                m.bleu
            )
            .unwrap();
        }
        out
    }

    /// `{metric: {average, median, definition}}` with metrics in fixed order.
    pub fn summary_json(&self) -> Result<String> {
        let mut map = serde_json::Map::new();
        for metric in Metric::ALL {
            let a = self.aggregate(metric);
            map.insert(
                metric.name().to_string(),
                serde_json::json!({
                    "average": a.average,
                    "median": a.median,
                    "definition": metric.definition(),
                }),
            );
        }
        map.insert("n_examples".into(), self.examples.len().into());
        Ok(serde_json::to_string_pretty(&serde_json::Value::Object(map))? + "\n")
    }

    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("metric,bin_low,bin_high,count\n");
        for metric in Metric::ALL {
            for (i, c) in self.histograms[metric.name()].iter().enumerate() {
                let lo = i as f64 / HISTOGRAM_BINS as f64;
                let hi = (i + 1) as f64 / HISTOGRAM_BINS as f64;
                writeln!(out, "{},{lo:.2},{hi:.2},{c}", metric.name()).unwrap();
            }
        }
        out
    }
}

pub fn evaluate_example(example: &EvalExample, lm: &NGramLM, idf: &IdfTable) -> Result<ExampleMetrics> {
    let response = tokenize(&example.response);
    let reference = tokenize(&example.reference);
    if reference.is_empty() {
        return Err(Error::InvalidInput(format!(
            "example {}: reference has no tokens",
            example.id.as_deref().unwrap_or("?")
        )));
    }
    let fluency = if response.is_empty() { 0.0 } else { fluency(&response, lm)? };
    Ok(ExampleMetrics {
        context: context_score(&example.query, &example.response, idf),
        fluency,
        bleu: bleu(&response, &reference),
    })
}

/// Per-example metrics, average/median aggregates and 20-bin histograms.
pub fn evaluate_responses(examples: &[EvalExample], lm: &NGramLM, idf: &IdfTable) -> Result<MetricReport> {
    if examples.is_empty() {
        return Err(Error::InvalidInput("no examples to evaluate".into()));
    }
    let metrics = examples
        .iter()
        .map(|e| evaluate_example(e, lm, idf))
        .collect::<Result<Vec<_>>>()?;
    let mut aggregates = BTreeMap::new();
    let mut histograms = BTreeMap::new();
    for metric in Metric::ALL {
        let vals: Vec<f64> = metrics.iter().map(|m| metric.of(m)).collect();
        aggregates.insert(metric.name(), aggregate(&vals).expect("non-empty"));
        histograms.insert(metric.name(), histogram(&vals));
    }
    Ok(MetricReport {
        ids: examples.iter().map(|e| e.id.clone()).collect(),
        examples: metrics,
        aggregates,
        histograms,
    })
}
