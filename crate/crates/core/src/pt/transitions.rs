use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Dialogue, Sentiment};

/// Which utterance pairs count as a transition.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// Each utterance and the next one, whoever speaks.
    #[default]
    ConsecutiveUtterances,
    /// Each utterance and the same speaker's next utterance.
    SameSpeakerConsecutive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    /// `counts[from][to]`, indexed by [`Sentiment::index`].
    pub counts: [[u64; 3]; 3],
    pub probabilities: [[f64; 3]; 3],
}

impl TransitionMatrix {
    pub fn from_counts(counts: [[u64; 3]; 3]) -> Self {
        let mut probabilities = [[0.0; 3]; 3];
        for (row, p) in counts.iter().zip(probabilities.iter_mut()) {
            let total: u64 = row.iter().sum();
            if total > 0 {
                for (c, q) in row.iter().zip(p.iter_mut()) {
                    *q = *c as f64 / total as f64;
                }
            }
        }
        TransitionMatrix {
            counts,
            probabilities,
        }
    }

    pub fn probability(&self, from: Sentiment, to: Sentiment) -> f64 {
        self.probabilities[from.index()][to.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Adds another matrix's counts; probabilities are recomputed.
    pub fn merge(&self, other: &TransitionMatrix) -> TransitionMatrix {
        let mut counts = self.counts;
        for (row, orow) in counts.iter_mut().zip(other.counts.iter()) {
            for (c, o) in row.iter_mut().zip(orow) {
                *c += o;
            }
        }
        TransitionMatrix::from_counts(counts)
    }
}

fn dialogue_counts(d: &Dialogue, pairing: Pairing, counts: &mut [[u64; 3]; 3]) {
    let us = &d.utterances;
    for (i, u) in us.iter().enumerate() {
        let next = match pairing {
            Pairing::ConsecutiveUtterances => us.get(i + 1),
            Pairing::SameSpeakerConsecutive => us[i + 1..].iter().find(|v| v.speaker == u.speaker),
        };
        if let (Some(a), Some(b)) = (u.fused_label, next.and_then(|v| v.fused_label)) {
            counts[a.index()][b.index()] += 1;
        }
    }
}

/// Counts transitions between adjacent fused-labeled utterances. An unlabeled
/// utterance breaks adjacency rather than being skipped over.
pub fn transition_matrix(corpus: &Corpus, pairing: Pairing) -> TransitionMatrix {
    let mut counts = [[0u64; 3]; 3];
    for d in &corpus.dialogues {
        dialogue_counts(d, pairing, &mut counts);
    }
    TransitionMatrix::from_counts(counts)
}

/// Graphviz DOT with one node per state and one edge per nonzero probability.
/// Edges above `threshold` are blue, the rest grey.
pub fn render_transition_dot(matrix: &TransitionMatrix, threshold: f64) -> String {
    let mut out = String::from("digraph sentiment_transitions {\n");
    for s in Sentiment::ALL {
        writeln!(out, "  {s};").unwrap();
    }
    for from in Sentiment::ALL {
        for to in Sentiment::ALL {
            let p = matrix.probability(from, to);
            if p > 0.0 {
                let color = if p > threshold { "blue" } else { "grey" };
                writeln!(out, "  {from} -> {to} [label=\"{p:.2}\", color=\"{color}\"];").unwrap();
            }
        }
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionDelta {
    pub from: Sentiment,
    pub before: f64,
    pub after: f64,
    pub delta: f64,
}

/// Change in P(state -> positive) for each source state.
pub fn compare_transitions(before: &TransitionMatrix, after: &TransitionMatrix) -> Vec<TransitionDelta> {
    Sentiment::ALL
        .iter()
        .map(|&from| {
            let b = before.probability(from, Sentiment::Positive);
            let a = after.probability(from, Sentiment::Positive);
            TransitionDelta {
                from,
                before: b,
                after: a,
                delta: a - b,
            }
        })
        .collect()
}

pub fn comparison_csv(deltas: &[TransitionDelta]) -> String {
    let mut out = String::from("from_state,before_p,after_p,delta\n");
    for d in deltas {
        writeln!(out, "{},{:.6},{:.6},{:.6}", d.from, d.before, d.after, d.delta).unwrap();
    }
    out
}
