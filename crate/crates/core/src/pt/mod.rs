//! Positively transitioned (PT) dialogue selection and sentiment-transition
//! statistics.

mod transitions;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Dialogue, Sentiment};

pub use transitions::{
    compare_transitions, comparison_csv, render_transition_dot, transition_matrix, Pairing,
    TransitionDelta, TransitionMatrix,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackedSpeaker {
    /// Whoever speaks first in the dialogue.
    #[default]
    FirstSpeaker,
    AllSpeakers,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PtMode {
    /// Any strict increase in sentiment.
    #[default]
    AnyIncrease,
    /// A strict increase that lands on positive.
    MustReachPositive,
}

impl std::str::FromStr for PtMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "any_increase" => Ok(PtMode::AnyIncrease),
            "must_reach_positive" => Ok(PtMode::MustReachPositive),
            other => Err(crate::Error::InvalidInput(format!(
                "unknown mode {other:?} (any_increase|must_reach_positive)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PtScope {
    #[default]
    WholeDialogue,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PtConfig {
    pub tracked_speaker: TrackedSpeaker,
    pub mode: PtMode,
    pub scope: PtScope,
}

/// Fused labels of the tracked speaker's utterances, unlabeled ones skipped.
fn tracked_labels(dialogue: &Dialogue, tracked: TrackedSpeaker) -> Vec<Sentiment> {
    let first = dialogue.utterances.first().map(|u| u.speaker.as_str());
    dialogue
        .utterances
        .iter()
        .filter(|u| match tracked {
            TrackedSpeaker::FirstSpeaker => Some(u.speaker.as_str()) == first,
            TrackedSpeaker::AllSpeakers => true,
        })
        .filter_map(|u| u.fused_label)
        .collect()
}

pub fn is_positive_transition(dialogue: &Dialogue, config: &PtConfig) -> bool {
    tracked_labels(dialogue, config.tracked_speaker)
        .windows(2)
        .any(|w| {
            w[1] > w[0]
                && match config.mode {
                    PtMode::AnyIncrease => true,
                    PtMode::MustReachPositive => w[1] == Sentiment::Positive,
                }
        })
}

/// Keeps whole dialogues that contain a positive transition, in input order.
pub fn extract_pt(corpus: &Corpus, config: &PtConfig) -> Corpus {
    Corpus {
        dialogues: corpus
            .dialogues
            .iter()
            .filter(|d| is_positive_transition(d, config))
            .cloned()
            .collect(),
        provenance: format!(
            "{}; PT-extracted (tracked={:?}, mode={:?})",
            corpus.provenance, config.tracked_speaker, config.mode
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Utterance;

    pub(crate) fn labeled(id: &str, turns: &[(&str, Option<Sentiment>)]) -> Dialogue {
        Dialogue {
            id: id.into(),
            utterances: turns
                .iter()
                .map(|&(spk, lab)| {
                    let u = Utterance::new(spk, "text");
                    match lab {
                        Some(s) => u.with_fused(s),
                        None => u,
                    }
                })
                .collect(),
        }
    }

    use Sentiment::{Negative as N, Neutral as U, Positive as P};

    fn solo(labels: &[Sentiment]) -> Dialogue {
        let turns: Vec<_> = labels.iter().map(|&s| ("A", Some(s))).collect();
        labeled("d", &turns)
    }

    const ANY: PtConfig = PtConfig {
        tracked_speaker: TrackedSpeaker::FirstSpeaker,
        mode: PtMode::AnyIncrease,
        scope: PtScope::WholeDialogue,
    };
    const REACH: PtConfig = PtConfig {
        mode: PtMode::MustReachPositive,
        ..ANY
    };

    #[test]
    fn neutral_to_positive() {
        assert!(is_positive_transition(&solo(&[U, P]), &ANY));
        assert!(is_positive_transition(&solo(&[U, P]), &REACH));
    }

    #[test]
    fn flat_positive_is_not_pt() {
        assert!(!is_positive_transition(&solo(&[P, P]), &ANY));
        assert!(!is_positive_transition(&solo(&[P, P]), &REACH));
    }

    #[test]
    fn modes_differ() {
        let d = solo(&[N, U, N]);
        assert!(is_positive_transition(&d, &ANY));
        assert!(!is_positive_transition(&d, &REACH));
    }

    #[test]
    fn unlabeled_skipped_and_other_speakers_ignored() {
        let d = labeled("d", &[("A", Some(N)), ("B", Some(P)), ("A", None), ("A", Some(P))]);
        assert!(is_positive_transition(&d, &ANY));
        let d = labeled("d", &[("A", Some(P)), ("B", Some(N)), ("B", Some(P)), ("A", Some(P))]);
        assert!(!is_positive_transition(&d, &ANY));
        let all = PtConfig {
            tracked_speaker: TrackedSpeaker::AllSpeakers,
            ..ANY
        };
        assert!(is_positive_transition(&d, &all));
        assert!(!is_positive_transition(&labeled("d", &[("A", None), ("B", None)]), &all));
    }

    #[test]
    fn extraction_filters_whole_dialogues() {
        let c = Corpus::new(
            vec![
                labeled("a", &[("A", Some(P)), ("B", Some(P))]),
                labeled("b", &[("A", Some(N)), ("B", None), ("A", Some(P))]),
                labeled("c", &[("A", Some(U)), ("B", Some(P)), ("A", Some(N))]),
            ],
            "src",
        )
        .unwrap();
        let out = extract_pt(&c, &ANY);
        assert_eq!(out.len(), 1);
        assert_eq!(out.dialogues[0], c.dialogues[1]);
        assert!(out.provenance.starts_with("src; PT-extracted"));
        assert_eq!(extract_pt(&out, &ANY).dialogues, out.dialogues);
    }

    #[test]
    fn unlabeled_corpus_gives_nothing() {
        let c = Corpus::new(vec![labeled("a", &[("A", None), ("B", None)])], "").unwrap();
        assert!(extract_pt(&c, &ANY).is_empty());
    }

    #[test]
    fn all_positive_never_transitions() {
        for cfg in [ANY, REACH] {
            assert!(!is_positive_transition(&solo(&[P, P, P, P]), &cfg));
        }
    }
}
