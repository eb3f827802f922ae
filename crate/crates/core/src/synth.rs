//! Seeded generators for the bundled fixtures: review-style training data, an
//! emoji sentiment table, a dialogue corpus with controlled sentiment
//! transition probabilities, and held-out contexts with references.
//!
//! The dialogue corpus mixes two regimes. "Uplifting" dialogues follow a
//! transition matrix that drifts toward positive, "drifting" dialogues one that
//! does not. Selecting dialogues with a positive transition over-samples the
//! first regime, which is what the PT comparison is expected to show.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::{Corpus, Dialogue, Sentiment, Utterance};
use crate::labeling::{LabeledText, ReviewRecord};

const NEG_WORDS: &[&str] = &[
    "terrible", "awful", "hate", "sad", "angry", "broken", "worst", "annoying", "disappointed",
    "horrible", "useless", "crash", "lost", "upset", "tired", "sick", "lonely", "bad", "boring",
    "frustrating", "miss", "cry", "ugh", "hurts", "painful",
];
const NEU_WORDS: &[&str] = &[
    "okay", "fine", "average", "normal", "usual", "maybe", "guess", "plain", "standard",
    "ordinary", "alright", "decent", "meh", "moderate", "regular", "typical", "fair", "whatever",
    "somewhat", "neutral",
];
const POS_WORDS: &[&str] = &[
    "great", "love", "amazing", "happy", "awesome", "excellent", "best", "wonderful", "fantastic",
    "perfect", "glad", "enjoy", "nice", "beautiful", "fun", "thanks", "brilliant", "cool", "sweet",
    "proud", "excited", "lovely", "superb", "delighted", "yay",
];
const FILLER: &[&str] = &[
    "the", "app", "it", "this", "i", "you", "we", "my", "your", "today", "really", "just", "was",
    "is", "so", "and", "to", "of", "with", "for", "about", "time", "day", "work", "phone", "game",
    "update", "again", "still", "now", "think", "feel", "got", "movie", "friends", "weekend",
    "home", "night", "morning", "food",
];

const NEG_EMOJI: &[&str] = &[
    "😢", "😭", "😞", "😠", "😡", "💔", "😩", "😫", "😒", "😔", "😿", "👎", "🙁", "😣", "😤",
];
const NEU_EMOJI: &[&str] = &["😐", "😑", "🤔", "😶", "🙄", "😬", "🤷", "😯", "🫤", "😕"];
const POS_EMOJI: &[&str] = &[
    "😀", "😂", "😍", "🥰", "😊", "😄", "❤️", "👍", "🎉", "🙌", "😁", "💕", "🤗", "😎", "🥳",
];
/// Present in text but absent from the table.
const UNMAPPED_EMOJI: &[&str] = &["🤖", "🍕", "🚗", "📱"];

fn words(s: Sentiment) -> &'static [&'static str] {
    [NEG_WORDS, NEU_WORDS, POS_WORDS][s.index()]
}

fn emojis(s: Sentiment) -> &'static [&'static str] {
    [NEG_EMOJI, NEU_EMOJI, POS_EMOJI][s.index()]
}

fn pick<'a>(rng: &mut impl Rng, xs: &[&'a str]) -> &'a str {
    xs.choose(rng).expect("non-empty word list")
}

fn draw(rng: &mut impl Rng, probs: &[f64; 3]) -> Sentiment {
    let mut u: f64 = rng.gen();
    for (i, p) in probs.iter().enumerate() {
        u -= p;
        if u < 0.0 {
            return Sentiment::ALL[i];
        }
    }
    Sentiment::Positive
}

/// Bag of filler words with sentiment words of `label` mixed in, plus a little
/// cross-class noise.
fn sentence(rng: &mut impl Rng, label: Sentiment, min_len: usize, max_len: usize, signal: f64) -> String {
    let n = rng.gen_range(min_len..=max_len);
    let mut toks = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.gen();
        let w = if u < signal {
            pick(rng, words(label))
        } else if u < signal + 0.06 {
            let other = Sentiment::ALL[rng.gen_range(0..3)];
            pick(rng, words(other))
        } else {
            pick(rng, FILLER)
        };
        toks.push(w);
    }
    toks.join(" ")
}

/// Review-style `(text, score)` records. Labels from scores: 30% negative,
/// 25% neutral, 45% positive.
pub fn reviews(n: usize, seed: u64) -> Vec<ReviewRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let score_probs = [0.15, 0.15, 0.25, 0.20, 0.25];
    (0..n)
        .map(|_| {
            let mut u: f64 = rng.gen();
            let mut score = 5u8;
            for (i, p) in score_probs.iter().enumerate() {
                u -= p;
                if u < 0.0 {
                    score = i as u8 + 1;
                    break;
                }
            }
            let rec = ReviewRecord::new("", score).expect("score in range");
            let text = sentence(&mut rng, rec.label(), 6, 14, 0.3);
            ReviewRecord { text, score }
        })
        .collect()
}

pub fn reviews_csv(records: &[ReviewRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
}

/// Two-column TSV mapping every fixture emoji to its sentiment.
pub fn emoji_table_tsv() -> String {
    let mut out = String::from("# emoji\tlabel\n");
    for s in Sentiment::ALL {
        for e in emojis(s) {
            writeln!(out, "{e}\t{s}").unwrap();
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
struct Regime {
    start: [f64; 3],
    transitions: [[f64; 3]; 3],
}

const UPLIFTING: Regime = Regime {
    start: [0.5, 0.4, 0.1],
    transitions: [[0.2, 0.3, 0.5], [0.1, 0.3, 0.6], [0.05, 0.15, 0.8]],
};

const DRIFTING: Regime = Regime {
    start: [0.3, 0.3, 0.4],
    transitions: [[0.6, 0.3, 0.1], [0.3, 0.5, 0.2], [0.35, 0.3, 0.35]],
};

/// Share of dialogues drawn from the uplifting regime.
const UPLIFTING_SHARE: f64 = 0.4;

fn utterance_text(rng: &mut impl Rng, label: Sentiment, with_emojis: bool) -> String {
    let mut text = sentence(rng, label, 4, 10, 0.35);
    if with_emojis {
        let u: f64 = rng.gen();
        if u < 0.75 {
            for _ in 0..rng.gen_range(1..=2) {
                text.push(' ');
                text.push_str(pick(rng, emojis(label)));
            }
        }
        if rng.gen_bool(0.1) {
            text.push(' ');
            let other = Sentiment::ALL[rng.gen_range(0..3)];
            text.push_str(pick(rng, emojis(other)));
        }
        if rng.gen_bool(0.1) {
            text.push(' ');
            text.push_str(pick(rng, UNMAPPED_EMOJI));
        }
    }
    text
}

/// Sentiment sequence plus text for one dialogue.
fn dialogue_labels(rng: &mut impl Rng, len: usize) -> Vec<Sentiment> {
    let regime = if rng.gen_bool(UPLIFTING_SHARE) { UPLIFTING } else { DRIFTING };
    let mut labels = vec![draw(rng, &regime.start)];
    while labels.len() < len {
        let prev = *labels.last().unwrap();
        labels.push(draw(rng, &regime.transitions[prev.index()]));
    }
    labels
}

/// Unlabeled dialogue corpus of `n` dialogues of 2 to 6 utterances; speakers
/// alternate `A`/`B`.
pub fn dialogue_corpus(n: usize, seed: u64, with_emojis: bool) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dialogues = (0..n)
        .map(|i| {
            let len = rng.gen_range(2..=6);
            let labels = dialogue_labels(&mut rng, len);
            Dialogue {
                id: format!("syn-{i:05}"),
                utterances: labels
                    .iter()
                    .enumerate()
                    .map(|(j, &s)| {
                        Utterance::new(if j % 2 == 0 { "A" } else { "B" }, utterance_text(&mut rng, s, with_emojis))
                    })
                    .collect(),
            }
        })
        .collect();
    Corpus {
        dialogues,
        provenance: format!("synthetic dialogues (n={n}, seed={seed})"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HeldOutRecord {
    pub id: String,
    pub context: String,
    pub reference: String,
}

/// Single-turn contexts (negative or neutral) with uplifting references.
pub fn held_out(n: usize, seed: u64) -> Vec<HeldOutRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let ctx_label = if rng.gen_bool(0.5) { Sentiment::Negative } else { Sentiment::Neutral };
            let reply = draw(&mut rng, &UPLIFTING.transitions[ctx_label.index()]);
            HeldOutRecord {
                id: format!("ho-{i:03}"),
                context: sentence(&mut rng, ctx_label, 4, 10, 0.35),
                reference: sentence(&mut rng, reply, 4, 10, 0.35),
            }
        })
        .collect()
}

pub fn held_out_jsonl(records: &[HeldOutRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("serializable") + "\n")
        .collect()
}

/// Linearly separable 3-class texts: each class draws its cue words from a
/// disjoint lexicon and every text carries at least one cue.
pub fn separable(n: usize, seed: u64) -> Vec<LabeledText> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let label = Sentiment::ALL[i % 3];
            let mut toks = vec![pick(&mut rng, words(label))];
            for _ in 0..rng.gen_range(2..=7) {
                toks.push(if rng.gen_bool(0.3) { pick(&mut rng, words(label)) } else { pick(&mut rng, FILLER) });
            }
            toks.shuffle(&mut rng);
            LabeledText {
                text: toks.join(" "),
                label,
            }
        })
        .collect()
}

/// Dialogues of 2 to 8 utterances with random speakers from `A`, `B`, `C` and
/// random fused labels, a quarter of them missing. Texts are placeholders.
pub fn random_labeled_dialogues(n: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dialogues = (0..n)
        .map(|i| {
            let len = rng.gen_range(2..=8);
            Dialogue {
                id: format!("rnd-{i:05}"),
                utterances: (0..len)
                    .map(|j| {
                        let speaker = ["A", "B", "C"][rng.gen_range(0..3)];
                        let u = Utterance::new(speaker, format!("u{j}"));
                        if rng.gen_bool(0.25) {
                            u
                        } else {
                            u.with_fused(Sentiment::ALL[rng.gen_range(0..3)])
                        }
                    })
                    .collect(),
            }
        })
        .collect();
    Corpus {
        dialogues,
        provenance: format!("random labeled dialogues (n={n}, seed={seed})"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labeling::EmojiSentimentTable;

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(reviews(50, 1), reviews(50, 1));
        assert_eq!(dialogue_corpus(20, 3, true), dialogue_corpus(20, 3, true));
        assert_eq!(held_out(5, 2), held_out(5, 2));
    }

    #[test]
    fn emoji_table_parses() {
        let t = EmojiSentimentTable::parse_tsv(&emoji_table_tsv()).unwrap();
        assert_eq!(t.len(), NEG_EMOJI.len() + NEU_EMOJI.len() + POS_EMOJI.len());
        for e in UNMAPPED_EMOJI {
            assert!(crate::emoji::is_emoji(e));
            assert_eq!(t.get(e), None);
        }
    }

    #[test]
    fn corpus_is_valid_and_emoji_free_when_asked() {
        let c = dialogue_corpus(30, 4, false);
        assert!(Corpus::new(c.dialogues.clone(), "").is_ok());
        assert!(c.utterances().all(|u| u.emojis.is_empty()));
        let c = dialogue_corpus(30, 4, true);
        assert!(c.utterances().any(|u| !u.emojis.is_empty()));
    }

    #[test]
    fn regimes_are_stochastic() {
        for r in [UPLIFTING, DRIFTING] {
            assert!((r.start.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for row in r.transitions {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }
}
