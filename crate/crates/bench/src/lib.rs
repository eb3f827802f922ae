//! Shared inputs for the benchmarks.

use ptdial::corpus::Corpus;
use ptdial::labeling::{EmojiSentimentTable, LabeledText};
use ptdial::synth;

pub fn reviews(n: usize) -> Vec<LabeledText> {
    synth::reviews(n, 11).iter().map(LabeledText::from).collect()
}

/// Synthetic corpus fused-labeled by the emoji table alone.
pub fn labeled_corpus(n: usize) -> Corpus {
    let table = EmojiSentimentTable::parse_tsv(&synth::emoji_table_tsv()).expect("fixture table");
    let mut c = synth::dialogue_corpus(n, 5, true);
    for d in &mut c.dialogues {
        for u in &mut d.utterances {
            if let Some(s) = ptdial::labeling::label_by_emoji(&table, u) {
                *u = u.clone().with_fused(s);
            }
        }
    }
    c
}
