use ptdial::corpus::{compute_stats, load_corpus, save_corpus, Corpus, CorpusStats, Dialogue, LabelDistribution, Sentiment, Utterance};
use ptdial::pt::{render_transition_dot, TransitionMatrix};
use ptdial::responder::{Direction, LmConfig, NGramLM};
use ptdial::text::word_count;
use proptest::prelude::*;

fn arb_utterance() -> impl Strategy<Value = Utterance> {
    let text = prop::collection::vec(prop::sample::select(vec!["hi", "okay", "great", "😀", "💔", "🤖", "no!", "fine."]), 1..6)
        .prop_map(|w| w.join(" "));
    (prop::sample::select(vec!["A", "B"]), text, prop::option::of(0..3usize)).prop_map(|(s, t, l)| {
        let u = Utterance::new(s, t);
        match l {
            Some(i) => u.with_fused(Sentiment::ALL[i]),
            None => u,
        }
    })
}

fn arb_corpus() -> impl Strategy<Value = Corpus> {
    prop::collection::vec(prop::collection::vec(arb_utterance(), 2..6), 1..8).prop_map(|ds| Corpus {
        dialogues: ds
            .into_iter()
            .enumerate()
            .map(|(i, utterances)| Dialogue { id: format!("d{i}"), utterances })
            .collect(),
        provenance: String::new(),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn save_load_round_trip(c in arb_corpus()) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.jsonl");
        save_corpus(&c, &p).unwrap();
        let back = load_corpus(&p).unwrap();
        prop_assert_eq!(back.dialogues, c.dialogues);
    }

    #[test]
    fn stats_match_recount(c in arb_corpus()) {
        let s = compute_stats(&c).unwrap();
        let utts: Vec<&Utterance> = c.dialogues.iter().flat_map(|d| &d.utterances).collect();
        let words: usize = utts.iter().map(|u| u.text.split_whitespace().count()).sum();
        prop_assert_eq!(s.n_utterances, utts.len());
        prop_assert!((s.avg_words_per_dialogue - words as f64 / c.len() as f64).abs() < 1e-12);
        prop_assert!((s.avg_utterances_per_dialogue * c.len() as f64 - utts.len() as f64).abs() < 1e-9);
        let ld = s.label_distribution;
        prop_assert_eq!(ld.counts.iter().sum::<usize>() + ld.unlabeled, utts.len());
        for lab in Sentiment::ALL {
            prop_assert_eq!(ld.get(lab), utts.iter().filter(|u| u.fused_label == Some(lab)).count());
        }
        prop_assert_eq!(words, utts.iter().map(|u| word_count(&u.text)).sum::<usize>());
    }

    #[test]
    fn unigram_counts_are_additive(a in prop::collection::vec(prop::collection::vec(0..5u8, 1..6), 1..5),
                                   b in prop::collection::vec(prop::collection::vec(0..5u8, 1..6), 1..5)) {
        let words = |s: &Vec<Vec<u8>>| -> Vec<Vec<String>> { s.iter().map(|x| x.iter().map(|t| format!("w{t}")).collect()).collect() };
        let (wa, wb) = (words(&a), words(&b));
        let both: Vec<Vec<String>> = wa.iter().chain(&wb).cloned().collect();
        let cfg = LmConfig::with_order(1);
        let lm_all = NGramLM::from_sequences(&both, Direction::Forward, &cfg).unwrap();
        let lm_a = NGramLM::from_sequences(&wa, Direction::Forward, &cfg).unwrap();
        let lm_b = NGramLM::from_sequences(&wb, Direction::Forward, &cfg).unwrap();
        for w in lm_all.vocabulary() {
            let id = |lm: &NGramLM| if lm.vocabulary().contains(w) { Some(lm.token_id(w)) } else { None };
            let c = |lm: &NGramLM| id(lm).map_or(0, |i| lm.count(0, &[], i).0);
            prop_assert_eq!(c(&lm_all), c(&lm_a) + c(&lm_b));
        }
        let mut rev = both.clone();
        rev.reverse();
        let lm_rev = NGramLM::from_sequences(&rev, Direction::Forward, &LmConfig::default()).unwrap();
        let lm_fwd = NGramLM::from_sequences(&both, Direction::Forward, &LmConfig::default()).unwrap();
        prop_assert_eq!(lm_rev.to_json().unwrap(), lm_fwd.to_json().unwrap());
    }
}

#[test]
fn corrupt_line_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.jsonl");
    std::fs::write(
        &p,
        "{\"id\":\"a\",\"utterances\":[{\"speaker\":\"A\",\"text\":\"hi\"},{\"speaker\":\"B\",\"text\":\"yo\"}]}\n{not json\n",
    )
    .unwrap();
    let err = load_corpus(&p).unwrap_err().to_string();
    assert!(err.contains('2'), "{err}");
}

#[test]
fn stats_averages_from_large_counts() {
    let s = CorpusStats::from_counts(67_205, 302_475, 0, LabelDistribution::default()).unwrap();
    assert!((s.avg_utterances_per_dialogue - 4.50).abs() < 0.01);
}

#[test]
fn golden_dot() {
    let m = TransitionMatrix::from_counts([[2, 3, 5], [0, 1, 9], [0, 0, 4]]);
    let golden = include_str!("golden/transitions.dot");
    assert_eq!(render_transition_dot(&m, 0.1), golden);
}
