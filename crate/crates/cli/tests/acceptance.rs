//! Acceptance gate: one line per criterion, nonzero exit if any fails.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ptdial::corpus::{load_corpus, Corpus, CorpusStats, Dialogue, LabelDistribution, Sentiment};
use ptdial::evaluation::{bleu, classification_metrics, f1_score};
use ptdial::labeling::{
    label_corpus, load_reviews, loss_and_gradient, split_reviews, train_sp, EmojiSentimentTable, LabeledText,
    SparseFeatures, SplitSpec, TrainingConfig,
};
use ptdial::pt::{compare_transitions, extract_pt, transition_matrix, Pairing, PtConfig, PtMode, TrackedSpeaker};
use ptdial::responder::{
    generate, greedy_decode, mmi_rerank, sample_top_k, swap_roles, top_k_ids, train_lm, Direction, GenerationConfig,
    LmConfig, NGramLM, TokenSequence,
};
use ptdial::synth;

type Check = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Check);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

// 1 -------------------------------------------------------------------------

fn f1_identity() -> Check {
    let f1 = f1_score(0.91, 0.87);
    ensure((f1 - 0.89).abs() <= 0.005, format!("f1_score(0.91, 0.87) = {f1}"))?;

    // negative: tp 7917, predicted 8700, support 9100
    use Sentiment::{Negative as N, Neutral as U, Positive as P};
    let mut gold = Vec::new();
    let mut pred = Vec::new();
    for (g, p, n) in [(N, N, 7917), (U, N, 783), (N, P, 1183), (U, U, 2000), (P, P, 3000)] {
        gold.extend(std::iter::repeat_n(g, n));
        pred.extend(std::iter::repeat_n(p, n));
    }
    let r = classification_metrics(&gold, &pred).map_err(|e| e.to_string())?;
    let neg = r.classes[0];
    ensure((neg.precision - 0.91).abs() < 1e-12 && (neg.recall - 0.87).abs() < 1e-12, "precision/recall construction")?;
    ensure((neg.f1 - 0.89).abs() <= 0.005, format!("report f1 {}", neg.f1))?;
    let table = r.to_table();
    let header: Vec<&str> = table.lines().next().unwrap_or("").split_whitespace().collect();
    ensure(header == ["Sentiment", "precision", "recall", "f1-score", "support"], format!("header {header:?}"))?;
    let rows: Vec<&str> = table.lines().skip(1).take(3).map(|l| l.split_whitespace().next().unwrap_or("")).collect();
    ensure(rows == ["negative", "neutral", "positive"], format!("rows {rows:?}"))?;
    let neg_row: Vec<&str> = table.lines().nth(1).unwrap().split_whitespace().collect();
    ensure(neg_row[1..] == ["0.91", "0.87", "0.89", "9100"], format!("negative row {neg_row:?}"))?;
    Ok(format!("f1 = {f1:.4}"))
}

// 2 -------------------------------------------------------------------------

fn stats_arithmetic() -> Check {
    let s = CorpusStats::from_counts(67_205, 302_475, 0, LabelDistribution::default()).map_err(|e| e.to_string())?;
    let v = s.avg_utterances_per_dialogue;
    ensure((v - 4.50).abs() <= 0.01, format!("avg utterances per dialogue {v}"))?;
    Ok(format!("avg utterances per dialogue = {v:.4}"))
}

// 3 -------------------------------------------------------------------------

fn rank(s: Sentiment) -> i8 {
    s.index() as i8
}

fn brute_force_pt(d: &Dialogue, tracked: TrackedSpeaker, mode: PtMode) -> bool {
    let first = &d.utterances[0].speaker;
    let labels: Vec<Sentiment> = d
        .utterances
        .iter()
        .filter(|u| tracked == TrackedSpeaker::AllSpeakers || &u.speaker == first)
        .filter_map(|u| u.fused_label)
        .collect();
    for i in 1..labels.len() {
        let (a, b) = (labels[i - 1], labels[i]);
        let hit = match mode {
            PtMode::AnyIncrease => rank(b) > rank(a),
            PtMode::MustReachPositive => rank(b) > rank(a) && b == Sentiment::Positive,
        };
        if hit {
            return true;
        }
    }
    false
}

fn pt_oracle() -> Check {
    let corpus = synth::random_labeled_dialogues(1000, 314);
    let mut sizes = Vec::new();
    for tracked in [TrackedSpeaker::FirstSpeaker, TrackedSpeaker::AllSpeakers] {
        for mode in [PtMode::AnyIncrease, PtMode::MustReachPositive] {
            let cfg = PtConfig {
                tracked_speaker: tracked,
                mode,
                ..PtConfig::default()
            };
            let expected: Vec<Dialogue> = corpus
                .dialogues
                .iter()
                .filter(|d| brute_force_pt(d, tracked, mode))
                .cloned()
                .collect();
            let got = extract_pt(&corpus, &cfg);
            ensure(got.dialogues == expected, format!("{tracked:?}/{mode:?} differs from brute force"))?;
            sizes.push(expected.len());
        }
    }
    Ok(format!("4 settings agree; PT sizes {sizes:?} of 1000"))
}

// 4 -------------------------------------------------------------------------

fn transition_soundness() -> Check {
    let corpus = synth::random_labeled_dialogues(1000, 2718);
    let mut expected = [[0u64; 3]; 3];
    for d in &corpus.dialogues {
        for pair in d.utterances.windows(2) {
            if let (Some(a), Some(b)) = (pair[0].fused_label, pair[1].fused_label) {
                expected[a.index()][b.index()] += 1;
            }
        }
    }
    let m = transition_matrix(&corpus, Pairing::ConsecutiveUtterances);
    ensure(m.counts == expected, format!("counts {:?} vs {expected:?}", m.counts))?;

    let mut same = [[0u64; 3]; 3];
    for d in &corpus.dialogues {
        let u = &d.utterances;
        for i in 0..u.len() {
            if let Some(j) = (i + 1..u.len()).find(|&j| u[j].speaker == u[i].speaker) {
                if let (Some(a), Some(b)) = (u[i].fused_label, u[j].fused_label) {
                    same[a.index()][b.index()] += 1;
                }
            }
        }
    }
    ensure(transition_matrix(&corpus, Pairing::SameSpeakerConsecutive).counts == same, "same-speaker counts")?;

    let mut worst: f64 = 0.0;
    for row in m.probabilities {
        let s: f64 = row.iter().sum();
        if s != 0.0 {
            worst = worst.max((s - 1.0).abs());
        }
    }
    ensure(worst <= 1e-9, format!("row sum error {worst:e}"))?;
    Ok(format!("{} pairs counted, max row-sum error {worst:.1e}", m.total()))
}

// 5 -------------------------------------------------------------------------

fn pt_uplift_on_bundled_corpus() -> Check {
    let data = data_dir();
    let reviews = load_reviews(data.join("reviews.csv")).map_err(|e| e.to_string())?;
    let labeled: Vec<LabeledText> = reviews.iter().map(LabeledText::from).collect();
    let (train, valid, _) = split_reviews(&labeled, &SplitSpec::default()).map_err(|e| e.to_string())?;
    let (model, _) = train_sp(&train, &valid, &TrainingConfig::default()).map_err(|e| e.to_string())?;
    let corpus = load_corpus(data.join("corpus.jsonl")).map_err(|e| e.to_string())?;
    ensure(corpus.len() >= 500, format!("bundled corpus has {} dialogues", corpus.len()))?;
    let table = EmojiSentimentTable::load(data.join("emoji_sentiment.tsv")).map_err(|e| e.to_string())?;
    let labeled_corpus = label_corpus(&corpus, &model, &table).map_err(|e| e.to_string())?;
    let pt = extract_pt(&labeled_corpus, &PtConfig::default());
    ensure(!pt.is_empty(), "PT corpus empty")?;
    let deltas = compare_transitions(
        &transition_matrix(&labeled_corpus, Pairing::ConsecutiveUtterances),
        &transition_matrix(&pt, Pairing::ConsecutiveUtterances),
    );
    let shown: Vec<String> = deltas.iter().map(|d| format!("{}:{:+.3}", d.from, d.delta)).collect();
    ensure(deltas.iter().all(|d| d.delta > 0.0), format!("deltas {shown:?}"))?;
    Ok(format!("{} of {} dialogues PT; delta P(->positive) {}", pt.len(), corpus.len(), shown.join(" ")))
}

// 6 -------------------------------------------------------------------------

fn accuracy(model: &ptdial::LinearSentimentModel, data: &[LabeledText]) -> f64 {
    data.iter().filter(|r| model.predict(&r.text) == r.label).count() as f64 / data.len() as f64
}

fn sp_quality() -> Check {
    let sep = synth::separable(3000, 99);
    let (train, valid, test) = split_reviews(&sep, &SplitSpec::default()).map_err(|e| e.to_string())?;
    let (model, _) = train_sp(&train, &valid, &TrainingConfig::default()).map_err(|e| e.to_string())?;
    let sep_acc = accuracy(&model, &test);
    ensure(sep_acc >= 0.95, format!("separable accuracy {sep_acc:.4}"))?;

    let reviews = load_reviews(data_dir().join("reviews.csv")).map_err(|e| e.to_string())?;
    let labeled: Vec<LabeledText> = reviews.iter().map(LabeledText::from).collect();
    let (train, valid, test) = split_reviews(&labeled, &SplitSpec::default()).map_err(|e| e.to_string())?;
    let (model, _) = train_sp(&train, &valid, &TrainingConfig::default()).map_err(|e| e.to_string())?;
    let acc = accuracy(&model, &test);
    let majority = Sentiment::ALL
        .into_iter()
        .max_by_key(|s| train.iter().filter(|r| r.label == *s).count())
        .unwrap();
    let baseline = test.iter().filter(|r| r.label == majority).count() as f64 / test.len() as f64;
    ensure(acc - baseline >= 0.10, format!("review accuracy {acc:.4} vs majority {baseline:.4}"))?;
    Ok(format!(
        "separable {sep_acc:.4}; reviews {acc:.4} vs majority baseline {baseline:.4}"
    ))
}

// 7 -------------------------------------------------------------------------

fn gradient_check() -> Check {
    let h = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n_feat = rng.gen_range(2..=6);
        let w: Vec<Vec<f64>> = (0..3).map(|_| (0..=n_feat).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let mut batch: Vec<(SparseFeatures, usize)> = Vec::new();
        for _ in 0..rng.gen_range(1..=8) {
            let mut x = Vec::new();
            for j in 0..n_feat {
                if rng.gen_bool(0.6) {
                    x.push((j, rng.gen_range(1..=3) as f64));
                }
            }
            batch.push((x, rng.gen_range(0..3)));
        }
        let l2 = rng.gen_range(0.0..0.1);
        let (_, grad) = loss_and_gradient(&w, &batch, l2);
        for c in 0..3 {
            for j in 0..=n_feat {
                let mut plus = w.clone();
                plus[c][j] += h;
                let mut minus = w.clone();
                minus[c][j] -= h;
                let num = (loss_and_gradient(&plus, &batch, l2).0 - loss_and_gradient(&minus, &batch, l2).0) / (2.0 * h);
                let scale = num.abs().max(grad[c][j].abs());
                if scale < 1e-7 {
                    ensure((num - grad[c][j]).abs() < 1e-9, "near-zero gradient mismatch")?;
                    continue;
                }
                worst = worst.max((num - grad[c][j]).abs() / scale);
            }
        }
    }
    ensure(worst <= 1e-4, format!("max relative error {worst:e}"))?;
    Ok(format!("max relative error {worst:.2e} over 20 models"))
}

// 8 -------------------------------------------------------------------------

fn responder_corpus() -> Corpus {
    synth::dialogue_corpus(80, 12, false)
}

fn reverse_score_by_hand(rev: &NGramLM, context: &TokenSequence, cand: &TokenSequence) -> f64 {
    let pair = swap_roles(context, cand);
    let mut hist = rev.encode(pair.context.tokens());
    let mut s = 0.0;
    for t in pair.response.tokens() {
        let id = rev.token_id(t);
        s += rev.next_token_distribution(&hist)[id as usize].ln();
        hist.push(id);
    }
    s
}

fn mmi_argmax() -> Check {
    let c = responder_corpus();
    let fwd = train_lm(&c, Direction::Forward, &LmConfig::default()).map_err(|e| e.to_string())?;
    let rev = train_lm(&c, Direction::Reverse, &LmConfig::default()).map_err(|e| e.to_string())?;
    let words: Vec<String> = fwd.vocabulary().iter().filter(|w| !w.starts_with('<')).cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for inst in 0..100 {
        let ctx: Vec<String> = (0..rng.gen_range(1..6)).map(|_| words.choose(&mut rng).unwrap().clone()).collect();
        let context = TokenSequence::context_from_utterances(&[ctx.join(" ")]);
        let cands: Vec<TokenSequence> = (0..10)
            .map(|_| {
                let mut t: Vec<String> = (0..rng.gen_range(1..8)).map(|_| words.choose(&mut rng).unwrap().clone()).collect();
                t.push("<eos>".into());
                TokenSequence::new(t)
            })
            .collect();
        let scores: Vec<f64> = cands.iter().map(|k| reverse_score_by_hand(&rev, &context, k)).collect();
        let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let ranked = mmi_rerank(&fwd, &rev, &context, &cands);
        ensure((ranked[0].reverse_score - best).abs() < 1e-9, format!("instance {inst}: top is not the argmax"))?;

        let cfg = GenerationConfig {
            seed: inst,
            max_length: 15,
            ..GenerationConfig::default()
        };
        let g = generate(&fwd, &rev, &context, &cfg).map_err(|e| e.to_string())?;
        let max = g.candidates.iter().map(|k| k.reverse_score).fold(f64::NEG_INFINITY, f64::max);
        ensure(g.candidates[g.best].reverse_score == max, format!("instance {inst}: generate not maximal"))?;
    }
    Ok("100 instances, rerank top and generate output are reverse-score maxima".into())
}

// 9 -------------------------------------------------------------------------

fn lm_normalization_and_sampling() -> Check {
    let c = responder_corpus();
    let lm = train_lm(&c, Direction::Forward, &LmConfig::default()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let h: Vec<u32> = (0..rng.gen_range(0..6)).map(|_| rng.gen_range(0..lm.vocab_size() as u32)).collect();
        let s: f64 = lm.next_token_distribution(&h).iter().sum();
        worst = worst.max((s - 1.0).abs());
    }
    ensure(worst <= 1e-9, format!("normalization error {worst:e}"))?;

    for (i, u) in ["sad", "okay fine", "", "love this game"].iter().enumerate() {
        let ctx = TokenSequence::context_from_utterances(&[u]);
        let cfg = GenerationConfig {
            top_k: 1,
            seed: 1000 + i as u64,
            ..GenerationConfig::default()
        };
        let s = sample_top_k(&lm, &ctx, &cfg).map_err(|e| e.to_string())?;
        ensure(s == greedy_decode(&lm, &ctx, cfg.max_length), format!("top-1 differs from greedy for {u:?}"))?;
    }

    let ctx = TokenSequence::context_from_utterances(&["tired"]);
    let dist = lm.next_token_distribution(&lm.encode(ctx.tokens()));
    let top = top_k_ids(&dist, 2);
    let p = dist[top[0] as usize] / (dist[top[0] as usize] + dist[top[1] as usize]);
    let n = 10_000u64;
    let mut hits = 0u64;
    for seed in 0..n {
        let cfg = GenerationConfig {
            top_k: 2,
            max_length: 1,
            seed,
            ..GenerationConfig::default()
        };
        let s = sample_top_k(&lm, &ctx, &cfg).map_err(|e| e.to_string())?;
        if lm.token_id(&s.tokens()[0]) == top[0] {
            hits += 1;
        }
    }
    let freq = hits as f64 / n as f64;
    let se = (p * (1.0 - p) / n as f64).sqrt();
    ensure((freq - p).abs() <= 3.0 * se, format!("K=2 frequency {freq:.4} vs p {p:.4} (se {se:.4})"))?;
    Ok(format!(
        "max sum error {worst:.1e}; top-1 == greedy; K=2 freq {freq:.4} vs {p:.4} ({:.2} se)",
        (freq - p).abs() / se
    ))
}

// 10 ------------------------------------------------------------------------

fn bleu_oracle() -> Check {
    let t = |s: &str| s.split_whitespace().map(str::to_string).collect::<Vec<_>>();
    let cases = [
        ("the cat sat", "the cat sat down", (-1.0f64 / 3.0).exp()),
        ("a b c d", "a b c d", 1.0),
        ("a b c d", "w x y z", 0.0),
        ("the the the the", "the cat", (1.0f64 / 96.0).powf(0.25)),
        ("a b c d e", "a b x d e", (0.8f64 * 0.5 * 0.25 / 3.0).powf(0.25)),
    ];
    for (h, r, want) in cases {
        let got = bleu(&t(h), &t(r));
        ensure((got - want).abs() <= 1e-6, format!("BLEU({h:?}, {r:?}) = {got}, want {want}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..100 {
        let h: Vec<String> = (0..rng.gen_range(4..25)).map(|_| format!("w{}", rng.gen_range(0..8))).collect();
        let b = bleu(&h, &h);
        ensure((b - 1.0).abs() <= 1e-12, format!("BLEU(h,h) = {b}"))?;
    }
    Ok("5 hand cases within 1e-6; BLEU(h,h) = 1 for 100 random h".into())
}

// 11 ------------------------------------------------------------------------

fn run_pipeline(out: &Path) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_ptdial"))
        .arg("--config")
        .arg(data_dir().join("pipeline.toml"))
        .arg("--out")
        .arg(out)
        .arg("pipeline")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(o.status.success(), format!("pipeline failed: {}", String::from_utf8_lossy(&o.stderr)))
}

fn end_to_end_determinism() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let start = Instant::now();
    run_pipeline(&a)?;
    let first = start.elapsed();
    ensure(first < Duration::from_secs(60), format!("pipeline took {first:?}"))?;
    run_pipeline(&b)?;
    let ma = fs::read_to_string(a.join("manifest.tsv")).map_err(|e| e.to_string())?;
    let mb = fs::read_to_string(b.join("manifest.tsv")).map_err(|e| e.to_string())?;
    ensure(ma.lines().count() >= 10, format!("manifest lists {} artifacts", ma.lines().count()))?;
    ensure(ma == mb, "manifests differ between runs")?;
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for f in ["transitions_source.dot", "transitions_pt.dot"] {
        let got = fs::read(a.join(f)).map_err(|e| e.to_string())?;
        let want = fs::read(golden.join(f)).map_err(|e| e.to_string())?;
        ensure(got == want, format!("{f} differs from golden file"))?;
    }
    Ok(format!("{} artifacts, identical manifests, golden DOT match, first run {first:.1?}", ma.lines().count()))
}

// ---------------------------------------------------------------------------

fn main() {
    let criteria: [Criterion; 11] = [
        ("f1 identity and report columns", 1, f1_identity),
        ("corpus statistics arithmetic", 1, stats_arithmetic),
        ("PT oracle equivalence", 5, pt_oracle),
        ("transition soundness", 5, transition_soundness),
        ("PT uplift on bundled corpus", 30, pt_uplift_on_bundled_corpus),
        ("predictor quality", 60, sp_quality),
        ("gradient correctness", 10, gradient_check),
        ("MMI rerank argmax", 10, mmi_argmax),
        ("LM normalization and sampling", 30, lm_normalization_and_sampling),
        ("BLEU oracle", 1, bleu_oracle),
        ("end-to-end determinism", 60, end_to_end_determinism),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > Duration::from_secs(*budget) => {
                Err(format!("{detail}; exceeded {budget}s budget"))
            }
            r => r,
        };
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({elapsed:.2?}): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({elapsed:.2?}): {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
