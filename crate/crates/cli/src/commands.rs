//! Command implementations. Every command validates its inputs before it
//! creates or writes anything.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use ptdial::corpus::{compute_stats, load_corpus, save_corpus, Corpus, Sentiment};
use ptdial::evaluation::{classification_metrics, evaluate_responses, EvalExample, IdfTable};
use ptdial::labeling::{label_corpus, load_reviews, split_reviews, train_sp, EmojiSentimentTable, LabeledText, LinearSentimentModel};
use ptdial::pt::{compare_transitions, comparison_csv, extract_pt, render_transition_dot, transition_matrix};
use ptdial::responder::{generate, train_lm, Direction, LmConfig, NGramLM, TokenSequence};
use ptdial::synth;

use crate::config::{require, require_file, PipelineConfig};

pub const SP_MODEL: &str = "sp_model.json";
pub const SP_TEST_REPORT: &str = "sp_test_report.txt";
pub const SP_TEST_CSV: &str = "sp_test_report.csv";
pub const SP_HISTORY: &str = "sp_training_history.csv";
pub const REVIEW_LABELS: &str = "review_label_distribution.csv";
pub const LABELED_CORPUS: &str = "labeled_corpus.jsonl";
pub const PT_CORPUS: &str = "pt_corpus.jsonl";
pub const STATS_SOURCE_TXT: &str = "stats_source.txt";
pub const STATS_SOURCE_CSV: &str = "stats_source.csv";
pub const STATS_PT_TXT: &str = "stats_pt.txt";
pub const STATS_PT_CSV: &str = "stats_pt.csv";
pub const DOT_SOURCE: &str = "transitions_source.dot";
pub const DOT_PT: &str = "transitions_pt.dot";
pub const TRANSITION_COMPARISON: &str = "transition_comparison.csv";
pub const FORWARD_LM: &str = "forward_lm.json";
pub const REVERSE_LM: &str = "reverse_lm.json";
pub const RESPONSES: &str = "responses.jsonl";
pub const METRICS_PER_EXAMPLE: &str = "metrics_per_example.csv";
pub const METRICS_SUMMARY: &str = "metrics_summary.json";
pub const METRICS_HISTOGRAM: &str = "metrics_histogram.csv";
pub const MANIFEST: &str = "manifest.tsv";

/// What a stage produced, for the pipeline to decide whether to continue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    EmptyPt,
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn create_out_dir(cfg: &PipelineConfig) -> Result<PathBuf> {
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    Ok(dir)
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v = serde_json::from_str(line)
            .with_context(|| format!("{} line {}: malformed record", path.display(), i + 1))?;
        out.push(v);
    }
    Ok(out)
}

// ---------------------------------------------------------------- train-sp

pub fn check_train_sp(cfg: &PipelineConfig) -> Result<PathBuf> {
    cfg.validate_common()?;
    require(cfg.paths.reviews.as_ref(), "reviews")
}

pub fn train_sp_cmd(cfg: &PipelineConfig) -> Result<()> {
    let reviews_path = check_train_sp(cfg)?;
    run_train_sp(cfg, &reviews_path).context("stage train-sp")
}

fn run_train_sp(cfg: &PipelineConfig, reviews_path: &Path) -> Result<()> {
    let reviews = load_reviews(reviews_path)?;
    let labeled: Vec<LabeledText> = reviews.iter().map(LabeledText::from).collect();
    let (train, valid, test) = split_reviews(&labeled, &cfg.split)?;
    eprintln!(
        "train-sp: {} reviews split {}/{}/{}",
        labeled.len(),
        train.len(),
        valid.len(),
        test.len()
    );
    let (model, history) = train_sp(&train, &valid, &cfg.sp)?;
    eprintln!(
        "train-sp: loss {:.4} -> {:.4}, kept epoch {}",
        history.initial_loss,
        history.final_loss(),
        history.best_epoch
    );

    let gold: Vec<Sentiment> = test.iter().map(|r| r.label).collect();
    let pred: Vec<Sentiment> = test.iter().map(|r| model.predict(&r.text)).collect();
    let report = classification_metrics(&gold, &pred)?;
    eprintln!("train-sp: test accuracy {:.4}", report.accuracy);

    let mut hist = String::from("epoch,train_loss,valid_accuracy\n");
    writeln!(hist, "0,{:.6},", history.initial_loss)?;
    for e in &history.epochs {
        writeln!(hist, "{},{:.6},{:.6}", e.epoch, e.train_loss, e.valid_accuracy)?;
    }

    let mut dist = String::from("split,negative,neutral,positive\n");
    for (name, part) in [("all", &labeled), ("train", &train), ("valid", &valid), ("test", &test)] {
        let c = |s: Sentiment| part.iter().filter(|r| r.label == s).count();
        writeln!(
            dist,
            "{name},{},{},{}",
            c(Sentiment::Negative),
            c(Sentiment::Neutral),
            c(Sentiment::Positive)
        )?;
    }

    create_out_dir(cfg)?;
    model.save(cfg.sp_model_path())?;
    write(&cfg.out(SP_TEST_REPORT), &report.to_table())?;
    write(&cfg.out(SP_TEST_CSV), &report.to_csv())?;
    write(&cfg.out(SP_HISTORY), &hist)?;
    write(&cfg.out(REVIEW_LABELS), &dist)?;
    Ok(())
}

// ----------------------------------------------------------------- enhance

pub struct EnhanceInputs {
    corpus: PathBuf,
    emoji_table: PathBuf,
}

pub fn check_enhance(cfg: &PipelineConfig, model_will_exist: bool) -> Result<EnhanceInputs> {
    cfg.validate_common()?;
    let corpus = require(cfg.paths.corpus.as_ref(), "corpus")?;
    let emoji_table = require(cfg.paths.emoji_table.as_ref(), "emoji_table")?;
    if !model_will_exist {
        require_file(&cfg.sp_model_path(), "sp_model")?;
    }
    Ok(EnhanceInputs { corpus, emoji_table })
}

pub fn enhance_cmd(cfg: &PipelineConfig) -> Result<Outcome> {
    let inputs = check_enhance(cfg, false)?;
    run_enhance(cfg, &inputs)
}

fn run_enhance(cfg: &PipelineConfig, inputs: &EnhanceInputs) -> Result<Outcome> {
    let corpus = load_corpus(&inputs.corpus).context("stage load")?;
    let table = EmojiSentimentTable::load(&inputs.emoji_table).context("stage load")?;
    let model = LinearSentimentModel::load(cfg.sp_model_path()).context("stage load")?;

    let labeled = label_corpus(&corpus, &model, &table).context("stage label")?;
    let pt = extract_pt(&labeled, &cfg.pt);
    let n_fused = labeled.utterances().filter(|u| u.fused_label.is_some()).count();
    eprintln!(
        "enhance: {} dialogues, {} utterances fused-labeled, {} PT dialogues",
        labeled.len(),
        n_fused,
        pt.len()
    );

    let source_stats = compute_stats(&labeled).context("stage stats")?;
    let pairing = cfg.transitions.pairing;
    let threshold = cfg.transitions.threshold;
    let before = transition_matrix(&labeled, pairing);
    let after = transition_matrix(&pt, pairing);

    create_out_dir(cfg)?;
    save_corpus(&labeled, cfg.out(LABELED_CORPUS))?;
    save_corpus(&pt, cfg.out(PT_CORPUS))?;
    write(&cfg.out(STATS_SOURCE_TXT), &source_stats.to_report())?;
    write(&cfg.out(STATS_SOURCE_CSV), &source_stats.to_csv())?;
    write(&cfg.out(DOT_SOURCE), &render_transition_dot(&before, threshold))?;
    write(&cfg.out(DOT_PT), &render_transition_dot(&after, threshold))?;
    write(&cfg.out(TRANSITION_COMPARISON), &comparison_csv(&compare_transitions(&before, &after)))?;

    if pt.is_empty() {
        eprintln!("warning: no dialogue has a positive transition; PT corpus is empty");
        for stale in [STATS_PT_TXT, STATS_PT_CSV] {
            let p = cfg.out(stale);
            if p.exists() {
                fs::remove_file(&p).with_context(|| format!("removing stale {}", p.display()))?;
            }
        }
        return Ok(Outcome::EmptyPt);
    }
    let pt_stats = compute_stats(&pt).context("stage stats")?;
    write(&cfg.out(STATS_PT_TXT), &pt_stats.to_report())?;
    write(&cfg.out(STATS_PT_CSV), &pt_stats.to_csv())?;
    Ok(Outcome::Done)
}

// ---------------------------------------------------------------- train-lm

pub fn check_train_lm(cfg: &PipelineConfig, corpus_will_exist: bool) -> Result<()> {
    cfg.validate_common()?;
    if !corpus_will_exist {
        require_file(&cfg.lm_corpus_path(), "lm_corpus")?;
    }
    Ok(())
}

pub fn train_lm_cmd(cfg: &PipelineConfig) -> Result<()> {
    check_train_lm(cfg, false)?;
    run_train_lm(cfg).context("stage train-lm")
}

fn run_train_lm(cfg: &PipelineConfig) -> Result<()> {
    let corpus = load_corpus(cfg.lm_corpus_path())?;
    let forward = train_lm(&corpus, Direction::Forward, &cfg.lm)?;
    let reverse = train_lm(&corpus, Direction::Reverse, &cfg.lm)?;
    eprintln!(
        "train-lm: order {} over {} dialogues, vocabulary {}",
        forward.order(),
        corpus.len(),
        forward.vocab_size()
    );
    create_out_dir(cfg)?;
    forward.save(cfg.forward_lm_path())?;
    reverse.save(cfg.reverse_lm_path())?;
    Ok(())
}

// ----------------------------------------------------------------- respond

/// A context is one utterance or a list of turns.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum HeldOutContext {
    Text(String),
    Turns(Vec<String>),
}

impl HeldOutContext {
    pub fn turns(&self) -> Vec<String> {
        match self {
            HeldOutContext::Text(t) => vec![t.clone()],
            HeldOutContext::Turns(ts) => ts.clone(),
        }
    }

    pub fn joined(&self) -> String {
        self.turns().join(" ")
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct HeldOut {
    pub id: String,
    pub context: HeldOutContext,
    #[serde(default)]
    pub reference: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateOut {
    pub text: String,
    pub reverse_score: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResponseOut {
    pub id: String,
    pub response: String,
    pub candidates: Vec<CandidateOut>,
}

pub fn check_respond(cfg: &PipelineConfig, lms_will_exist: bool) -> Result<PathBuf> {
    cfg.validate_common()?;
    let held_out = require(cfg.paths.held_out.as_ref(), "held_out")?;
    if !lms_will_exist {
        require_file(&cfg.forward_lm_path(), "forward_lm")?;
        require_file(&cfg.reverse_lm_path(), "reverse_lm")?;
    }
    Ok(held_out)
}

pub fn respond_cmd(cfg: &PipelineConfig) -> Result<()> {
    let held_out = check_respond(cfg, false)?;
    run_respond(cfg, &held_out).context("stage respond")
}

fn run_respond(cfg: &PipelineConfig, held_out: &Path) -> Result<()> {
    let records: Vec<HeldOut> = read_jsonl(held_out)?;
    let forward = NGramLM::load(cfg.forward_lm_path())?;
    let reverse = NGramLM::load(cfg.reverse_lm_path())?;
    cfg.generation.validate(forward.vocab_size())?;

    let mut out = String::new();
    for r in &records {
        let context = TokenSequence::context_from_utterances(&r.context.turns());
        let g = generate(&forward, &reverse, &context, &cfg.generation)
            .with_context(|| format!("record {}", r.id))?;
        let line = ResponseOut {
            id: r.id.clone(),
            response: g.response.to_text(),
            candidates: g
                .candidates
                .iter()
                .map(|c| CandidateOut {
                    text: c.tokens.to_text(),
                    reverse_score: c.reverse_score,
                })
                .collect(),
        };
        out.push_str(&serde_json::to_string(&line)?);
        out.push('\n');
    }
    eprintln!("respond: {} contexts", records.len());
    create_out_dir(cfg)?;
    write(&cfg.responses_path(), &out)
}

// ---------------------------------------------------------------- evaluate

pub struct EvaluateInputs {
    background: PathBuf,
    held_out: Option<PathBuf>,
}

pub fn check_evaluate(cfg: &PipelineConfig, responses_will_exist: bool) -> Result<EvaluateInputs> {
    cfg.validate_common()?;
    let background = require(cfg.background_path().as_ref(), "background")?;
    if let Some(p) = &cfg.paths.eval_pairs {
        require_file(p, "eval_pairs")?;
        return Ok(EvaluateInputs { background, held_out: None });
    }
    let held_out = require(cfg.paths.held_out.as_ref(), "held_out")?;
    if !responses_will_exist {
        require_file(&cfg.responses_path(), "responses")?;
    }
    Ok(EvaluateInputs {
        background,
        held_out: Some(held_out),
    })
}

pub fn evaluate_cmd(cfg: &PipelineConfig) -> Result<()> {
    let inputs = check_evaluate(cfg, false)?;
    run_evaluate(cfg, &inputs).context("stage evaluate")
}

/// Pairs each response with its held-out reference by id.
pub fn join_examples(responses: &[ResponseOut], held_out: &[HeldOut]) -> Result<Vec<EvalExample>> {
    let by_id: BTreeMap<&str, &HeldOut> = held_out.iter().map(|h| (h.id.as_str(), h)).collect();
    let response_ids: BTreeSet<&str> = responses.iter().map(|r| r.id.as_str()).collect();
    let missing_ref: Vec<&str> = response_ids.iter().copied().filter(|id| !by_id.contains_key(id)).collect();
    let missing_resp: Vec<&str> = by_id.keys().copied().filter(|id| !response_ids.contains(id)).collect();
    if !missing_ref.is_empty() || !missing_resp.is_empty() {
        bail!(
            "response and reference ids do not match; without reference: [{}]; without response: [{}]",
            missing_ref.join(", "),
            missing_resp.join(", ")
        );
    }
    if response_ids.len() != responses.len() {
        bail!("duplicate ids in responses");
    }
    responses
        .iter()
        .map(|r| {
            let h = by_id[r.id.as_str()];
            let reference = h
                .reference
                .clone()
                .with_context(|| format!("held-out record {} has no reference", h.id))?;
            Ok(EvalExample {
                id: Some(r.id.clone()),
                query: h.context.joined(),
                response: r.response.clone(),
                reference,
            })
        })
        .collect()
}

fn run_evaluate(cfg: &PipelineConfig, inputs: &EvaluateInputs) -> Result<()> {
    let examples = match &inputs.held_out {
        None => read_jsonl::<EvalExample>(cfg.paths.eval_pairs.as_ref().expect("checked"))?,
        Some(held_out_path) => {
            let responses: Vec<ResponseOut> = read_jsonl(&cfg.responses_path())?;
            let held_out: Vec<HeldOut> = read_jsonl(held_out_path)?;
            join_examples(&responses, &held_out)?
        }
    };
    let background: Corpus = load_corpus(&inputs.background)?;
    let idf = IdfTable::from_corpus(&background)?;
    let lm_cfg = LmConfig {
        order: cfg.metrics.lm_order,
        ..cfg.lm.clone()
    };
    let reference_lm = train_lm(&background, Direction::Forward, &lm_cfg)?;
    let report = evaluate_responses(&examples, &reference_lm, &idf)?;
    for m in ptdial::evaluation::Metric::ALL {
        let a = report.aggregate(m);
        eprintln!("evaluate: {:<8} average {:.4} median {:.4}", m.name(), a.average, a.median);
    }
    create_out_dir(cfg)?;
    write(&cfg.out(METRICS_PER_EXAMPLE), &report.per_example_csv())?;
    write(&cfg.out(METRICS_SUMMARY), &report.summary_json()?)?;
    write(&cfg.out(METRICS_HISTOGRAM), &report.histogram_csv())?;
    Ok(())
}

// ---------------------------------------------------------------- pipeline

pub fn pipeline_cmd(cfg: &PipelineConfig) -> Result<()> {
    let reviews = check_train_sp(cfg)?;
    let enhance_inputs = check_enhance(cfg, true)?;
    check_train_lm(cfg, true)?;
    check_respond(cfg, true)?;
    let eval_inputs = check_evaluate(cfg, true)?;

    run_train_sp(cfg, &reviews).context("stage train-sp")?;
    let outcome = run_enhance(cfg, &enhance_inputs)?;
    if outcome == Outcome::EmptyPt {
        eprintln!("warning: skipping responder stages");
    } else {
        run_train_lm(cfg).context("stage train-lm")?;
        run_respond(cfg, cfg.paths.held_out.as_ref().expect("checked")).context("stage respond")?;
        run_evaluate(cfg, &eval_inputs).context("stage evaluate")?;
    }
    write_manifest(&cfg.out_dir())
}

/// `name<TAB>sha256` for every regular file in `dir` except the manifest, by name.
pub fn manifest(dir: &Path) -> Result<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().map(|t| t.is_file()).unwrap_or(false))
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n != MANIFEST)
        .collect();
    names.sort();
    let mut out = String::new();
    for n in names {
        let bytes = fs::read(dir.join(&n))?;
        writeln!(out, "{n}\t{}", hex::encode(Sha256::digest(&bytes)))?;
    }
    Ok(out)
}

fn write_manifest(dir: &Path) -> Result<()> {
    let m = manifest(dir)?;
    write(&dir.join(MANIFEST), &m)?;
    eprintln!("pipeline: {} artifacts listed in {MANIFEST}", m.lines().count());
    Ok(())
}

// ------------------------------------------------------------------- synth

pub struct SynthOptions {
    pub out: PathBuf,
    pub seed: u64,
    pub reviews: usize,
    pub dialogues: usize,
    pub held_out: usize,
    pub emojis: bool,
}

pub fn synth_cmd(o: &SynthOptions) -> Result<()> {
    fs::create_dir_all(&o.out).with_context(|| format!("creating {}", o.out.display()))?;
    write(&o.out.join("reviews.csv"), &synth::reviews_csv(&synth::reviews(o.reviews, o.seed)))?;
    write(&o.out.join("emoji_sentiment.tsv"), &synth::emoji_table_tsv())?;
    let corpus = synth::dialogue_corpus(o.dialogues, o.seed.wrapping_add(1), o.emojis);
    save_corpus(&corpus, o.out.join("corpus.jsonl"))?;
    write(
        &o.out.join("held_out.jsonl"),
        &synth::held_out_jsonl(&synth::held_out(o.held_out, o.seed.wrapping_add(2))),
    )?;
    eprintln!(
        "synth: {} reviews, {} dialogues, {} held-out records in {}",
        o.reviews,
        o.dialogues,
        o.held_out,
        o.out.display()
    );
    Ok(())
}
