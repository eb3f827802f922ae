//! Corpus-engineering toolkit for sentiment-transition dialogue data.
//!
//! The pipeline labels each utterance with two independent sentiment voters
//! (a linear text classifier and an emoji lookup table), keeps the label only
//! where they agree, selects the dialogues whose sentiment moves toward
//! positive, and reports transition statistics. A small n-gram responder with
//! top-K sampling and MMI reranking and a set of automatic response metrics
//! complete the toolkit.

pub mod corpus;
pub mod emoji;
pub mod error;
pub mod evaluation;
pub mod labeling;
pub mod pt;
pub mod responder;
pub mod synth;
pub mod text;

pub use corpus::{
    compute_stats, load_corpus, save_corpus, Corpus, CorpusStats, Dialogue, LabelDistribution,
    Sentiment, Utterance,
};
pub use emoji::{extract_emojis, strip_emojis};
pub use error::{Error, Result};
pub use evaluation::{
    bleu, classification_metrics, context_score, evaluate_responses, fluency, ClassificationReport,
    EvalExample, IdfTable, MetricReport,
};
pub use labeling::{
    fuse_labels, label_by_emoji, label_corpus, predict_sp, score_to_label, split_reviews, train_sp,
    EmojiSentimentTable, LabeledText, LinearSentimentModel, ReviewRecord, SplitSpec,
    TrainingConfig,
};
pub use pt::{
    compare_transitions, extract_pt, is_positive_transition, render_transition_dot,
    transition_matrix, Pairing, PtConfig, PtMode, TrackedSpeaker, TransitionMatrix,
};
pub use responder::{
    generate, mmi_rerank, sample_top_k, sequence_log_prob, train_lm, DialoguePair, Direction,
    GenerationConfig, LmConfig, NGramLM, TokenSequence,
};
