//! Toy dialogue responder: forward and reverse n-gram models, top-K sampling
//! and maximum mutual information (MMI) reranking.
//!
//! A dialogue is flattened into one token stream where every utterance is
//! closed by `<sep>` and the last one by `<eos>`. The forward model scores a
//! response given its context; the reverse model, trained on role-swapped
//! pairs, scores the context given a response and is what MMI reranks by.

mod generate;
mod lm;

use serde::{Deserialize, Serialize};

use crate::corpus::Dialogue;
use crate::error::{Error, Result};
use crate::text::{is_reserved, tokenize, EOS, SEP};

pub use generate::{
    generate, greedy_decode, mmi_rerank, sample_top_k, swap_roles, top_k_ids, Generation,
    GenerationConfig, RankedCandidate,
};
pub use lm::{
    sequence_log_prob, train_lm, training_sequences, Direction, LmConfig, NGramLM,
    LM_FORMAT_VERSION,
};

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    pub fn new(tokens: Vec<String>) -> Self {
        TokenSequence(tokens)
    }

    pub fn from_strs(tokens: &[&str]) -> Self {
        TokenSequence(tokens.iter().map(|t| t.to_string()).collect())
    }

    /// Context sequence for a list of utterances: each tokenized and closed by `<sep>`.
    pub fn context_from_utterances<S: AsRef<str>>(utterances: &[S]) -> Self {
        let mut tokens = Vec::new();
        for u in utterances {
            tokens.extend(tokenize(u.as_ref()));
            tokens.push(SEP.to_string());
        }
        TokenSequence(tokens)
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ends_with(&self, token: &str) -> bool {
        self.0.last().is_some_and(|t| t == token)
    }

    /// Tokens without a trailing `<eos>` or `<sep>`.
    pub fn body(&self) -> &[String] {
        match self.0.last() {
            Some(t) if t == EOS || t == SEP => &self.0[..self.0.len() - 1],
            _ => &self.0,
        }
    }

    /// Space-joined text with reserved tokens dropped.
    pub fn to_text(&self) -> String {
        self.0
            .iter()
            .filter(|t| !is_reserved(t))
            .cloned()
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl From<Vec<String>> for TokenSequence {
    fn from(v: Vec<String>) -> Self {
        TokenSequence(v)
    }
}

/// A context `X` and the response `X̄` that follows it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DialoguePair {
    pub context: TokenSequence,
    pub response: TokenSequence,
}

impl DialoguePair {
    /// The context must be empty or end with `<sep>`; the response must end with `<eos>`.
    pub fn new(context: TokenSequence, response: TokenSequence) -> Result<Self> {
        if !context.is_empty() && !context.ends_with(SEP) {
            return Err(Error::InvalidInput("context must end with <sep>".into()));
        }
        if !response.ends_with(EOS) {
            return Err(Error::InvalidInput("response must end with <eos>".into()));
        }
        Ok(DialoguePair { context, response })
    }
}

pub(crate) fn dialogue_token_lists(d: &Dialogue) -> Vec<Vec<String>> {
    d.utterances.iter().map(|u| tokenize(&u.text)).collect()
}
