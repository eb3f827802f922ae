use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::lm::{sequence_log_prob, NGramLM};
use super::{DialoguePair, TokenSequence};
use crate::error::{Error, Result};
use crate::text::{EOS, SEP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub top_k: usize,
    pub n_candidates: usize,
    pub max_length: usize,
    pub seed: u64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            top_k: 10,
            n_candidates: 10,
            max_length: 30,
            seed: 42,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self, vocab_size: usize) -> Result<()> {
        if self.top_k == 0 || self.n_candidates == 0 || self.max_length == 0 {
            return Err(Error::InvalidInput("top_k, n_candidates and max_length must be >= 1".into()));
        }
        if self.top_k > vocab_size {
            return Err(Error::InvalidInput(format!(
                "top_k {} exceeds vocabulary size {vocab_size}",
                self.top_k
            )));
        }
        Ok(())
    }
}

/// Ids of the `k` most probable tokens; equal probabilities rank by id.
pub fn top_k_ids(dist: &[f64], k: usize) -> Vec<u32> {
    let mut ids: Vec<u32> = (0..dist.len() as u32).collect();
    ids.sort_by(|&a, &b| dist[b as usize].total_cmp(&dist[a as usize]).then(a.cmp(&b)));
    ids.truncate(k);
    ids
}

fn decode_with<F>(lm: &NGramLM, context: &TokenSequence, max_length: usize, mut pick: F) -> TokenSequence
where
    F: FnMut(&[f64]) -> u32,
{
    let eos = lm.token_id(EOS);
    let mut history = lm.encode(context.tokens());
    let mut out = Vec::new();
    for _ in 0..max_length {
        let next = pick(&lm.next_token_distribution(&history));
        history.push(next);
        out.push(lm.token(next).to_string());
        if next == eos {
            break;
        }
    }
    TokenSequence::new(out)
}

/// Always takes the most probable next token.
pub fn greedy_decode(lm: &NGramLM, context: &TokenSequence, max_length: usize) -> TokenSequence {
    decode_with(lm, context, max_length, |dist| top_k_ids(dist, 1)[0])
}

/// Samples from the renormalized top-K distribution until `<eos>` or `max_length`.
pub fn sample_top_k(lm: &NGramLM, context: &TokenSequence, config: &GenerationConfig) -> Result<TokenSequence> {
    config.validate(lm.vocab_size())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    Ok(decode_with(lm, context, config.max_length, |dist| {
        let ids = top_k_ids(dist, config.top_k);
        let mass: f64 = ids.iter().map(|&i| dist[i as usize]).sum();
        let mut u = rng.gen::<f64>() * mass;
        for &i in &ids {
            u -= dist[i as usize];
            if u < 0.0 {
                return i;
            }
        }
        *ids.last().expect("top_k >= 1")
    }))
}

/// The reverse-direction pair for scoring P(context | candidate).
pub fn swap_roles(context: &TokenSequence, candidate: &TokenSequence) -> DialoguePair {
    let mut src: Vec<String> = candidate.body().to_vec();
    src.push(SEP.to_string());
    let mut tgt: Vec<String> = context.body().to_vec();
    tgt.push(EOS.to_string());
    DialoguePair {
        context: TokenSequence::new(src),
        response: TokenSequence::new(tgt),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedCandidate {
    /// Position in the input candidate list.
    pub index: usize,
    pub tokens: TokenSequence,
    /// log P(context | candidate) under the reverse model.
    pub reverse_score: f64,
    /// log P(candidate | context) under the forward model.
    pub forward_score: f64,
}

fn forward_pair(context: &TokenSequence, candidate: &TokenSequence) -> DialoguePair {
    let mut resp = candidate.body().to_vec();
    resp.push(EOS.to_string());
    DialoguePair {
        context: context.clone(),
        response: TokenSequence::new(resp),
    }
}

/// Scores every candidate by the reverse model and sorts descending; ties keep
/// input order.
pub fn mmi_rerank(
    forward: &NGramLM,
    reverse: &NGramLM,
    context: &TokenSequence,
    candidates: &[TokenSequence],
) -> Vec<RankedCandidate> {
    let mut ranked: Vec<RankedCandidate> = candidates
        .iter()
        .enumerate()
        .map(|(index, c)| RankedCandidate {
            index,
            tokens: c.clone(),
            reverse_score: sequence_log_prob(reverse, &swap_roles(context, c)),
            forward_score: sequence_log_prob(forward, &forward_pair(context, c)),
        })
        .collect();
    ranked.sort_by(|a, b| b.reverse_score.total_cmp(&a.reverse_score));
    ranked
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Generation {
    pub response: TokenSequence,
    /// Candidates in draw order; candidate `i` was sampled with seed `seed + i`.
    pub candidates: Vec<RankedCandidate>,
    /// Index into `candidates` of the MMI winner.
    pub best: usize,
}

/// Draws `n_candidates` top-K samples and returns the MMI-best one.
pub fn generate(
    forward: &NGramLM,
    reverse: &NGramLM,
    context: &TokenSequence,
    config: &GenerationConfig,
) -> Result<Generation> {
    config.validate(forward.vocab_size())?;
    let drawn = (0..config.n_candidates)
        .map(|i| {
            let cfg = GenerationConfig {
                seed: config.seed.wrapping_add(i as u64),
                ..*config
            };
            sample_top_k(forward, context, &cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let ranked = mmi_rerank(forward, reverse, context, &drawn);
    let best = ranked[0].index;
    let mut candidates = ranked;
    candidates.sort_by_key(|c| c.index);
    Ok(Generation {
        response: candidates[best].tokens.clone(),
        candidates,
        best,
    })
}
