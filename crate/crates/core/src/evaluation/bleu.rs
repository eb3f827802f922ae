use std::collections::HashMap;

const MAX_N: usize = 4;

fn ngram_counts<T: AsRef<str>>(tokens: &[T], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts
                .entry(w.iter().map(AsRef::as_ref).collect())
                .or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped n-gram matches and hypothesis n-gram total.
pub fn modified_precision<T: AsRef<str>>(hypothesis: &[T], reference: &[T], n: usize) -> (usize, usize) {
    let hyp = ngram_counts(hypothesis, n);
    let refc = ngram_counts(reference, n);
    let matches = hyp
        .iter()
        .map(|(g, &c)| c.min(refc.get(g).copied().unwrap_or(0)))
        .sum();
    (matches, hypothesis.len().saturating_sub(n - 1))
}

/// Sentence-level BLEU-4 against a single reference.
///
/// Precisions are `matches / total`. A zero precision for n >= 2 is replaced by
/// `1 / (total + 1)`; with no unigram match the score is 0. The geometric mean
/// is scaled by the brevity penalty `exp(min(0, 1 - |ref| / |hyp|))`.
pub fn bleu<T: AsRef<str>>(hypothesis: &[T], reference: &[T]) -> f64 {
    if hypothesis.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 1..=MAX_N {
        let (m, total) = modified_precision(hypothesis, reference, n);
        let p = if m > 0 {
            m as f64 / total as f64
        } else if n == 1 {
            return 0.0;
        } else {
            1.0 / (total as f64 + 1.0)
        };
        log_sum += p.ln();
    }
    let ratio = reference.len() as f64 / hypothesis.len() as f64;
    let bp = (1.0 - ratio).min(0.0).exp();
    bp * (log_sum / MAX_N as f64).exp()
}
