//! Tokenization shared by the sentiment featurizer, the n-gram models and the
//! TF-IDF context metric.

/// Separator closing each utterance inside a flattened dialogue.
pub const SEP: &str = "<sep>";
/// End-of-sequence marker closing a response.
pub const EOS: &str = "<eos>";
/// Stand-in for tokens unseen at language-model training time.
pub const UNK: &str = "<unk>";

/// Lowercases `text` and splits it on every non-alphanumeric codepoint.
///
/// Reserved tokens can never come out of this function because `<` and `>`
/// are separators.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Whitespace-delimited word count, used for corpus statistics.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

pub fn is_reserved(token: &str) -> bool {
    matches!(token, SEP | EOS | UNK)
}
