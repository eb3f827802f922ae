use std::collections::BTreeMap;
use std::path::Path;

use crate::corpus::{Sentiment, Utterance};
use crate::emoji::is_emoji;
use crate::error::{Error, Result};

const VS16: char = '\u{FE0F}';

/// Emoji sequences are keyed without U+FE0F so `❤` and `❤️` share an entry.
fn normalize(emoji: &str) -> String {
    emoji.chars().filter(|&c| c != VS16).collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmojiSentimentTable {
    entries: BTreeMap<String, Sentiment>,
}

impl EmojiSentimentTable {
    pub fn from_entries<S: AsRef<str>>(
        entries: impl IntoIterator<Item = (S, Sentiment)>,
    ) -> Result<Self> {
        let mut table = EmojiSentimentTable::default();
        for (emoji, label) in entries {
            table.insert(emoji.as_ref(), label)?;
        }
        Ok(table)
    }

    fn insert(&mut self, emoji: &str, label: Sentiment) -> Result<()> {
        if !is_emoji(emoji) {
            return Err(Error::InvalidInput(format!(
                "{emoji:?} is not a known emoji sequence"
            )));
        }
        match self.entries.insert(normalize(emoji), label) {
            Some(prev) if prev != label => Err(Error::InvalidInput(format!(
                "emoji {emoji} mapped to both {prev} and {label}"
            ))),
            _ => Ok(()),
        }
    }

    /// Parses a two-column TSV (`emoji<TAB>label`). `#` lines are comments.
    pub fn parse_tsv(contents: &str) -> Result<Self> {
        let mut table = EmojiSentimentTable::default();
        for (i, line) in contents.lines().enumerate() {
            let line_no = i + 1;
            let trimmed = line.trim_end_matches('\r');
            if trimmed.trim().is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            let (emoji, label) = trimmed
                .split_once('\t')
                .ok_or_else(|| parse_err("expected two tab-separated columns".into()))?;
            let label: Sentiment = label.trim().parse().map_err(|e: Error| parse_err(e.to_string()))?;
            table
                .insert(emoji.trim(), label)
                .map_err(|e| parse_err(e.to_string()))?;
        }
        Ok(table)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let contents = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_tsv(&contents)
    }

    pub fn get(&self, emoji: &str) -> Option<Sentiment> {
        self.entries.get(&normalize(emoji)).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Sentiment of the most frequent mapped emoji; ties go to the emoji seen first.
/// Unmapped emojis are ignored.
pub fn label_by_emoji(table: &EmojiSentimentTable, utterance: &Utterance) -> Option<Sentiment> {
    // (emoji, count, label) in first-occurrence order
    let mut tally: Vec<(String, usize, Sentiment)> = Vec::new();
    for e in &utterance.emojis {
        let Some(label) = table.get(e) else { continue };
        let key = normalize(e);
        match tally.iter_mut().find(|(k, _, _)| *k == key) {
            Some(entry) => entry.1 += 1,
            None => tally.push((key, 1, label)),
        }
    }
    let mut best: Option<&(String, usize, Sentiment)> = None;
    for entry in &tally {
        if best.is_none_or(|b| entry.1 > b.1) {
            best = Some(entry);
        }
    }
    best.map(|b| b.2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn utt(emojis: &[&str]) -> Utterance {
        let mut u = Utterance::new("A", "x");
        u.emojis = emojis.iter().map(|s| s.to_string()).collect();
        u
    }

    fn table() -> EmojiSentimentTable {
        EmojiSentimentTable::from_entries([("😀", Sentiment::Positive), ("😢", Sentiment::Negative)])
            .unwrap()
    }

    #[test]
    fn most_frequent_wins() {
        assert_eq!(label_by_emoji(&table(), &utt(&["😀", "😀", "😢"])), Some(Sentiment::Positive));
    }

    #[test]
    fn no_emojis_no_label() {
        assert_eq!(label_by_emoji(&table(), &utt(&[])), None);
        assert_eq!(label_by_emoji(&table(), &utt(&["🤖", "🤖"])), None);
    }

    #[test]
    fn tie_goes_to_first_occurrence() {
        assert_eq!(label_by_emoji(&table(), &utt(&["😢", "😀"])), Some(Sentiment::Negative));
        assert_eq!(label_by_emoji(&table(), &utt(&["😀", "😢"])), Some(Sentiment::Positive));
    }

    #[test]
    fn unmapped_emojis_ignored_in_count() {
        assert_eq!(
            label_by_emoji(&table(), &utt(&["🤖", "🤖", "🤖", "😢"])),
            Some(Sentiment::Negative)
        );
    }

    #[test]
    fn variation_selector_insensitive() {
        let t = EmojiSentimentTable::from_entries([("❤️", Sentiment::Positive)]).unwrap();
        assert_eq!(t.get("❤"), Some(Sentiment::Positive));
        assert_eq!(label_by_emoji(&t, &utt(&["❤", "❤️"])), Some(Sentiment::Positive));
    }

    #[test]
    fn tsv_parsing() {
        let t = EmojiSentimentTable::parse_tsv("# comment\n😀\tpositive\n😢\tnegative\r\n\n").unwrap();
        assert_eq!(t.len(), 2);
        assert!(matches!(
            EmojiSentimentTable::parse_tsv("😀\thappy\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(EmojiSentimentTable::parse_tsv("😀\tpositive\n😀\tnegative\n").is_err());
        assert!(EmojiSentimentTable::parse_tsv("abc\tpositive\n").is_err());
        assert!(EmojiSentimentTable::parse_tsv("😀 positive\n").is_err());
    }
}
