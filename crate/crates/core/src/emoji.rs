//! Emoji sequence extraction backed by the bundled Unicode `emoji-test.txt`
//! (Emoji 15.1).
//!
//! Extraction is a greedy longest match over codepoints, so ZWJ sequences,
//! skin-tone modified bases, keycaps and flags come out as single units.

use std::collections::HashSet;
use std::sync::OnceLock;

/// Unicode emoji version of the bundled data file.
pub const EMOJI_DATA_VERSION: &str = "15.1";

const EMOJI_TEST: &str = include_str!("../data/emoji-test-15.1.txt");

struct Inventory {
    sequences: HashSet<Vec<char>>,
    max_len: usize,
}

fn inventory() -> &'static Inventory {
    static INV: OnceLock<Inventory> = OnceLock::new();
    INV.get_or_init(|| {
        let mut sequences = HashSet::new();
        for line in EMOJI_TEST.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((points, rest)) = line.split_once(';') else {
                continue;
            };
            let status = rest.split('#').next().unwrap_or("").trim();
            if status == "component" {
                continue;
            }
            let seq: Option<Vec<char>> = points
                .split_whitespace()
                .map(|h| u32::from_str_radix(h, 16).ok().and_then(char::from_u32))
                .collect();
            let Some(seq) = seq else { continue };
            // bare (c) and (r) are text characters far more often than emoji
            if status == "unqualified" && seq.len() == 1 && (seq[0] as u32) < 0x100 {
                continue;
            }
            sequences.insert(seq);
        }
        let max_len = sequences.iter().map(Vec::len).max().unwrap_or(0);
        Inventory { sequences, max_len }
    })
}

/// Number of distinct sequences recognised as emoji.
pub fn inventory_size() -> usize {
    inventory().sequences.len()
}

/// True when `s` is exactly one known emoji sequence.
pub fn is_emoji(s: &str) -> bool {
    let chars: Vec<char> = s.chars().collect();
    inventory().sequences.contains(&chars)
}

/// Splits `text` into alternating runs; `true` marks an emoji unit.
fn segments(text: &str) -> Vec<(bool, String)> {
    let inv = inventory();
    let chars: Vec<char> = text.chars().collect();
    let mut out: Vec<(bool, String)> = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let upper = inv.max_len.min(chars.len() - i);
        let matched = (1..=upper)
            .rev()
            .find(|&len| inv.sequences.contains(&chars[i..i + len]));
        match matched {
            Some(len) => {
                out.push((true, chars[i..i + len].iter().collect()));
                i += len;
            }
            None => {
                match out.last_mut() {
                    Some((false, run)) => run.push(chars[i]),
                    _ => out.push((false, chars[i].to_string())),
                }
                i += 1;
            }
        }
    }
    out
}

/// All maximal emoji sequences of `text` in order of occurrence.
pub fn extract_emojis(text: &str) -> Vec<String> {
    segments(text)
        .into_iter()
        .filter_map(|(is_emoji, s)| is_emoji.then_some(s))
        .collect()
}

/// `text` with every emoji unit replaced by a single space.
pub fn strip_emojis(text: &str) -> String {
    segments(text)
        .into_iter()
        .map(|(is_emoji, s)| if is_emoji { " ".to_string() } else { s })
        .collect()
}
