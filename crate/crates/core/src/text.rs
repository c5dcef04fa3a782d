//! Tokenization and string normalization shared by every module.
//!
//! One rule is used everywhere a question, header, or answer is split into
//! tokens: lowercase, split on whitespace, then strip non-alphanumeric
//! characters from both edges of each token. Tokens that become empty are
//! dropped.

/// Splits `text` into normalized tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|raw| {
            raw.trim_matches(|c: char| !c.is_alphanumeric())
                .to_lowercase()
        })
        .filter(|t| !t.is_empty())
        .collect()
}

/// Lowercases, trims, and collapses internal whitespace runs to one space.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for (i, part) in text.split_whitespace().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&part.to_lowercase());
    }
    out
}

const QUOTES: &[char] = &['"', '\'', '\u{201c}', '\u{201d}', '\u{2018}', '\u{2019}', '`'];

/// Normalizes an answer string: `normalize`, then strips one or more layers
/// of surrounding quote characters.
pub fn normalize_answer(text: &str) -> String {
    let mut s = normalize(text);
    loop {
        let trimmed = s.trim_matches(QUOTES).trim();
        if trimmed.len() == s.len() {
            return s;
        }
        s = trimmed.to_string();
    }
}
