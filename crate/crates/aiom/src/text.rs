//! Lexical utilities shared by the prompt pipeline and the validators:
//! tokenization, stop-word filtering, sentence segmentation, TF-cosine
//! similarity, and a small rule-based stemmer.
//!
//! The stop-word and abbreviation lists are fixed data files shipped with
//! the crate so that every consumer of the library agrees on boundaries
//! and content words.

use std::collections::{BTreeMap, HashSet};
use std::sync::OnceLock;

const STOPWORDS_RAW: &str = include_str!("../data/stopwords.txt");
const ABBREVIATIONS_RAW: &str = include_str!("../data/abbreviations.txt");

fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| {
        STOPWORDS_RAW
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect()
    })
}

fn abbreviations() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| {
        ABBREVIATIONS_RAW
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect()
    })
}

pub fn is_stopword(word: &str) -> bool {
    stopwords().contains(word)
}

/// Lower-cased alphanumeric token runs, punctuation stripped.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            current.extend(ch.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Tokens that are not stop words.
pub fn content_words(text: &str) -> Vec<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| !is_stopword(t))
        .collect()
}

/// Term-frequency vector over content words.
pub fn term_frequencies(text: &str) -> BTreeMap<String, f64> {
    let mut counts = BTreeMap::new();
    for word in content_words(text) {
        *counts.entry(word).or_insert(0.0) += 1.0;
    }
    counts
}

pub fn cosine_of_frequencies(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let dot: f64 = a
        .iter()
        .filter_map(|(term, &fa)| b.get(term).map(|&fb| fa * fb))
        .sum();
    let norm_a: f64 = a.values().map(|v| v * v).sum::<f64>().sqrt();
    let norm_b: f64 = b.values().map(|v| v * v).sum::<f64>().sqrt();
    if norm_a == 0.0 || norm_b == 0.0 {
        0.0
    } else {
        dot / (norm_a * norm_b)
    }
}

/// Cosine similarity between the content-word TF vectors of two texts.
/// Zero when either side has no content words.
pub fn tf_cosine(a: &str, b: &str) -> f64 {
    cosine_of_frequencies(&term_frequencies(a), &term_frequencies(b))
}

/// Whitespace-delimited word count.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Rule-based suffix stripping; enough to cluster inflected forms of the
/// same content term (plurals, -ing, -ed, -ly).
pub fn stem(word: &str) -> String {
    let w = word.to_lowercase();
    let strip = |s: &str, suffix: &str, min_stem: usize| -> Option<String> {
        s.strip_suffix(suffix)
            .filter(|rest| rest.chars().count() >= min_stem)
            .map(str::to_string)
    };
    if let Some(s) = strip(&w, "ies", 3) {
        return s + "y";
    }
    for (suffix, min_stem) in [("ing", 3), ("edly", 3), ("ed", 3), ("ly", 3), ("es", 3), ("s", 3)]
    {
        if w.ends_with("ss") && suffix == "s" {
            continue;
        }
        if let Some(s) = strip(&w, suffix, min_stem) {
            return s;
        }
    }
    w
}

/// Split text into sentences. Boundaries sit at `.`, `!` or `?` followed by
/// whitespace and an uppercase letter; a period does not end a sentence when
/// the token it closes is on the abbreviation list. End of input always
/// closes the final sentence. The concatenation of the returned sentences
/// equals the input modulo whitespace.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;

    for i in 0..chars.len() {
        let c = chars[i];
        if c != '.' && c != '!' && c != '?' {
            continue;
        }
        // Require whitespace then an uppercase letter after the terminal.
        let mut j = i + 1;
        if j >= chars.len() || !chars[j].is_whitespace() {
            continue;
        }
        while j < chars.len() && chars[j].is_whitespace() {
            j += 1;
        }
        if j >= chars.len() || !chars[j].is_uppercase() {
            continue;
        }
        if c == '.' && is_abbreviation_token(&chars, i) {
            continue;
        }
        let sentence: String = chars[start..=i].iter().collect();
        let trimmed = sentence.trim();
        if !trimmed.is_empty() {
            sentences.push(trimmed.to_string());
        }
        start = i + 1;
    }

    let tail: String = chars[start.min(chars.len())..].iter().collect();
    let trimmed = tail.trim();
    if !trimmed.is_empty() {
        sentences.push(trimmed.to_string());
    }
    sentences
}

/// The whitespace-delimited token ending at (and including) the period at
/// `period_idx`, checked against the abbreviation list.
fn is_abbreviation_token(chars: &[char], period_idx: usize) -> bool {
    let mut start = period_idx;
    while start > 0 && !chars[start - 1].is_whitespace() {
        start -= 1;
    }
    let token: String = chars[start..=period_idx].iter().collect();
    abbreviations().contains(token.as_str())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_lowers_and_strips_punctuation() {
        assert_eq!(tokenize("Solar, panels!"), vec!["solar", "panels"]);
        assert_eq!(tokenize(""), Vec::<String>::new());
    }

    #[test]
    fn content_words_drop_stopwords() {
        assert_eq!(
            content_words("The panels are on the roof"),
            vec!["panels", "roof"]
        );
    }

    #[test]
    fn cosine_orthogonal_is_zero() {
        assert_eq!(tf_cosine("solar panels", "river otter"), 0.0);
    }

    #[test]
    fn cosine_identical_is_one() {
        let v = tf_cosine("solar energy capture", "solar energy capture");
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_empty_side_is_zero() {
        assert_eq!(tf_cosine("", "solar"), 0.0);
        assert_eq!(tf_cosine("the a an", "solar"), 0.0);
    }

    #[test]
    fn cosine_matches_hand_computation() {
        // "solar panels convert light" vs "solar energy": one shared term,
        // norms 2 and sqrt(2).
        let v = tf_cosine("solar panels convert light", "solar energy");
        let expected = 1.0 / (2.0 * 2.0_f64.sqrt());
        assert!((v - expected).abs() < 1e-12, "got {v}, want {expected}");
    }

    #[test]
    fn two_terminal_periods_make_two_sentences() {
        assert_eq!(split_sentences("A b. C d."), vec!["A b.", "C d."]);
    }

    #[test]
    fn abbreviation_does_not_split() {
        // Brute-force check against the shipped list: "Dr." is present, so
        // the period after it is not a boundary.
        assert!(ABBREVIATIONS_RAW.lines().any(|l| l.trim() == "Dr."));
        assert_eq!(split_sentences("Dr. Smith left."), vec!["Dr. Smith left."]);
    }

    #[test]
    fn empty_body_yields_no_sentences() {
        assert_eq!(split_sentences(""), Vec::<String>::new());
        assert_eq!(split_sentences("   "), Vec::<String>::new());
    }

    #[test]
    fn lowercase_continuation_does_not_split() {
        assert_eq!(
            split_sentences("It cost 3.50 dollars. Cheap!"),
            vec!["It cost 3.50 dollars.", "Cheap!"]
        );
    }

    #[test]
    fn question_and_exclamation_split() {
        assert_eq!(
            split_sentences("Really? Yes! Good."),
            vec!["Really?", "Yes!", "Good."]
        );
    }

    #[test]
    fn concatenation_preserves_body_modulo_whitespace() {
        let body = "Dr. Smith arrived early. He said hello! Was anyone there? Nobody was.";
        let joined = split_sentences(body).join(" ");
        let norm = |s: &str| s.split_whitespace().collect::<Vec<_>>().join(" ");
        assert_eq!(norm(&joined), norm(body));
    }

    #[test]
    fn stem_clusters_inflections() {
        assert_eq!(stem("panels"), "panel");
        assert_eq!(stem("converted"), "convert");
        assert_eq!(stem("converting"), "convert");
        assert_eq!(stem("energies"), "energy");
        assert_eq!(stem("glass"), "glass");
    }
}
