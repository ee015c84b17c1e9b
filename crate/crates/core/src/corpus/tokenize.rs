use std::borrow::Borrow;
use std::collections::HashSet;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::CorpusError;

/// A normalized term: non-empty, no whitespace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Token(String);

impl Token {
    pub fn new(term: impl Into<String>) -> Result<Self, CorpusError> {
        let term = term.into();
        if term.is_empty() || term.chars().any(char::is_whitespace) {
            return Err(CorpusError::InvalidToken(term));
        }
        Ok(Token(term))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for Token {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Token {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Token::new(String::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TokenizeConfig {
    pub remove_stop_words: bool,
    pub stem: bool,
    pub drop_numeric: bool,
    /// Minimum token length in characters, applied after stemming.
    pub min_length: usize,
}

impl Default for TokenizeConfig {
    fn default() -> Self {
        TokenizeConfig {
            remove_stop_words: true,
            stem: false,
            drop_numeric: true,
            min_length: 2,
        }
    }
}

impl TokenizeConfig {
    /// No filtering at all: lowercase and split only.
    pub fn raw() -> Self {
        TokenizeConfig {
            remove_stop_words: false,
            stem: false,
            drop_numeric: false,
            min_length: 1,
        }
    }
}

/// Lowercase, split on non-alphanumeric runs, then drop stop words, stem,
/// and drop numeric or short tokens as configured.
pub fn tokenize(text: &str, config: &TokenizeConfig) -> Vec<Token> {
    let lowered = text.to_lowercase();
    lowered
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .filter(|w| !(config.remove_stop_words && is_stop_word(w)))
        .map(|w| {
            if config.stem {
                porter_stemmer::stem(w)
            } else {
                w.to_owned()
            }
        })
        .filter(|w| !(config.drop_numeric && w.chars().all(char::is_numeric)))
        .filter(|w| w.chars().count() >= config.min_length.max(1))
        .map(Token)
        .collect()
}

pub fn is_stop_word(word: &str) -> bool {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| STOP_WORDS.iter().copied().collect())
        .contains(word)
}

// Common English function words.
const STOP_WORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "ain", "all", "am", "an", "and", "any",
    "are", "aren", "as", "at", "be", "because", "been", "before", "being", "below", "between",
    "both", "but", "by", "can", "couldn", "d", "did", "didn", "do", "does", "doesn", "doing",
    "don", "down", "during", "each", "few", "for", "from", "further", "had", "hadn", "has",
    "hasn", "have", "haven", "having", "he", "her", "here", "hers", "herself", "him", "himself",
    "his", "how", "i", "if", "in", "into", "is", "isn", "it", "its", "itself", "just", "ll", "m",
    "ma", "me", "mightn", "more", "most", "mustn", "my", "myself", "needn", "no", "nor", "not",
    "now", "o", "of", "off", "on", "once", "only", "or", "other", "our", "ours", "ourselves",
    "out", "over", "own", "re", "s", "said", "same", "shan", "she", "should", "shouldn", "so",
    "some", "such", "t", "than", "that", "the", "their", "theirs", "them", "themselves", "then",
    "there", "these", "they", "this", "those", "through", "to", "too", "under", "until", "up",
    "ve", "very", "was", "wasn", "we", "were", "weren", "what", "when", "where", "which", "while",
    "who", "whom", "why", "will", "with", "won", "wouldn", "y", "you", "your", "yours",
    "yourself", "yourselves",
];
