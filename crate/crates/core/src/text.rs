//! Pivot-language token helpers.

use crate::model::normalize_surface;

/// Closed-class English words ignored by composition and tagged `OTHER`
/// by the fallback tagger.
pub const PIVOT_STOPWORDS: &[&str] = &[
    "a", "about", "an", "and", "are", "as", "at", "be", "been", "being", "but", "by", "down", "for", "from", "her",
    "his", "in", "into", "is", "it", "its", "my", "no", "nor", "not", "of", "off", "on", "onto", "or", "our", "out",
    "over", "so", "than", "that", "the", "their", "then", "these", "this", "those", "to", "too", "under", "up", "very",
    "was", "were", "with", "your",
];

pub fn is_stopword(token: &str) -> bool {
    PIVOT_STOPWORDS.binary_search(&token).is_ok()
}

/// Normalized whitespace tokens of a pivot phrase.
pub fn pivot_tokens(surface: &str) -> Vec<String> {
    normalize_surface(surface)
        .split(' ')
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Joins tokens into the single-token form of a multi-word phrase.
pub fn join_anp(tokens: &[String]) -> String {
    tokens.join("_")
}
