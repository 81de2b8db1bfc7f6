//! Concept vectors in the pivot space, and the corpus preprocessing that
//! turns multi-word ANPs into single tokens before embedding training.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{EmbeddingTable, Tokenization};
use crate::model::{normalize_surface, Concept, ConceptKey, Language, Lexicon};
use crate::text::{is_stopword, join_anp, pivot_tokens};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompositionMode {
    Sum,
    LearnedWithFallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ComposedSum,
    LearnedAnp,
    FallbackSum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConceptVector {
    pub key: ConceptKey,
    /// Normalized pivot surface the vector was built from.
    pub pivot: String,
    pub vector: Vec<f64>,
    pub provenance: Provenance,
    pub tokens_used: usize,
    pub stopwords_skipped: usize,
    pub oov_tokens: usize,
}

/// Vector for a pivot phrase, without concept bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct PhraseVector {
    pub vector: Vec<f64>,
    pub provenance: Provenance,
    pub tokens_used: usize,
    pub stopwords_skipped: usize,
    pub oov_tokens: usize,
}

pub fn compose_phrase(pivot: &str, table: &EmbeddingTable, mode: CompositionMode) -> Result<PhraseVector> {
    if mode == CompositionMode::LearnedWithFallback && table.meta.tokenization != Tokenization::WordsPlusAnp {
        return Err(Error::TokenizationMismatch("words_plus_anp"));
    }
    let tokens = pivot_tokens(pivot);
    if mode == CompositionMode::LearnedWithFallback && tokens.len() > 1 {
        if let Some(v) = table.get(&join_anp(&tokens)) {
            return Ok(PhraseVector {
                vector: v.to_vec(),
                provenance: Provenance::LearnedAnp,
                tokens_used: 1,
                stopwords_skipped: 0,
                oov_tokens: 0,
            });
        }
    }
    // sorted so that the floating-point sum does not depend on word order
    let mut content: Vec<&String> = tokens.iter().filter(|t| !is_stopword(t)).collect();
    let stopwords_skipped = tokens.len() - content.len();
    content.sort();
    let mut vector = vec![0.0; table.dimension()];
    let mut used = 0;
    for token in &content {
        if let Some(v) = table.get(token) {
            for (acc, x) in vector.iter_mut().zip(v) {
                *acc += x;
            }
            used += 1;
        }
    }
    if used == 0 {
        return Err(Error::OovConcept(pivot.to_owned()));
    }
    Ok(PhraseVector {
        vector,
        provenance: match mode {
            CompositionMode::Sum => Provenance::ComposedSum,
            CompositionMode::LearnedWithFallback => Provenance::FallbackSum,
        },
        tokens_used: used,
        stopwords_skipped,
        oov_tokens: content.len() - used,
    })
}

/// Sum of the in-vocabulary pivot tokens, or the learned ANP vector when the
/// mode allows it and the table has one.
pub fn compose(concept: &Concept, table: &EmbeddingTable, mode: CompositionMode) -> Result<ConceptVector> {
    let pivot = concept.pivot_key().ok_or_else(|| Error::Untranslated {
        language: concept.language.to_string(),
        surface: concept.surface.clone(),
    })?;
    let p = compose_phrase(&pivot, table, mode)?;
    Ok(ConceptVector {
        key: concept.key(),
        pivot,
        vector: p.vector,
        provenance: p.provenance,
        tokens_used: p.tokens_used,
        stopwords_skipped: p.stopwords_skipped,
        oov_tokens: p.oov_tokens,
    })
}

/// Composes every translated concept, skipping failures.
pub fn compose_all<'a>(
    concepts: impl IntoIterator<Item = &'a Concept>,
    table: &EmbeddingTable,
    mode: CompositionMode,
) -> Vec<ConceptVector> {
    concepts
        .into_iter()
        .filter_map(|c| compose(c, table, mode).ok())
        .collect()
}

/// One vector per distinct pivot surface.
pub fn pivot_vectors<'a>(
    concepts: impl IntoIterator<Item = &'a Concept>,
    table: &EmbeddingTable,
    mode: CompositionMode,
) -> BTreeMap<String, Vec<f64>> {
    let mut out = BTreeMap::new();
    for c in concepts {
        let Some(pivot) = c.pivot_key() else { continue };
        if out.contains_key(&pivot) {
            continue;
        }
        if let Ok(p) = compose_phrase(&pivot, table, mode) {
            out.insert(pivot, p.vector);
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CoverageReport {
    pub language: String,
    pub total: usize,
    pub composed: usize,
    pub learned: usize,
    pub fallback: usize,
    /// Includes untranslated concepts.
    pub oov: usize,
    pub untranslated: usize,
    pub oov_pct: f64,
}

pub fn coverage_report(lexicon: &Lexicon, table: &EmbeddingTable, mode: CompositionMode) -> Result<CoverageReport> {
    let mut r = CoverageReport {
        language: lexicon.language.to_string(),
        total: lexicon.len(),
        ..Default::default()
    };
    for c in lexicon.concepts() {
        match compose(c, table, mode) {
            Ok(v) => match v.provenance {
                Provenance::ComposedSum => r.composed += 1,
                Provenance::LearnedAnp => r.learned += 1,
                Provenance::FallbackSum => r.fallback += 1,
            },
            Err(Error::Untranslated { .. }) => {
                r.oov += 1;
                r.untranslated += 1;
            }
            Err(Error::OovConcept(_)) => r.oov += 1,
            Err(e) => return Err(e),
        }
    }
    r.oov_pct = if r.total == 0 {
        0.0
    } else {
        100.0 * r.oov as f64 / r.total as f64
    };
    Ok(r)
}

pub fn coverage_by_language(
    lexicons: &BTreeMap<Language, Lexicon>,
    table: &EmbeddingTable,
    mode: CompositionMode,
) -> Result<Vec<CoverageReport>> {
    lexicons.values().map(|l| coverage_report(l, table, mode)).collect()
}

/// Leftmost-longest matcher for multi-word ANP phrases over whitespace tokens.
#[derive(Debug, Clone, Default)]
pub struct AnpMatcher {
    by_first: HashMap<String, Vec<Vec<String>>>,
    /// Phrases containing `_` or fewer than two tokens; never matched.
    pub skipped: Vec<String>,
    joined: HashMap<String, String>,
}

impl AnpMatcher {
    pub fn new<'a>(anps: impl IntoIterator<Item = &'a str>) -> Self {
        let mut m = AnpMatcher::default();
        let mut seen = std::collections::HashSet::new();
        for anp in anps {
            let tokens = pivot_tokens(anp);
            let surface = tokens.join(" ");
            if !seen.insert(surface.clone()) {
                continue;
            }
            if tokens.len() < 2 || surface.contains('_') {
                m.skipped.push(surface);
                continue;
            }
            m.joined.insert(join_anp(&tokens), surface);
            m.by_first.entry(tokens[0].clone()).or_default().push(tokens);
        }
        for phrases in m.by_first.values_mut() {
            phrases.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        }
        m.skipped.sort();
        m
    }

    pub fn is_empty(&self) -> bool {
        self.by_first.is_empty()
    }

    /// Rewrites one line; returns the new line and the matched phrases.
    pub fn rewrite_line(&self, line: &str) -> (String, Vec<String>, usize) {
        let spans: Vec<(usize, usize)> = token_spans(line);
        let folded: Vec<String> = spans.iter().map(|&(s, e)| normalize_surface(&line[s..e])).collect();
        let collisions = folded.iter().filter(|t| self.joined.contains_key(t.as_str())).count();
        if self.is_empty() {
            return (line.to_owned(), Vec::new(), collisions);
        }
        let mut out = String::with_capacity(line.len());
        let mut matched = Vec::new();
        let mut copied_to = 0;
        let mut i = 0;
        while i < spans.len() {
            let hit = self.by_first.get(&folded[i]).and_then(|phrases| {
                phrases
                    .iter()
                    .find(|p| i + p.len() <= spans.len() && folded[i..i + p.len()] == p[..])
            });
            match hit {
                Some(phrase) => {
                    let start = spans[i].0;
                    let end = spans[i + phrase.len() - 1].1;
                    out.push_str(&line[copied_to..start]);
                    out.push_str(&join_anp(phrase));
                    copied_to = end;
                    matched.push(phrase.join(" "));
                    i += phrase.len();
                }
                None => i += 1,
            }
        }
        out.push_str(&line[copied_to..]);
        (out, matched, collisions)
    }
}

fn token_spans(line: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                spans.push((s, i));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push((s, line.len()));
    }
    spans
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TokenizeStats {
    pub lines: usize,
    pub replacements: usize,
    pub per_anp: BTreeMap<String, usize>,
    pub skipped_anps: Vec<String>,
    /// Corpus tokens that already equal the joined form of some ANP.
    pub preexisting_joined_tokens: usize,
}

/// Replaces every leftmost-longest, non-overlapping, case-folded occurrence
/// of an ANP phrase with its `_`-joined form. Text outside the matches is
/// copied byte for byte.
pub fn anp_tokenize_corpus<S: AsRef<str> + Sync>(lines: &[S], anp_surfaces: &[&str]) -> (Vec<String>, TokenizeStats) {
    let matcher = AnpMatcher::new(anp_surfaces.iter().copied());
    let rewritten: Vec<(String, Vec<String>, usize)> =
        lines.par_iter().map(|l| matcher.rewrite_line(l.as_ref())).collect();
    let mut stats = TokenizeStats {
        lines: lines.len(),
        skipped_anps: matcher.skipped.clone(),
        ..Default::default()
    };
    let mut out = Vec::with_capacity(lines.len());
    for (line, matched, collisions) in rewritten {
        stats.replacements += matched.len();
        stats.preexisting_joined_tokens += collisions;
        for m in matched {
            *stats.per_anp.entry(m).or_default() += 1;
        }
        out.push(line);
    }
    (out, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::EmbeddingMeta;
    use crate::model::{validate_concept, RawConcept};

    fn table(tokenization: Tokenization, rows: &[(&str, &[f64])]) -> EmbeddingTable {
        let mut t = EmbeddingTable::new(
            rows[0].1.len(),
            EmbeddingMeta {
                window: 5,
                tokenization,
            },
        )
        .unwrap();
        for (tok, v) in rows {
            t.insert(tok, v).unwrap();
        }
        t
    }

    fn concept(pivot: &str) -> Concept {
        validate_concept(&RawConcept {
            language: "es".into(),
            surface: "x y".into(),
            adjective: "x".into(),
            nouns: "y".into(),
            pivot_surface: Some(pivot.into()),
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn sum_of_basis_vectors() {
        let t = table(Tokenization::Words, &[("happy", &[1.0, 0.0]), ("dog", &[0.0, 1.0])]);
        let v = compose(&concept("happy dog"), &t, CompositionMode::Sum).unwrap();
        assert_eq!(v.vector, [1.0, 1.0]);
        assert_eq!(v.provenance, Provenance::ComposedSum);
    }

    #[test]
    fn learned_anp_preferred() {
        let t = table(
            Tokenization::WordsPlusAnp,
            &[("happy", &[1.0, 0.0]), ("dog", &[0.0, 1.0]), ("happy_dog", &[0.3, 0.3])],
        );
        let v = compose(&concept("happy dog"), &t, CompositionMode::LearnedWithFallback).unwrap();
        assert_eq!(v.vector, [0.3, 0.3]);
        assert_eq!(v.provenance, Provenance::LearnedAnp);
    }

    #[test]
    fn learned_falls_back_to_sum() {
        let t = table(
            Tokenization::WordsPlusAnp,
            &[("happy", &[1.0, 0.0]), ("dog", &[0.0, 1.0])],
        );
        let v = compose(&concept("happy dog"), &t, CompositionMode::LearnedWithFallback).unwrap();
        assert_eq!(v.vector, [1.0, 1.0]);
        assert_eq!(v.provenance, Provenance::FallbackSum);
    }

    #[test]
    fn learned_mode_needs_anp_table() {
        let t = table(Tokenization::Words, &[("dog", &[0.0, 1.0])]);
        let err = compose(&concept("happy dog"), &t, CompositionMode::LearnedWithFallback).unwrap_err();
        assert_eq!(err.code(), "TOKENIZATION_MISMATCH");
    }

    #[test]
    fn stopwords_and_oov() {
        let t = table(
            Tokenization::Words,
            &[("rule", &[1.0, 0.0]), ("law", &[0.0, 2.0]), ("the", &[9.0, 9.0])],
        );
        let v = compose(&concept("democracy and the rule of law"), &t, CompositionMode::Sum).unwrap();
        assert_eq!(v.vector, [1.0, 2.0]);
        assert_eq!((v.stopwords_skipped, v.oov_tokens, v.tokens_used), (3, 1, 2));
        let err = compose(&concept("purple cow"), &t, CompositionMode::Sum).unwrap_err();
        assert_eq!(err.code(), "OOV_CONCEPT");
    }

    #[test]
    fn sum_is_order_independent() {
        let t = table(
            Tokenization::Words,
            &[("a", &[0.1, 1e16]), ("b", &[0.7, 1.0]), ("c", &[0.2, -1e16])],
        );
        let base = compose(&concept("a b c"), &t, CompositionMode::Sum).unwrap().vector;
        for p in ["a c b", "b a c", "b c a", "c a b", "c b a"] {
            assert_eq!(compose(&concept(p), &t, CompositionMode::Sum).unwrap().vector, base);
        }
    }

    #[test]
    fn learned_equals_sum_without_anp_tokens() {
        let rows: &[(&str, &[f64])] = &[("happy", &[1.0, 0.5]), ("dog", &[0.25, 1.0]), ("old", &[-1.0, 0.0])];
        let words = table(Tokenization::Words, rows);
        let anp = table(Tokenization::WordsPlusAnp, rows);
        for p in ["happy dog", "old dog", "old happy dog"] {
            let a = compose(&concept(p), &words, CompositionMode::Sum).unwrap();
            let b = compose(&concept(p), &anp, CompositionMode::LearnedWithFallback).unwrap();
            assert_eq!(a.vector, b.vector);
        }
    }

    #[test]
    fn coverage_partitions_lexicon() {
        let mut lex = Lexicon::new(Language::parse("es").unwrap());
        for (i, p) in ["happy dog", "purple cow", "happy cat"].iter().enumerate() {
            let mut c = concept(p);
            c.surface = format!("s{i} t");
            lex.insert(c).unwrap();
        }
        let mut c = concept("x");
        c.surface = "untranslated one".into();
        c.pivot_surface = None;
        lex.insert(c).unwrap();
        let t = table(Tokenization::Words, &[("happy", &[1.0]), ("dog", &[1.0])]);
        let r = coverage_report(&lex, &t, CompositionMode::Sum).unwrap();
        assert_eq!((r.composed, r.oov, r.untranslated), (2, 2, 1));
        assert_eq!(r.composed + r.learned + r.fallback + r.oov, r.total);
    }

    #[test]
    fn tokenize_simple() {
        let (out, stats) = anp_tokenize_corpus(&["a happy dog runs"], &["happy dog"]);
        assert_eq!(out, ["a happy_dog runs"]);
        assert_eq!(stats.per_anp["happy dog"], 1);
    }

    #[test]
    fn tokenize_identity_without_anps() {
        let lines = ["  Some\ttext  here ", "more"];
        let (out, stats) = anp_tokenize_corpus(&lines, &[]);
        assert_eq!(out, lines);
        assert_eq!(stats.replacements, 0);
    }

    #[test]
    fn tokenize_leftmost_wins_overlap() {
        let (out, _) = anp_tokenize_corpus(&["happy dog runs"], &["happy dog", "dog runs"]);
        assert_eq!(out, ["happy_dog runs"]);
        let (out, _) = anp_tokenize_corpus(&["a b c d"], &["b c", "a b c", "c d"]);
        assert_eq!(out, ["a_b_c d"]);
    }

    #[test]
    fn tokenize_case_folds_and_keeps_spacing() {
        // punctuation is part of the token, so neither occurrence matches
        let line = "Look:  Happy   DOG!  happy dog_x";
        let (out, stats) = anp_tokenize_corpus(&[line], &["happy dog"]);
        assert_eq!(out, [line]);
        assert_eq!(stats.replacements, 0);
        let (out, _) = anp_tokenize_corpus(&["x  Happy \t DOG  y"], &["happy dog"]);
        assert_eq!(out, ["x  happy_dog  y"]);
    }

    #[test]
    fn tokenize_reports_collisions_and_skips() {
        let (_, stats) = anp_tokenize_corpus(&["a happy_dog here"], &["happy dog", "plunge", "odd_one two"]);
        assert_eq!(stats.preexisting_joined_tokens, 1);
        assert_eq!(stats.skipped_anps, ["odd_one two", "plunge"]);
    }
}
