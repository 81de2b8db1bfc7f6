//! Exact concept matching through a pivot language, sentiment-shift
//! analysis, and representative-word extraction for two-stage clustering.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use std::time::Duration;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::Dictionary;
use crate::model::{normalize_surface, Concept, ConceptKey, Language, Lexicon, PolaritySource, PosTag};
use crate::text::{is_stopword, pivot_tokens};

/// A pluggable translation service. Implementations live outside this crate.
pub trait RemoteTranslator: Send + Sync {
    fn translate(&self, source: &Language, surface: &str, pivot: &Language) -> std::result::Result<String, String>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemoteConfig {
    pub url: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
}

/// Resolves concept surfaces to pivot-language phrases. Concepts already in
/// the pivot language translate to themselves.
#[derive(Clone)]
pub enum TranslationClient {
    Dictionary {
        pivot: Language,
        dictionary: Arc<Dictionary>,
    },
    Remote {
        pivot: Language,
        config: RemoteConfig,
        backend: Arc<dyn RemoteTranslator>,
    },
}

impl fmt::Debug for TranslationClient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TranslationClient::Dictionary { pivot, dictionary } => f
                .debug_struct("Dictionary")
                .field("pivot", pivot)
                .field("entries", &dictionary.len())
                .finish(),
            TranslationClient::Remote { pivot, config, .. } => f
                .debug_struct("Remote")
                .field("pivot", pivot)
                .field("url", &config.url)
                .finish(),
        }
    }
}

impl TranslationClient {
    pub fn dictionary(pivot: Language, dictionary: Dictionary) -> Self {
        TranslationClient::Dictionary {
            pivot,
            dictionary: Arc::new(dictionary),
        }
    }

    pub fn pivot(&self) -> &Language {
        match self {
            TranslationClient::Dictionary { pivot, .. } | TranslationClient::Remote { pivot, .. } => pivot,
        }
    }
}

pub fn translate(concept: &Concept, client: &TranslationClient) -> Result<String> {
    let surface = concept.surface.trim();
    if surface.is_empty() {
        return Err(Error::EmptySurface);
    }
    if &concept.language == client.pivot() {
        return Ok(surface.to_owned());
    }
    match client {
        TranslationClient::Dictionary { dictionary, .. } => dictionary
            .lookup(&concept.language, surface)
            .map(str::to_owned)
            .ok_or_else(|| Error::Untranslated {
                language: concept.language.to_string(),
                surface: surface.to_owned(),
            }),
        TranslationClient::Remote { pivot, backend, .. } => backend
            .translate(&concept.language, surface, pivot)
            .map_err(Error::Remote),
    }
}

/// Translates concurrently; results keep input order.
pub fn translate_batch(concepts: &[&Concept], client: &TranslationClient) -> Vec<Result<String>> {
    concepts.par_iter().map(|c| translate(c, client)).collect()
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct TranslationReport {
    pub translated: usize,
    pub untranslated: Vec<String>,
    pub failed: Vec<String>,
}

/// Fills `pivot_surface` on every concept the client can resolve.
pub fn apply_translations(lexicons: &mut BTreeMap<Language, Lexicon>, client: &TranslationClient) -> TranslationReport {
    let mut report = TranslationReport::default();
    for lexicon in lexicons.values_mut() {
        let refs: Vec<&Concept> = lexicon.concepts().iter().collect();
        let results = translate_batch(&refs, client);
        for (concept, result) in lexicon.concepts_mut().zip(results) {
            match result {
                Ok(p) => {
                    concept.pivot_surface = Some(p);
                    report.translated += 1;
                }
                Err(Error::Untranslated { .. }) => {
                    concept.pivot_surface = None;
                    report.untranslated.push(concept.key().to_string());
                }
                Err(e) => {
                    concept.pivot_surface = None;
                    report.failed.push(format!("{}: {e}", concept.key()));
                }
            }
        }
    }
    report
}

/// Concepts grouped by normalized pivot surface.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ExactMatchIndex {
    pub groups: BTreeMap<String, Vec<ConceptKey>>,
    pub untranslated: Vec<ConceptKey>,
    #[serde(skip)]
    pivot_by_concept: BTreeMap<ConceptKey, String>,
}

impl ExactMatchIndex {
    pub fn pivot_of(&self, key: &ConceptKey) -> Option<&str> {
        self.pivot_by_concept.get(key).map(String::as_str)
    }

    pub fn translated_count(&self) -> usize {
        self.pivot_by_concept.len()
    }

    /// Groups with members from at least two languages.
    pub fn multilingual_groups(&self) -> impl Iterator<Item = (&String, &Vec<ConceptKey>)> {
        self.groups
            .iter()
            .filter(|(_, members)| members.iter().any(|m| m.language != members[0].language))
    }
}

pub fn exact_match_index(lexicons: &BTreeMap<Language, Lexicon>, client: &TranslationClient) -> ExactMatchIndex {
    let concepts: Vec<&Concept> = lexicons.values().flat_map(|l| l.concepts()).collect();
    let results = translate_batch(&concepts, client);
    let mut index = ExactMatchIndex::default();
    for (concept, result) in concepts.into_iter().zip(results) {
        let key = concept.key();
        match result {
            Ok(pivot) => {
                let pivot = normalize_surface(&pivot);
                index.groups.entry(pivot.clone()).or_default().push(key.clone());
                index.pivot_by_concept.insert(key, pivot);
            }
            Err(_) => index.untranslated.push(key),
        }
    }
    for members in index.groups.values_mut() {
        members.sort();
    }
    index
}

/// Which pivot-lexicon polarity backs the comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PivotPolarity {
    /// Crowdsourced, falling back to automatic per concept.
    CrowdThenAutomatic,
    Crowdsourced,
    Automatic,
}

impl PivotPolarity {
    fn resolve(self, concept: &Concept) -> Option<(f64, PolaritySource)> {
        let crowd = concept
            .polarity(PolaritySource::Crowdsourced)
            .map(|p| (p, PolaritySource::Crowdsourced));
        let auto = concept
            .polarity(PolaritySource::Automatic)
            .map(|p| (p, PolaritySource::Automatic));
        match self {
            PivotPolarity::CrowdThenAutomatic => crowd.or(auto),
            PivotPolarity::Crowdsourced => crowd,
            PivotPolarity::Automatic => auto,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ShiftOptions {
    pub source: PolaritySource,
    pub pivot_polarity: PivotPolarity,
}

impl Default for ShiftOptions {
    fn default() -> Self {
        ShiftOptions {
            source: PolaritySource::Crowdsourced,
            pivot_polarity: PivotPolarity::CrowdThenAutomatic,
        }
    }
}

/// Sign shifts of one language at one threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftReport {
    pub language: Language,
    pub threshold: f64,
    /// All concepts of the language.
    pub total: usize,
    /// Concepts matched to a pivot concept, with polarity on both sides.
    pub matched: usize,
    pub shifted: usize,
    pub shifted_pct_of_matched: Option<f64>,
    pub shifted_pct_of_all: Option<f64>,
    /// How many matched pivot polarities came from the automatic source.
    pub pivot_automatic: usize,
}

fn pct(part: usize, whole: usize) -> Option<f64> {
    (whole > 0).then(|| 100.0 * part as f64 / whole as f64)
}

/// Counts, per language and threshold `t`, matched concepts whose own
/// polarity and pivot polarity both exceed `t` in magnitude and disagree
/// in sign. The pivot language itself is skipped.
pub fn sentiment_shift_table(
    lexicons: &BTreeMap<Language, Lexicon>,
    index: &ExactMatchIndex,
    pivot_lexicon: &Lexicon,
    thresholds: &[f64],
    opts: ShiftOptions,
) -> Vec<ShiftReport> {
    let mut out = Vec::new();
    for (language, lexicon) in lexicons {
        if language == &pivot_lexicon.language {
            continue;
        }
        let mut pairs = Vec::new();
        let mut pivot_automatic = 0;
        for concept in lexicon.concepts() {
            let Some(own) = concept.polarity(opts.source) else {
                continue;
            };
            let Some(pivot) = index.pivot_of(&concept.key()) else {
                continue;
            };
            let Some((theirs, src)) = pivot_lexicon.get(pivot).and_then(|p| opts.pivot_polarity.resolve(p)) else {
                continue;
            };
            if src == PolaritySource::Automatic {
                pivot_automatic += 1;
            }
            pairs.push((own, theirs));
        }
        for &t in thresholds {
            let shifted = pairs
                .iter()
                .filter(|(a, b)| a.abs() > t && b.abs() > t && (a * b) < 0.0)
                .count();
            out.push(ShiftReport {
                language: language.clone(),
                threshold: t,
                total: lexicon.len(),
                matched: pairs.len(),
                shifted,
                shifted_pct_of_matched: pct(shifted, pairs.len()),
                shifted_pct_of_all: pct(shifted, lexicon.len()),
                pivot_automatic,
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Representatives {
    pub adjective: Option<String>,
    pub noun: String,
    /// Tags came from the fallback heuristic rather than the input.
    pub heuristic: bool,
}

const NOUN_SUFFIXES: &[&str] = &[
    "tion", "sion", "ment", "ness", "ity", "ship", "ism", "ance", "ence", "hood", "dom",
];

/// Closed-class stoplist plus positional and suffix rules. Within a run of
/// content words the last one is a noun; earlier ones are adjectives unless
/// they carry a nominal suffix.
pub fn heuristic_tags(tokens: &[String]) -> Vec<PosTag> {
    let mut tags = Vec::with_capacity(tokens.len());
    for (i, token) in tokens.iter().enumerate() {
        if is_stopword(token) {
            tags.push(PosTag::Other);
            continue;
        }
        let ends_run = tokens.get(i + 1).is_none_or(|next| is_stopword(next));
        if ends_run
            || NOUN_SUFFIXES
                .iter()
                .any(|s| token.len() > s.len() + 2 && token.ends_with(s))
        {
            tags.push(PosTag::Noun);
        } else {
            tags.push(PosTag::Adj);
        }
    }
    tags
}

/// Representative noun is the last noun-tagged token, the representative
/// adjective the first adjective-tagged one.
pub fn extract_representatives(phrase: &str, tags: Option<&[PosTag]>) -> Result<Representatives> {
    let tokens = pivot_tokens(phrase);
    let (tags, heuristic) = match tags {
        Some(t) if t.len() == tokens.len() => (t.to_vec(), false),
        Some(t) => {
            log::warn!(
                "{} POS tags for {} tokens in {phrase:?}; using fallback tagger",
                t.len(),
                tokens.len()
            );
            (heuristic_tags(&tokens), true)
        }
        None => (heuristic_tags(&tokens), true),
    };
    let noun = tokens
        .iter()
        .zip(&tags)
        .rev()
        .find(|(_, t)| **t == PosTag::Noun)
        .map(|(w, _)| w.clone())
        .ok_or(Error::NoNoun)?;
    let adjective = tokens
        .iter()
        .zip(&tags)
        .find(|(_, t)| **t == PosTag::Adj)
        .map(|(w, _)| w.clone());
    Ok(Representatives {
        adjective,
        noun,
        heuristic,
    })
}
