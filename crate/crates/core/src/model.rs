//! Core domain types: languages, concepts, sentiment values and lexicons.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// Languages of the reference ontology, as (ISO-639-1 code, English name).
pub const KNOWN_LANGUAGES: [(&str, &str); 12] = [
    ("en", "English"),
    ("es", "Spanish"),
    ("it", "Italian"),
    ("fr", "French"),
    ("zh", "Chinese"),
    ("de", "German"),
    ("nl", "Dutch"),
    ("ru", "Russian"),
    ("tr", "Turkish"),
    ("pl", "Polish"),
    ("fa", "Persian"),
    ("ar", "Arabic"),
];

/// Lowercase two-letter ISO-639-1 language code.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Language(String);

impl Language {
    /// Normalizes and validates a code. Well-formed codes outside
    /// [`KNOWN_LANGUAGES`] are accepted; check [`Language::is_known`].
    pub fn parse(code: &str) -> Result<Self> {
        let code = code.trim().to_lowercase();
        if code.len() == 2 && code.chars().all(|c| c.is_ascii_lowercase()) {
            Ok(Language(code))
        } else {
            Err(Error::UnknownLanguage(code))
        }
    }

    pub fn english() -> Self {
        Language("en".to_owned())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_known(&self) -> bool {
        KNOWN_LANGUAGES.iter().any(|(c, _)| *c == self.0)
    }

    pub fn name(&self) -> Option<&'static str> {
        KNOWN_LANGUAGES.iter().find(|(c, _)| *c == self.0).map(|(_, n)| *n)
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for Language {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Language::parse(s)
    }
}

impl TryFrom<String> for Language {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        Language::parse(&s)
    }
}

impl From<Language> for String {
    fn from(l: Language) -> String {
        l.0
    }
}

/// NFC, lowercase, internal whitespace collapsed to single spaces.
pub fn normalize_surface(s: &str) -> String {
    let nfc: String = s.nfc().collect();
    nfc.to_lowercase().split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Identifies a concept (or a language-tagged pivot ANP) by language and
/// normalized surface. Rendered as `lang:surface`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ConceptKey {
    pub language: Language,
    pub surface: String,
}

impl ConceptKey {
    pub fn new(language: Language, surface: &str) -> Self {
        ConceptKey {
            language,
            surface: normalize_surface(surface),
        }
    }
}

impl fmt::Display for ConceptKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.language, self.surface)
    }
}

impl FromStr for ConceptKey {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (lang, surface) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("concept key {s:?} lacks a language prefix")))?;
        Ok(ConceptKey::new(Language::parse(lang)?, surface))
    }
}

impl TryFrom<String> for ConceptKey {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ConceptKey> for String {
    fn from(k: ConceptKey) -> String {
        k.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolaritySource {
    Crowdsourced,
    Automatic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentValue {
    polarity: f64,
    pub source: PolaritySource,
}

impl SentimentValue {
    pub fn new(polarity: f64, source: PolaritySource) -> Result<Self> {
        if polarity.is_finite() && polarity.abs() <= 1.0 {
            Ok(SentimentValue { polarity, source })
        } else {
            Err(Error::Domain {
                value: polarity,
                domain: "[-1, 1]",
            })
        }
    }

    pub fn polarity(&self) -> f64 {
        self.polarity
    }
}

/// Maps a mean rating on the 1..=5 scale to a polarity in [-1, 1]: `(r - 3) / 2`.
pub fn map_rating_to_polarity(mean_rating: f64) -> Result<f64> {
    if !(1.0..=5.0).contains(&mean_rating) {
        return Err(Error::Domain {
            value: mean_rating,
            domain: "[1, 5]",
        });
    }
    Ok((mean_rating - 3.0) / 2.0)
}

/// Inverse of [`map_rating_to_polarity`].
pub fn polarity_to_rating(polarity: f64) -> f64 {
    3.0 + 2.0 * polarity
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PosTag {
    Adj,
    Noun,
    Other,
}

impl FromStr for PosTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "ADJ" => Ok(PosTag::Adj),
            "NOUN" => Ok(PosTag::Noun),
            "OTHER" => Ok(PosTag::Other),
            other => Err(Error::Config(format!("unknown POS tag {other:?}"))),
        }
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PosTag::Adj => "ADJ",
            PosTag::Noun => "NOUN",
            PosTag::Other => "OTHER",
        })
    }
}

/// A language-tagged adjective-noun pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Concept {
    pub language: Language,
    /// Original-language phrase, trimmed.
    pub surface: String,
    /// Adjective tokens; may be empty.
    pub adjective: Vec<String>,
    /// Noun tokens; never empty.
    pub nouns: Vec<String>,
    pub pivot_surface: Option<String>,
    /// Tags aligned with the whitespace tokens of `pivot_surface`.
    pub pivot_pos: Option<Vec<PosTag>>,
    pub crowd: Option<SentimentValue>,
    pub automatic: Option<SentimentValue>,
}

impl Concept {
    pub fn key(&self) -> ConceptKey {
        ConceptKey::new(self.language.clone(), &self.surface)
    }

    pub fn polarity(&self, source: PolaritySource) -> Option<f64> {
        match source {
            PolaritySource::Crowdsourced => self.crowd,
            PolaritySource::Automatic => self.automatic,
        }
        .map(|s| s.polarity())
    }

    /// Normalized pivot surface, if translated.
    pub fn pivot_key(&self) -> Option<String> {
        self.pivot_surface.as_deref().map(normalize_surface)
    }
}

/// One unvalidated lexicon row.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConcept {
    pub language: String,
    pub surface: String,
    pub adjective: String,
    pub nouns: String,
    pub crowd_polarity: Option<f64>,
    pub auto_polarity: Option<f64>,
    pub pivot_surface: Option<String>,
    pub pos: Option<String>,
}

impl From<&Concept> for RawConcept {
    fn from(c: &Concept) -> Self {
        RawConcept {
            language: c.language.to_string(),
            surface: c.surface.clone(),
            adjective: c.adjective.join(" "),
            nouns: c.nouns.join(" "),
            crowd_polarity: c.crowd.map(|s| s.polarity()),
            auto_polarity: c.automatic.map(|s| s.polarity()),
            pivot_surface: c.pivot_surface.clone(),
            pos: c
                .pivot_pos
                .as_ref()
                .map(|tags| tags.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")),
        }
    }
}

fn tokens(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_owned).collect()
}

/// Checks the per-row invariants of a concept. Duplicate detection needs
/// the surrounding lexicon; see [`Lexicon::insert`].
pub fn validate_concept(raw: &RawConcept) -> Result<Concept> {
    let language = Language::parse(&raw.language)?;
    let surface = raw.surface.trim();
    if surface.is_empty() {
        return Err(Error::EmptySurface);
    }
    let nouns = tokens(&raw.nouns);
    if nouns.is_empty() {
        return Err(Error::NoNoun);
    }
    let crowd = raw
        .crowd_polarity
        .map(|p| SentimentValue::new(p, PolaritySource::Crowdsourced))
        .transpose()?;
    let automatic = raw
        .auto_polarity
        .map(|p| SentimentValue::new(p, PolaritySource::Automatic))
        .transpose()?;
    let pivot_surface = raw
        .pivot_surface
        .as_deref()
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned);
    let pivot_pos = raw
        .pos
        .as_deref()
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.split_whitespace().map(PosTag::from_str).collect::<Result<Vec<_>>>())
        .transpose()?;
    Ok(Concept {
        language,
        surface: surface.to_owned(),
        adjective: tokens(&raw.adjective),
        nouns,
        pivot_surface,
        pivot_pos,
        crowd,
        automatic,
    })
}

/// One worker's rating of one concept on the 1..=5 scale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationRecord {
    pub concept: ConceptKey,
    pub worker_id: String,
    pub rating: u8,
}

/// All concepts of one language, unique by normalized surface.
#[derive(Debug, Clone)]
pub struct Lexicon {
    pub language: Language,
    concepts: Vec<Concept>,
    index: HashMap<String, usize>,
}

impl Lexicon {
    pub fn new(language: Language) -> Self {
        Lexicon {
            language,
            concepts: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn insert(&mut self, concept: Concept) -> Result<()> {
        if concept.language != self.language {
            return Err(Error::Config(format!(
                "concept language {} does not match lexicon language {}",
                concept.language, self.language
            )));
        }
        let key = normalize_surface(&concept.surface);
        if self.index.contains_key(&key) {
            return Err(Error::Duplicate {
                language: self.language.to_string(),
                surface: concept.surface,
            });
        }
        self.index.insert(key, self.concepts.len());
        self.concepts.push(concept);
        Ok(())
    }

    pub fn get(&self, surface: &str) -> Option<&Concept> {
        self.index.get(&normalize_surface(surface)).map(|&i| &self.concepts[i])
    }

    pub fn get_mut(&mut self, surface: &str) -> Option<&mut Concept> {
        self.index
            .get(&normalize_surface(surface))
            .map(|&i| &mut self.concepts[i])
    }

    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    pub fn concepts_mut(&mut self) -> impl Iterator<Item = &mut Concept> {
        self.concepts.iter_mut()
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn raw(surface: &str, adj: &str, nouns: &str) -> RawConcept {
        RawConcept {
            language: "es".into(),
            surface: surface.into(),
            adjective: adj.into(),
            nouns: nouns.into(),
            ..Default::default()
        }
    }

    #[test]
    fn rating_map_endpoints() {
        assert_eq!(map_rating_to_polarity(3.0).unwrap(), 0.0);
        assert_eq!(map_rating_to_polarity(5.0).unwrap(), 1.0);
        assert_eq!(map_rating_to_polarity(1.0).unwrap(), -1.0);
        assert!(matches!(map_rating_to_polarity(5.5), Err(Error::Domain { .. })));
        assert!(map_rating_to_polarity(0.99).is_err());
    }

    #[test]
    fn accepts_well_formed_row() {
        let c = validate_concept(&raw("perro feliz", "feliz", "perro")).unwrap();
        assert_eq!(c.language.as_str(), "es");
        assert_eq!(c.nouns, vec!["perro"]);
        assert_eq!(c.adjective, vec!["feliz"]);
    }

    #[test]
    fn rejects_missing_noun() {
        let err = validate_concept(&raw("feliz", "feliz", "  ")).unwrap_err();
        assert_eq!(err.code(), "NO_NOUN");
    }

    #[test]
    fn rejects_duplicate_surface() {
        let mut lex = Lexicon::new(Language::parse("es").unwrap());
        lex.insert(validate_concept(&raw("perro feliz", "feliz", "perro")).unwrap())
            .unwrap();
        let err = lex
            .insert(validate_concept(&raw("Perro  Feliz", "feliz", "perro")).unwrap())
            .unwrap_err();
        assert_eq!(err.code(), "DUPLICATE");
    }

    #[test]
    fn language_codes() {
        assert_eq!(Language::parse("ES").unwrap().as_str(), "es");
        assert!(!Language::parse("xx").unwrap().is_known());
        assert_eq!(Language::parse("eng").unwrap_err().code(), "UNKNOWN_LANGUAGE");
    }

    #[test]
    fn validate_is_idempotent() {
        let mut r = raw("chien heureux", "heureux", "chien");
        r.language = "fr".into();
        r.crowd_polarity = Some(0.4);
        r.pivot_surface = Some("happy dog".into());
        r.pos = Some("ADJ NOUN".into());
        let once = validate_concept(&r).unwrap();
        let twice = validate_concept(&RawConcept::from(&once)).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn surface_normalization() {
        assert_eq!(normalize_surface("  Happy\t  DOG "), "happy dog");
        // decomposed e + combining acute composes under NFC
        assert_eq!(normalize_surface("Cafe\u{301}"), "caf\u{e9}");
    }

    proptest! {
        #[test]
        fn rating_map_is_linear(a in 1.0f64..=5.0, b in 1.0f64..=5.0) {
            let f = |r| map_rating_to_polarity(r).unwrap();
            prop_assert!((f(a) + f(b) - 2.0 * f((a + b) / 2.0)).abs() < 1e-12);
        }

        #[test]
        fn rating_map_sign(r in 1.0f64..=5.0) {
            let p = map_rating_to_polarity(r).unwrap();
            prop_assert_eq!(p.partial_cmp(&0.0), (r - 3.0).partial_cmp(&0.0));
        }
    }
}
