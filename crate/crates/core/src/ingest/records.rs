//! Delimited-file loaders. Row-level violations are collected into an
//! [`IngestReport`] rather than aborting the load, unless strict mode is on.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{normalize_surface, validate_concept, AnnotationRecord, ConceptKey, Language, Lexicon, RawConcept};

#[derive(Debug, Clone, Copy, Default)]
pub struct IngestOptions {
    /// Promote row-level rejections to fatal errors.
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowRejection {
    pub row: usize,
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub source: String,
    pub rows_read: usize,
    pub rows_accepted: usize,
    pub rejections: Vec<RowRejection>,
    /// Well-formed codes outside the built-in language table, first-seen order.
    pub registered_languages: Vec<String>,
}

impl IngestReport {
    fn new(path: &Path) -> Self {
        IngestReport {
            source: path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
            ..Default::default()
        }
    }

    fn reject(&mut self, row: usize, err: &Error, opts: IngestOptions) -> Result<()> {
        if opts.strict {
            return Err(Error::Row {
                row,
                message: format!("{} ({})", err, err.code()),
            });
        }
        log::debug!("{}: row {row} rejected: {err}", self.source);
        self.rejections.push(RowRejection {
            row,
            code: err.code().to_owned(),
            message: err.to_string(),
        });
        Ok(())
    }

    fn note_language(&mut self, language: &Language) {
        if !language.is_known() && !self.registered_languages.iter().any(|l| l == language.as_str()) {
            log::warn!("{}: registering unlisted language code {language}", self.source);
            self.registered_languages.push(language.to_string());
        }
    }
}

#[derive(Debug, Clone)]
pub struct Loaded<T> {
    pub value: T,
    pub report: IngestReport,
}

fn row_error(row: usize, message: impl Into<String>) -> Error {
    Error::Row {
        row,
        message: message.into(),
    }
}

/// Reads every record with its 1-based line number, skipping a header row
/// whose first field equals `header`.
fn read_records(path: &Path, delimiter: u8, header: &str) -> Result<Vec<(usize, StringRecord)>> {
    let mut reader = ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .quoting(delimiter != b'\t')
        .trim(Trim::None)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Config(format!("{}: {other:?}", path.display())),
        })?;
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(i + 1);
        if i == 0 && rec.get(0).map(str::trim) == Some(header) {
            continue;
        }
        if rec.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        out.push((line, rec));
    }
    Ok(out)
}

fn field<'a>(rec: &'a StringRecord, idx: usize, row: usize, name: &str) -> Result<&'a str> {
    rec.get(idx)
        .map(str::trim)
        .ok_or_else(|| row_error(row, format!("missing column {name}")))
}

fn optional_polarity(rec: &StringRecord, idx: usize, row: usize) -> Result<Option<f64>> {
    match rec.get(idx).map(str::trim) {
        None | Some("") | Some("NA") | Some("na") => Ok(None),
        Some(s) => s
            .parse::<f64>()
            .map(Some)
            .map_err(|_| row_error(row, format!("unparsable polarity {s:?}"))),
    }
}

/// Parses lexicon TSV rows:
/// `language  surface  adjective  nouns  crowd_polarity  auto_polarity  [pos]`.
pub fn load_lexicons(path: &Path, opts: IngestOptions) -> Result<Loaded<BTreeMap<Language, Lexicon>>> {
    let mut report = IngestReport::new(path);
    let mut lexicons: BTreeMap<Language, Lexicon> = BTreeMap::new();
    for (row, rec) in read_records(path, b'\t', "language")? {
        report.rows_read += 1;
        let parsed = (|| -> Result<RawConcept> {
            Ok(RawConcept {
                language: field(&rec, 0, row, "language")?.to_owned(),
                surface: field(&rec, 1, row, "surface")?.to_owned(),
                adjective: rec.get(2).unwrap_or("").to_owned(),
                nouns: rec.get(3).unwrap_or("").to_owned(),
                crowd_polarity: optional_polarity(&rec, 4, row)?,
                auto_polarity: optional_polarity(&rec, 5, row)?,
                pivot_surface: None,
                pos: rec.get(6).map(str::to_owned),
            })
        })()
        .and_then(|raw| validate_concept(&raw));
        let result = parsed.and_then(|concept| {
            report.note_language(&concept.language);
            lexicons
                .entry(concept.language.clone())
                .or_insert_with(|| Lexicon::new(concept.language.clone()))
                .insert(concept)
        });
        match result {
            Ok(()) => report.rows_accepted += 1,
            Err(e) => report.reject(row, &e, opts)?,
        }
    }
    Ok(Loaded {
        value: lexicons,
        report,
    })
}

/// Loads the rows of one language; rows of other languages are skipped.
pub fn load_lexicon(path: &Path, language: &Language, opts: IngestOptions) -> Result<Loaded<Lexicon>> {
    let Loaded { mut value, report } = load_lexicons(path, opts)?;
    let lexicon = value.remove(language).unwrap_or_else(|| Lexicon::new(language.clone()));
    Ok(Loaded { value: lexicon, report })
}

/// Ratings grouped by concept.
#[derive(Debug, Clone, Default)]
pub struct AnnotationSet {
    pub by_concept: BTreeMap<ConceptKey, Vec<AnnotationRecord>>,
}

impl AnnotationSet {
    pub fn from_records(records: impl IntoIterator<Item = AnnotationRecord>) -> Self {
        let mut by_concept: BTreeMap<ConceptKey, Vec<AnnotationRecord>> = BTreeMap::new();
        for r in records {
            by_concept.entry(r.concept.clone()).or_default().push(r);
        }
        AnnotationSet { by_concept }
    }

    pub fn len(&self) -> usize {
        self.by_concept.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.by_concept.is_empty()
    }

    /// Mean rating per concept.
    pub fn mean_ratings(&self) -> BTreeMap<ConceptKey, f64> {
        self.by_concept
            .iter()
            .map(|(k, rs)| {
                let total: u32 = rs.iter().map(|r| r.rating as u32).sum();
                (k.clone(), total as f64 / rs.len() as f64)
            })
            .collect()
    }
}

/// Annotations CSV: `language,surface,worker_id,rating`.
pub fn load_annotations(path: &Path, opts: IngestOptions) -> Result<Loaded<AnnotationSet>> {
    let mut report = IngestReport::new(path);
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for (row, rec) in read_records(path, b',', "language")? {
        report.rows_read += 1;
        let parsed = (|| -> Result<AnnotationRecord> {
            let language = Language::parse(field(&rec, 0, row, "language")?)?;
            let surface = field(&rec, 1, row, "surface")?;
            if surface.is_empty() {
                return Err(Error::EmptySurface);
            }
            let worker_id = field(&rec, 2, row, "worker_id")?.to_owned();
            let raw = field(&rec, 3, row, "rating")?;
            let rating = raw
                .parse::<u8>()
                .ok()
                .filter(|r| (1..=5).contains(r))
                .ok_or_else(|| row_error(row, format!("rating {raw:?} outside 1..=5")))?;
            report.note_language(&language);
            Ok(AnnotationRecord {
                concept: ConceptKey::new(language, surface),
                worker_id,
                rating,
            })
        })()
        .and_then(|r| {
            if seen.insert((r.concept.clone(), r.worker_id.clone())) {
                Ok(r)
            } else {
                Err(row_error(
                    row,
                    format!("worker {} rated {} twice", r.worker_id, r.concept),
                ))
            }
        });
        match parsed {
            Ok(r) => {
                report.rows_accepted += 1;
                records.push(r);
            }
            Err(e) => report.reject(row, &e, opts)?,
        }
    }
    Ok(Loaded {
        value: AnnotationSet::from_records(records),
        report,
    })
}

/// Pivot-language ANP tags attached to one image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageTagRecord {
    pub image_id: String,
    pub language: Language,
    /// Normalized, unique, in file order.
    pub anp_tags: Vec<String>,
}

/// Image tags TSV: `image_id  language  tag1|tag2|...`.
pub fn load_image_tags(path: &Path, opts: IngestOptions) -> Result<Loaded<Vec<ImageTagRecord>>> {
    let mut report = IngestReport::new(path);
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for (row, rec) in read_records(path, b'\t', "image_id")? {
        report.rows_read += 1;
        let parsed = (|| -> Result<ImageTagRecord> {
            let image_id = field(&rec, 0, row, "image_id")?.to_owned();
            let language = Language::parse(field(&rec, 1, row, "language")?)?;
            let mut seen = HashSet::new();
            let anp_tags: Vec<String> = field(&rec, 2, row, "tags")?
                .split('|')
                .map(normalize_surface)
                .filter(|t| !t.is_empty())
                .filter(|t| seen.insert(t.clone()))
                .collect();
            if anp_tags.is_empty() {
                return Err(row_error(row, "no ANP tags"));
            }
            if !ids.insert(image_id.clone()) {
                return Err(row_error(row, format!("duplicate image id {image_id}")));
            }
            report.note_language(&language);
            Ok(ImageTagRecord {
                image_id,
                language,
                anp_tags,
            })
        })();
        match parsed {
            Ok(r) => {
                report.rows_accepted += 1;
                out.push(r);
            }
            Err(e) => report.reject(row, &e, opts)?,
        }
    }
    Ok(Loaded { value: out, report })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl FaceBox {
    pub fn area(&self) -> f64 {
        self.w as f64 * self.h as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceDetectionRecord {
    pub image_id: String,
    pub image_width: u32,
    pub image_height: u32,
    pub boxes: Vec<FaceBox>,
}

impl FaceDetectionRecord {
    pub fn image_area(&self) -> f64 {
        self.image_width as f64 * self.image_height as f64
    }
}

/// Face detections CSV: `image_id,image_w,image_h,x,y,w,h`, one row per box;
/// images without faces appear once with empty box fields.
pub fn load_face_detections(path: &Path, opts: IngestOptions) -> Result<Loaded<Vec<FaceDetectionRecord>>> {
    let mut report = IngestReport::new(path);
    let mut by_image: BTreeMap<String, FaceDetectionRecord> = BTreeMap::new();
    for (row, rec) in read_records(path, b',', "image_id")? {
        report.rows_read += 1;
        let parsed = (|| -> Result<()> {
            let num = |idx: usize, name: &str| -> Result<Option<u32>> {
                match rec.get(idx).map(str::trim) {
                    None | Some("") => Ok(None),
                    Some(s) => s
                        .parse::<u32>()
                        .map(Some)
                        .map_err(|_| row_error(row, format!("bad {name} {s:?}"))),
                }
            };
            let image_id = field(&rec, 0, row, "image_id")?.to_owned();
            let (w, h) = match (num(1, "image_w")?, num(2, "image_h")?) {
                (Some(w), Some(h)) if w > 0 && h > 0 => (w, h),
                _ => return Err(row_error(row, "image size must be positive")),
            };
            let face = match (num(3, "x")?, num(4, "y")?, num(5, "w")?, num(6, "h")?) {
                (None, None, None, None) => None,
                (Some(x), Some(y), Some(bw), Some(bh)) => {
                    if bw == 0 || bh == 0 || x as u64 + bw as u64 > w as u64 || y as u64 + bh as u64 > h as u64 {
                        return Err(row_error(row, "face box outside image bounds"));
                    }
                    Some(FaceBox { x, y, w: bw, h: bh })
                }
                _ => return Err(row_error(row, "partial face box")),
            };
            let entry = by_image.entry(image_id.clone()).or_insert_with(|| FaceDetectionRecord {
                image_id,
                image_width: w,
                image_height: h,
                boxes: Vec::new(),
            });
            if entry.image_width != w || entry.image_height != h {
                return Err(row_error(row, "conflicting image size"));
            }
            entry.boxes.extend(face);
            Ok(())
        })();
        match parsed {
            Ok(()) => report.rows_accepted += 1,
            Err(e) => report.reject(row, &e, opts)?,
        }
    }
    Ok(Loaded {
        value: by_image.into_values().collect(),
        report,
    })
}

/// (language, normalized surface) to pivot phrase.
#[derive(Debug, Clone, Default)]
pub struct Dictionary {
    entries: HashMap<(Language, String), String>,
}

impl Dictionary {
    pub fn insert(&mut self, language: Language, surface: &str, pivot: &str) {
        self.entries
            .insert((language, normalize_surface(surface)), pivot.trim().to_owned());
    }

    pub fn lookup(&self, language: &Language, surface: &str) -> Option<&str> {
        self.entries
            .get(&(language.clone(), normalize_surface(surface)))
            .map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn languages(&self) -> BTreeSet<Language> {
        self.entries.keys().map(|(l, _)| l.clone()).collect()
    }
}

/// Dictionary TSV: `language  surface  pivot_surface`.
pub fn load_dictionary(path: &Path, opts: IngestOptions) -> Result<Loaded<Dictionary>> {
    let mut report = IngestReport::new(path);
    let mut dict = Dictionary::default();
    let mut seen = HashSet::new();
    for (row, rec) in read_records(path, b'\t', "language")? {
        report.rows_read += 1;
        let parsed = (|| -> Result<()> {
            let language = Language::parse(field(&rec, 0, row, "language")?)?;
            let surface = field(&rec, 1, row, "surface")?;
            let pivot = field(&rec, 2, row, "pivot_surface")?;
            if surface.is_empty() || pivot.is_empty() {
                return Err(Error::EmptySurface);
            }
            if !seen.insert((language.clone(), normalize_surface(surface))) {
                return Err(Error::Duplicate {
                    language: language.to_string(),
                    surface: surface.to_owned(),
                });
            }
            report.note_language(&language);
            dict.insert(language, surface, pivot);
            Ok(())
        })();
        match parsed {
            Ok(()) => report.rows_accepted += 1,
            Err(e) => report.reject(row, &e, opts)?,
        }
    }
    Ok(Loaded { value: dict, report })
}
