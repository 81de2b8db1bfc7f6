//! Portrait analysis: which concepts languages attach to photos of faces.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::clustering::{kmeans, Clustering, KMeansOptions, Metric};
use crate::error::{Error, Result};
use crate::ingest::{FaceDetectionRecord, ImageTagRecord};
use crate::model::{polarity_to_rating, ConceptKey, Language, Lexicon};
use crate::seeding::derive_seed;
use crate::stats::{self, CompensatedSum};

pub const DEFAULT_PORTRAIT_THRESHOLD: f64 = 0.6;
pub const DEFAULT_MIN_FACE_ANPS: usize = 20;

/// Image ids per concept. An image in language `L` tagged with pivot
/// surface `s` belongs to every concept of `L` translated to `s`.
pub fn concept_images(
    tags: &[ImageTagRecord],
    lexicons: &BTreeMap<Language, Lexicon>,
) -> BTreeMap<ConceptKey, BTreeSet<String>> {
    let mut by_pivot: BTreeMap<(&Language, &str), Vec<ConceptKey>> = BTreeMap::new();
    for (language, lexicon) in lexicons {
        for c in lexicon.concepts() {
            if let Some(p) = &c.pivot_surface {
                by_pivot.entry((language, p.as_str())).or_default().push(c.key());
            }
        }
    }
    let mut out: BTreeMap<ConceptKey, BTreeSet<String>> = BTreeMap::new();
    for image in tags {
        for tag in &image.anp_tags {
            for key in by_pivot.get(&(&image.language, tag.as_str())).into_iter().flatten() {
                out.entry(key.clone()).or_default().insert(image.image_id.clone());
            }
        }
    }
    out
}

fn detection_index(detections: &[FaceDetectionRecord]) -> BTreeMap<&str, &FaceDetectionRecord> {
    detections.iter().map(|d| (d.image_id.as_str(), d)).collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PortraitScores {
    pub scores: BTreeMap<ConceptKey, f64>,
    /// Concepts with no images.
    pub excluded: Vec<ConceptKey>,
    /// Images with no detection record, counted as face-free.
    pub undetected_images: usize,
}

/// Fraction of each concept's images with at least one detected face.
pub fn portrait_scores(
    detections: &[FaceDetectionRecord],
    images: &BTreeMap<ConceptKey, BTreeSet<String>>,
) -> PortraitScores {
    let index = detection_index(detections);
    let mut out = PortraitScores::default();
    let mut undetected = BTreeSet::new();
    for (key, ids) in images {
        if ids.is_empty() {
            out.excluded.push(key.clone());
            continue;
        }
        let mut with_face = 0usize;
        for id in ids {
            match index.get(id.as_str()) {
                Some(d) if !d.boxes.is_empty() => with_face += 1,
                Some(_) => {}
                None => {
                    undetected.insert(id.as_str());
                }
            }
        }
        out.scores.insert(key.clone(), with_face as f64 / ids.len() as f64);
    }
    out.undetected_images = undetected.len();
    if out.undetected_images > 0 {
        warn!("{} tagged images have no detection record", out.undetected_images);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaceSelection {
    pub anps: BTreeSet<ConceptKey>,
    pub languages: Vec<Language>,
    /// Languages dropped for having too few face concepts, with their count.
    pub dropped: BTreeMap<Language, usize>,
}

/// Keeps concepts scoring strictly above `threshold`, in languages with at
/// least `min_per_language` of them.
pub fn filter_face_anps(
    scores: &BTreeMap<ConceptKey, f64>,
    threshold: f64,
    min_per_language: usize,
) -> Result<FaceSelection> {
    let mut by_language: BTreeMap<Language, Vec<ConceptKey>> = BTreeMap::new();
    for (key, &s) in scores {
        if s > threshold {
            by_language.entry(key.language.clone()).or_default().push(key.clone());
        }
    }
    let mut selection = FaceSelection {
        anps: BTreeSet::new(),
        languages: Vec::new(),
        dropped: BTreeMap::new(),
    };
    for (language, keys) in by_language {
        if keys.len() >= min_per_language {
            selection.anps.extend(keys);
            selection.languages.push(language);
        } else {
            selection.dropped.insert(language, keys.len());
        }
    }
    if selection.anps.is_empty() {
        return Err(Error::EmptySelection);
    }
    Ok(selection)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceSizeMode {
    /// `sqrt(box area / image area)`, a linear scale ratio.
    #[default]
    Linear,
    Area,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FacesPerImageMode {
    /// Detections per image that has at least one face.
    #[default]
    FaceImages,
    AllImages,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentimentScale {
    /// Mean ratings on the 1 to 5 scale.
    #[default]
    Rating,
    Polarity,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PortraitOptions {
    pub face_size: FaceSizeMode,
    pub faces_per_image: FacesPerImageMode,
    pub scale: SentimentScale,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortraitStats {
    pub language: Language,
    pub rho_face_sent: Option<f64>,
    pub sent_faces: Option<f64>,
    pub sent_all: Option<f64>,
    pub diff_pct: Option<f64>,
    pub face_size_pct: Option<f64>,
    pub faces_per_image: Option<f64>,
    pub face_anps: usize,
    pub all_anps: usize,
}

/// `100 * (faces - all) / all`.
pub fn relative_difference_pct(sent_faces: f64, sent_all: f64) -> Option<f64> {
    (sent_all != 0.0).then(|| 100.0 * (sent_faces - sent_all) / sent_all)
}

fn box_size(d: &FaceDetectionRecord, b: &crate::ingest::FaceBox, mode: FaceSizeMode) -> f64 {
    let ratio = b.area() / d.image_area();
    100.0
        * match mode {
            FaceSizeMode::Linear => ratio.sqrt(),
            FaceSizeMode::Area => ratio,
        }
}

/// Mean face size (percent) over all detections in the given images.
fn mean_face_size<'a>(
    ids: impl IntoIterator<Item = &'a String>,
    index: &BTreeMap<&str, &FaceDetectionRecord>,
    mode: FaceSizeMode,
) -> Option<f64> {
    let mut sum = CompensatedSum::new();
    let mut n = 0usize;
    for id in ids {
        if let Some(d) = index.get(id.as_str()) {
            for b in &d.boxes {
                sum.add(box_size(d, b, mode));
                n += 1;
            }
        }
    }
    (n > 0).then(|| sum.value() / n as f64)
}

/// Per-concept mean face size over the detections in its images.
pub fn concept_face_sizes(
    detections: &[FaceDetectionRecord],
    images: &BTreeMap<ConceptKey, BTreeSet<String>>,
    mode: FaceSizeMode,
) -> BTreeMap<ConceptKey, f64> {
    let index = detection_index(detections);
    images
        .iter()
        .filter_map(|(k, ids)| mean_face_size(ids, &index, mode).map(|s| (k.clone(), s)))
        .collect()
}

/// One row per retained language. The correlation runs over every concept
/// of the language that has both a score and a polarity; sentiment means
/// run over face concepts and over all concepts of the language.
pub fn face_sentiment_stats(
    selection: &FaceSelection,
    scores: &BTreeMap<ConceptKey, f64>,
    polarities: &BTreeMap<ConceptKey, f64>,
    images: &BTreeMap<ConceptKey, BTreeSet<String>>,
    detections: &[FaceDetectionRecord],
    opts: PortraitOptions,
) -> Vec<PortraitStats> {
    let index = detection_index(detections);
    let rescale = |p: f64| match opts.scale {
        SentimentScale::Rating => polarity_to_rating(p),
        SentimentScale::Polarity => p,
    };
    selection
        .languages
        .iter()
        .map(|language| {
            let of_language = |k: &&ConceptKey| &k.language == language;
            let (xs, ys): (Vec<f64>, Vec<f64>) = scores
                .iter()
                .filter(|(k, _)| of_language(k))
                .filter_map(|(k, &s)| polarities.get(k).map(|&p| (s, p)))
                .unzip();
            let rho = stats::pearson(&xs, &ys).ok();

            let all: Vec<f64> = polarities
                .iter()
                .filter(|(k, _)| of_language(k))
                .map(|(_, &p)| rescale(p))
                .collect();
            let faces: Vec<&ConceptKey> = selection.anps.iter().filter(of_language).collect();
            let face_sent: Vec<f64> = faces
                .iter()
                .filter_map(|k| polarities.get(*k).map(|&p| rescale(p)))
                .collect();
            let sent_faces = stats::mean(&face_sent);
            let sent_all = stats::mean(&all);
            let diff_pct = sent_faces
                .zip(sent_all)
                .and_then(|(f, a)| relative_difference_pct(f, a));

            let face_images: BTreeSet<&String> = faces.iter().filter_map(|k| images.get(*k)).flatten().collect();
            let face_size_pct = mean_face_size(face_images.iter().copied(), &index, opts.face_size);
            let (mut detections_n, mut with_face) = (0usize, 0usize);
            for id in &face_images {
                if let Some(d) = index.get(id.as_str()) {
                    detections_n += d.boxes.len();
                    with_face += usize::from(!d.boxes.is_empty());
                }
            }
            let denominator = match opts.faces_per_image {
                FacesPerImageMode::FaceImages => with_face,
                FacesPerImageMode::AllImages => face_images.len(),
            };
            PortraitStats {
                language: language.clone(),
                rho_face_sent: rho,
                sent_faces,
                sent_all,
                diff_pct,
                face_size_pct,
                faces_per_image: (denominator > 0).then(|| detections_n as f64 / denominator as f64),
                face_anps: faces.len(),
                all_anps: scores.keys().filter(|k| of_language(k)).count(),
            }
        })
        .collect()
}

fn field(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

/// Table-shaped CSV, optionally preceded by a `#` comment line.
pub fn write_portrait_csv(stats: &[PortraitStats], path: &Path, header: Option<&str>) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    if let Some(h) = header {
        writeln!(w, "# {h}").map_err(io)?;
    }
    writeln!(
        w,
        "language,rho_face_sent,sent_faces,sent_all,diff_pct,face_size_pct,faces_per_image,face_anps,all_anps"
    )
    .map_err(io)?;
    for s in stats {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            s.language,
            field(s.rho_face_sent),
            field(s.sent_faces),
            field(s.sent_all),
            field(s.diff_pct),
            field(s.face_size_pct),
            field(s.faces_per_image),
            s.face_anps,
            s.all_anps
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultilingualityReport {
    /// Pearson between language count and mean polarity per cluster.
    pub rho_languages_sentiment: Option<f64>,
    /// Pearson between language count and mean face size per cluster.
    pub rho_languages_face_size: Option<f64>,
    pub clusters: usize,
}

/// Correlations over multi-concept clusters between how many languages a
/// cluster spans and its members' mean polarity and mean face size.
pub fn multilinguality_correlations(
    clustering: &Clustering,
    polarities: &BTreeMap<ConceptKey, f64>,
    face_sizes: &BTreeMap<ConceptKey, f64>,
) -> MultilingualityReport {
    let mut sent = (Vec::new(), Vec::new());
    let mut size = (Vec::new(), Vec::new());
    let mut clusters = 0;
    for members in clustering.clusters() {
        if members.len() < 2 {
            continue;
        }
        clusters += 1;
        let keys: Vec<&ConceptKey> = members.iter().map(|&i| &clustering.keys[i]).collect();
        let languages = keys.iter().map(|k| &k.language).collect::<BTreeSet<_>>().len() as f64;
        let p: Vec<f64> = keys.iter().filter_map(|k| polarities.get(*k).copied()).collect();
        if let Some(m) = stats::mean(&p) {
            sent.0.push(languages);
            sent.1.push(m);
        }
        let s: Vec<f64> = keys.iter().filter_map(|k| face_sizes.get(*k).copied()).collect();
        if let Some(m) = stats::mean(&s) {
            size.0.push(languages);
            size.1.push(m);
        }
    }
    MultilingualityReport {
        rho_languages_sentiment: stats::pearson(&sent.0, &sent.1).ok(),
        rho_languages_face_size: stats::pearson(&size.0, &size.1).ok(),
        clusters,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LanguageProfile {
    pub language: Language,
    /// Share of the language's concepts in each cluster.
    pub vector: Vec<f64>,
}

pub fn language_profiles(clustering: &Clustering) -> Vec<LanguageProfile> {
    let k = clustering.cluster_count();
    let mut counts: BTreeMap<&Language, Vec<usize>> = BTreeMap::new();
    for (key, &c) in clustering.keys.iter().zip(&clustering.assignments) {
        counts.entry(&key.language).or_insert_with(|| vec![0; k])[c] += 1;
    }
    counts
        .into_iter()
        .map(|(language, v)| {
            let total: usize = v.iter().sum();
            LanguageProfile {
                language: language.clone(),
                vector: v.iter().map(|&x| x as f64 / total as f64).collect(),
            }
        })
        .collect()
}

/// Language groups for one k, each group in code order, groups ordered by
/// their first language.
pub type Grouping = Vec<Vec<Language>>;

/// Spherical k-means over profiles for every k in `ks`.
pub fn cluster_languages(
    profiles: &[LanguageProfile],
    ks: RangeInclusive<usize>,
    seed: u64,
) -> Result<BTreeMap<usize, Grouping>> {
    let points: Vec<Vec<f64>> = profiles.iter().map(|p| p.vector.clone()).collect();
    let mut out = BTreeMap::new();
    for k in ks {
        let opts = KMeansOptions::new(k, derive_seed(seed, &format!("languages-{k}"))).metric(Metric::Cosine);
        let r = kmeans(&points, &opts)?;
        let mut groups: Vec<Vec<Language>> = vec![Vec::new(); k];
        for (p, &a) in profiles.iter().zip(&r.assignments) {
            groups[a].push(p.language.clone());
        }
        for g in &mut groups {
            g.sort();
        }
        groups.retain(|g| !g.is_empty());
        groups.sort();
        out.insert(k, groups);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::Scheme;
    use crate::ingest::FaceBox;

    fn lang(l: &str) -> Language {
        Language::parse(l).unwrap()
    }

    fn key(l: &str, s: &str) -> ConceptKey {
        ConceptKey::new(lang(l), s)
    }

    fn det(id: &str, faces: u32) -> FaceDetectionRecord {
        FaceDetectionRecord {
            image_id: id.into(),
            image_width: 100,
            image_height: 100,
            boxes: (0..faces)
                .map(|i| FaceBox {
                    x: i * 10,
                    y: 0,
                    w: 10,
                    h: 10,
                })
                .collect(),
        }
    }

    fn ids(v: &[&str]) -> BTreeSet<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn score_ratios() {
        let dets = [det("1", 1), det("2", 2), det("3", 1), det("4", 0), det("5", 0)];
        let images: BTreeMap<ConceptKey, BTreeSet<String>> = [
            (key("en", "all x"), ids(&["1", "2"])),
            (key("en", "none x"), ids(&["4", "5"])),
            (key("en", "some x"), ids(&["1", "2", "3", "4", "5"])),
            (key("en", "empty x"), ids(&[])),
        ]
        .into();
        let s = portrait_scores(&dets, &images);
        assert_eq!(s.scores[&key("en", "all x")], 1.0);
        assert_eq!(s.scores[&key("en", "none x")], 0.0);
        assert_eq!(s.scores[&key("en", "some x")], 0.6);
        assert_eq!(s.excluded, [key("en", "empty x")]);
    }

    #[test]
    fn threshold_is_strict_and_languages_need_enough() {
        let mut scores = BTreeMap::new();
        scores.insert(key("en", "edge x"), 0.6);
        for i in 0..3 {
            scores.insert(key("en", &format!("f{i} x")), 0.9);
        }
        for i in 0..2 {
            scores.insert(key("fr", &format!("f{i} x")), 0.9);
        }
        let s = filter_face_anps(&scores, 0.6, 3).unwrap();
        assert_eq!(s.anps.len(), 3);
        assert_eq!(s.languages, [lang("en")]);
        assert_eq!(s.dropped[&lang("fr")], 2);
        assert_eq!(
            filter_face_anps(&scores, 0.95, 1).unwrap_err().code(),
            "EMPTY_SELECTION"
        );
    }

    #[test]
    fn five_concept_language_against_direct_formulas() {
        let dets = [det("a", 1), det("b", 2), det("c", 0), det("d", 1), det("e", 0)];
        let images: BTreeMap<ConceptKey, BTreeSet<String>> = [
            (key("ru", "p1 x"), ids(&["a", "b"])),
            (key("ru", "p2 x"), ids(&["a", "b", "c"])),
            (key("ru", "p3 x"), ids(&["c", "d"])),
            (key("ru", "p4 x"), ids(&["c", "e"])),
            (key("ru", "p5 x"), ids(&["d", "e"])),
        ]
        .into();
        let pol: BTreeMap<ConceptKey, f64> = [
            (key("ru", "p1 x"), 0.8),
            (key("ru", "p2 x"), 0.5),
            (key("ru", "p3 x"), 0.0),
            (key("ru", "p4 x"), -0.5),
            (key("ru", "p5 x"), 0.25),
        ]
        .into();
        let scores = portrait_scores(&dets, &images).scores;
        let sel = filter_face_anps(&scores, 0.6, 1).unwrap();
        assert_eq!(sel.anps.len(), 2);
        let st = &face_sentiment_stats(&sel, &scores, &pol, &images, &dets, PortraitOptions::default())[0];

        // scores 1, 2/3, 1/2, 0, 1/2 against the polarities above
        let x = [1.0, 2.0 / 3.0, 0.5, 0.0, 0.5];
        let y = [0.8, 0.5, 0.0, -0.5, 0.25];
        let (mx, my) = (x.iter().sum::<f64>() / 5.0, y.iter().sum::<f64>() / 5.0);
        let cov: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let vx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
        let vy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
        assert!((st.rho_face_sent.unwrap() - cov / (vx * vy).sqrt()).abs() < 1e-9);

        let faces = (3.0 + 2.0 * 0.8 + 3.0 + 2.0 * 0.5) / 2.0;
        let all = (5.0 * 3.0 + 2.0 * (0.8 + 0.5 + 0.0 - 0.5 + 0.25)) / 5.0;
        assert!((st.sent_faces.unwrap() - faces).abs() < 1e-9);
        assert!((st.sent_all.unwrap() - all).abs() < 1e-9);
        assert!((st.diff_pct.unwrap() - 100.0 * (faces - all) / all).abs() < 1e-9);
        // face images a, b, c: three 10x10 boxes in 100x100 images
        assert!((st.face_size_pct.unwrap() - 10.0).abs() < 1e-9);
        assert!((st.faces_per_image.unwrap() - 1.5).abs() < 1e-9);

        let alt = PortraitOptions {
            face_size: FaceSizeMode::Area,
            faces_per_image: FacesPerImageMode::AllImages,
            scale: SentimentScale::Polarity,
        };
        let st = &face_sentiment_stats(&sel, &scores, &pol, &images, &dets, alt)[0];
        assert!((st.face_size_pct.unwrap() - 1.0).abs() < 1e-9);
        assert!((st.faces_per_image.unwrap() - 1.0).abs() < 1e-9);
        assert!((st.sent_faces.unwrap() - 0.65).abs() < 1e-12);
    }

    #[test]
    fn equal_sentiment_means_no_difference() {
        assert_eq!(relative_difference_pct(3.5, 3.5), Some(0.0));
        assert_eq!(relative_difference_pct(1.0, 0.0), None);
    }

    fn clustering(rows: &[(&str, &str, usize)]) -> Clustering {
        Clustering::from_assignments(Scheme::OneStage, 0, rows.iter().map(|(l, s, c)| (key(l, s), *c)))
    }

    #[test]
    fn monolingual_clusters_give_no_correlation() {
        let c = clustering(&[("en", "a x", 0), ("en", "b x", 0), ("fr", "c x", 1), ("fr", "d x", 1)]);
        let pol = c
            .keys
            .iter()
            .enumerate()
            .map(|(i, k)| (k.clone(), i as f64 / 4.0))
            .collect();
        let r = multilinguality_correlations(&c, &pol, &BTreeMap::new());
        assert_eq!(r.rho_languages_sentiment, None);
        assert_eq!(r.rho_languages_face_size, None);
        assert_eq!(r.clusters, 2);
    }

    #[test]
    fn profiles_sum_to_one() {
        let c = clustering(&[("en", "a x", 0), ("en", "b x", 1), ("en", "c x", 1), ("fr", "d x", 2)]);
        let p = language_profiles(&c);
        assert_eq!(p[0].vector, [1.0 / 3.0, 2.0 / 3.0, 0.0]);
        assert_eq!(p[1].vector, [0.0, 0.0, 1.0]);
    }

    #[test]
    fn grouping_is_scale_invariant() {
        let base = [
            ("en", [0.5, 0.4, 0.1]),
            ("es", [0.45, 0.45, 0.1]),
            ("it", [0.5, 0.5, 0.0]),
            ("ru", [0.1, 0.1, 0.8]),
            ("zh", [0.0, 0.2, 0.8]),
        ];
        let profiles: Vec<LanguageProfile> = base
            .iter()
            .map(|(l, v)| LanguageProfile {
                language: lang(l),
                vector: v.to_vec(),
            })
            .collect();
        let scaled: Vec<LanguageProfile> = profiles
            .iter()
            .enumerate()
            .map(|(i, p)| LanguageProfile {
                language: p.language.clone(),
                vector: p.vector.iter().map(|x| x * (1.0 + i as f64)).collect(),
            })
            .collect();
        let a = cluster_languages(&profiles, 2..=4, 8).unwrap();
        assert_eq!(a, cluster_languages(&scaled, 2..=4, 8).unwrap());
        assert_eq!(
            a[&2],
            [vec![lang("en"), lang("es"), lang("it")], vec![lang("ru"), lang("zh")]]
        );
        assert_eq!(cluster_languages(&profiles, 2..=6, 8).unwrap_err().code(), "INVALID_K");
    }
}
