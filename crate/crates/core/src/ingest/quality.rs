//! Annotation quality statistics.

use std::collections::BTreeMap;

use serde::Serialize;

use super::records::AnnotationSet;
use crate::error::Result;
use crate::model::{ConceptKey, Language};
use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConceptAgreement {
    pub modal_rating: u8,
    pub agreement: f64,
    pub records: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementReport {
    pub overall: Option<f64>,
    pub per_language: BTreeMap<Language, f64>,
    /// Concepts with fewer than two ratings; left out of every mean.
    pub excluded: Vec<String>,
    /// Concepts rated by fewer than five workers (reported, not excluded).
    pub below_five_workers: usize,
}

/// Fraction of ratings equal to the modal rating. Ties between modes go to
/// the rating closest to the mean, then to the lower rating; the fraction
/// is the same either way.
pub fn concept_agreement(ratings: &[u8]) -> Option<ConceptAgreement> {
    if ratings.is_empty() {
        return None;
    }
    let mut counts = [0usize; 6];
    for &r in ratings {
        counts[r as usize] += 1;
    }
    let mean = ratings.iter().map(|&r| r as f64).sum::<f64>() / ratings.len() as f64;
    let top = *counts.iter().max().unwrap();
    let modal = (1..=5u8)
        .filter(|&r| counts[r as usize] == top)
        .min_by(|&a, &b| {
            let da = (a as f64 - mean).abs();
            let db = (b as f64 - mean).abs();
            da.partial_cmp(&db).unwrap().then(a.cmp(&b))
        })
        .unwrap();
    Some(ConceptAgreement {
        modal_rating: modal,
        agreement: top as f64 / ratings.len() as f64,
        records: ratings.len(),
    })
}

/// Per-language mean of concept agreement, and the mean over languages.
pub fn annotator_agreement(annotations: &AnnotationSet) -> AgreementReport {
    let mut by_language: BTreeMap<Language, Vec<f64>> = BTreeMap::new();
    let mut excluded = Vec::new();
    let mut below_five = 0;
    for (key, records) in &annotations.by_concept {
        if records.len() < 5 {
            below_five += 1;
        }
        if records.len() < 2 {
            excluded.push(key.to_string());
            continue;
        }
        let ratings: Vec<u8> = records.iter().map(|r| r.rating).collect();
        let a = concept_agreement(&ratings).unwrap();
        by_language.entry(key.language.clone()).or_default().push(a.agreement);
    }
    let per_language: BTreeMap<Language, f64> = by_language
        .into_iter()
        .map(|(l, v)| (l, stats::mean(&v).unwrap()))
        .collect();
    let language_means: Vec<f64> = per_language.values().copied().collect();
    AgreementReport {
        overall: stats::mean(&language_means),
        per_language,
        excluded,
        below_five_workers: below_five,
    }
}

/// Pearson correlation between two aligned polarity lists.
pub fn sentiment_correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    stats::pearson(a, b)
}

/// Pairs the polarities of concepts present in both maps, in key order.
pub fn aligned_polarities(a: &BTreeMap<ConceptKey, f64>, b: &BTreeMap<ConceptKey, f64>) -> (Vec<f64>, Vec<f64>) {
    a.iter().filter_map(|(k, &x)| b.get(k).map(|&y| (x, y))).unzip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AnnotationRecord;
    use proptest::prelude::*;

    fn set(rows: &[(&str, &str, u8)]) -> AnnotationSet {
        AnnotationSet::from_records(rows.iter().enumerate().map(|(i, (l, s, r))| AnnotationRecord {
            concept: ConceptKey::new(Language::parse(l).unwrap(), s),
            worker_id: format!("w{i}"),
            rating: *r,
        }))
    }

    #[test]
    fn identical_ratings_agree_fully() {
        assert_eq!(concept_agreement(&[4; 5]).unwrap().agreement, 1.0);
    }

    #[test]
    fn three_of_five_majority() {
        let a = concept_agreement(&[4, 4, 4, 2, 1]).unwrap();
        assert_eq!(a.agreement, 0.6);
        assert_eq!(a.modal_rating, 4);
    }

    #[test]
    fn tie_goes_to_rating_nearest_mean() {
        // modes 2 and 5; the mean 3.6 is nearer to 5 (1.4) than to 2 (1.6)
        let a = concept_agreement(&[2, 2, 5, 5, 4]).unwrap();
        assert_eq!(a.modal_rating, 5);
        assert_eq!(a.agreement, 0.4);
    }

    #[test]
    fn language_and_overall_means() {
        let s = set(&[
            ("es", "a b", 4),
            ("es", "a b", 4),
            ("es", "c d", 1),
            ("es", "c d", 5),
            ("fr", "e f", 3),
            ("fr", "e f", 3),
            ("fr", "g h", 2),
        ]);
        let r = annotator_agreement(&s);
        assert_eq!(r.per_language[&Language::parse("es").unwrap()], 0.75);
        assert_eq!(r.per_language[&Language::parse("fr").unwrap()], 1.0);
        assert_eq!(r.overall, Some(0.875));
        assert_eq!(r.excluded, ["fr:g h"]);
    }

    #[test]
    fn correlation_on_hand_computed_fixture() {
        // 20 values; oracle evaluated term by term with the textbook formula.
        let a: Vec<f64> = (0..20).map(|i| ((i * 7) % 11) as f64 / 10.0 - 0.5).collect();
        let b: Vec<f64> = (0..20).map(|i| ((i * 3) % 13) as f64 / 12.0 - 0.4).collect();
        let n = 20.0;
        let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
        let sab: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        let saa: f64 = a.iter().map(|x| x * x).sum();
        let sbb: f64 = b.iter().map(|x| x * x).sum();
        let oracle = (n * sab - sa * sb) / ((n * saa - sa * sa).sqrt() * (n * sbb - sb * sb).sqrt());
        let r = sentiment_correlation(&a, &b).unwrap();
        assert!((r - oracle).abs() < 1e-12, "{r} vs {oracle}");
    }

    #[test]
    fn constant_series_is_an_error() {
        let err = sentiment_correlation(&[0.5; 4], &[0.1, 0.2, 0.3, 0.4]).unwrap_err();
        assert_eq!(err.code(), "CONSTANT_SERIES");
    }

    proptest! {
        #[test]
        fn agreement_in_unit_interval(ratings in proptest::collection::vec(1u8..=5, 1..12)) {
            let a = concept_agreement(&ratings).unwrap();
            prop_assert!(a.agreement > 0.0 && a.agreement <= 1.0);
            let all_same = ratings.iter().all(|&r| r == ratings[0]);
            prop_assert_eq!(a.agreement == 1.0, all_same);
        }

        #[test]
        fn correlation_affine_invariant(
            pts in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3..30),
            alpha in 0.1f64..10.0,
            beta in -5.0f64..5.0,
        ) {
            let (a, b): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            if let Ok(r) = sentiment_correlation(&a, &b) {
                let bt: Vec<f64> = b.iter().map(|v| alpha * v + beta).collect();
                let rt = sentiment_correlation(&a, &bt).unwrap();
                prop_assert!((r - rt).abs() < 1e-12, "{} vs {}", r, rt);
            }
        }
    }
}
