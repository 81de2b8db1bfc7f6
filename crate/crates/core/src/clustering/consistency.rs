//! Semantic and sentiment consistency of a clustering (lower is better).

use std::collections::BTreeMap;

use serde::Serialize;

use super::Clustering;
use crate::error::{Error, Result};
use crate::model::ConceptKey;
use crate::relatedness::CoOccurrenceMatrix;
use crate::stats::{self, CompensatedSum};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemanticConsistency {
    /// Mean over multi-concept clusters of the within-cluster distance sum
    /// divided by cluster size.
    pub sem_c: f64,
    /// Same, but each cluster's sum divided by its compared pair count;
    /// clusters with no co-occurring pair contribute zero.
    pub sem_c_pairs: f64,
    pub clusters: usize,
    pub pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub sem_c: f64,
    pub sen_c: f64,
    pub mu: f64,
    /// Number of clusters with at least two concepts.
    pub clusters: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sem_c_pairs: Option<f64>,
}

impl ConsistencyReport {
    pub fn new(semantic: &SemanticConsistency, sen_c: f64, with_pairs_variant: bool) -> Self {
        ConsistencyReport {
            sem_c: semantic.sem_c,
            sen_c,
            mu: combined_consistency(semantic.sem_c, sen_c),
            clusters: semantic.clusters,
            sem_c_pairs: with_pairs_variant.then_some(semantic.sem_c_pairs),
        }
    }
}

fn multi_clusters(clustering: &Clustering) -> Result<Vec<Vec<usize>>> {
    let multi: Vec<Vec<usize>> = clustering.clusters().into_iter().filter(|m| m.len() >= 2).collect();
    if multi.is_empty() {
        return Err(Error::NoMultiClusters);
    }
    Ok(multi)
}

/// Co-occurrence distance averaged per cluster over pairs that co-occur at
/// least once. `pivots` maps each concept to its row surface in `cooc`;
/// concepts without a row take part in no pair.
pub fn semantic_consistency(
    clustering: &Clustering,
    pivots: &BTreeMap<ConceptKey, String>,
    cooc: &CoOccurrenceMatrix,
) -> Result<SemanticConsistency> {
    let multi = multi_clusters(clustering)?;
    let rows: Vec<Option<usize>> = clustering
        .keys
        .iter()
        .map(|k| pivots.get(k).and_then(|p| cooc.index_of(p)))
        .collect();
    let mut by_size = CompensatedSum::new();
    let mut by_pairs = CompensatedSum::new();
    let mut pairs = 0;
    for members in &multi {
        let mut sum = CompensatedSum::new();
        let mut counted = 0usize;
        for (x, &a) in members.iter().enumerate() {
            for &b in &members[x + 1..] {
                let (Some(i), Some(j)) = (rows[a], rows[b]) else {
                    continue;
                };
                if cooc.count(i, j) == 0 {
                    continue;
                }
                sum.add(cooc.distance(i, j)?);
                counted += 1;
            }
        }
        by_size.add(sum.value() / members.len() as f64);
        if counted > 0 {
            by_pairs.add(sum.value() / counted as f64);
        }
        pairs += counted;
    }
    let c = multi.len() as f64;
    Ok(SemanticConsistency {
        sem_c: by_size.value() / c,
        sem_c_pairs: by_pairs.value() / c,
        clusters: multi.len(),
        pairs,
    })
}

/// Mean over multi-concept clusters of the population variance of member
/// polarities.
pub fn sentiment_consistency(clustering: &Clustering, polarities: &BTreeMap<ConceptKey, f64>) -> Result<f64> {
    let multi = multi_clusters(clustering)?;
    let mut total = CompensatedSum::new();
    for members in &multi {
        let values = members
            .iter()
            .map(|&i| {
                let key = &clustering.keys[i];
                polarities
                    .get(key)
                    .copied()
                    .ok_or_else(|| Error::MissingPolarity(key.to_string()))
            })
            .collect::<Result<Vec<f64>>>()?;
        total.add(stats::population_variance(&values).unwrap());
    }
    Ok(total.value() / multi.len() as f64)
}

pub fn combined_consistency(sem_c: f64, sen_c: f64) -> f64 {
    (sem_c + sen_c) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::Scheme;
    use crate::ingest::ImageTagRecord;
    use crate::model::Language;
    use crate::relatedness::build_cooccurrence;

    fn key(s: &str) -> ConceptKey {
        ConceptKey::new(Language::english(), s)
    }

    fn clustering(groups: &[&[&str]]) -> Clustering {
        Clustering::from_assignments(
            Scheme::OneStage,
            0,
            groups
                .iter()
                .enumerate()
                .flat_map(|(c, g)| g.iter().map(move |s| (key(s), c))),
        )
    }

    #[test]
    fn sentiment_single_cluster() {
        let c = clustering(&[&["a x", "b x"]]);
        let p = [(key("a x"), 0.2), (key("b x"), 0.4)].into();
        assert!((sentiment_consistency(&c, &p).unwrap() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn singletons_are_ignored() {
        let c = clustering(&[&["a x", "b x"], &["c x"]]);
        let p = [(key("a x"), 0.5), (key("b x"), 0.5), (key("c x"), -1.0)].into();
        assert_eq!(sentiment_consistency(&c, &p).unwrap(), 0.0);
        let lone = clustering(&[&["a x"], &["b x"]]);
        assert_eq!(
            sentiment_consistency(&lone, &p).unwrap_err().code(),
            "NO_MULTI_CLUSTERS"
        );
    }

    #[test]
    fn missing_polarity() {
        let c = clustering(&[&["a x", "b x"]]);
        let p = [(key("a x"), 0.5)].into();
        assert_eq!(sentiment_consistency(&c, &p).unwrap_err().code(), "MISSING_POLARITY");
    }

    #[test]
    fn semantic_identical_rows_score_zero() {
        // a and b each co-occur only with c, so their rows are identical, but
        // they never co-occur with each other: no pair is counted
        let tags: Vec<ImageTagRecord> = [["a x", "c x"], ["b x", "c x"], ["a x", "b x"]]
            .iter()
            .enumerate()
            .map(|(i, t)| ImageTagRecord {
                image_id: i.to_string(),
                language: Language::english(),
                anp_tags: t.iter().map(|s| s.to_string()).collect(),
            })
            .collect();
        let (m, _) = build_cooccurrence(&tags, ["a x", "b x", "c x"], 1000);
        let pivots: BTreeMap<ConceptKey, String> =
            ["a x", "b x", "c x"].iter().map(|s| (key(s), s.to_string())).collect();
        let c = clustering(&[&["a x", "b x", "c x"]]);
        let s = semantic_consistency(&c, &pivots, &m).unwrap();
        // rows: a=(0,1,1) b=(1,0,1) c=(1,1,0); every pair has distance 1/2
        assert_eq!(s.pairs, 3);
        assert!((s.sem_c - 1.5 / 3.0).abs() < 1e-15);
        assert!((s.sem_c_pairs - 0.5).abs() < 1e-15);
    }

    #[test]
    fn combined() {
        assert_eq!(combined_consistency(0.0, 0.0), 0.0);
        assert_eq!(combined_consistency(1.0, 0.0), 0.5);
        assert_eq!(combined_consistency(0.511, 0.588), (0.511 + 0.588) / 2.0);
    }
}
