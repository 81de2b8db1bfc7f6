//! Multilingual concept clustering and the scores used to compare
//! clusterings.

mod allocation;
mod connectivity;
mod consistency;
mod kmeans;

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use log::info;
use serde::{Deserialize, Serialize};

pub use allocation::allocate;
pub use connectivity::{connectivity_matrix, ConnectivityMatrix, ConnectivityMode};
pub use consistency::{
    combined_consistency, semantic_consistency, sentiment_consistency, ConsistencyReport, SemanticConsistency,
};
pub use kmeans::{kmeans, KMeansOptions, KMeansResult, Metric, MAX_ITERATIONS};

use crate::error::{Error, Result};
use crate::ingest::EmbeddingTable;
use crate::model::ConceptKey;
use crate::pivot::Representatives;
use crate::seeding::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    OneStage,
    TwoStageNoun,
    TwoStageAdj,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::OneStage => "one_stage",
            Scheme::TwoStageNoun => "two_stage_noun",
            Scheme::TwoStageAdj => "two_stage_adj",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one_stage" => Ok(Scheme::OneStage),
            "two_stage_noun" => Ok(Scheme::TwoStageNoun),
            "two_stage_adj" => Ok(Scheme::TwoStageAdj),
            _ => Err(Error::Config(format!("unknown clustering scheme {s:?}"))),
        }
    }
}

/// Concepts in key order, each with a cluster id in `0..cluster_count`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clustering {
    pub k: usize,
    pub scheme: Scheme,
    pub seed: u64,
    pub keys: Vec<ConceptKey>,
    pub assignments: Vec<usize>,
    pub inertia: f64,
}

impl Clustering {
    /// Builds a clustering from explicit assignments; ids are compacted to
    /// `0..` in order of first appearance.
    pub fn from_assignments(scheme: Scheme, seed: u64, pairs: impl IntoIterator<Item = (ConceptKey, usize)>) -> Self {
        let sorted: BTreeMap<ConceptKey, usize> = pairs.into_iter().collect();
        let mut remap = BTreeMap::new();
        let (keys, assignments): (Vec<_>, Vec<_>) = sorted
            .into_iter()
            .map(|(key, c)| {
                let next = remap.len();
                (key, *remap.entry(c).or_insert(next))
            })
            .unzip();
        Clustering {
            k: remap.len(),
            scheme,
            seed,
            keys,
            assignments,
            inertia: f64::NAN,
        }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn cluster_count(&self) -> usize {
        self.assignments.iter().max().map_or(0, |m| m + 1)
    }

    /// Member indices (into `keys`) per cluster id.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.cluster_count()];
        for (i, &c) in self.assignments.iter().enumerate() {
            out[c].push(i);
        }
        out
    }

    pub fn cluster_of(&self, key: &ConceptKey) -> Option<usize> {
        self.keys.binary_search(key).ok().map(|i| self.assignments[i])
    }

    /// Writes `concept_key,cluster_id` rows, optionally after a `#` comment.
    pub fn write_csv(&self, path: &Path, header: Option<&str>) -> Result<()> {
        let io = |e| Error::io(path, e);
        let mut w = BufWriter::new(File::create(path).map_err(io)?);
        if let Some(h) = header {
            writeln!(w, "# {h}").map_err(io)?;
        }
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["concept_key", "cluster_id"])?;
        for (key, c) in self.keys.iter().zip(&self.assignments) {
            csv.write_record([key.to_string(), c.to_string()])?;
        }
        csv.flush().map_err(io)
    }

    pub fn read_csv(path: &Path, scheme: Scheme, seed: u64) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut pairs = Vec::new();
        for (row, rec) in reader.records().enumerate() {
            let rec = rec?;
            let bad = |m: &str| Error::Row {
                row: row + 2,
                message: m.to_string(),
            };
            let key: ConceptKey = rec.get(0).ok_or_else(|| bad("missing key"))?.parse()?;
            let c: usize = rec
                .get(1)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| bad("bad cluster id"))?;
            pairs.push((key, c));
        }
        let mut out = Clustering::from_assignments(scheme, seed, pairs.iter().cloned());
        // keep the stored ids rather than the compacted ones
        let stored: BTreeMap<ConceptKey, usize> = pairs.into_iter().collect();
        out.assignments = out.keys.iter().map(|k| stored[k]).collect();
        out.k = out.cluster_count();
        Ok(out)
    }
}

/// k-means directly over all concept vectors.
pub fn cluster_one_stage(vectors: &BTreeMap<ConceptKey, Vec<f64>>, k: usize, seed: u64) -> Result<Clustering> {
    let points: Vec<Vec<f64>> = vectors.values().cloned().collect();
    let r = kmeans(&points, &KMeansOptions::new(k, seed))?;
    info!(
        "one-stage k-means: k={k}, {} iterations, inertia {}",
        r.iterations, r.inertia
    );
    Ok(Clustering {
        k,
        scheme: Scheme::OneStage,
        seed,
        keys: vectors.keys().cloned().collect(),
        assignments: r.assignments,
        inertia: r.inertia,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageOneWord {
    Noun,
    Adjective,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoStageOptions {
    pub word: StageOneWord,
    pub k_total: usize,
    /// Stage-one group count; defaults to `max(1, k_total / 10)`, capped at
    /// the number of distinct representative words.
    pub groups: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub size: usize,
    pub k: usize,
    /// None for the residual group of concepts without a usable word.
    pub words: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoStageClustering {
    pub clustering: Clustering,
    pub groups: Vec<GroupSummary>,
}

/// Groups concepts by clustering their representative words, then splits
/// the budget over groups and clusters concept vectors within each group.
pub fn cluster_two_stage(
    vectors: &BTreeMap<ConceptKey, Vec<f64>>,
    representatives: &BTreeMap<ConceptKey, Representatives>,
    words: &EmbeddingTable,
    opts: &TwoStageOptions,
) -> Result<TwoStageClustering> {
    let word_of = |key: &ConceptKey| -> Option<String> {
        let r = representatives.get(key)?;
        let w = match opts.word {
            StageOneWord::Noun => Some(r.noun.clone()),
            StageOneWord::Adjective => r.adjective.clone(),
        }?;
        words.contains(&w).then_some(w)
    };
    let concept_words: Vec<Option<String>> = vectors.keys().map(word_of).collect();
    let unique: BTreeSet<&String> = concept_words.iter().flatten().collect();
    if unique.is_empty() {
        return Err(Error::NoRepresentatives);
    }
    let unique: Vec<&String> = unique.into_iter().collect();
    let g = opts.groups.unwrap_or((opts.k_total / 10).max(1)).clamp(1, unique.len());
    let word_points: Vec<Vec<f64>> = unique.iter().map(|w| words.get(w).unwrap().to_vec()).collect();
    let stage_one = kmeans(
        &word_points,
        &KMeansOptions::new(g, derive_seed(opts.seed, "stage-one")),
    )?;
    let group_of_word: BTreeMap<&String, usize> = unique.iter().copied().zip(stage_one.assignments).collect();

    let residual = g;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); g + 1];
    for (i, w) in concept_words.iter().enumerate() {
        let gi = w.as_ref().map_or(residual, |w| group_of_word[w]);
        members[gi].push(i);
    }
    let mut group_words: Vec<Vec<String>> = vec![Vec::new(); g];
    for (w, &gi) in &group_of_word {
        group_words[gi].push((*w).clone());
    }

    let sizes: Vec<usize> = members.iter().map(Vec::len).collect();
    let ks = allocate(&sizes, opts.k_total)?;
    let points: Vec<&Vec<f64>> = vectors.values().collect();
    let mut assignments = vec![0usize; points.len()];
    let mut offset = 0;
    let mut inertia = 0.0;
    let mut groups = Vec::new();
    for (gi, m) in members.iter().enumerate() {
        if m.is_empty() {
            continue;
        }
        let sub: Vec<Vec<f64>> = m.iter().map(|&i| points[i].clone()).collect();
        let r = kmeans(
            &sub,
            &KMeansOptions::new(ks[gi], derive_seed(opts.seed, &format!("stage-two-{gi}"))),
        )?;
        for (&i, &a) in m.iter().zip(&r.assignments) {
            assignments[i] = offset + a;
        }
        offset += ks[gi];
        inertia += r.inertia;
        groups.push(GroupSummary {
            size: m.len(),
            k: ks[gi],
            words: (gi < g).then(|| group_words[gi].clone()),
        });
    }
    info!("two-stage k-means: {} groups, k_total={}", groups.len(), opts.k_total);
    let scheme = match opts.word {
        StageOneWord::Noun => Scheme::TwoStageNoun,
        StageOneWord::Adjective => Scheme::TwoStageAdj,
    };
    Ok(TwoStageClustering {
        clustering: Clustering {
            k: opts.k_total,
            scheme,
            seed: opts.seed,
            keys: vectors.keys().cloned().collect(),
            assignments,
            inertia,
        },
        groups,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::EmbeddingMeta;
    use crate::model::Language;

    fn key(s: &str) -> ConceptKey {
        ConceptKey::new(Language::english(), s)
    }

    fn vectors() -> BTreeMap<ConceptKey, Vec<f64>> {
        [
            ("happy dog", [1.0, 0.1, 0.0]),
            ("sad dog", [0.9, -0.1, 0.1]),
            ("old dog", [1.0, 0.0, 0.2]),
            ("happy cat", [0.0, 1.0, 0.1]),
            ("angry cat", [0.1, 0.9, 0.0]),
            ("blue sky", [0.0, 0.1, 1.0]),
        ]
        .into_iter()
        .map(|(s, v)| (key(s), v.to_vec()))
        .collect()
    }

    fn reps() -> BTreeMap<ConceptKey, Representatives> {
        vectors()
            .keys()
            .map(|k| {
                let mut t = k.surface.split(' ');
                let adjective = t.next().map(str::to_string);
                let noun = t.next().unwrap().to_string();
                (
                    k.clone(),
                    Representatives {
                        adjective,
                        noun,
                        heuristic: false,
                    },
                )
            })
            .collect()
    }

    fn words() -> EmbeddingTable {
        let mut t = EmbeddingTable::new(2, EmbeddingMeta::default()).unwrap();
        t.insert("dog", &[1.0, 0.0]).unwrap();
        t.insert("cat", &[0.9, 0.2]).unwrap();
        t.insert("sky", &[0.0, 1.0]).unwrap();
        t.insert("happy", &[1.0, 1.0]).unwrap();
        t
    }

    #[test]
    fn one_stage_repeats_exactly() {
        let a = cluster_one_stage(&vectors(), 3, 11).unwrap();
        let b = cluster_one_stage(&vectors(), 3, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.cluster_count(), 3);
        assert_eq!(a.cluster_of(&key("happy dog")), a.cluster_of(&key("old dog")));
    }

    #[test]
    fn two_stage_budget_and_residual() {
        let opts = TwoStageOptions {
            word: StageOneWord::Adjective,
            k_total: 3,
            groups: Some(1),
            seed: 2,
        };
        let r = cluster_two_stage(&vectors(), &reps(), &words(), &opts).unwrap();
        // only "happy" has a vector; the four other concepts are residual
        assert_eq!(r.groups.len(), 2);
        assert_eq!((r.groups[0].size, r.groups[1].size), (2, 4));
        assert_eq!(r.groups.iter().map(|g| g.k).sum::<usize>(), 3);
        assert!(r.groups[1].words.is_none());
        let c = &r.clustering;
        assert_eq!(c.cluster_of(&key("happy dog")), c.cluster_of(&key("happy cat")));
        assert_eq!(c.cluster_count(), 3);
    }

    #[test]
    fn two_stage_noun_groups() {
        let opts = TwoStageOptions {
            word: StageOneWord::Noun,
            k_total: 4,
            groups: Some(2),
            seed: 7,
        };
        let r = cluster_two_stage(&vectors(), &reps(), &words(), &opts).unwrap();
        let sizes: Vec<usize> = r.groups.iter().map(|g| g.size).collect();
        assert_eq!(sizes.iter().sum::<usize>(), 6);
        assert_eq!(r.clustering.cluster_count(), 4);
        let again = cluster_two_stage(&vectors(), &reps(), &words(), &opts).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn no_representatives() {
        let opts = TwoStageOptions {
            word: StageOneWord::Noun,
            k_total: 2,
            groups: None,
            seed: 0,
        };
        let err = cluster_two_stage(&vectors(), &BTreeMap::new(), &words(), &opts).unwrap_err();
        assert_eq!(err.code(), "NO_REPRESENTATIVES");
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let c = cluster_one_stage(&vectors(), 2, 4).unwrap();
        let p = dir.path().join("c.csv");
        c.write_csv(&p, Some("seed=4")).unwrap();
        let back = Clustering::read_csv(&p, Scheme::OneStage, 4).unwrap();
        assert_eq!(back.keys, c.keys);
        assert_eq!(back.assignments, c.assignments);
    }
}
