//! Cross-language co-clustering counts, for chord-diagram style plots.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Clustering;
use crate::model::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectivityMode {
    /// Co-clustered concept pairs: `n_a * n_b` across languages, `C(n_a, 2)`
    /// within one.
    #[default]
    Pairs,
    /// Concepts that share a cluster with the other language: `n_a + n_b`
    /// when both are present, `n_a` on the diagonal when `n_a >= 2`.
    Concepts,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConnectivityMatrix {
    pub languages: Vec<Language>,
    pub matrix: Vec<Vec<u64>>,
}

impl ConnectivityMatrix {
    pub fn get(&self, a: &Language, b: &Language) -> Option<u64> {
        let i = self.languages.binary_search(a).ok()?;
        let j = self.languages.binary_search(b).ok()?;
        Some(self.matrix[i][j])
    }

    /// Sum over the upper triangle, diagonal included.
    pub fn upper_total(&self) -> u64 {
        let n = self.languages.len();
        (0..n)
            .flat_map(|i| (i..n).map(move |j| (i, j)))
            .map(|(i, j)| self.matrix[i][j])
            .sum()
    }
}

/// Languages are taken from the concept keys and listed in code order.
pub fn connectivity_matrix(clustering: &Clustering, mode: ConnectivityMode) -> ConnectivityMatrix {
    let languages: Vec<Language> = {
        let mut l: Vec<Language> = clustering.keys.iter().map(|k| k.language.clone()).collect();
        l.sort();
        l.dedup();
        l
    };
    let n = languages.len();
    let mut matrix = vec![vec![0u64; n]; n];
    for members in clustering.clusters() {
        let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
        for i in members {
            let l = languages.binary_search(&clustering.keys[i].language).unwrap();
            *counts.entry(l).or_default() += 1;
        }
        let present: Vec<(usize, u64)> = counts.into_iter().collect();
        for (x, &(a, na)) in present.iter().enumerate() {
            matrix[a][a] += match mode {
                ConnectivityMode::Pairs => na * (na - 1) / 2,
                ConnectivityMode::Concepts if na >= 2 => na,
                ConnectivityMode::Concepts => 0,
            };
            for &(b, nb) in &present[x + 1..] {
                let v = match mode {
                    ConnectivityMode::Pairs => na * nb,
                    ConnectivityMode::Concepts => na + nb,
                };
                matrix[a][b] += v;
                matrix[b][a] += v;
            }
        }
    }
    ConnectivityMatrix { languages, matrix }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::Scheme;
    use crate::model::ConceptKey;

    fn key(l: &str, s: &str) -> ConceptKey {
        ConceptKey::new(Language::parse(l).unwrap(), s)
    }

    #[test]
    fn two_french_one_spanish() {
        let c = Clustering::from_assignments(
            Scheme::OneStage,
            0,
            [(key("fr", "a x"), 0), (key("fr", "b x"), 0), (key("es", "c x"), 0)],
        );
        let m = connectivity_matrix(&c, ConnectivityMode::Pairs);
        let (fr, es) = (Language::parse("fr").unwrap(), Language::parse("es").unwrap());
        assert_eq!(m.get(&fr, &es), Some(2));
        assert_eq!(m.get(&es, &fr), Some(2));
        assert_eq!(m.get(&fr, &fr), Some(1));
        assert_eq!(m.get(&es, &es), Some(0));
        assert_eq!(m.upper_total(), 3);

        let m = connectivity_matrix(&c, ConnectivityMode::Concepts);
        assert_eq!(m.get(&fr, &es), Some(3));
        assert_eq!(m.get(&fr, &fr), Some(2));
    }

    #[test]
    fn monolingual_clusters_have_empty_off_diagonal() {
        let c = Clustering::from_assignments(
            Scheme::OneStage,
            0,
            [
                (key("fr", "a x"), 0),
                (key("fr", "b x"), 0),
                (key("es", "c x"), 1),
                (key("es", "d x"), 1),
            ],
        );
        let m = connectivity_matrix(&c, ConnectivityMode::Pairs);
        assert_eq!(m.matrix, [[1, 0], [0, 1]]);
    }
}
