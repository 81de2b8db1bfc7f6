//! Visually grounded semantic relatedness: ANP co-occurrence over image
//! tags as ground truth, and mean squared error of embedding distances
//! against it.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::ImageTagRecord;
use crate::model::normalize_surface;
use crate::stats::{self, CompensatedSum};

pub const DEFAULT_SAMPLE_CAP: usize = 1000;

/// Symmetric ANP x ANP co-occurrence counts, stored as sparse rows with a
/// zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CoOccurrenceMatrix {
    concepts: Vec<String>,
    index: HashMap<String, usize>,
    rows: Vec<BTreeMap<usize, u64>>,
    norms: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CoOccurrenceReport {
    pub images: usize,
    pub images_with_pairs: usize,
    pub unknown_tags: usize,
    pub capped_tags: usize,
    pub nonzero_pairs: usize,
}

impl CoOccurrenceMatrix {
    /// Empty matrix over the given pivot surfaces (normalized, deduplicated,
    /// sorted).
    pub fn with_concepts<'a>(surfaces: impl IntoIterator<Item = &'a str>) -> Self {
        let set: BTreeSet<String> = surfaces.into_iter().map(normalize_surface).collect();
        let concepts: Vec<String> = set.into_iter().collect();
        let index = concepts.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let n = concepts.len();
        CoOccurrenceMatrix {
            concepts,
            index,
            rows: vec![BTreeMap::new(); n],
            norms: vec![0.0; n],
        }
    }

    fn add_pair(&mut self, a: usize, b: usize, count: u64) {
        if a == b || count == 0 {
            return;
        }
        *self.rows[a].entry(b).or_default() += count;
        *self.rows[b].entry(a).or_default() += count;
    }

    fn refresh_norms(&mut self) {
        self.norms = self
            .rows
            .iter()
            .map(|r| stats::sum(r.values().map(|&c| (c as f64) * (c as f64))).sqrt())
            .collect();
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn concepts(&self) -> &[String] {
        &self.concepts
    }

    pub fn index_of(&self, surface: &str) -> Option<usize> {
        self.index.get(surface).copied()
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.rows[i].get(&j).copied().unwrap_or(0)
    }

    /// Nonzero entries of row `i`, as (column, count).
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.rows[i].iter().map(|(&j, &c)| (j, c))
    }

    /// Dense copy of row `i`.
    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.len()];
        for (j, c) in self.row(i) {
            v[j] = c as f64;
        }
        v
    }

    /// Number of unordered pairs with a nonzero count.
    pub fn nonzero_pairs(&self) -> usize {
        self.rows.iter().map(BTreeMap::len).sum::<usize>() / 2
    }

    /// Cosine distance between rows `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> Result<f64> {
        let (ni, nj) = (self.norms[i], self.norms[j]);
        if ni == 0.0 || nj == 0.0 {
            return Err(Error::ZeroRow);
        }
        let (small, large) = if self.rows[i].len() <= self.rows[j].len() {
            (&self.rows[i], &self.rows[j])
        } else {
            (&self.rows[j], &self.rows[i])
        };
        let dot = stats::sum(
            small
                .iter()
                .filter_map(|(k, &a)| large.get(k).map(|&b| a as f64 * b as f64)),
        );
        Ok((1.0 - dot / (ni * nj)).clamp(0.0, 1.0))
    }

    /// Writes `i,j,count` triplets for `i < j`, and the index as one surface
    /// per line. A header becomes a leading `# ` comment in both files.
    pub fn write(&self, triplets: &Path, index: &Path, header: Option<&str>) -> Result<()> {
        let io = |p: &Path| {
            let p = p.to_path_buf();
            move |e| Error::io(p.clone(), e)
        };
        let mut w = BufWriter::new(File::create(triplets).map_err(io(triplets))?);
        if let Some(h) = header {
            writeln!(w, "# {h}").map_err(io(triplets))?;
        }
        writeln!(w, "i,j,count").map_err(io(triplets))?;
        for (i, row) in self.rows.iter().enumerate() {
            for (&j, &c) in row.range(i + 1..) {
                writeln!(w, "{i},{j},{c}").map_err(io(triplets))?;
            }
        }
        w.flush().map_err(io(triplets))?;
        let mut w = BufWriter::new(File::create(index).map_err(io(index))?);
        if let Some(h) = header {
            writeln!(w, "# {h}").map_err(io(index))?;
        }
        for c in &self.concepts {
            writeln!(w, "{c}").map_err(io(index))?;
        }
        w.flush().map_err(io(index))
    }

    pub fn read(triplets: &Path, index: &Path) -> Result<Self> {
        let file = File::open(index).map_err(|e| Error::io(index, e))?;
        let lines: Vec<String> = BufReader::new(file)
            .lines()
            .collect::<std::io::Result<_>>()
            .map_err(|e| Error::io(index, e))?;
        let surfaces: Vec<String> = lines.into_iter().filter(|l| !l.starts_with("# ")).collect();
        let mut m = CoOccurrenceMatrix::with_concepts(surfaces.iter().map(String::as_str));
        if m.concepts != surfaces {
            return Err(Error::Config(format!(
                "{} is not a sorted, normalized, duplicate-free index",
                index.display()
            )));
        }
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_path(triplets)
            .map_err(|e| Error::Config(format!("{}: {e}", triplets.display())))?;
        for (row, rec) in reader.records().enumerate() {
            let rec = rec?;
            let parse = |k: usize| -> Result<u64> {
                rec.get(k)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::Row {
                        row: row + 2,
                        message: "bad triplet".into(),
                    })
            };
            let (i, j, c) = (parse(0)? as usize, parse(1)? as usize, parse(2)?);
            if i >= m.len() || j >= m.len() || i >= j {
                return Err(Error::Row {
                    row: row + 2,
                    message: format!("triplet ({i},{j}) outside the upper triangle"),
                });
            }
            m.add_pair(i, j, c);
        }
        m.refresh_norms();
        Ok(m)
    }
}

/// Counts, for every image, each unordered pair of distinct known ANP tags.
/// Each ANP contributes at most `sample_cap` images, taken in record order.
pub fn build_cooccurrence<'a>(
    tags: &[ImageTagRecord],
    concepts: impl IntoIterator<Item = &'a str>,
    sample_cap: usize,
) -> (CoOccurrenceMatrix, CoOccurrenceReport) {
    let mut m = CoOccurrenceMatrix::with_concepts(concepts);
    let mut report = CoOccurrenceReport {
        images: tags.len(),
        ..Default::default()
    };
    let mut used = vec![0usize; m.len()];
    let mut ids = Vec::new();
    for image in tags {
        ids.clear();
        for tag in &image.anp_tags {
            match m.index_of(tag) {
                None => report.unknown_tags += 1,
                Some(i) if used[i] >= sample_cap => report.capped_tags += 1,
                Some(i) => {
                    if !ids.contains(&i) {
                        used[i] += 1;
                        ids.push(i);
                    }
                }
            }
        }
        if ids.len() >= 2 {
            report.images_with_pairs += 1;
        }
        for (x, &a) in ids.iter().enumerate() {
            for &b in &ids[x + 1..] {
                m.add_pair(a, b, 1);
            }
        }
    }
    m.refresh_norms();
    report.nonzero_pairs = m.nonzero_pairs();
    (m, report)
}

/// Cosine distance between two co-occurrence rows, in [0, 1].
pub fn visual_semantic_distance(h_i: &[f64], h_j: &[f64]) -> Result<f64> {
    let (ni, nj) = (stats::norm(h_i), stats::norm(h_j));
    if ni == 0.0 || nj == 0.0 {
        return Err(Error::ZeroRow);
    }
    Ok((1.0 - stats::dot(h_i, h_j) / (ni * nj)).clamp(0.0, 1.0))
}

/// Cosine distance between two embeddings, in [0, 2].
pub fn embedding_distance(c_i: &[f64], c_j: &[f64]) -> Result<f64> {
    if c_i.len() != c_j.len() {
        return Err(Error::Dimension {
            expected: c_i.len(),
            found: c_j.len(),
        });
    }
    let (ni, nj) = (stats::norm(c_i), stats::norm(c_j));
    if ni == 0.0 || nj == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((1.0 - stats::dot(c_i, c_j) / (ni * nj)).clamp(0.0, 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairRule {
    /// Both endpoints must originate from the language.
    #[default]
    BothEndpoints,
    AnyEndpoint,
}

/// Which pairs enter the error.
#[derive(Debug, Clone)]
pub enum Scope<'a> {
    All,
    Language {
        members: &'a BTreeSet<String>,
        rule: PairRule,
    },
}

impl Scope<'_> {
    fn admits(&self, a: &str, b: &str) -> bool {
        match self {
            Scope::All => true,
            Scope::Language { members, rule } => match rule {
                PairRule::BothEndpoints => members.contains(a) && members.contains(b),
                PairRule::AnyEndpoint => members.contains(a) || members.contains(b),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelatednessResult {
    pub mse: f64,
    pub mse_pct: f64,
    /// Pairs compared.
    pub pairs: usize,
    /// `(N^2 - N - zeros) / 2` over the scoped concepts that have vectors.
    pub pairs_closed_form: usize,
    pub skipped_missing_vector: usize,
    pub skipped_zero_vector: usize,
}

/// Mean over upper-triangular pairs `i < j` with `U_ij != 0` of the squared
/// difference between embedding distance and co-occurrence distance.
///
/// `vectors` is keyed by normalized pivot surface.
pub fn relatedness_mse(
    vectors: &BTreeMap<String, Vec<f64>>,
    cooc: &CoOccurrenceMatrix,
    scope: &Scope<'_>,
) -> Result<RelatednessResult> {
    let names = cooc.concepts();
    let per_row: Vec<(CompensatedSum, usize, usize, usize)> = (0..cooc.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = CompensatedSum::new();
            let (mut pairs, mut missing, mut zero) = (0, 0, 0);
            for (j, _) in cooc.rows[i].range(i + 1..) {
                let j = *j;
                if !scope.admits(&names[i], &names[j]) {
                    continue;
                }
                let (Some(ci), Some(cj)) = (vectors.get(&names[i]), vectors.get(&names[j])) else {
                    missing += 1;
                    continue;
                };
                let d_c = match embedding_distance(ci, cj) {
                    Ok(d) => d,
                    Err(_) => {
                        zero += 1;
                        continue;
                    }
                };
                // rows joined by a nonzero count are themselves nonzero
                let d_h = cooc.distance(i, j).expect("nonzero rows");
                let diff = d_c - d_h;
                acc.add(diff * diff);
                pairs += 1;
            }
            (acc, pairs, missing, zero)
        })
        .collect();
    let mut total = CompensatedSum::new();
    let (mut pairs, mut missing, mut zero) = (0, 0, 0);
    for (acc, p, m, z) in &per_row {
        total.merge(acc);
        pairs += p;
        missing += m;
        zero += z;
    }
    if pairs == 0 {
        return Err(Error::NoPairs);
    }
    let mse = total.value() / pairs as f64;
    Ok(RelatednessResult {
        mse,
        mse_pct: 100.0 * mse,
        pairs,
        pairs_closed_form: closed_form_pairs(vectors, cooc, scope),
        skipped_missing_vector: missing,
        skipped_zero_vector: zero,
    })
}

fn closed_form_pairs(vectors: &BTreeMap<String, Vec<f64>>, cooc: &CoOccurrenceMatrix, scope: &Scope<'_>) -> usize {
    let names = cooc.concepts();
    let live: Vec<usize> = (0..cooc.len()).filter(|&i| vectors.contains_key(&names[i])).collect();
    let mut off_diagonal = 0usize;
    let mut zeros = 0usize;
    for (x, &i) in live.iter().enumerate() {
        for &j in &live[x + 1..] {
            if scope.admits(&names[i], &names[j]) {
                off_diagonal += 2;
                if cooc.count(i, j) == 0 {
                    zeros += 2;
                }
            }
        }
    }
    (off_diagonal - zeros) / 2
}
