//! Clusters concept vectors three ways and compares semantic and sentiment
//! consistency, then counts how often languages share clusters.
//!
//! ```bash
//! cargo run --example clustering_consistency
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use visual_concepts::clustering::{
    cluster_one_stage, cluster_two_stage, combined_consistency, connectivity_matrix, semantic_consistency,
    sentiment_consistency, Clustering, ConnectivityMode, StageOneWord, TwoStageOptions,
};
use visual_concepts::embed::{compose_all, CompositionMode};
use visual_concepts::ingest::{
    load_dictionary, load_embeddings_text, load_image_tags, load_lexicons, EmbeddingMeta, IngestOptions,
};
use visual_concepts::model::{ConceptKey, Language, PolaritySource};
use visual_concepts::pivot::{apply_translations, extract_representatives, TranslationClient};
use visual_concepts::relatedness::{build_cooccurrence, DEFAULT_SAMPLE_CAP};

const K: usize = 24;
const SEED: u64 = 7;

fn main() -> visual_concepts::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic");
    let opts = IngestOptions::default();
    let mut lexicons = load_lexicons(&dir.join("lexicon.tsv"), opts)?.value;
    let dictionary = load_dictionary(&dir.join("dictionary.tsv"), opts)?.value;
    apply_translations(
        &mut lexicons,
        &TranslationClient::dictionary(Language::english(), dictionary),
    );
    let words = load_embeddings_text(&dir.join("embeddings.txt"), EmbeddingMeta::default())?;
    let tags = load_image_tags(&dir.join("image_tags.tsv"), opts)?.value;

    let concepts: Vec<_> = lexicons.values().flat_map(|l| l.concepts()).collect();
    let composed = compose_all(concepts.iter().copied(), &words, CompositionMode::Sum);
    let vectors: BTreeMap<ConceptKey, Vec<f64>> = composed.iter().map(|v| (v.key.clone(), v.vector.clone())).collect();
    let pivots: BTreeMap<ConceptKey, String> = composed.iter().map(|v| (v.key.clone(), v.pivot.clone())).collect();
    let polarities: BTreeMap<ConceptKey, f64> = concepts
        .iter()
        .filter_map(|c| {
            let p = c
                .polarity(PolaritySource::Crowdsourced)
                .or_else(|| c.polarity(PolaritySource::Automatic))?;
            Some((c.key(), p))
        })
        .collect();
    let representatives: BTreeMap<_, _> = concepts
        .iter()
        .filter_map(|c| {
            let r = extract_representatives(&c.pivot_key()?, c.pivot_pos.as_deref()).ok()?;
            Some((c.key(), r))
        })
        .collect();

    let surfaces: BTreeSet<&str> = pivots.values().map(String::as_str).collect();
    let (cooc, _) = build_cooccurrence(&tags, surfaces, DEFAULT_SAMPLE_CAP);

    let mut runs: Vec<(&str, Clustering)> = vec![("one stage", cluster_one_stage(&vectors, K, SEED)?)];
    for (name, word) in [
        ("noun first", StageOneWord::Noun),
        ("adjective first", StageOneWord::Adjective),
    ] {
        let opts = TwoStageOptions {
            word,
            k_total: K,
            groups: Some(4),
            seed: SEED,
        };
        runs.push((
            name,
            cluster_two_stage(&vectors, &representatives, &words, &opts)?.clustering,
        ));
    }

    println!("{:<16} {:>7} {:>7} {:>7}", "scheme", "sem_C", "sen_C", "mu");
    for (name, clustering) in &runs {
        let sem = semantic_consistency(clustering, &pivots, &cooc)?;
        let sen = sentiment_consistency(clustering, &polarities)?;
        println!(
            "{name:<16} {:>7.3} {:>7.3} {:>7.3}",
            sem.sem_c,
            sen,
            combined_consistency(sem.sem_c, sen)
        );
    }

    let m = connectivity_matrix(&runs[0].1, ConnectivityMode::Pairs);
    println!("\nco-clustered pairs (one stage)");
    for (a, row) in m.languages.iter().zip(&m.matrix) {
        let cells: Vec<String> = row.iter().map(|n| format!("{n:>5}")).collect();
        println!("  {a} {}", cells.join(""));
    }
    Ok(())
}
