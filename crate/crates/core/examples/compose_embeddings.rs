//! Concept vectors by summing word vectors versus learned phrase vectors,
//! with coverage and nearest neighbours in the pivot space.
//!
//! ```bash
//! cargo run --example compose_embeddings
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use visual_concepts::embed::{compose_all, coverage_by_language, CompositionMode};
use visual_concepts::ingest::{
    load_dictionary, load_embeddings_text, load_lexicons, EmbeddingMeta, IngestOptions, Tokenization,
};
use visual_concepts::model::{Language, Lexicon};
use visual_concepts::pivot::{apply_translations, TranslationClient};
use visual_concepts::relatedness::embedding_distance;

fn main() -> visual_concepts::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic");
    let opts = IngestOptions::default();
    let mut lexicons: BTreeMap<Language, Lexicon> = load_lexicons(&dir.join("lexicon.tsv"), opts)?.value;
    let dictionary = load_dictionary(&dir.join("dictionary.tsv"), opts)?.value;
    apply_translations(
        &mut lexicons,
        &TranslationClient::dictionary(Language::english(), dictionary),
    );

    let words = load_embeddings_text(&dir.join("embeddings.txt"), EmbeddingMeta::default())?;
    let phrases = load_embeddings_text(
        &dir.join("embeddings_anp.txt"),
        EmbeddingMeta {
            window: 5,
            tokenization: Tokenization::WordsPlusAnp,
        },
    )?;
    println!("word table: {} tokens, d={}", words.len(), words.dimension());
    println!("phrase table: {} tokens", phrases.len());

    for (name, table, mode) in [
        ("sum", &words, CompositionMode::Sum),
        ("learned", &phrases, CompositionMode::LearnedWithFallback),
    ] {
        println!("\n{name}");
        for c in coverage_by_language(&lexicons, table, mode)? {
            println!(
                "  {}: {} learned, {} summed, {} fallback, {:.1}% OOV",
                c.language, c.learned, c.composed, c.fallback, c.oov_pct
            );
        }
    }

    let vectors = compose_all(
        lexicons.values().flat_map(|l| l.concepts()),
        &words,
        CompositionMode::Sum,
    );
    let probe = &vectors[0];
    let mut neighbours: Vec<(f64, String)> = vectors[1..]
        .iter()
        .filter_map(|v| Some((embedding_distance(&probe.vector, &v.vector).ok()?, v.key.to_string())))
        .collect();
    neighbours.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    println!("\nnearest to {} ({}):", probe.key, probe.pivot);
    for (d, key) in neighbours.iter().take(5) {
        println!("  {d:.4}  {key}");
    }
    Ok(())
}
