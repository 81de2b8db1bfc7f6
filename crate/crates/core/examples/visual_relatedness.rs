//! Scores two embedding tables against image-tag co-occurrence: how far
//! embedding distances sit from visual distances, overall and per language.
//!
//! ```bash
//! cargo run --example visual_relatedness
//! ```

use std::collections::BTreeSet;
use std::path::PathBuf;

use visual_concepts::embed::{pivot_vectors, CompositionMode};
use visual_concepts::ingest::{
    load_dictionary, load_embeddings_text, load_image_tags, load_lexicons, EmbeddingMeta, IngestOptions, Tokenization,
};
use visual_concepts::model::Language;
use visual_concepts::pivot::{apply_translations, TranslationClient};
use visual_concepts::relatedness::{build_cooccurrence, relatedness_mse, PairRule, Scope, DEFAULT_SAMPLE_CAP};

fn main() -> visual_concepts::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic");
    let opts = IngestOptions::default();
    let mut lexicons = load_lexicons(&dir.join("lexicon.tsv"), opts)?.value;
    let dictionary = load_dictionary(&dir.join("dictionary.tsv"), opts)?.value;
    apply_translations(
        &mut lexicons,
        &TranslationClient::dictionary(Language::english(), dictionary),
    );
    let tags = load_image_tags(&dir.join("image_tags.tsv"), opts)?.value;

    let pivots: BTreeSet<String> = lexicons
        .values()
        .flat_map(|l| l.concepts())
        .filter_map(|c| c.pivot_key())
        .collect();
    let (cooc, report) = build_cooccurrence(&tags, pivots.iter().map(String::as_str), DEFAULT_SAMPLE_CAP);
    println!(
        "{} images, {} concepts, {} co-occurring pairs",
        report.images,
        cooc.len(),
        report.nonzero_pairs
    );

    let tables = [
        (
            "words, summed",
            "embeddings.txt",
            Tokenization::Words,
            CompositionMode::Sum,
        ),
        (
            "phrases, learned",
            "embeddings_anp.txt",
            Tokenization::WordsPlusAnp,
            CompositionMode::LearnedWithFallback,
        ),
    ];
    for (name, file, tokenization, mode) in tables {
        let table = load_embeddings_text(
            &dir.join(file),
            EmbeddingMeta {
                window: 5,
                tokenization,
            },
        )?;
        let vectors = pivot_vectors(lexicons.values().flat_map(|l| l.concepts()), &table, mode);
        let overall = relatedness_mse(&vectors, &cooc, &Scope::All)?;
        println!("\n{name}: MSE {:.2}% over {} pairs", overall.mse_pct, overall.pairs);

        for (language, lexicon) in &lexicons {
            let members: BTreeSet<String> = lexicon.concepts().iter().filter_map(|c| c.pivot_key()).collect();
            let scope = Scope::Language {
                members: &members,
                rule: PairRule::BothEndpoints,
            };
            let r = relatedness_mse(&vectors, &cooc, &scope)?;
            println!("  {language}: {:.2}% over {} pairs", r.mse_pct, r.pairs);
        }
    }
    Ok(())
}
