//! Finds concepts whose images mostly show faces and compares their
//! sentiment and face statistics across languages.
//!
//! ```bash
//! cargo run --example portrait_analysis
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use visual_concepts::clustering::cluster_one_stage;
use visual_concepts::embed::{compose_all, CompositionMode};
use visual_concepts::ingest::{
    load_dictionary, load_embeddings_text, load_face_detections, load_image_tags, load_lexicons, EmbeddingMeta,
    IngestOptions,
};
use visual_concepts::model::{ConceptKey, Language, PolaritySource};
use visual_concepts::pivot::{apply_translations, TranslationClient};
use visual_concepts::portrait::{
    cluster_languages, concept_face_sizes, concept_images, face_sentiment_stats, filter_face_anps, language_profiles,
    multilinguality_correlations, portrait_scores, FaceSizeMode, PortraitOptions,
};

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
    let detections = load_face_detections(&dir.join("faces.csv"), opts)?.value;

    let images = concept_images(&tags, &lexicons);
    let scores = portrait_scores(&detections, &images);
    let selection = filter_face_anps(&scores.scores, 0.6, 8)?;
    println!(
        "{} of {} concepts are portraits; languages kept: {:?}",
        selection.anps.len(),
        scores.scores.len(),
        selection.languages.iter().map(Language::as_str).collect::<Vec<_>>()
    );

    let polarities: BTreeMap<ConceptKey, f64> = lexicons
        .values()
        .flat_map(|l| l.concepts())
        .filter_map(|c| {
            let p = c
                .polarity(PolaritySource::Crowdsourced)
                .or_else(|| c.polarity(PolaritySource::Automatic))?;
            Some((c.key(), p))
        })
        .collect();
    let stats = face_sentiment_stats(
        &selection,
        &scores.scores,
        &polarities,
        &images,
        &detections,
        PortraitOptions::default(),
    );
    let na = |v: Option<f64>| v.map_or("NA".to_string(), |x| format!("{x:.2}"));
    println!("\nlang  rho    sent(faces) sent(all)  diff%   size%  faces/img");
    for s in &stats {
        println!(
            "{:<5} {:<6} {:<11} {:<10} {:<7} {:<6} {}",
            s.language.as_str(),
            na(s.rho_face_sent),
            na(s.sent_faces),
            na(s.sent_all),
            na(s.diff_pct),
            na(s.face_size_pct),
            na(s.faces_per_image)
        );
    }

    let words = load_embeddings_text(&dir.join("embeddings.txt"), EmbeddingMeta::default())?;
    let face_concepts = lexicons
        .values()
        .flat_map(|l| l.concepts())
        .filter(|c| selection.anps.contains(&c.key()));
    let vectors: BTreeMap<ConceptKey, Vec<f64>> = compose_all(face_concepts, &words, CompositionMode::Sum)
        .into_iter()
        .map(|v| (v.key, v.vector))
        .collect();
    // Fine enough that clusters differ in how many languages they span.
    let clustering = cluster_one_stage(&vectors, 20.min(vectors.len()), 11)?;
    let sizes = concept_face_sizes(&detections, &images, FaceSizeMode::Linear);
    let m = multilinguality_correlations(&clustering, &polarities, &sizes);
    println!(
        "\nover {} clusters, languages per cluster vs sentiment: {}, vs face size: {}",
        m.clusters,
        na(m.rho_languages_sentiment),
        na(m.rho_languages_face_size)
    );

    for (k, groups) in cluster_languages(&language_profiles(&clustering), 2..=3, 11)? {
        let groups: Vec<String> = groups
            .iter()
            .map(|g| g.iter().map(Language::as_str).collect::<Vec<_>>().join("+"))
            .collect();
        println!("k={k}: {}", groups.join("  "));
    }
    Ok(())
}
