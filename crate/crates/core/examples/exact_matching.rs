//! Translate every concept to English, group identical translations, and
//! count sentiment sign flips against the English concept of the same name.
//!
//! ```bash
//! cargo run --example exact_matching
//! ```

use std::path::PathBuf;

use visual_concepts::ingest::{load_dictionary, load_lexicons, IngestOptions};
use visual_concepts::model::Language;
use visual_concepts::pivot::{
    apply_translations, exact_match_index, sentiment_shift_table, ShiftOptions, TranslationClient,
};

fn main() -> visual_concepts::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic");
    let opts = IngestOptions::default();
    let mut lexicons = load_lexicons(&dir.join("lexicon.tsv"), opts)?.value;
    let dictionary = load_dictionary(&dir.join("dictionary.tsv"), opts)?.value;

    let client = TranslationClient::dictionary(Language::english(), dictionary);
    let report = apply_translations(&mut lexicons, &client);
    println!(
        "translated {} concepts, {} without a dictionary entry",
        report.translated,
        report.untranslated.len()
    );

    let index = exact_match_index(&lexicons, &client);
    let shared: Vec<_> = index.multilingual_groups().collect();
    println!(
        "{} pivot phrases, {} shared by several languages",
        index.groups.len(),
        shared.len()
    );
    for (pivot, members) in shared.iter().take(5) {
        let keys: Vec<String> = members.iter().map(|k| k.to_string()).collect();
        println!("  {pivot:<18} {}", keys.join("  "));
    }

    let english = &lexicons[&Language::english()];
    let rows = sentiment_shift_table(
        &lexicons,
        &index,
        english,
        &[0.0, 0.1, 0.2, 0.3],
        ShiftOptions::default(),
    );
    println!("\nlanguage  t    matched  shifted  % of matched");
    for r in rows {
        println!(
            "{:<9} {:<4} {:>7} {:>8}  {}",
            r.language.as_str(),
            r.threshold,
            r.matched,
            r.shifted,
            r.shifted_pct_of_matched.map_or("NA".into(), |p| format!("{p:.2}"))
        );
    }
    Ok(())
}
