//! Annotator agreement and crowd-vs-automatic sentiment correlation on the
//! bundled fixture.
//!
//! ```bash
//! cargo run --example annotation_quality
//! ```

use std::path::PathBuf;

use visual_concepts::ingest::{
    annotator_agreement, load_annotations, load_lexicons, sentiment_correlation, IngestOptions,
};
use visual_concepts::model::PolaritySource;

fn main() -> visual_concepts::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic");
    let opts = IngestOptions::default();

    let lexicons = load_lexicons(&dir.join("lexicon.tsv"), opts)?;
    println!(
        "lexicon: {} rows read, {} accepted",
        lexicons.report.rows_read, lexicons.report.rows_accepted
    );

    let annotations = load_annotations(&dir.join("annotations.csv"), opts)?;
    let agreement = annotator_agreement(&annotations.value);
    println!(
        "{} ratings over {} concepts",
        annotations.value.len(),
        annotations.value.by_concept.len()
    );
    if let Some(overall) = agreement.overall {
        println!("overall agreement: {:.1}%", overall * 100.0);
    }
    for (language, a) in &agreement.per_language {
        println!("  {language}: {:.1}%", a * 100.0);
    }

    println!("\ncrowd vs automatic polarity");
    for (language, lexicon) in &lexicons.value {
        let (crowd, auto): (Vec<f64>, Vec<f64>) = lexicon
            .concepts()
            .iter()
            .filter_map(|c| {
                Some((
                    c.polarity(PolaritySource::Crowdsourced)?,
                    c.polarity(PolaritySource::Automatic)?,
                ))
            })
            .unzip();
        match sentiment_correlation(&crowd, &auto) {
            Ok(r) => println!("  {language}: r = {r:.3} over {} concepts", crowd.len()),
            Err(e) => println!("  {language}: {e}"),
        }
    }
    Ok(())
}
