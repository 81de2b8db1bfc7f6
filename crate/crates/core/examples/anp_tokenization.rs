//! Joins multi-word concepts into single corpus tokens, the preprocessing
//! step for learning phrase embeddings.
//!
//! ```bash
//! cargo run --example anp_tokenization
//! ```

use visual_concepts::embed::{anp_tokenize_corpus, AnpMatcher};

fn main() {
    let anps = ["happy dog", "happy dog park", "old city", "dog park"];
    let matcher = AnpMatcher::new(anps);

    for line in [
        "a happy dog park in the old city",
        "Happy  Dog running, old city lights",
        "happy happy dog park dog park",
    ] {
        let (out, matched, _) = matcher.rewrite_line(line);
        println!("{line:?}\n  -> {out:?} {matched:?}");
    }

    let corpus = ["the old city at night", "a happy dog", "nothing here"];
    let (rewritten, stats) = anp_tokenize_corpus(&corpus, &anps);
    println!("\n{} replacements over {} lines", stats.replacements, stats.lines);
    for line in rewritten {
        println!("  {line}");
    }
}
