//! Writes the synthetic three-language fixture, with its pipeline config
//! and expected shift table, to a directory.
//!
//! ```bash
//! cargo run --example generate_fixture -- /tmp/fixture [seed]
//! ```

use std::path::PathBuf;

use visual_concepts::synth::{synthetic_fixture, FIXTURE_SEED};

fn main() -> visual_concepts::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("visual-concepts-fixture"));
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(FIXTURE_SEED);

    let fixture = synthetic_fixture(seed);
    fixture.write(&dir)?;
    for (name, body) in &fixture.files {
        println!("{:<26} {:>7} bytes", name, body.len());
    }
    println!("written to {}", dir.display());
    Ok(())
}
