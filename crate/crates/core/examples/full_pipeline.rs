//! Runs every stage on the bundled fixture through the same entry point as
//! the command-line tool, then prints the manifest summary.
//!
//! ```bash
//! cargo run --example full_pipeline -- [out_dir]
//! ```

use std::ffi::OsStr;
use std::path::PathBuf;

use clap::Parser;
use visual_concepts::cli::{run, Cli};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic/pipeline.toml");
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("visual-concepts-run"));

    let cli = Cli::parse_from([
        OsStr::new("visual-concepts"),
        OsStr::new("--config"),
        config.as_os_str(),
        OsStr::new("--out"),
        out.as_os_str(),
        OsStr::new("run"),
    ]);
    run(cli)?;

    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json"))?)?;
    println!("config hash {}", manifest["config_hash"].as_str().unwrap_or("?"));
    for a in manifest["artifacts"].as_array().into_iter().flatten() {
        println!(
            "  {:<22} {}",
            a["name"].as_str().unwrap_or(""),
            &a["sha256"].as_str().unwrap_or("")[..16]
        );
    }
    let c = &manifest["reports"]["consistency"];
    println!("sem_C {} sen_C {} mu {}", c["sem_c"], c["sen_c"], c["mu"]);
    Ok(())
}
