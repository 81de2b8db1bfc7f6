//! Command-line front end: each subcommand runs one pipeline stage over the
//! configured inputs and the output directory.

pub mod config;
pub mod stages;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::json;

pub use config::PipelineConfig;
pub use stages::Context;

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "visual-concepts",
    version,
    about = "Multilingual visual sentiment concept analysis"
)]
pub struct Cli {
    /// TOML configuration file; relative paths inside resolve against it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set cluster_k=50`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true, value_parser = parse_key_value)]
    pub overrides: Vec<(String, String)>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load every input and report rejected rows and annotation quality.
    IngestCheck,
    /// Translate concepts to the pivot language and group exact matches.
    Translate,
    /// Sentiment sign shifts between each language and the pivot.
    ShiftTable,
    /// Compose concept vectors from the embedding table.
    Compose,
    /// Count concept co-occurrence over image tags.
    CoocBuild,
    /// Mean squared error of embedding distances against co-occurrence.
    Relatedness,
    /// Cluster concept vectors.
    Cluster,
    /// Semantic and sentiment consistency of the clustering.
    Consistency,
    /// Cross-language co-clustering counts.
    Connectivity,
    /// Portrait scores, face-concept statistics and language groupings.
    Portrait,
    /// Rewrite a corpus so multi-word concepts become single tokens.
    AnpTokenize,
    /// Hash and bundle every artifact into a manifest.
    Report,
    /// Run every stage, then `report`.
    Run,
    /// Write the synthetic fixture to a directory.
    Fixture {
        dir: PathBuf,
        #[arg(long, default_value_t = crate::synth::FIXTURE_SEED)]
        fixture_seed: u64,
    },
}

fn parse_key_value(s: &str) -> std::result::Result<(String, String), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VALUE, got {s:?}"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    if let Command::Fixture { dir, fixture_seed } = &cli.command {
        return crate::synth::synthetic_fixture(*fixture_seed).write(dir);
    }
    let mut overrides = cli.overrides.clone();
    if let Some(s) = cli.seed {
        overrides.push(("seed".into(), s.to_string()));
    }
    if let Some(o) = &cli.out {
        overrides.push(("out".into(), o.to_string_lossy().into_owned()));
    }
    if let Some(t) = cli.threads {
        overrides.push(("threads".into(), t.to_string()));
    }
    let config = PipelineConfig::load(cli.config.as_deref(), &overrides)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let ctx = Context::new(config)?;
    pool.install(|| match cli.command {
        Command::IngestCheck => stages::ingest_check(&ctx),
        Command::Translate => stages::translate(&ctx),
        Command::ShiftTable => stages::shift_table(&ctx),
        Command::Compose => stages::compose_vectors(&ctx),
        Command::CoocBuild => stages::cooc_build(&ctx),
        Command::Relatedness => stages::relatedness(&ctx),
        Command::Cluster => stages::cluster(&ctx),
        Command::Consistency => stages::consistency(&ctx),
        Command::Connectivity => stages::connectivity(&ctx),
        Command::Portrait => stages::portrait(&ctx),
        Command::AnpTokenize => stages::anp_tokenize(&ctx),
        Command::Report => stages::report(&ctx),
        Command::Run => stages::run_all(&ctx),
        Command::Fixture { .. } => unreachable!(),
    })
}

/// Entry point of the binary: parses arguments, runs, and maps errors to
/// exit codes with a JSON description on stderr.
pub fn main() -> ! {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match run(cli) {
        Ok(()) => std::process::exit(0),
        Err(e) => {
            let class = e.class();
            let body = json!({
                "error": {
                    "code": e.code(),
                    "class": format!("{class:?}").to_lowercase(),
                    "message": e.to_string(),
                    "retryable": e.is_retryable(),
                }
            });
            eprintln!("{body}");
            std::process::exit(class.exit_code());
        }
    }
}
