//! One function per pipeline stage. Stages talk to each other only through
//! files in the output directory.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{EmbeddingFormat, PipelineConfig, ShiftSource};
use crate::clustering::{
    cluster_one_stage, cluster_two_stage, connectivity_matrix, semantic_consistency, sentiment_consistency, Clustering,
    ConsistencyReport, Scheme, StageOneWord, TwoStageOptions,
};
use crate::embed::{anp_tokenize_corpus, compose, coverage_by_language, ConceptVector, Provenance};
use crate::error::{Error, Result};
use crate::ingest::{
    annotator_agreement, load_annotations, load_dictionary, load_embeddings_binary, load_embeddings_text,
    load_face_detections, load_image_tags, load_lexicons, sentiment_correlation, EmbeddingMeta, EmbeddingTable,
    IngestOptions, IngestReport,
};
use crate::model::{ConceptKey, Language, Lexicon, PolaritySource};
use crate::pivot::{
    apply_translations, exact_match_index, extract_representatives, sentiment_shift_table, ShiftOptions,
    TranslationClient,
};
use crate::portrait::{
    cluster_languages, concept_face_sizes, concept_images, face_sentiment_stats, filter_face_anps, language_profiles,
    multilinguality_correlations, portrait_scores, write_portrait_csv, PortraitOptions,
};
use crate::relatedness::{build_cooccurrence, relatedness_mse, CoOccurrenceMatrix, Scope};
use crate::seeding::derive_seed;
use crate::synth::SHIFT_HEADER;

pub const TRANSLATIONS: &str = "translations.tsv";
pub const CONCEPT_VECTORS: &str = "concept_vectors.tsv";
pub const COOC: &str = "cooc.csv";
pub const COOC_INDEX: &str = "cooc_index.txt";
pub const CLUSTERING: &str = "clustering.csv";
pub const TOKENIZED_CORPUS: &str = "corpus_anp.txt";
pub const MANIFEST: &str = "manifest.json";

/// Configuration plus the stamp every artifact carries.
pub struct Context {
    pub config: PipelineConfig,
    pub config_hash: String,
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    config_hash: &'a str,
    seed: u64,
    #[serde(flatten)]
    body: &'a T,
}

impl Context {
    pub fn new(config: PipelineConfig) -> Result<Self> {
        let out = config.out_dir();
        fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
        Ok(Context {
            config_hash: config.hash(),
            config,
            out,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn stamp(&self) -> String {
        format!("config_hash={},seed={}", self.config_hash, self.config.seed)
    }

    fn write_json<T: Serialize>(&self, name: &str, body: &T) -> Result<()> {
        let stamped = Stamped {
            config_hash: &self.config_hash,
            seed: self.config.seed,
            body,
        };
        let mut text = serde_json::to_string_pretty(&stamped)?;
        text.push('\n');
        self.write_text(name, &text)
    }

    fn write_text(&self, name: &str, text: &str) -> Result<()> {
        let p = self.path(name);
        fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
        info!("wrote {}", p.display());
        Ok(())
    }

    fn artifact(&self, name: &str, producer: &str) -> Result<PathBuf> {
        let p = self.path(name);
        if p.exists() {
            Ok(p)
        } else {
            Err(Error::MissingArtifact(format!("{name} (produced by `{producer}`)")))
        }
    }

    fn ingest_options(&self) -> IngestOptions {
        IngestOptions {
            strict: self.config.strict,
        }
    }

    fn pivot(&self) -> Result<Language> {
        Language::parse(&self.config.pivot)
    }

    fn lexicons(&self) -> Result<(BTreeMap<Language, Lexicon>, IngestReport)> {
        let path = self.config.input("lexicon", &self.config.lexicon)?;
        let loaded = load_lexicons(&path, self.ingest_options())?;
        Ok((loaded.value, loaded.report))
    }

    /// Lexicons with pivot surfaces filled in from the `translate` output.
    fn translated_lexicons(&self) -> Result<BTreeMap<Language, Lexicon>> {
        let (mut lexicons, _) = self.lexicons()?;
        let dict = load_dictionary(&self.artifact(TRANSLATIONS, "translate")?, self.ingest_options())?.value;
        apply_translations(&mut lexicons, &TranslationClient::dictionary(self.pivot()?, dict));
        Ok(lexicons)
    }

    fn embeddings(&self) -> Result<EmbeddingTable> {
        let path = self.config.input("embeddings", &self.config.embeddings)?;
        let meta = EmbeddingMeta {
            window: self.config.embedding_window,
            tokenization: self.config.embedding_tokenization,
        };
        let binary = match self.config.embedding_format {
            EmbeddingFormat::Auto => path.extension().is_some_and(|e| e == "bin"),
            EmbeddingFormat::Text => false,
            EmbeddingFormat::Binary => true,
        };
        if binary {
            load_embeddings_binary(&path, meta)
        } else {
            load_embeddings_text(&path, meta)
        }
    }
}

/// Crowdsourced polarity, falling back to the automatic one per concept.
fn polarities(lexicons: &BTreeMap<Language, Lexicon>) -> BTreeMap<ConceptKey, f64> {
    lexicons
        .values()
        .flat_map(|l| l.concepts())
        .filter_map(|c| {
            c.polarity(PolaritySource::Crowdsourced)
                .or_else(|| c.polarity(PolaritySource::Automatic))
                .map(|p| (c.key(), p))
        })
        .collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

#[derive(Serialize)]
struct CorrelationSummary {
    per_language: BTreeMap<Language, Option<f64>>,
    /// Mean over languages where the correlation is defined.
    mean: Option<f64>,
}

#[derive(Serialize)]
struct EmbeddingSummary {
    tokens: usize,
    dimension: usize,
}

#[derive(Serialize)]
struct IngestCheck {
    inputs: Vec<IngestReport>,
    agreement: Option<crate::ingest::AgreementReport>,
    crowd_automatic_correlation: CorrelationSummary,
    embeddings: Option<EmbeddingSummary>,
}

pub fn ingest_check(ctx: &Context) -> Result<()> {
    let c = &ctx.config;
    let opts = ctx.ingest_options();
    let (lexicons, lexicon_report) = ctx.lexicons()?;
    let mut inputs = vec![lexicon_report];
    let mut agreement = None;
    if c.annotations.is_some() {
        let a = load_annotations(&c.input("annotations", &c.annotations)?, opts)?;
        agreement = Some(annotator_agreement(&a.value));
        inputs.push(a.report);
    }
    if c.dictionary.is_some() {
        inputs.push(load_dictionary(&c.input("dictionary", &c.dictionary)?, opts)?.report);
    }
    if c.image_tags.is_some() {
        inputs.push(load_image_tags(&c.input("image_tags", &c.image_tags)?, opts)?.report);
    }
    if c.face_detections.is_some() {
        inputs.push(load_face_detections(&c.input("face_detections", &c.face_detections)?, opts)?.report);
    }
    let embeddings = match c.embeddings {
        Some(_) => {
            let t = ctx.embeddings()?;
            Some(EmbeddingSummary {
                tokens: t.len(),
                dimension: t.dimension(),
            })
        }
        None => None,
    };

    let per_language: BTreeMap<Language, Option<f64>> = lexicons
        .iter()
        .map(|(l, lex)| {
            let (a, b): (Vec<f64>, Vec<f64>) = lex
                .concepts()
                .iter()
                .filter_map(|c| {
                    Some((
                        c.polarity(PolaritySource::Crowdsourced)?,
                        c.polarity(PolaritySource::Automatic)?,
                    ))
                })
                .unzip();
            (l.clone(), sentiment_correlation(&a, &b).ok())
        })
        .collect();
    let defined: Vec<f64> = per_language.values().flatten().copied().collect();
    let report = IngestCheck {
        inputs,
        agreement,
        crowd_automatic_correlation: CorrelationSummary {
            mean: crate::stats::mean(&defined),
            per_language,
        },
        embeddings,
    };
    ctx.write_json("ingest_report.json", &report)
}

#[derive(Serialize)]
struct LanguageMatch {
    concepts: usize,
    translated: usize,
}

#[derive(Serialize)]
struct MatchReport {
    pivot: Language,
    translated: usize,
    untranslated: Vec<String>,
    failed: Vec<String>,
    per_language: BTreeMap<Language, LanguageMatch>,
    pivot_groups: usize,
    multilingual_groups: BTreeMap<String, Vec<ConceptKey>>,
}

pub fn translate(ctx: &Context) -> Result<()> {
    let c = &ctx.config;
    let (mut lexicons, _) = ctx.lexicons()?;
    let dict = load_dictionary(&c.input("dictionary", &c.dictionary)?, ctx.ingest_options())?.value;
    let client = TranslationClient::dictionary(ctx.pivot()?, dict);
    let report = apply_translations(&mut lexicons, &client);
    let index = exact_match_index(&lexicons, &client);

    let mut tsv = format!("# {}\nlanguage\tsurface\tpivot_surface\n", ctx.stamp());
    let mut per_language = BTreeMap::new();
    for (language, lexicon) in &lexicons {
        let mut translated = 0;
        for concept in lexicon.concepts() {
            if let Some(p) = &concept.pivot_surface {
                writeln!(tsv, "{language}\t{}\t{p}", concept.surface).unwrap();
                translated += 1;
            }
        }
        per_language.insert(
            language.clone(),
            LanguageMatch {
                concepts: lexicon.len(),
                translated,
            },
        );
    }
    ctx.write_text(TRANSLATIONS, &tsv)?;
    ctx.write_json(
        "exact_match.json",
        &MatchReport {
            pivot: client.pivot().clone(),
            translated: report.translated,
            untranslated: report.untranslated,
            failed: report.failed,
            per_language,
            pivot_groups: index.groups.len(),
            multilingual_groups: index
                .multilingual_groups()
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        },
    )
}

pub fn shift_table(ctx: &Context) -> Result<()> {
    let lexicons = ctx.translated_lexicons()?;
    let pivot = ctx.pivot()?;
    let dict = load_dictionary(&ctx.path(TRANSLATIONS), ctx.ingest_options())?.value;
    let client = TranslationClient::dictionary(pivot.clone(), dict);
    let index = exact_match_index(&lexicons, &client);
    let pivot_lexicon = lexicons
        .get(&pivot)
        .ok_or_else(|| Error::Config(format!("no lexicon rows for pivot language {pivot}")))?;
    let opts = ShiftOptions {
        source: match ctx.config.shift_source {
            ShiftSource::Crowdsourced => PolaritySource::Crowdsourced,
            ShiftSource::Automatic => PolaritySource::Automatic,
        },
        pivot_polarity: ctx.config.shift_pivot_polarity,
    };
    let rows = sentiment_shift_table(&lexicons, &index, pivot_lexicon, &ctx.config.shift_thresholds, opts);
    let mut csv = format!("# {}\n{SHIFT_HEADER}\n", ctx.stamp());
    for r in rows {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            r.language,
            r.threshold,
            r.total,
            r.matched,
            r.shifted,
            fmt_opt(r.shifted_pct_of_matched),
            fmt_opt(r.shifted_pct_of_all),
            r.pivot_automatic
        )
        .unwrap();
    }
    ctx.write_text("shift_table.csv", &csv)
}

fn provenance_name(p: Provenance) -> &'static str {
    match p {
        Provenance::ComposedSum => "sum",
        Provenance::LearnedAnp => "learned",
        Provenance::FallbackSum => "fallback_sum",
    }
}

pub fn compose_vectors(ctx: &Context) -> Result<()> {
    let lexicons = ctx.translated_lexicons()?;
    let table = ctx.embeddings()?;
    let mode = ctx.config.composition.into();
    let mut tsv = format!("# {}\nconcept_key\tpivot\tprovenance\tvector\n", ctx.stamp());
    for lexicon in lexicons.values() {
        for concept in lexicon.concepts() {
            match compose(concept, &table, mode) {
                Ok(v) => {
                    let values: Vec<String> = v.vector.iter().map(f64::to_string).collect();
                    writeln!(
                        tsv,
                        "{}\t{}\t{}\t{}",
                        v.key,
                        v.pivot,
                        provenance_name(v.provenance),
                        values.join(" ")
                    )
                    .unwrap();
                }
                Err(Error::Untranslated { .. }) | Err(Error::OovConcept(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    ctx.write_text(CONCEPT_VECTORS, &tsv)?;
    #[derive(Serialize)]
    struct Coverage {
        composition: crate::embed::CompositionMode,
        tokenization: crate::ingest::Tokenization,
        window: usize,
        per_language: Vec<crate::embed::CoverageReport>,
    }
    ctx.write_json(
        "coverage.json",
        &Coverage {
            composition: mode,
            tokenization: table.meta.tokenization,
            window: table.meta.window,
            per_language: coverage_by_language(&lexicons, &table, mode)?,
        },
    )
}

/// Concept vectors as written by `compose`.
pub fn read_concept_vectors(path: &Path) -> Result<Vec<ConceptVector>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.starts_with("concept_key\t") || line.is_empty() {
            continue;
        }
        let bad = |m: &str| Error::Row {
            row: n + 1,
            message: m.to_string(),
        };
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 4 {
            return Err(bad("expected 4 tab-separated fields"));
        }
        let vector = f[3]
            .split(' ')
            .map(|x| x.parse::<f64>().map_err(|_| bad("bad float")))
            .collect::<Result<Vec<f64>>>()?;
        let provenance = match f[2] {
            "sum" => Provenance::ComposedSum,
            "learned" => Provenance::LearnedAnp,
            "fallback_sum" => Provenance::FallbackSum,
            _ => return Err(bad("unknown provenance")),
        };
        out.push(ConceptVector {
            key: f[0].parse()?,
            pivot: f[1].to_string(),
            vector,
            provenance,
            tokens_used: 0,
            stopwords_skipped: 0,
            oov_tokens: 0,
        });
    }
    Ok(out)
}

pub fn cooc_build(ctx: &Context) -> Result<()> {
    let c = &ctx.config;
    let lexicons = ctx.translated_lexicons()?;
    let tags = load_image_tags(&c.input("image_tags", &c.image_tags)?, ctx.ingest_options())?.value;
    let pivots: BTreeSet<String> = lexicons
        .values()
        .flat_map(|l| l.concepts())
        .filter_map(|c| c.pivot_key())
        .collect();
    let (matrix, report) = build_cooccurrence(&tags, pivots.iter().map(String::as_str), c.sample_cap);
    matrix.write(&ctx.path(COOC), &ctx.path(COOC_INDEX), Some(&ctx.stamp()))?;
    ctx.write_json("cooc_report.json", &report)
}

fn load_cooc(ctx: &Context) -> Result<CoOccurrenceMatrix> {
    let (t, i) = (ctx.path(COOC), ctx.path(COOC_INDEX));
    if t.exists() && i.exists() {
        CoOccurrenceMatrix::read(&t, &i)
    } else {
        warn!(
            "no co-occurrence artifact in {}; every pair counts as zero",
            ctx.out.display()
        );
        Ok(CoOccurrenceMatrix::with_concepts(std::iter::empty::<&str>()))
    }
}

pub fn relatedness(ctx: &Context) -> Result<()> {
    let vectors = read_concept_vectors(&ctx.artifact(CONCEPT_VECTORS, "compose")?)?;
    let cooc = load_cooc(ctx)?;
    let by_pivot: BTreeMap<String, Vec<f64>> = vectors.iter().map(|v| (v.pivot.clone(), v.vector.clone())).collect();
    let overall = relatedness_mse(&by_pivot, &cooc, &Scope::All)?;

    let mut members: BTreeMap<Language, BTreeSet<String>> = BTreeMap::new();
    for v in &vectors {
        members
            .entry(v.key.language.clone())
            .or_default()
            .insert(v.pivot.clone());
    }
    let mut per_language = BTreeMap::new();
    for (language, m) in &members {
        let scope = Scope::Language {
            members: m,
            rule: ctx.config.pair_rule,
        };
        let r = match relatedness_mse(&by_pivot, &cooc, &scope) {
            Ok(r) => Some(r),
            Err(Error::NoPairs) => None,
            Err(e) => return Err(e),
        };
        per_language.insert(language.clone(), r);
    }
    if overall.pairs != overall.pairs_closed_form {
        warn!(
            "counted {} pairs but the closed form gives {}",
            overall.pairs, overall.pairs_closed_form
        );
    }
    #[derive(Serialize)]
    struct Relatedness {
        pair_rule: crate::relatedness::PairRule,
        overall: crate::relatedness::RelatednessResult,
        per_language: BTreeMap<Language, Option<crate::relatedness::RelatednessResult>>,
    }
    ctx.write_json(
        "relatedness.json",
        &Relatedness {
            pair_rule: ctx.config.pair_rule,
            overall,
            per_language,
        },
    )
}

fn vector_map(vectors: &[ConceptVector]) -> BTreeMap<ConceptKey, Vec<f64>> {
    vectors.iter().map(|v| (v.key.clone(), v.vector.clone())).collect()
}

pub fn cluster(ctx: &Context) -> Result<()> {
    let c = &ctx.config;
    let vectors = read_concept_vectors(&ctx.artifact(CONCEPT_VECTORS, "compose")?)?;
    let map = vector_map(&vectors);
    let seed = derive_seed(c.seed, "cluster");
    #[derive(Serialize)]
    struct Summary {
        scheme: Scheme,
        k: usize,
        cluster_seed: u64,
        concepts: usize,
        clusters: usize,
        inertia: f64,
        sizes: Vec<usize>,
        groups: Option<Vec<crate::clustering::GroupSummary>>,
    }
    let (clustering, groups) = match c.cluster_scheme {
        Scheme::OneStage => (cluster_one_stage(&map, c.cluster_k, seed)?, None),
        scheme => {
            let lexicons = ctx.translated_lexicons()?;
            let mut reps = BTreeMap::new();
            for concept in lexicons.values().flat_map(|l| l.concepts()) {
                let Some(p) = concept.pivot_key() else { continue };
                match extract_representatives(&p, concept.pivot_pos.as_deref()) {
                    Ok(r) => {
                        reps.insert(concept.key(), r);
                    }
                    Err(Error::NoNoun) => warn!("{}: no noun in {p:?}", concept.key()),
                    Err(e) => return Err(e),
                }
            }
            let opts = TwoStageOptions {
                word: if scheme == Scheme::TwoStageNoun {
                    StageOneWord::Noun
                } else {
                    StageOneWord::Adjective
                },
                k_total: c.cluster_k,
                groups: c.stage_one_groups,
                seed,
            };
            let r = cluster_two_stage(&map, &reps, &ctx.embeddings()?, &opts)?;
            (r.clustering, Some(r.groups))
        }
    };
    clustering.write_csv(&ctx.path(CLUSTERING), Some(&ctx.stamp()))?;
    let mut sizes: Vec<usize> = clustering.clusters().iter().map(Vec::len).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    ctx.write_json(
        "clustering.json",
        &Summary {
            scheme: clustering.scheme,
            k: clustering.k,
            cluster_seed: seed,
            concepts: clustering.len(),
            clusters: clustering.cluster_count(),
            inertia: clustering.inertia,
            sizes,
            groups,
        },
    )
}

fn load_clustering(ctx: &Context) -> Result<Clustering> {
    Clustering::read_csv(
        &ctx.artifact(CLUSTERING, "cluster")?,
        ctx.config.cluster_scheme,
        derive_seed(ctx.config.seed, "cluster"),
    )
}

pub fn consistency(ctx: &Context) -> Result<()> {
    let clustering = load_clustering(ctx)?;
    let vectors = read_concept_vectors(&ctx.artifact(CONCEPT_VECTORS, "compose")?)?;
    let pivots: BTreeMap<ConceptKey, String> = vectors.into_iter().map(|v| (v.key, v.pivot)).collect();
    let (lexicons, _) = ctx.lexicons()?;
    let cooc = load_cooc(ctx)?;
    let semantic = semantic_consistency(&clustering, &pivots, &cooc)?;
    let sen_c = sentiment_consistency(&clustering, &polarities(&lexicons))?;
    #[derive(Serialize)]
    struct Consistency {
        scheme: Scheme,
        #[serde(flatten)]
        report: ConsistencyReport,
        compared_pairs: usize,
    }
    ctx.write_json(
        "consistency.json",
        &Consistency {
            scheme: clustering.scheme,
            report: ConsistencyReport::new(&semantic, sen_c, ctx.config.sem_pairs_denominator),
            compared_pairs: semantic.pairs,
        },
    )
}

pub fn connectivity(ctx: &Context) -> Result<()> {
    let clustering = load_clustering(ctx)?;
    let m = connectivity_matrix(&clustering, ctx.config.connectivity_mode);
    #[derive(Serialize)]
    struct Connectivity {
        mode: crate::clustering::ConnectivityMode,
        #[serde(flatten)]
        matrix: crate::clustering::ConnectivityMatrix,
    }
    ctx.write_json(
        "connectivity.json",
        &Connectivity {
            mode: ctx.config.connectivity_mode,
            matrix: m,
        },
    )
}

pub fn portrait(ctx: &Context) -> Result<()> {
    let c = &ctx.config;
    let opts = ctx.ingest_options();
    let lexicons = ctx.translated_lexicons()?;
    let tags = load_image_tags(&c.input("image_tags", &c.image_tags)?, opts)?.value;
    let detections = load_face_detections(&c.input("face_detections", &c.face_detections)?, opts)?.value;
    let images = concept_images(&tags, &lexicons);
    let scores = portrait_scores(&detections, &images);
    let selection = filter_face_anps(&scores.scores, c.portrait_threshold, c.min_face_anps)?;
    let pol = polarities(&lexicons);
    let popts = PortraitOptions {
        face_size: c.face_size_mode,
        faces_per_image: c.faces_per_image_mode,
        scale: c.portrait_scale,
    };
    let stats = face_sentiment_stats(&selection, &scores.scores, &pol, &images, &detections, popts);
    write_portrait_csv(&stats, &ctx.path("portrait_stats.csv"), Some(&ctx.stamp()))?;

    let vectors = read_concept_vectors(&ctx.artifact(CONCEPT_VECTORS, "compose")?)?;
    let face_vectors: BTreeMap<ConceptKey, Vec<f64>> = vector_map(&vectors)
        .into_iter()
        .filter(|(k, _)| selection.anps.contains(k))
        .collect();
    let k = c.portrait_k.min(face_vectors.len());
    if k < c.portrait_k {
        warn!("portrait_k lowered to {k}, the number of face concepts with vectors");
    }
    let face_clustering = cluster_one_stage(&face_vectors, k, derive_seed(c.seed, "portrait"))?;
    let sizes = concept_face_sizes(&detections, &images, c.face_size_mode);
    let multilinguality = multilinguality_correlations(&face_clustering, &pol, &sizes);
    let profiles = language_profiles(&face_clustering);
    let groupings = cluster_languages(
        &profiles,
        c.profile_k_min..=c.profile_k_max,
        derive_seed(c.seed, "profiles"),
    )?;

    #[derive(Serialize)]
    struct Portrait {
        threshold: f64,
        min_face_anps: usize,
        scored_concepts: usize,
        excluded_concepts: Vec<ConceptKey>,
        undetected_images: usize,
        languages: Vec<Language>,
        dropped_languages: BTreeMap<Language, usize>,
        face_concepts: Vec<ConceptKey>,
        stats: Vec<crate::portrait::PortraitStats>,
        face_clusters: usize,
        multilinguality: crate::portrait::MultilingualityReport,
        profiles: Vec<crate::portrait::LanguageProfile>,
        groupings: BTreeMap<usize, crate::portrait::Grouping>,
    }
    ctx.write_json(
        "portrait.json",
        &Portrait {
            threshold: c.portrait_threshold,
            min_face_anps: c.min_face_anps,
            scored_concepts: scores.scores.len(),
            excluded_concepts: scores.excluded,
            undetected_images: scores.undetected_images,
            languages: selection.languages.clone(),
            dropped_languages: selection.dropped.clone(),
            face_concepts: selection.anps.iter().cloned().collect(),
            stats,
            face_clusters: k,
            multilinguality,
            profiles,
            groupings,
        },
    )
}

pub fn anp_tokenize(ctx: &Context) -> Result<()> {
    let c = &ctx.config;
    let path = c.input("corpus", &c.corpus)?;
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let lines: Vec<&str> = text.lines().collect();
    let lexicons = ctx.translated_lexicons()?;
    let anps: BTreeSet<String> = lexicons
        .values()
        .flat_map(|l| l.concepts())
        .filter_map(|c| c.pivot_key())
        .collect();
    let anp_refs: Vec<&str> = anps.iter().map(String::as_str).collect();
    let (rewritten, stats) = anp_tokenize_corpus(&lines, &anp_refs);
    let mut out = rewritten.join("\n");
    if text.ends_with('\n') {
        out.push('\n');
    }
    ctx.write_text(TOKENIZED_CORPUS, &out)?;
    ctx.write_json("tokenize_report.json", &stats)
}

#[derive(Serialize)]
struct FileDigest {
    name: String,
    bytes: u64,
    sha256: String,
}

fn digest(name: &str, path: &Path) -> Result<FileDigest> {
    let data = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(FileDigest {
        name: name.to_string(),
        bytes: data.len() as u64,
        sha256: hex::encode(Sha256::digest(&data)),
    })
}

/// Hashes every input and artifact, and inlines the JSON reports.
pub fn report(ctx: &Context) -> Result<()> {
    let c = &ctx.config;
    let mut inputs = Vec::new();
    for (key, value) in [
        ("lexicon", &c.lexicon),
        ("annotations", &c.annotations),
        ("dictionary", &c.dictionary),
        ("embeddings", &c.embeddings),
        ("image_tags", &c.image_tags),
        ("face_detections", &c.face_detections),
        ("corpus", &c.corpus),
    ] {
        if value.is_some() {
            inputs.push(digest(key, &c.input(key, value)?)?);
        }
    }
    let mut names: Vec<String> = fs::read_dir(&ctx.out)
        .map_err(|e| Error::io(&ctx.out, e))?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_file())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n != MANIFEST)
        .collect();
    names.sort();
    let mut artifacts = Vec::new();
    let mut reports = BTreeMap::new();
    for name in &names {
        let p = ctx.path(name);
        artifacts.push(digest(name, &p)?);
        if name.ends_with(".json") {
            let text = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
            let mut v: serde_json::Value = serde_json::from_str(&text)?;
            if let Some(m) = v.as_object_mut() {
                m.remove("config_hash");
                m.remove("seed");
            }
            reports.insert(name.trim_end_matches(".json").to_string(), v);
        }
    }
    if artifacts.is_empty() {
        return Err(Error::MissingArtifact(format!("in {}", ctx.out.display())));
    }
    #[derive(Serialize)]
    struct Manifest {
        config: serde_json::Value,
        inputs: Vec<FileDigest>,
        artifacts: Vec<FileDigest>,
        reports: BTreeMap<String, serde_json::Value>,
    }
    ctx.write_json(
        MANIFEST,
        &Manifest {
            config: c.canonical(),
            inputs,
            artifacts,
            reports,
        },
    )
}

/// Every stage in order, then the manifest.
pub fn run_all(ctx: &Context) -> Result<()> {
    ingest_check(ctx)?;
    translate(ctx)?;
    shift_table(ctx)?;
    compose_vectors(ctx)?;
    cooc_build(ctx)?;
    relatedness(ctx)?;
    cluster(ctx)?;
    consistency(ctx)?;
    connectivity(ctx)?;
    portrait(ctx)?;
    if ctx.config.corpus.is_some() {
        anp_tokenize(ctx)?;
    }
    report(ctx)
}
