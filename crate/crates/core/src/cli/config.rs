//! Pipeline configuration: a flat TOML table, overridable key by key.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clustering::{ConnectivityMode, Scheme};
use crate::embed::CompositionMode;
use crate::error::{Error, Result};
use crate::ingest::Tokenization;
use crate::pivot::PivotPolarity;
use crate::portrait::{FaceSizeMode, FacesPerImageMode, SentimentScale};
use crate::relatedness::PairRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Composition {
    #[default]
    Sum,
    Learned,
}

impl From<Composition> for CompositionMode {
    fn from(c: Composition) -> Self {
        match c {
            Composition::Sum => CompositionMode::Sum,
            Composition::Learned => CompositionMode::LearnedWithFallback,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingFormat {
    /// Binary when the file name ends in `.bin`, text otherwise.
    #[default]
    Auto,
    Text,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftSource {
    #[default]
    Crowdsourced,
    Automatic,
}

/// Every key of the configuration file. Paths are kept as written and
/// resolved against `base_dir` when used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    /// Output directory.
    pub out: String,
    /// Worker threads; 0 lets the runtime decide.
    pub threads: usize,
    pub strict: bool,
    pub pivot: String,

    pub lexicon: Option<String>,
    pub annotations: Option<String>,
    pub dictionary: Option<String>,
    pub embeddings: Option<String>,
    pub embedding_format: EmbeddingFormat,
    pub embedding_tokenization: Tokenization,
    pub embedding_window: usize,
    pub composition: Composition,
    pub image_tags: Option<String>,
    pub face_detections: Option<String>,
    pub corpus: Option<String>,

    pub shift_thresholds: Vec<f64>,
    pub shift_source: ShiftSource,
    /// Polarity of the pivot-language side of each comparison.
    pub shift_pivot_polarity: PivotPolarity,

    pub sample_cap: usize,
    pub pair_rule: PairRule,

    pub cluster_scheme: Scheme,
    pub cluster_k: usize,
    pub stage_one_groups: Option<usize>,
    pub sem_pairs_denominator: bool,
    pub connectivity_mode: ConnectivityMode,

    pub portrait_threshold: f64,
    pub min_face_anps: usize,
    pub portrait_k: usize,
    pub profile_k_min: usize,
    pub profile_k_max: usize,
    pub face_size_mode: FaceSizeMode,
    pub faces_per_image_mode: FacesPerImageMode,
    pub portrait_scale: SentimentScale,

    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            out: "out".into(),
            threads: 0,
            strict: false,
            pivot: "en".into(),
            lexicon: None,
            annotations: None,
            dictionary: None,
            embeddings: None,
            embedding_format: EmbeddingFormat::Auto,
            embedding_tokenization: Tokenization::Words,
            embedding_window: 5,
            composition: Composition::Sum,
            image_tags: None,
            face_detections: None,
            corpus: None,
            shift_thresholds: vec![0.0, 0.1, 0.2, 0.3],
            shift_source: ShiftSource::Crowdsourced,
            shift_pivot_polarity: PivotPolarity::CrowdThenAutomatic,
            sample_cap: crate::relatedness::DEFAULT_SAMPLE_CAP,
            pair_rule: PairRule::BothEndpoints,
            cluster_scheme: Scheme::OneStage,
            cluster_k: 1000,
            stage_one_groups: None,
            sem_pairs_denominator: false,
            connectivity_mode: ConnectivityMode::Pairs,
            portrait_threshold: crate::portrait::DEFAULT_PORTRAIT_THRESHOLD,
            min_face_anps: crate::portrait::DEFAULT_MIN_FACE_ANPS,
            portrait_k: 1000,
            profile_k_min: 2,
            profile_k_max: 6,
            face_size_mode: FaceSizeMode::Linear,
            faces_per_image_mode: FacesPerImageMode::FaceImages,
            portrait_scale: SentimentScale::Rating,
            base_dir: PathBuf::from("."),
        }
    }
}

/// Keys that name input files.
const PATH_KEYS: &[&str] = &[
    "lexicon",
    "annotations",
    "dictionary",
    "embeddings",
    "image_tags",
    "face_detections",
    "corpus",
    "out",
];

/// Parses `value` as a TOML value, falling back to a bare string.
fn override_value(value: &str) -> toml::Value {
    let doc = format!("v = {value}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap(),
        Err(_) => toml::Value::String(value.to_string()),
    }
}

impl PipelineConfig {
    /// Reads `file` (if any), then applies `key=value` overrides in order.
    /// Override paths are taken relative to the working directory.
    pub fn load(file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let (mut table, base_dir) = match file {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                let table: toml::Table = text
                    .parse()
                    .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                let dir = p.parent().map(Path::to_path_buf).unwrap_or_default();
                (
                    table,
                    if dir.as_os_str().is_empty() {
                        PathBuf::from(".")
                    } else {
                        dir
                    },
                )
            }
            None => (toml::Table::new(), PathBuf::from(".")),
        };
        let cwd = std::env::current_dir().map_err(|e| Error::io(".", e))?;
        for (key, value) in overrides {
            let mut v = override_value(value);
            if PATH_KEYS.contains(&key.as_str()) {
                let p = Path::new(value);
                let abs = if p.is_absolute() { p.to_path_buf() } else { cwd.join(p) };
                v = toml::Value::String(abs.to_string_lossy().into_owned());
            }
            table.insert(key.clone(), v);
        }
        let mut config: PipelineConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        config.base_dir = base_dir;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if self.profile_k_min == 0 || self.profile_k_min > self.profile_k_max {
            return Err(Error::Config("profile_k_min must be in 1..=profile_k_max".into()));
        }
        if self.cluster_k == 0 || self.portrait_k == 0 {
            return Err(Error::Config("cluster counts must be positive".into()));
        }
        if self.shift_thresholds.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::Config("shift thresholds must be finite and non-negative".into()));
        }
        crate::model::Language::parse(&self.pivot).map_err(|_| Error::Config(format!("bad pivot {:?}", self.pivot)))?;
        Ok(())
    }

    pub fn resolve(&self, p: &str) -> PathBuf {
        let path = Path::new(p);
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    /// Resolved path of an input, or a config error naming the missing key.
    pub fn input(&self, key: &str, value: &Option<String>) -> Result<PathBuf> {
        let v = value
            .as_ref()
            .ok_or_else(|| Error::Config(format!("configuration key `{key}` is required")))?;
        let p = self.resolve(v);
        if !p.exists() {
            return Err(Error::Config(format!("`{key}` points to missing file {}", p.display())));
        }
        Ok(p)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.resolve(&self.out)
    }

    /// Hex sha256 of the configuration as JSON, with `out` and `threads`
    /// left out since they do not change results.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        let map = v.as_object_mut().unwrap();
        map.remove("out");
        map.remove("threads");
        hex::encode(Sha256::digest(serde_json::to_vec(&v).unwrap()))
    }

    /// The configuration as recorded in manifests.
    pub fn canonical(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).unwrap();
        let map = v.as_object_mut().unwrap();
        map.remove("out");
        map.remove("threads");
        v
    }
}
