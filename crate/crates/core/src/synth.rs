//! Seeded generator for a small three-language fixture (English pivot,
//! Spanish, French) with every input file the pipeline reads.
//!
//! Values are drawn from a ChaCha stream and written with fixed decimal
//! places, so the files are identical on every platform.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const FIXTURE_SEED: u64 = 20160519;
pub const SHIFT_THRESHOLDS: [f64; 4] = [0.0, 0.1, 0.2, 0.3];
const DIM: usize = 16;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Topic {
    People,
    Animals,
    Nature,
    City,
    Food,
}

impl Topic {
    const ALL: [Topic; 5] = [Topic::People, Topic::Animals, Topic::Nature, Topic::City, Topic::Food];

    fn sentiment_bias(self) -> f64 {
        match self {
            Topic::People => 0.15,
            Topic::Food => 0.1,
            Topic::City => -0.05,
            _ => 0.0,
        }
    }

    fn face_rate(self) -> f64 {
        match self {
            Topic::People => 0.9,
            Topic::Animals => 0.3,
            _ => 0.1,
        }
    }
}

/// (topic, en, es, fr); a French form may span several words.
const NOUNS: &[(Topic, &str, &str, &str)] = &[
    (Topic::People, "girl", "chica", "fille"),
    (Topic::People, "boy", "chico", "garçon"),
    (Topic::People, "woman", "mujer", "femme"),
    (Topic::People, "man", "hombre", "homme"),
    (Topic::People, "baby", "bebé", "bébé"),
    (Topic::People, "face", "cara", "visage"),
    (Topic::People, "smile", "sonrisa", "sourire"),
    (Topic::People, "portrait", "retrato", "portrait"),
    (Topic::People, "eyes", "ojos", "yeux"),
    (Topic::Animals, "dog", "perro", "chien"),
    (Topic::Animals, "cat", "gato", "chat"),
    (Topic::Animals, "horse", "caballo", "cheval"),
    (Topic::Animals, "bird", "pájaro", "oiseau"),
    (Topic::Animals, "puppy", "cachorro", "chiot"),
    (Topic::Nature, "sky", "cielo", "ciel"),
    (Topic::Nature, "sunset", "atardecer", "coucher de soleil"),
    (Topic::Nature, "beach", "playa", "plage"),
    (Topic::Nature, "flower", "flor", "fleur"),
    (Topic::Nature, "tree", "árbol", "arbre"),
    (Topic::Nature, "forest", "bosque", "forêt"),
    (Topic::Nature, "mountain", "montaña", "montagne"),
    (Topic::Nature, "river", "río", "rivière"),
    (Topic::Nature, "sea", "mar", "mer"),
    (Topic::City, "street", "calle", "rue"),
    (Topic::City, "building", "edificio", "bâtiment"),
    (Topic::City, "car", "coche", "voiture"),
    (Topic::City, "bridge", "puente", "pont"),
    (Topic::City, "city", "ciudad", "ville"),
    (Topic::City, "train", "tren", "train"),
    (Topic::Food, "cake", "pastel", "gâteau"),
    (Topic::Food, "food", "comida", "nourriture"),
    (Topic::Food, "coffee", "café", "café"),
    (Topic::Food, "bread", "pan", "pain"),
    (Topic::Food, "fruit", "fruta", "fruit"),
];

/// (en, es, fr, polarity)
const ADJECTIVES: &[(&str, &str, &str, f64)] = &[
    ("beautiful", "hermoso", "beau", 0.8),
    ("happy", "feliz", "heureux", 0.9),
    ("cute", "lindo", "mignon", 0.75),
    ("sweet", "dulce", "doux", 0.6),
    ("bright", "brillante", "lumineux", 0.5),
    ("funny", "divertido", "drôle", 0.7),
    ("fresh", "fresco", "frais", 0.55),
    ("quiet", "tranquilo", "calme", 0.3),
    ("old", "viejo", "vieux", 0.0),
    ("wild", "salvaje", "sauvage", 0.1),
    ("dark", "oscuro", "sombre", -0.35),
    ("lonely", "solitario", "solitaire", -0.6),
    ("sad", "triste", "triste", -0.8),
    ("angry", "enojado", "fâché", -0.75),
    ("broken", "roto", "cassé", -0.6),
    ("dirty", "sucio", "sale", -0.55),
];

const FILLER: &[&str] = &["a", "the", "of", "with", "my", "photo", "in", "and", "on", "this"];

struct SynthConcept {
    language: &'static str,
    adj: usize,
    noun: usize,
    surface: String,
    adjective_field: String,
    nouns_field: String,
    /// Mean-rating polarity; None leaves the concept unannotated.
    crowd: Option<f64>,
    ratings: Vec<u8>,
    auto: f64,
    /// English phrase given by the dictionary, if any.
    pivot: Option<String>,
}

impl SynthConcept {
    fn english(&self) -> String {
        format!("{} {}", ADJECTIVES[self.adj].0, NOUNS[self.noun].1)
    }
}

/// Every file of the fixture, keyed by file name.
pub struct Fixture {
    pub files: BTreeMap<&'static str, String>,
}

impl Fixture {
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, content) in &self.files {
            let p = dir.join(name);
            fs::write(&p, content).map_err(|e| Error::io(&p, e))?;
        }
        Ok(())
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

fn fmt_polarity(p: f64) -> String {
    format!("{p:.3}")
}

fn vector_line(token: &str, v: &[f64]) -> String {
    let mut s = token.to_string();
    for x in v {
        write!(s, " {x:.5}").unwrap();
    }
    s
}

fn random_vector(rng: &mut ChaCha8Rng, scale: f64) -> Vec<f64> {
    (0..DIM).map(|_| uniform(rng, -scale, scale)).collect()
}

fn make_concepts(rng: &mut ChaCha8Rng) -> Vec<SynthConcept> {
    let mut combos: Vec<(usize, usize)> = (0..ADJECTIVES.len())
        .flat_map(|a| (0..NOUNS.len()).map(move |n| (a, n)))
        .collect();
    combos.shuffle(rng);
    let english: Vec<(usize, usize)> = combos[..80].to_vec();
    let rest = &combos[80..];
    let mut per_language = vec![("en", english.clone())];
    for (lang, shared, own) in [("es", 50, 15), ("fr", 45, 15)] {
        let mut picked: Vec<(usize, usize)> = english.choose_multiple(rng, shared).copied().collect();
        picked.extend(rest.choose_multiple(rng, own).copied());
        picked.sort();
        per_language.push((lang, picked));
    }

    let mut out = Vec::new();
    for (lang, pairs) in per_language {
        // a language-level offset and a few sign flips produce sentiment shifts
        let offset = match lang {
            "es" => 0.05,
            "fr" => -0.08,
            _ => 0.0,
        };
        for (adj, noun) in pairs {
            let (_, en_n, es_n, fr_n) = NOUNS[noun];
            let (en_a, es_a, fr_a, pol) = ADJECTIVES[adj];
            let (surface, adjective_field, nouns_field) = match lang {
                "en" => (format!("{en_a} {en_n}"), en_a.to_string(), en_n.to_string()),
                "es" => (format!("{es_n} {es_a}"), es_a.to_string(), es_n.to_string()),
                _ => (
                    format!("{fr_n} {fr_a}"),
                    fr_a.to_string(),
                    fr_n.split(' ').filter(|w| *w != "de").collect::<Vec<_>>().join(" "),
                ),
            };
            let mut base = pol + NOUNS[noun].0.sentiment_bias() + offset + uniform(rng, -0.15, 0.15);
            if lang != "en" && rng.gen::<f64>() < 0.1 {
                base = -base;
            }
            let annotated = lang != "en" || rng.gen::<f64>() >= 0.1;
            let ratings: Vec<u8> = if annotated {
                (0..5)
                    .map(|_| (3.0 + 2.0 * base + uniform(rng, -1.0, 1.0)).round().clamp(1.0, 5.0) as u8)
                    .collect()
            } else {
                Vec::new()
            };
            let crowd = annotated.then(|| {
                let sum: u32 = ratings.iter().map(|&r| r as u32).sum();
                (sum as f64 - 15.0) / 10.0
            });
            let auto = (pol * 0.9 + uniform(rng, -0.2, 0.2)).clamp(-1.0, 1.0);
            let english = format!("{en_a} {en_n}");
            let pivot = match lang {
                "en" => Some(english),
                _ if rng.gen::<f64>() < 0.08 => None,
                _ => Some(english),
            };
            out.push(SynthConcept {
                language: lang,
                adj,
                noun,
                surface,
                adjective_field,
                nouns_field,
                crowd,
                ratings,
                auto: (auto * 1000.0).round() / 1000.0,
                pivot,
            });
        }
    }
    out
}

/// Direct sign comparison over the generated concepts, written in the same
/// CSV layout as the `shift-table` command.
fn shift_oracle(concepts: &[SynthConcept]) -> String {
    let english: BTreeMap<String, &SynthConcept> = concepts
        .iter()
        .filter(|c| c.language == "en")
        .map(|c| (c.surface.clone(), c))
        .collect();
    let mut out = String::from(SHIFT_HEADER);
    out.push('\n');
    for lang in ["es", "fr"] {
        let own: Vec<&SynthConcept> = concepts.iter().filter(|c| c.language == lang).collect();
        let mut pairs = Vec::new();
        let mut automatic = 0;
        for c in &own {
            let (Some(a), Some(p)) = (c.crowd, &c.pivot) else {
                continue;
            };
            let Some(e) = english.get(p) else { continue };
            let b = match e.crowd {
                Some(b) => b,
                None => {
                    automatic += 1;
                    e.auto
                }
            };
            pairs.push((a, b));
        }
        for t in SHIFT_THRESHOLDS {
            let mut shifted = 0;
            for &(a, b) in &pairs {
                let opposite = (a > 0.0 && b < 0.0) || (a < 0.0 && b > 0.0);
                if a.abs() > t && b.abs() > t && opposite {
                    shifted += 1;
                }
            }
            let pct = |whole: usize| {
                if whole == 0 {
                    "NA".to_string()
                } else {
                    (100.0 * shifted as f64 / whole as f64).to_string()
                }
            };
            writeln!(
                out,
                "{lang},{t},{},{},{shifted},{},{},{automatic}",
                own.len(),
                pairs.len(),
                pct(pairs.len()),
                pct(own.len())
            )
            .unwrap();
        }
    }
    out
}

/// Column header of shift-table CSV files.
pub const SHIFT_HEADER: &str =
    "language,threshold,total,matched,shifted,shifted_pct_of_matched,shifted_pct_of_all,pivot_automatic";

fn embeddings(rng: &mut ChaCha8Rng, concepts: &[SynthConcept]) -> (String, String) {
    let topics: Vec<Vec<f64>> = Topic::ALL.iter().map(|_| random_vector(rng, 1.0)).collect();
    let sentiment = random_vector(rng, 1.0);
    let adjective_axis = random_vector(rng, 0.5);
    let mut rows: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for &(topic, en, _, _) in NOUNS {
        let t = &topics[Topic::ALL.iter().position(|x| *x == topic).unwrap()];
        let noise = random_vector(rng, 0.35);
        rows.insert(en.to_string(), t.iter().zip(&noise).map(|(a, b)| a + b).collect());
    }
    for &(en, _, _, pol) in ADJECTIVES {
        let noise = random_vector(rng, 0.5);
        let v = (0..DIM)
            .map(|d| pol * sentiment[d] + adjective_axis[d] + noise[d])
            .collect();
        rows.insert(en.to_string(), v);
    }
    for w in FILLER {
        rows.insert(w.to_string(), random_vector(rng, 0.2));
    }
    let mut words = format!("{} {DIM}\n", rows.len());
    for (t, v) in &rows {
        words.push_str(&vector_line(t, v));
        words.push('\n');
    }

    let phrases: BTreeSet<String> = concepts
        .iter()
        .filter(|c| c.language == "en")
        .map(|c| c.english())
        .collect();
    let mut with_anps = rows.clone();
    for p in &phrases {
        let mut it = p.split(' ');
        let (a, n) = (it.next().unwrap(), it.next().unwrap());
        let noise = random_vector(rng, 0.2);
        let v = (0..DIM).map(|d| rows[a][d] + rows[n][d] + noise[d]).collect();
        with_anps.insert(p.replace(' ', "_"), v);
    }
    let mut anp = format!("{} {DIM}\n", with_anps.len());
    for (t, v) in &with_anps {
        anp.push_str(&vector_line(t, v));
        anp.push('\n');
    }
    (words, anp)
}

struct Image {
    id: String,
    language: &'static str,
    topic: Topic,
    tags: Vec<String>,
}

fn images(rng: &mut ChaCha8Rng, concepts: &[SynthConcept]) -> Vec<Image> {
    let mut out = Vec::new();
    for lang in ["en", "es", "fr"] {
        let translated: Vec<&SynthConcept> = concepts
            .iter()
            .filter(|c| c.language == lang && c.pivot.is_some())
            .collect();
        let mut counter = 0;
        for c in &translated {
            let topic = NOUNS[c.noun].0;
            let same: Vec<&&SynthConcept> = translated.iter().filter(|o| NOUNS[o.noun].0 == topic).collect();
            for _ in 0..6 {
                let mut tags = vec![c.pivot.clone().unwrap()];
                let extra = rng.gen_range(1..=3);
                for _ in 0..extra {
                    let other = if rng.gen::<f64>() < 0.75 {
                        same.choose(rng).unwrap()
                    } else {
                        translated.choose(rng).unwrap()
                    };
                    let p = other.pivot.clone().unwrap();
                    if !tags.contains(&p) {
                        tags.push(p);
                    }
                }
                counter += 1;
                out.push(Image {
                    id: format!("{lang}{counter:05}"),
                    language: lang,
                    topic,
                    tags,
                });
            }
        }
    }
    out
}

fn faces(rng: &mut ChaCha8Rng, images: &[Image]) -> String {
    let mut out = String::from("image_id,image_w,image_h,x,y,w,h\n");
    for img in images {
        let (w, h) = if rng.gen::<bool>() {
            (640u32, 480u32)
        } else {
            (480, 640)
        };
        if rng.gen::<f64>() >= img.topic.face_rate() {
            writeln!(out, "{},{w},{h},,,,", img.id).unwrap();
            continue;
        }
        let n = 1 + usize::from(rng.gen::<f64>() < 0.3) + usize::from(rng.gen::<f64>() < 0.1);
        for _ in 0..n {
            let side = rng.gen_range(60..=300u32);
            let x = rng.gen_range(0..=w - side);
            let y = rng.gen_range(0..=h - side);
            writeln!(out, "{},{w},{h},{x},{y},{side},{side}", img.id).unwrap();
        }
    }
    out
}

fn corpus(rng: &mut ChaCha8Rng, concepts: &[SynthConcept]) -> String {
    let phrases: Vec<String> = concepts
        .iter()
        .filter(|c| c.language == "en")
        .map(|c| c.english())
        .collect();
    let mut out = String::new();
    for i in 0..120 {
        let mut words: Vec<String> = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            words.push(FILLER.choose(rng).unwrap().to_string());
            let p = phrases.choose(rng).unwrap();
            words.push(if i % 7 == 0 { p.to_uppercase() } else { p.clone() });
        }
        let sep = if i % 5 == 0 { "  " } else { " " };
        out.push_str(&words.join(sep));
        out.push('\n');
    }
    out
}

const CONFIG: &str = r#"# Pipeline configuration for the bundled synthetic fixture.
# Relative paths resolve against this file's directory.
seed = 42
out = "out"
pivot = "en"

lexicon = "lexicon.tsv"
annotations = "annotations.csv"
dictionary = "dictionary.tsv"
embeddings = "embeddings.txt"
embedding_tokenization = "words"
embedding_window = 5
composition = "sum"
image_tags = "image_tags.tsv"
face_detections = "faces.csv"
corpus = "corpus.txt"

shift_thresholds = [0.0, 0.1, 0.2, 0.3]
sample_cap = 1000
pair_rule = "both_endpoints"

cluster_scheme = "one_stage"
cluster_k = 24
stage_one_groups = 4
sem_pairs_denominator = true
connectivity_mode = "pairs"

portrait_threshold = 0.6
min_face_anps = 8
portrait_k = 6
profile_k_min = 2
profile_k_max = 3
"#;

/// Builds the fixture for `seed`.
pub fn synthetic_fixture(seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let concepts = make_concepts(&mut rng);
    let mut files = BTreeMap::new();

    let mut lexicon = String::from("language\tsurface\tadjective\tnouns\tcrowd_polarity\tauto_polarity\n");
    let mut annotations = String::from("language,surface,worker_id,rating\n");
    let mut dictionary = String::from("language\tsurface\tpivot_surface\n");
    for c in &concepts {
        let crowd = c.crowd.map_or_else(|| "NA".to_string(), fmt_polarity);
        writeln!(
            lexicon,
            "{}\t{}\t{}\t{}\t{crowd}\t{}",
            c.language,
            c.surface,
            c.adjective_field,
            c.nouns_field,
            fmt_polarity(c.auto)
        )
        .unwrap();
        let mut workers: Vec<usize> = (0..12).collect();
        workers.shuffle(&mut rng);
        for (r, w) in c.ratings.iter().zip(&workers) {
            writeln!(annotations, "{},{},{}w{w:02},{r}", c.language, c.surface, c.language).unwrap();
        }
        if c.language != "en" {
            if let Some(p) = &c.pivot {
                writeln!(dictionary, "{}\t{}\t{p}", c.language, c.surface).unwrap();
            }
        }
    }
    let (words, anp) = embeddings(&mut rng, &concepts);
    let imgs = images(&mut rng, &concepts);
    let mut tags = String::from("image_id\tlanguage\ttags\n");
    for i in &imgs {
        writeln!(tags, "{}\t{}\t{}", i.id, i.language, i.tags.join("|")).unwrap();
    }

    files.insert("lexicon.tsv", lexicon);
    files.insert("annotations.csv", annotations);
    files.insert("dictionary.tsv", dictionary);
    files.insert("embeddings.txt", words);
    files.insert("embeddings_anp.txt", anp);
    files.insert("image_tags.tsv", tags);
    files.insert("faces.csv", faces(&mut rng, &imgs));
    files.insert("corpus.txt", corpus(&mut rng, &concepts));
    files.insert("pipeline.toml", CONFIG.to_string());
    files.insert("expected_shift_table.csv", shift_oracle(&concepts));
    Fixture { files }
}
