use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use visual_concepts::clustering::{
    allocate, cluster_one_stage, combined_consistency, connectivity_matrix, kmeans, semantic_consistency,
    sentiment_consistency, ConnectivityMode, ConsistencyReport, KMeansOptions, Metric,
};
use visual_concepts::embed::anp_tokenize_corpus;
use visual_concepts::ingest::{Dictionary, FaceBox, FaceDetectionRecord, ImageTagRecord};
use visual_concepts::model::{validate_concept, ConceptKey, Language, Lexicon, RawConcept};
use visual_concepts::pivot::{
    apply_translations, exact_match_index, sentiment_shift_table, ShiftOptions, TranslationClient,
};
use visual_concepts::portrait::{filter_face_anps, portrait_scores};
use visual_concepts::relatedness::{build_cooccurrence, relatedness_mse, Scope};

fn lang(code: &str) -> Language {
    Language::parse(code).unwrap()
}

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("tag {i:02}")).collect()
}

fn images(n: usize, picks: &[Vec<usize>]) -> Vec<ImageTagRecord> {
    let names = names(n);
    picks
        .iter()
        .enumerate()
        .map(|(id, p)| {
            let tags: BTreeSet<usize> = p.iter().map(|i| i % n).collect();
            ImageTagRecord {
                image_id: format!("i{id}"),
                language: lang("en"),
                anp_tags: tags.into_iter().map(|i| names[i].clone()).collect(),
            }
        })
        .collect()
}

fn tag_sets() -> impl Strategy<Value = (usize, Vec<Vec<usize>>)> {
    (3usize..10).prop_flat_map(|n| (Just(n), prop::collection::vec(prop::collection::vec(0..n, 1..4), 1..25)))
}

fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    1.0 - dot / (na * nb)
}

fn vectors(n: usize, seed: &[f64]) -> BTreeMap<String, Vec<f64>> {
    names(n)
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let v: Vec<f64> = (0..3)
                .map(|d| seed[(i * 3 + d) % seed.len()] + 0.01 * (i + d) as f64)
                .collect();
            (s, v)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cooccurrence_is_symmetric_with_zero_diagonal((n, picks) in tag_sets()) {
        let (m, _) = build_cooccurrence(&images(n, &picks), names(n).iter().map(String::as_str), 1000);
        for i in 0..m.len() {
            prop_assert_eq!(m.count(i, i), 0);
            for j in 0..m.len() {
                prop_assert_eq!(m.count(i, j), m.count(j, i));
            }
        }
    }

    #[test]
    fn mse_bounds_and_lower_triangle(
        (n, picks) in tag_sets(),
        seed in prop::collection::vec(-1.0f64..1.0, 30),
    ) {
        let tags = images(n, &picks);
        let (m, _) = build_cooccurrence(&tags, names(n).iter().map(String::as_str), 1000);
        let v = vectors(n, &seed);
        let Ok(r) = relatedness_mse(&v, &m, &Scope::All) else { return Ok(()) };
        prop_assert!((0.0..=4.0).contains(&r.mse));

        let keys = m.concepts();
        let mut total = 0.0;
        let mut pairs = 0;
        for i in 0..m.len() {
            for j in 0..i {
                if m.count(i, j) == 0 {
                    continue;
                }
                let dh = cosine_distance(&m.dense_row(i), &m.dense_row(j));
                let dc = cosine_distance(&v[&keys[i]], &v[&keys[j]]);
                total += (dc - dh) * (dc - dh);
                pairs += 1;
            }
        }
        prop_assert_eq!(pairs, r.pairs);
        prop_assert!((total / pairs as f64 - r.mse).abs() <= 1e-12);
    }

    #[test]
    fn isolated_concept_changes_nothing(
        (n, picks) in tag_sets(),
        seed in prop::collection::vec(-1.0f64..1.0, 30),
    ) {
        let tags = images(n, &picks);
        let mut v = vectors(n, &seed);
        let base_names = names(n);
        let (m, _) = build_cooccurrence(&tags, base_names.iter().map(String::as_str), 1000);
        let Ok(before) = relatedness_mse(&v, &m, &Scope::All) else { return Ok(()) };

        let mut more = base_names.clone();
        more.push("never tagged".into());
        v.insert("never tagged".into(), vec![1.0, -2.0, 0.5]);
        let (m2, _) = build_cooccurrence(&tags, more.iter().map(String::as_str), 1000);
        let after = relatedness_mse(&v, &m2, &Scope::All).unwrap();
        prop_assert_eq!(before.mse, after.mse);
        prop_assert_eq!(before.pairs, after.pairs);
    }

    #[test]
    fn allocation_meets_budget(sizes in prop::collection::vec(1usize..200, 1..12), frac in 0.0f64..=1.0) {
        let n: usize = sizes.iter().sum();
        let k_total = sizes.len() + ((n - sizes.len()) as f64 * frac) as usize;
        let k = allocate(&sizes, k_total).unwrap();
        prop_assert_eq!(k.iter().sum::<usize>(), k_total);
        prop_assert!(k.iter().zip(&sizes).all(|(&k, &s)| k >= 1 && k <= s));
    }

    #[test]
    fn one_stage_assigns_every_concept_once(
        points in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 2..40),
        k_frac in 0.0f64..1.0,
        seed in any::<u64>(),
    ) {
        let map: BTreeMap<ConceptKey, Vec<f64>> = points
            .iter()
            .enumerate()
            .filter(|(_, p)| p.iter().any(|x| x.abs() > 1e-6))
            .map(|(i, p)| (ConceptKey::new(lang(["en", "es", "fr"][i % 3]), &format!("c {i}")), p.clone()))
            .collect();
        prop_assume!(map.len() >= 2);
        let k = 1 + ((map.len() - 1) as f64 * k_frac) as usize;
        let c = cluster_one_stage(&map, k, seed).unwrap();
        prop_assert_eq!(c.len(), map.len());
        let clusters = c.clusters();
        prop_assert!(clusters.iter().all(|m| !m.is_empty()));
        prop_assert_eq!(clusters.iter().map(Vec::len).sum::<usize>(), map.len());

        // canonical order: insertion order of the map does not matter
        let reversed: BTreeMap<ConceptKey, Vec<f64>> = map.iter().rev().map(|(k, v)| (k.clone(), v.clone())).collect();
        prop_assert_eq!(cluster_one_stage(&reversed, k, seed).unwrap().assignments, c.assignments.clone());

        let m = connectivity_matrix(&c, ConnectivityMode::Concepts);
        for a in 0..m.languages.len() {
            for b in 0..m.languages.len() {
                prop_assert_eq!(m.matrix[a][b], m.matrix[b][a]);
            }
        }
    }

    #[test]
    fn spherical_kmeans_ignores_point_scale(
        points in prop::collection::vec(prop::collection::vec(0.1f64..1.0, 3), 3..30),
        scales in prop::collection::vec(0.01f64..100.0, 30),
        seed in any::<u64>(),
    ) {
        let scaled: Vec<Vec<f64>> = points
            .iter()
            .zip(&scales)
            .map(|(p, s)| p.iter().map(|x| x * s).collect())
            .collect();
        let opts = KMeansOptions::new(2.min(points.len()), seed).metric(Metric::Cosine);
        let a = kmeans(&points, &opts).unwrap();
        let b = kmeans(&scaled, &opts).unwrap();
        prop_assert_eq!(a.assignments, b.assignments);
    }

    #[test]
    fn consistency_report_invariants(
        labels in prop::collection::vec(0usize..6, 2..40),
        pols in prop::collection::vec(-1.0f64..=1.0, 40),
        (n, picks) in tag_sets(),
    ) {
        let tag_names = names(n);
        let keys: Vec<ConceptKey> = (0..labels.len()).map(|i| ConceptKey::new(lang("en"), &format!("k {i:02}"))).collect();
        let clustering = visual_concepts::clustering::Clustering::from_assignments(
            visual_concepts::clustering::Scheme::OneStage,
            0,
            keys.iter().cloned().zip(labels.iter().copied()),
        );
        let pivots: BTreeMap<ConceptKey, String> =
            keys.iter().enumerate().map(|(i, k)| (k.clone(), tag_names[i % n].clone())).collect();
        let polarities: BTreeMap<ConceptKey, f64> = keys.iter().cloned().zip(pols.iter().copied()).collect();
        let (cooc, _) = build_cooccurrence(&images(n, &picks), tag_names.iter().map(String::as_str), 1000);
        let (Ok(sem), Ok(sen)) = (semantic_consistency(&clustering, &pivots, &cooc), sentiment_consistency(&clustering, &polarities)) else {
            return Ok(());
        };
        let report = ConsistencyReport::new(&sem, sen, true);
        prop_assert_eq!(report.mu, (report.sem_c + report.sen_c) / 2.0);
        prop_assert_eq!(report.mu, combined_consistency(sem.sem_c, sen));
        prop_assert!(report.sem_c >= 0.0 && report.sen_c >= 0.0);
        prop_assert!(report.clusters <= clustering.k);
    }

    #[test]
    fn shift_counts_are_ordered(
        rows in prop::collection::vec((prop::option::of(-10i32..=10), -10i32..=10, prop::option::of(0usize..12)), 1..30),
        english in prop::collection::vec((prop::option::of(-10i32..=10), -10i32..=10), 12),
    ) {
        let en = lang("en");
        let de = lang("de");
        let mut lexicons = BTreeMap::new();
        let mut en_lex = Lexicon::new(en.clone());
        for (i, (crowd, auto)) in english.iter().enumerate() {
            en_lex.insert(validate_concept(&RawConcept {
                language: "en".into(),
                surface: format!("adj{i} noun{i}"),
                adjective: format!("adj{i}"),
                nouns: format!("noun{i}"),
                crowd_polarity: crowd.map(|c| c as f64 / 10.0),
                auto_polarity: Some(*auto as f64 / 10.0),
                ..Default::default()
            }).unwrap()).unwrap();
        }
        let mut de_lex = Lexicon::new(de.clone());
        let mut dictionary = Dictionary::default();
        for (i, (crowd, auto, target)) in rows.iter().enumerate() {
            let surface = format!("wort{i} ding{i}");
            de_lex.insert(validate_concept(&RawConcept {
                language: "de".into(),
                surface: surface.clone(),
                adjective: format!("wort{i}"),
                nouns: format!("ding{i}"),
                crowd_polarity: crowd.map(|c| c as f64 / 10.0),
                auto_polarity: Some(*auto as f64 / 10.0),
                ..Default::default()
            }).unwrap()).unwrap();
            if let Some(t) = target {
                dictionary.insert(de.clone(), &surface, &format!("adj{t} noun{t}"));
            }
        }
        lexicons.insert(en.clone(), en_lex);
        lexicons.insert(de, de_lex);
        let client = TranslationClient::dictionary(en.clone(), dictionary);
        apply_translations(&mut lexicons, &client);
        let index = exact_match_index(&lexicons, &client);

        let translated: usize = lexicons.values().flat_map(|l| l.concepts()).filter(|c| c.pivot_surface.is_some()).count();
        prop_assert_eq!(index.groups.values().map(Vec::len).sum::<usize>(), translated);
        let mut seen = BTreeSet::new();
        for members in index.groups.values() {
            for k in members {
                prop_assert!(seen.insert(k.clone()));
            }
        }

        let report = sentiment_shift_table(&lexicons, &index, &lexicons[&en], &[0.0, 0.1, 0.2, 0.3, 0.5], ShiftOptions::default());
        for w in report.windows(2) {
            prop_assert!(w[1].shifted <= w[0].shifted);
        }
        for r in &report {
            prop_assert!(r.shifted <= r.matched && r.matched <= r.total);
            for p in [r.shifted_pct_of_matched, r.shifted_pct_of_all].into_iter().flatten() {
                prop_assert!((0.0..=100.0).contains(&p));
            }
        }
    }

    #[test]
    fn portrait_scores_bounded_and_threshold_monotone(
        faces in prop::collection::vec(0usize..3, 1..40),
        membership in prop::collection::vec(0usize..8, 40),
        t1 in 0.0f64..1.0,
        t2 in 0.0f64..1.0,
    ) {
        let detections: Vec<FaceDetectionRecord> = faces
            .iter()
            .enumerate()
            .map(|(i, &f)| FaceDetectionRecord {
                image_id: format!("i{i}"),
                image_width: 100,
                image_height: 100,
                boxes: (0..f).map(|b| FaceBox { x: b as u32 * 10, y: 0, w: 10, h: 10 }).collect(),
            })
            .collect();
        let mut images: BTreeMap<ConceptKey, BTreeSet<String>> = BTreeMap::new();
        for (i, &c) in membership.iter().take(faces.len()).enumerate() {
            let key = ConceptKey::new(lang(["en", "es"][c % 2]), &format!("concept {c}"));
            images.entry(key).or_default().insert(format!("i{i}"));
        }
        let scores = portrait_scores(&detections, &images);
        prop_assert!(scores.scores.values().all(|s| (0.0..=1.0).contains(s)));
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let count = |t| filter_face_anps(&scores.scores, t, 0).map_or(0, |s| s.anps.len());
        prop_assert!(count(hi) <= count(lo));
    }

    #[test]
    fn anp_tokenization_is_idempotent(
        words in prop::collection::vec(prop::sample::select(vec!["Happy", "dog", "old", "city", "runs", "x"]), 0..12),
        gaps in prop::collection::vec(prop::sample::select(vec![" ", "  ", "\t"]), 12),
    ) {
        let mut line = String::new();
        for (i, w) in words.iter().enumerate() {
            if i > 0 {
                line.push_str(gaps[i]);
            }
            line.push_str(w);
        }
        let anps = ["happy dog", "old city", "city runs", "dog runs x"];
        let (once, _) = anp_tokenize_corpus(&[line.as_str()], &anps);
        let (twice, stats) = anp_tokenize_corpus(&once, &anps);
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(stats.replacements, 0);
        // joining never adds, drops or reorders words
        let fold = |s: &str| s.split(|c: char| c.is_whitespace() || c == '_').filter(|w| !w.is_empty()).map(str::to_lowercase).collect::<Vec<_>>();
        prop_assert_eq!(fold(&once[0]), fold(&line));
    }
}
