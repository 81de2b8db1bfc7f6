use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture_config() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic/pipeline.toml")
}

fn cli(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_visual-concepts"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn with_config<'a>(out: &'a str, extra: &[&'a str]) -> Vec<String> {
    let mut args = vec![
        "--config".to_string(),
        fixture_config().to_string_lossy().into_owned(),
        "--out".to_string(),
        out.to_string(),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    args
}

fn run_ok(args: &[String], cwd: &Path) {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let out = cli(&refs, cwd);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn error_of(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().unwrap_or_default();
    serde_json::from_str(line).unwrap_or_else(|_| panic!("stderr is not an error object: {text}"))
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

#[test]
fn stages_compose_into_the_same_bundle_as_run() {
    let tmp = tempfile::tempdir().unwrap();
    run_ok(&with_config("whole", &["run"]), tmp.path());
    for stage in [
        "ingest-check",
        "translate",
        "shift-table",
        "compose",
        "cooc-build",
        "relatedness",
        "cluster",
        "consistency",
        "connectivity",
        "portrait",
        "anp-tokenize",
        "report",
    ] {
        run_ok(&with_config("staged", &[stage]), tmp.path());
    }
    assert_eq!(files(&tmp.path().join("whole")), files(&tmp.path().join("staged")));
}

#[test]
fn every_artifact_carries_hash_and_seed() {
    let tmp = tempfile::tempdir().unwrap();
    run_ok(&with_config("o", &["--seed", "9", "run"]), tmp.path());
    let bundle = files(&tmp.path().join("o"));
    let manifest: serde_json::Value = serde_json::from_slice(&bundle["manifest.json"]).unwrap();
    let hash = manifest["config_hash"].as_str().unwrap().to_string();
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["config"]["seed"], 9);
    for (name, bytes) in &bundle {
        let text = String::from_utf8(bytes.clone()).unwrap();
        if name.ends_with(".json") {
            let v: serde_json::Value = serde_json::from_str(&text).unwrap();
            assert_eq!(v["config_hash"], hash.as_str(), "{name}");
            assert_eq!(v["seed"], 9, "{name}");
        } else if name != "corpus_anp.txt" {
            let first = text.lines().next().unwrap();
            assert_eq!(first, format!("# config_hash={hash},seed=9"), "{name}");
        }
    }
    let listed: Vec<&str> = manifest["artifacts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a["name"].as_str().unwrap())
        .collect();
    assert!(listed.contains(&"corpus_anp.txt"));
    assert_eq!(listed.len(), bundle.len() - 1);
}

#[test]
fn command_line_overrides_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    run_ok(&with_config("a", &["translate"]), tmp.path());
    run_ok(&with_config("b", &["--set", "seed=43", "translate"]), tmp.path());
    let a = std::fs::read_to_string(tmp.path().join("a/translations.tsv")).unwrap();
    let b = std::fs::read_to_string(tmp.path().join("b/translations.tsv")).unwrap();
    assert!(a.starts_with("# config_hash=") && a.lines().next().unwrap().ends_with(",seed=42"));
    assert!(b.lines().next().unwrap().ends_with(",seed=43"));
    assert_ne!(a.lines().next(), b.lines().next());
    assert_eq!(
        a.lines().skip(1).collect::<Vec<_>>(),
        b.lines().skip(1).collect::<Vec<_>>()
    );
}

#[test]
fn two_stage_schemes_run() {
    let tmp = tempfile::tempdir().unwrap();
    run_ok(&with_config("o", &["translate"]), tmp.path());
    run_ok(&with_config("o", &["compose"]), tmp.path());
    for scheme in ["two_stage_noun", "two_stage_adj"] {
        let set = format!("cluster_scheme={scheme}");
        run_ok(&with_config("o", &["--set", &set, "cluster"]), tmp.path());
        let summary: serde_json::Value =
            serde_json::from_slice(&std::fs::read(tmp.path().join("o/clustering.json")).unwrap()).unwrap();
        assert_eq!(summary["scheme"], scheme);
        assert_eq!(summary["clusters"], 24);
        let groups = summary["groups"].as_array().unwrap();
        let budget: u64 = groups.iter().map(|g| g["k"].as_u64().unwrap()).sum();
        assert_eq!(budget, 24);
    }
}

#[test]
fn errors_map_to_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();

    let out = cli(&["--set", "clusterk=3", "run"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_of(&out)["error"]["code"], "CONFIG");

    let args = with_config("o", &["relatedness"]);
    let out = cli(&args.iter().map(String::as_str).collect::<Vec<_>>(), tmp.path());
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_of(&out)["error"]["code"], "MISSING_ARTIFACT");

    run_ok(&with_config("o", &["translate"]), tmp.path());
    run_ok(&with_config("o", &["compose"]), tmp.path());
    let args = with_config("o", &["relatedness"]);
    let out = cli(&args.iter().map(String::as_str).collect::<Vec<_>>(), tmp.path());
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(error_of(&out)["error"]["code"], "NO_PAIRS");

    let args = with_config("o", &["--set", "cluster_k=5000", "cluster"]);
    let out = cli(&args.iter().map(String::as_str).collect::<Vec<_>>(), tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_of(&out)["error"]["code"], "INVALID_K");

    let args = with_config("o", &["--set", "min_face_anps=1000", "portrait"]);
    let out = cli(&args.iter().map(String::as_str).collect::<Vec<_>>(), tmp.path());
    assert_eq!(error_of(&out)["error"]["code"], "EMPTY_SELECTION");
}

#[test]
fn fixture_command_matches_bundled_fixture() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cli(&["fixture", "fx"], tmp.path());
    assert!(out.status.success());
    let bundled = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic");
    for (name, bytes) in files(&tmp.path().join("fx")) {
        assert_eq!(std::fs::read(bundled.join(&name)).unwrap(), bytes, "{name}");
    }
}

#[test]
fn shift_table_matches_the_fixture_oracle() {
    let tmp = tempfile::tempdir().unwrap();
    run_ok(&with_config("o", &["translate"]), tmp.path());
    run_ok(&with_config("o", &["shift-table"]), tmp.path());
    let got = std::fs::read_to_string(tmp.path().join("o/shift_table.csv")).unwrap();
    let expected = std::fs::read_to_string(fixture_config().with_file_name("expected_shift_table.csv")).unwrap();
    let body: Vec<&str> = got.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body, expected.lines().collect::<Vec<_>>());
}
