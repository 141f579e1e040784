//! End-to-end tests of the n2t binary: exit codes, output formats, config
//! layering, and determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_n2t"))
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn gazetteer() -> String {
    fixtures().join("gazetteer_mini.tsv").display().to_string()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn ingest_reports_fixture_counts() {
    let out = run(&["ingest", "--gazetteer", &gazetteer()]);
    assert!(out.status.success(), "{}", stderr_of(&out));
    let stdout = stdout_of(&out);
    assert!(stdout.contains("entries: 500"), "{stdout}");
    assert!(stdout.contains("skipped lines: 0"), "{stdout}");
}

#[test]
fn ingest_missing_file_exits_2() {
    let out = run(&["ingest", "--gazetteer", "/nonexistent/file.tsv"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr_of(&out));
}

#[test]
fn ingest_without_gazetteer_exits_2() {
    let out = run(&["ingest"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("--gazetteer"));
}

#[test]
fn ingest_all_malformed_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.tsv");
    std::fs::write(&path, "not\ta\tvalid\tline\nanother bad line\n").unwrap();
    let out = run(&["ingest", "--gazetteer", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr_of(&out));
    assert!(stderr_of(&out).contains("no valid entries"));
}

#[test]
fn extract_writes_geojson_to_stdout() {
    let narrative = fixtures().join("corpus/aegean_crossing.txt");
    let out = run(&[
        "extract",
        narrative.to_str().unwrap(),
        "--gazetteer",
        &gazetteer(),
    ]);
    assert!(out.status.success(), "{}", stderr_of(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["type"], "FeatureCollection");
    let features = doc["features"].as_array().unwrap();
    // 14 visits plus one LineString
    assert_eq!(features.len(), 15);
    assert!(stderr_of(&out).contains("14 visits"));
}

#[test]
fn extract_is_byte_deterministic() {
    let narrative = fixtures().join("corpus/desert_route.txt");
    let args = [
        "extract",
        narrative.to_str().unwrap(),
        "--gazetteer",
        &gazetteer(),
    ];
    let a = run(&args.iter().map(|s| &**s).collect::<Vec<_>>());
    let b = run(&args.iter().map(|s| &**s).collect::<Vec<_>>());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn extract_empty_narrative_is_success() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nothing.txt");
    std::fs::write(&path, "nobody went anywhere that year.\n").unwrap();
    let out = run(&[
        "extract",
        path.to_str().unwrap(),
        "--gazetteer",
        &gazetteer(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["features"].as_array().unwrap().len(), 0);
}

#[test]
fn extract_format_by_extension_and_flag() {
    let dir = tempfile::tempdir().unwrap();
    let narrative = fixtures().join("corpus/atlantic_route.txt");
    let svg_path = dir.path().join("route.svg");
    let out = run(&[
        "extract",
        narrative.to_str().unwrap(),
        "--gazetteer",
        &gazetteer(),
        "--out",
        svg_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr_of(&out));
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<?xml"));
    assert!(svg.contains("<polyline"));

    let json_path = dir.path().join("route.data");
    let out = run(&[
        "extract",
        narrative.to_str().unwrap(),
        "--gazetteer",
        &gazetteer(),
        "--format",
        "json",
        "--out",
        json_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(doc["narrative_id"], "atlantic_route");
    assert_eq!(doc["visits"].as_array().unwrap().len(), 8);
}

#[test]
fn extract_all_methods_requires_out_and_writes_four_files() {
    let narrative = fixtures().join("corpus/central_route.txt");
    let out = run(&[
        "extract",
        narrative.to_str().unwrap(),
        "--gazetteer",
        &gazetteer(),
        "--method",
        "all",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("central.geojson");
    let out = run(&[
        "extract",
        narrative.to_str().unwrap(),
        "--gazetteer",
        &gazetteer(),
        "--method",
        "all",
        "--out",
        base.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr_of(&out));
    for slug in ["st", "st-geo", "mwt", "mwt-geo"] {
        let path = dir.path().join(format!("central.{slug}.geojson"));
        assert!(path.is_file(), "missing {}", path.display());
    }
}

#[test]
fn extract_unknown_method_exits_2() {
    let narrative = fixtures().join("corpus/central_route.txt");
    let out = run(&[
        "extract",
        narrative.to_str().unwrap(),
        "--gazetteer",
        &gazetteer(),
        "--method",
        "bogus",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn extract_min_population_drops_small_village() {
    let narrative = fixtures().join("corpus/aegean_crossing.txt");
    let with_default = run(&[
        "extract",
        narrative.to_str().unwrap(),
        "--gazetteer",
        &gazetteer(),
    ]);
    assert!(stdout_of(&with_default).contains("Moria"));
    let with_threshold = run(&[
        "extract",
        narrative.to_str().unwrap(),
        "--gazetteer",
        &gazetteer(),
        "--min-population",
        "15000",
    ]);
    assert!(with_threshold.status.success());
    assert!(!stdout_of(&with_threshold).contains("Moria"));
}

#[test]
fn extract_with_empty_lexicon_warns_and_degrades() {
    let dir = tempfile::tempdir().unwrap();
    let gaz = dir.path().join("single.tsv");
    std::fs::write(
        &gaz,
        "1\tIzmir\tIzmir\t\t38.4\t27.1\tP\tPPL\tTR\t\t\t\t\t\t100\t\t0\tUTC\t2024-01-01\n",
    )
    .unwrap();
    let narrative = dir.path().join("n.txt");
    std::fs::write(&narrative, "They reached Izmir by night.\n").unwrap();
    let out = run(&[
        "extract",
        narrative.to_str().unwrap(),
        "--gazetteer",
        gaz.to_str().unwrap(),
        "--method",
        "mwt-geo",
    ]);
    assert!(out.status.success());
    assert!(stderr_of(&out).contains("lexicon is empty"));
    assert!(stdout_of(&out).contains("Izmir"));
}

#[test]
fn homonym_supplement_extends_the_index() {
    let dir = tempfile::tempdir().unwrap();
    let narrative = dir.path().join("n.txt");
    std::fs::write(&narrative, "They passed through Alep before dawn.\n").unwrap();
    let no_supplement = run(&[
        "extract",
        narrative.to_str().unwrap(),
        "--gazetteer",
        &gazetteer(),
    ]);
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&no_supplement)).unwrap();
    assert_eq!(doc["features"].as_array().unwrap().len(), 0);

    let homonyms = fixtures().join("homonyms.tsv");
    let with_supplement = run(&[
        "extract",
        narrative.to_str().unwrap(),
        "--gazetteer",
        &gazetteer(),
        "--homonyms",
        homonyms.to_str().unwrap(),
    ]);
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&with_supplement)).unwrap();
    let features = doc["features"].as_array().unwrap();
    assert_eq!(features.len(), 1);
    assert_eq!(features[0]["properties"]["geoname_id"], 170063);
}

#[test]
fn evaluate_prints_four_rows_best_first() {
    let out = run(&[
        "evaluate",
        fixtures().join("corpus").to_str().unwrap(),
        "--truth",
        fixtures().join("ground_truth.json").to_str().unwrap(),
        "--gazetteer",
        &gazetteer(),
    ]);
    assert!(out.status.success(), "{}", stderr_of(&out));
    let stdout = stdout_of(&out);
    let rows: Vec<&str> = stdout
        .lines()
        .filter(|l| {
            l.starts_with("ST") || l.starts_with("MWT")
        })
        .collect();
    assert_eq!(rows.len(), 4, "{stdout}");
    assert!(rows[0].starts_with("MWT_GEO_AUG"), "{stdout}");
    assert!(stdout.contains("0.785"), "{stdout}");
}

#[test]
fn evaluate_writes_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let out = run(&[
        "evaluate",
        fixtures().join("corpus").to_str().unwrap(),
        "--truth",
        fixtures().join("ground_truth.json").to_str().unwrap(),
        "--gazetteer",
        &gazetteer(),
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["methods"].as_array().unwrap().len(), 4);
    assert_eq!(report["ilp_reference_f1"], 0.785);
    assert_eq!(report["methods"][0]["method"], "MWT_GEO_AUG");
    assert_eq!(report["methods"][0]["false_positives"], 0);
}

#[test]
fn evaluate_notes_skipped_narratives() {
    let dir = tempfile::tempdir().unwrap();
    let truth_path = dir.path().join("partial.json");
    std::fs::write(
        &truth_path,
        r#"{"aegean_crossing":[{"name":"Aleppo"},{"name":"Athens"}]}"#,
    )
    .unwrap();
    let out = run(&[
        "evaluate",
        fixtures().join("corpus").to_str().unwrap(),
        "--truth",
        truth_path.to_str().unwrap(),
        "--gazetteer",
        &gazetteer(),
    ]);
    assert!(out.status.success());
    let stdout = stdout_of(&out);
    assert!(stdout.contains("skipped (no ground truth)"), "{stdout}");
    assert!(stdout.contains("balkan_route"), "{stdout}");
}

#[test]
fn evaluate_disjoint_truth_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let truth_path = dir.path().join("other.json");
    std::fs::write(&truth_path, r#"{"unrelated":[{"name":"Aleppo"}]}"#).unwrap();
    let out = run(&[
        "evaluate",
        fixtures().join("corpus").to_str().unwrap(),
        "--truth",
        truth_path.to_str().unwrap(),
        "--gazetteer",
        &gazetteer(),
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr_of(&out));
}

#[test]
fn evaluate_malformed_truth_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let truth_path = dir.path().join("broken.json");
    std::fs::write(&truth_path, "[1, 2,\n 3]").unwrap();
    let out = run(&[
        "evaluate",
        fixtures().join("corpus").to_str().unwrap(),
        "--truth",
        truth_path.to_str().unwrap(),
        "--gazetteer",
        &gazetteer(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    // serde_json reports line and column of the failure
    assert!(stderr_of(&out).contains("line"), "{}", stderr_of(&out));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("n2t.toml");
    std::fs::write(
        &config_path,
        format!("gazetteer = \"{}\"\nmethod = \"st\"\n", gazetteer()),
    )
    .unwrap();
    let narrative = fixtures().join("corpus/aegean_crossing.txt");

    // config alone: gazetteer comes from the file, method st
    let out = bin()
        .env("N2T_CONFIG", &config_path)
        .args(["extract", narrative.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr_of(&out));
    assert!(stderr_of(&out).starts_with("ST:"), "{}", stderr_of(&out));

    // flag overrides the config's method
    let out = bin()
        .env("N2T_CONFIG", &config_path)
        .args([
            "extract",
            narrative.to_str().unwrap(),
            "--method",
            "mwt-geo",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(
        stderr_of(&out).starts_with("MWT_GEO_AUG:"),
        "{}",
        stderr_of(&out)
    );
}

#[test]
fn country_policy_flag_changes_resolution() {
    let dir = tempfile::tempdir().unwrap();
    let narrative = dir.path().join("n.txt");
    std::fs::write(&narrative, "He drove all night to Paris and slept.\n").unwrap();
    let default = run(&[
        "extract",
        narrative.to_str().unwrap(),
        "--gazetteer",
        &gazetteer(),
    ]);
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&default)).unwrap();
    assert_eq!(doc["features"][0]["properties"]["geoname_id"], 2988507);

    let us_biased = run(&[
        "extract",
        narrative.to_str().unwrap(),
        "--gazetteer",
        &gazetteer(),
        "--policy",
        "country:US",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&us_biased)).unwrap();
    assert_eq!(doc["features"][0]["properties"]["geoname_id"], 4717560);
}
