use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn newslens(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_newslens"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = newslens(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Generates the scenario and runs ingest and annotate; returns the annotated snapshot path.
fn annotated(dir: &Path) -> std::path::PathBuf {
    let fx = dir.join("fx");
    ok(&["gen-fixture", "--out", s(&fx)]);
    ok(&[
        "ingest",
        "--corpus",
        s(&fx),
        "--outlets",
        s(&fx.join("outlets.txt")),
        "--out",
        s(&dir.join("corpus.json")),
    ]);
    let out = dir.join("annotated.json");
    ok(&[
        "annotate",
        "--snapshot",
        s(&dir.join("corpus.json")),
        "--gazetteer",
        s(&fx.join("gazetteer.toml")),
        "--lexicon",
        s(&fx.join("lexicon.tsv")),
        "--out",
        s(&out),
        "--export",
        s(&dir.join("annotations.jsonl")),
    ]);
    out
}

#[test]
fn hive_prints_candidates_and_layout() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = annotated(dir.path());
    let out = ok(&[
        "hive",
        "--snapshot",
        s(&snapshot),
        "--center",
        "White House",
        "--outlet",
        "Breitbart",
    ]);
    let body: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(body["hive"]["candidates"].as_array().unwrap().len(), 20);
    assert_eq!(body["hive"]["center_sentiment"], "negative");
    assert_eq!(body["layout"]["cells"].as_array().unwrap().len(), 21);

    let file = dir.path().join("hive.json");
    ok(&[
        "hive",
        "--snapshot",
        s(&snapshot),
        "--center",
        "Q35525",
        "--outlet",
        "breitbart",
        "--seg",
        "0.2,0.9",
        "--candidates",
        "6",
        "--out",
        s(&file),
    ]);
    let body: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(body["hive"]["candidates"].as_array().unwrap().len(), 6);
    assert_eq!(body["hive"]["seg"]["sx"], 0.2);

    let bad = newslens(&[
        "hive",
        "--snapshot",
        s(&snapshot),
        "--center",
        "Atlantis",
        "--outlet",
        "CNN",
    ]);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("Atlantis"));
}

#[test]
fn aggregate_writes_three_exports() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = annotated(dir.path());
    let out = dir.path().join("agg");
    ok(&[
        "aggregate",
        "--snapshot",
        s(&snapshot),
        "--outlet",
        "CNN",
        "--out",
        s(&out),
    ]);
    for name in ["topic_stats.jsonl", "cooccurrence.jsonl", "document_sentiment.jsonl"] {
        let text = std::fs::read_to_string(out.join(name)).unwrap();
        assert!(!text.is_empty(), "{name}");
        for line in text.lines() {
            let row: Value = serde_json::from_str(line).unwrap();
            if name == "topic_stats.jsonl" {
                assert_eq!(row["outlet_filter"], "CNN");
            }
        }
    }
    let unknown = newslens(&[
        "aggregate",
        "--snapshot",
        s(&snapshot),
        "--outlet",
        "Daily Planet",
        "--out",
        s(&out),
    ]);
    assert!(!unknown.status.success());
}

#[test]
fn import_reproduces_the_annotated_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = annotated(dir.path());
    let again = dir.path().join("imported.json");
    ok(&[
        "annotate",
        "--snapshot",
        s(&dir.path().join("corpus.json")),
        "--import",
        s(&dir.path().join("annotations.jsonl")),
        "--out",
        s(&again),
    ]);
    assert_eq!(std::fs::read(&snapshot).unwrap(), std::fs::read(&again).unwrap());

    let both = newslens(&[
        "annotate",
        "--snapshot",
        s(&dir.path().join("corpus.json")),
        "--import",
        s(&dir.path().join("annotations.jsonl")),
        "--gazetteer",
        "g.toml",
        "--lexicon",
        "l.tsv",
        "--out",
        s(&again),
    ]);
    assert!(!both.status.success());
}

#[test]
fn ingest_itemizes_rejected_lines() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("in.jsonl");
    let good = r#"{"id":"a1","outlet":"CNN","title":"T","url":"https://x/a1","published_at":"2020-01-01T00:00:00Z","paragraphs":["One sentence here."]}"#;
    let other = r#"{"id":"a1","outlet":"Daily Planet","title":"T","url":"https://x/a1","published_at":"2020-01-01T00:00:00Z","paragraphs":["Other."]}"#;
    std::fs::write(&corpus, format!("{good}\nnot json\n{other}\n")).unwrap();
    let rejects = dir.path().join("rejects.jsonl");
    let out = ok(&[
        "ingest",
        "--corpus",
        s(&corpus),
        "--out",
        s(&dir.path().join("c.json")),
        "--rejects",
        s(&rejects),
    ]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains(":2:") && stderr.contains(":3:"), "{stderr}");
    assert_eq!(std::fs::read_to_string(&rejects).unwrap().lines().count(), 2);
}

#[test]
fn serve_refuses_a_missing_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let out = newslens(&["serve", "--snapshot", s(&dir.path().join("nope.json")), "--port", "0"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not exist"));
}
