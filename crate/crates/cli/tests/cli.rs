// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn facecue(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_facecue")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn spec(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs").join(name).display().to_string()
}

/// A small synthetic corpus with a config listing table4.
fn corpus(seed: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let out = facecue(&["generate-synthetic", "--small", "--seed", seed, "--out", ".", "--spec", &spec("table4.spec")], dir.path());
    assert!(out.status.success(), "{}", text(&out.stderr));
    dir
}

#[test]
fn validate_clean_corpus() {
    let dir = corpus("1");
    let out = facecue(&["--config", "config.toml", "validate"], dir.path());
    assert!(out.status.success(), "{}", text(&out.stdout));
    assert!(text(&out.stdout).trim_end().ends_with("0 errors"));
    assert!(dir.path().join("out/validation_report.txt").exists());
}

#[test]
fn validate_reports_corrupt_line() {
    let dir = corpus("2");
    let frames = dir.path().join("frames.jsonl");
    let mut lines: Vec<String> = std::fs::read_to_string(&frames).unwrap().lines().map(str::to_string).collect();
    lines[5] = "{\"meeting_id\": \"x\", \"t\": ".into();
    std::fs::write(&frames, lines.join("\n") + "\n").unwrap();
    let out = facecue(&["--config", "config.toml", "validate"], dir.path());
    assert!(!out.status.success());
    let report = text(&out.stdout);
    assert!(report.contains("frames.jsonl:6"), "{report}");
}

#[test]
fn unknown_spec_column_is_named() {
    let dir = corpus("3");
    let bad = dir.path().join("bad.spec");
    let body = std::fs::read_to_string(spec("table4.spec")).unwrap().replacen("\"hawkish\"", "\"hawkishness\"", 1);
    std::fs::write(&bad, body).unwrap();
    let out = facecue(&["--config", "config.toml", "regress", "--spec", "bad.spec"], dir.path());
    assert!(!out.status.success());
    assert!(text(&out.stderr).contains("hawkishness"), "{}", text(&out.stderr));
}

fn split_rows(csv: &str) -> (Vec<String>, Vec<String>) {
    let body: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).skip(2).collect();
    let coef = body.iter().filter(|l| !l.starts_with(',')).map(|l| l.replace('*', "")).collect();
    let se = body.iter().filter(|l| l.starts_with(",(")).map(|l| l.to_string()).collect();
    (coef, se)
}

#[test]
fn se_override_changes_only_standard_errors() {
    let dir = corpus("4");
    let run = |extra: &[&str], out: &str| -> String {
        let mut args = vec!["--config", "config.toml", "--out", out, "regress"];
        args.extend_from_slice(extra);
        let o = facecue(&args, dir.path());
        assert!(o.status.success(), "{}", text(&o.stderr));
        std::fs::read_to_string(dir.path().join(out).join("table4.csv")).unwrap()
    };
    let (coef_a, se_a) = split_rows(&run(&[], "a"));
    let (coef_b, se_b) = split_rows(&run(&["--se", "hc1"], "b"));
    assert!(!coef_a.is_empty());
    assert_eq!(coef_a, coef_b);
    assert_ne!(se_a, se_b);
}

#[test]
fn empty_frames_yield_empty_panel() {
    let dir = corpus("5");
    std::fs::write(dir.path().join("frames.jsonl"), "").unwrap();
    let out = facecue(&["--config", "config.toml", "build-panel"], dir.path());
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert!(text(&out.stderr).contains("panel is empty"));
    let panel = std::fs::read_to_string(dir.path().join("out/panel.csv")).unwrap();
    assert_eq!(panel.lines().filter(|l| !l.starts_with('#')).count(), 1);
}

#[test]
fn three_clip_pairs_give_three_columns() {
    let dir = tempfile::tempdir().unwrap();
    let clip = |name: &str, v: [f64; 7]| -> PathBuf {
        let keys = ["angry", "disgust", "fear", "happy", "sad", "surprise", "neutral"];
        let mut s = String::new();
        for i in 0..5 {
            let scores: Vec<String> = keys.iter().zip(v).map(|(k, x)| format!("\"{k}\": {x}")).collect();
            s.push_str(&format!(
                "{{\"meeting_id\": \"{name}\", \"t\": \"2020-01-01T00:00:0{i}Z\", \"face_detected\": true, \"chair_similarity\": 0.9, {}}}\n",
                scores.join(", ")
            ));
        }
        let p = dir.path().join(format!("{name}.jsonl"));
        std::fs::write(&p, s).unwrap();
        p
    };
    let mut args: Vec<String> = vec!["--out".into(), "res".into(), "compare-deepfake".into()];
    for (k, shift) in [1.0, 2.0, 3.0].into_iter().enumerate() {
        let o = clip(&format!("o{k}"), [10.0, 10.0, 10.0, 20.0, 10.0, 10.0, 30.0]);
        let s = clip(&format!("s{k}"), [10.0 + shift, 10.0 - shift, 10.0, 20.0 + 2.0 * shift, 10.0, 10.0 - shift, 30.0 - shift]);
        args.extend(["--original".into(), o.display().to_string(), "--swapped".into(), s.display().to_string()]);
    }
    let argv: Vec<&str> = args.iter().map(String::as_str).collect();
    let out = facecue(&argv, dir.path());
    assert!(out.status.success(), "{}", text(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("res/deepfake_deltas.csv")).unwrap();
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header.split(',').filter(|c| c.starts_with("normalized_")).count(), 3, "{header}");
    let table = text(&out.stdout);
    let angry = table.lines().find(|l| l.starts_with("angry")).unwrap();
    assert_eq!(angry.split_whitespace().count(), 4, "{angry}");
}

#[test]
fn mismatched_clip_lists_fail() {
    let dir = tempfile::tempdir().unwrap();
    let out = facecue(&["--out", "r", "compare-deepfake", "--original", "a", "--original", "b", "--swapped", "c"], dir.path());
    assert!(!out.status.success());
    assert!(text(&out.stderr).contains("--swapped"));
}
