//! Drives the `gca` binary end to end.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gca(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gca"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = gca(dir, args);
    assert!(
        out.status.success(),
        "gca {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn chat_script() -> &'static str {
    r#"{"group_id": "demo", "words_per_turn": 3, "turns": [
        {"speaker": "a", "behavior": "new-topic"},
        {"speaker": "b", "behavior": "echo-previous"},
        {"speaker": "c", "behavior": "new-topic"},
        {"speaker": "a", "behavior": "echo-self"},
        {"speaker": "b", "behavior": "echo-previous"},
        {"speaker": "c", "behavior": "silent-word"}
    ]}"#
}

#[test]
fn blobs_cluster_predict_and_agree() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "--seed",
            "3",
            "synth",
            "blobs",
            "--per-cluster",
            "40",
            "-o",
            "blobs.csv",
        ],
    );
    ok(
        d,
        &[
            "cluster",
            "--profiles",
            "blobs.csv",
            "--k",
            "6",
            "--no-normalize",
            "-o",
            "model.json",
            "--assignments",
            "fit.csv",
        ],
    );
    let model = fs::read_to_string(d.join("model.json")).unwrap();
    assert!(model.contains("\"tool_version\"") && model.contains("\"centroids\""));

    let out = ok(
        d,
        &[
            "predict",
            "--model",
            "model.json",
            "--profiles",
            "blobs.csv",
            "--labels",
            "label",
            "-o",
            "pred.csv",
        ],
    );
    let agr: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(agr["ari"].as_f64().unwrap() > 0.7, "{agr}");

    // Predicting the training rows reproduces the fitted clusters.
    let out = ok(d, &["agree", "--a", "fit.csv", "--b", "pred.csv"]);
    let agr: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(agr["ari"].as_f64().unwrap(), 1.0);

    let out = ok(
        d,
        &[
            "cluster",
            "select-k",
            "--profiles",
            "blobs.csv",
            "--kmin",
            "2",
            "--kmax",
            "7",
            "--no-normalize",
        ],
    );
    let sel: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(sel["recommended"].as_u64().is_some());

    ok(
        d,
        &["report", "--assignments", "fit.csv", "-o", "groups.json"],
    );
    assert!(fs::read_to_string(d.join("groups.json"))
        .unwrap()
        .contains("\"diversity\""));
}

#[test]
fn validation_floor_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &["synth", "blobs", "--per-cluster", "15", "-o", "blobs.csv"],
    );
    let args = [
        "validate",
        "--profiles",
        "blobs.csv",
        "--bootstrap",
        "5",
        "--no-normalize",
        "-o",
        "report.json",
    ];
    ok(d, &args);
    let mut strict = args.to_vec();
    strict.extend(["--min-silhouette", "0.99"]);
    let out = gca(d, &strict);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("silhouette"));
}

#[test]
fn missing_input_exits_with_2_and_names_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("chat.csv"),
        "group_id,person_id,chat_time,chat_text\ng,a,,hi there\n",
    )
    .unwrap();
    let out = gca(
        d,
        &[
            "measures",
            "--space",
            "absent.bin",
            "--transcripts",
            "chat.csv",
            "-o",
            "p.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.bin"));

    fs::write(d.join("bad.csv"), "group,who,text\nx,y,z\n").unwrap();
    let out = gca(d, &["ingest", "--transcripts", "bad.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("group_id"));
}

#[test]
fn scripted_chat_through_measures() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("script.json"), chat_script()).unwrap();
    ok(
        d,
        &[
            "synth",
            "chat",
            "--script",
            "script.json",
            "-o",
            "chat.csv",
            "--space",
            "space.bin",
        ],
    );
    let summary: serde_json::Value =
        serde_json::from_str(&ok(d, &["ingest", "--transcripts", "chat.csv"])).unwrap();
    assert_eq!(summary["contributions"], 6);
    assert_eq!(summary["participants"], 3);
    ok(
        d,
        &[
            "measures",
            "--space",
            "space.bin",
            "--transcripts",
            "chat.csv",
            "--window",
            "3",
            "-o",
            "profiles.csv",
        ],
    );
    let text = fs::read_to_string(d.join("profiles.csv")).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("group_id,participant_id,participation"));
}

#[test]
fn space_and_topics_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let docs = d.join("docs");
    fs::create_dir(&docs).unwrap();
    let texts = [
        "cells divide and proteins fold",
        "proteins and enzymes in cells",
        "the striker scored a goal",
        "the referee stopped the match after the goal",
    ];
    for (i, t) in texts.iter().enumerate() {
        fs::write(docs.join(format!("d{i}.txt")), t).unwrap();
    }
    fs::write(
        d.join("chat.csv"),
        "group_id,person_id,chat_time,chat_text\ng1,a,,do cells have proteins\ng1,b,,enzymes fold proteins\n",
    )
    .unwrap();
    let out = ok(
        d,
        &[
            "space",
            "build",
            "--docs",
            "docs",
            "--transcripts",
            "chat.csv",
            "--dims",
            "3",
            "-o",
            "space.bin",
            "--export-json",
            "space.json",
        ],
    );
    let info: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(info["dims"], 3);
    assert!(d.join("space.json").exists());

    ok(
        d,
        &[
            "--seed",
            "5",
            "topics",
            "fit",
            "--docs",
            "docs",
            "--k",
            "2",
            "--iterations",
            "50",
            "-o",
            "lda.bin",
        ],
    );
    let words = ok(
        d,
        &["topics", "top-words", "--model", "lda.bin", "--n", "3"],
    );
    assert_eq!(words.lines().count(), 2);
    ok(
        d,
        &[
            "topics",
            "relevance",
            "--model",
            "lda.bin",
            "--relevant",
            "0",
            "--transcripts",
            "chat.csv",
            "-o",
            "rel.csv",
        ],
    );
    let rel = fs::read_to_string(d.join("rel.csv")).unwrap();
    assert!(rel.lines().nth(1).unwrap().starts_with("g1,"));
}

#[test]
fn pipeline_run_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut chat = String::from("group_id,person_id,chat_time,chat_text\n");
    let words = [
        "force", "mass", "energy", "lunch", "movie", "agree", "maybe", "why",
    ];
    for g in 0..4 {
        for t in 0..16usize {
            let who = (t * 7 + g) % 3;
            let text: Vec<&str> = (0..1 + t % 4)
                .map(|i| words[(t * 3 + i * 5 + g) % 8])
                .collect();
            chat.push_str(&format!("g{g},s{g}{who},,{}\n", text.join(" ")));
        }
    }
    fs::write(d.join("chat.csv"), chat).unwrap();
    fs::write(
        d.join("gca.toml"),
        "transcripts = \"chat.csv\"\noutput_dir = \"out\"\ndims = 4\nwindow = 5\nk = 3\nrestarts = 4\nbootstrap = 4\n",
    )
    .unwrap();
    let out = ok(
        d,
        &["--config", "gca.toml", "--threads", "1", "pipeline", "run"],
    );
    let summary: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(summary["n_groups"], 4);
    for f in [
        "manifest.json",
        "profiles.csv",
        "model.json",
        "roles.csv",
        "report.json",
        "groups.json",
    ] {
        assert!(d.join("out").join(f).exists(), "{f}");
    }

    let out = gca(d, &["pipeline", "run"]);
    assert_eq!(out.status.code(), Some(2));
}
