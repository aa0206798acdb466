// The whole chain from transcripts to a group report, driven by a config.
//
//     cargo run -p gca --example end_to_end_pipeline

use std::fs;

use gca::pipeline::{run_pipeline, PipelineConfig};
use gca::GcaError;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS: [&str; 24] = [
    "force",
    "mass",
    "energy",
    "velocity",
    "friction",
    "gravity",
    "motion",
    "acceleration",
    "lunch",
    "weekend",
    "movie",
    "game",
    "music",
    "party",
    "weather",
    "homework",
    "answer",
    "question",
    "agree",
    "think",
    "maybe",
    "ok",
    "right",
    "sure",
];

/// A few small groups with talkative, quiet and echoing members.
fn synthetic_chat(rng: &mut ChaCha8Rng) -> String {
    let mut out = String::from("group_id,person_id,chat_time,chat_text\n");
    for g in 0..8 {
        let people: Vec<String> = (0..4).map(|p| format!("s{g}{p}")).collect();
        let mut last: Vec<&str> = vec!["hello"];
        for _ in 0..30 {
            let who = people[..]
                .choose_weighted(rng, |p| 1 + (p.as_bytes()[2] - b'0') as usize * 2)
                .expect("weights");
            let words: Vec<&str> = if rng.gen_bool(0.3) {
                last.clone()
            } else {
                (0..rng.gen_range(2..7))
                    .map(|_| *WORDS.choose(rng).expect("words"))
                    .collect()
            };
            out.push_str(&format!("g{g},{who},,{}\n", words.join(" ")));
            last = words;
        }
    }
    out
}

pub fn run() -> gca::Result<()> {
    let dir = tempfile::tempdir().map_err(|e| GcaError::Io {
        path: "<tempdir>".into(),
        source: e,
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let chat = dir.path().join("chat.csv");
    fs::write(&chat, synthetic_chat(&mut rng)).map_err(|e| GcaError::Io {
        path: chat.clone(),
        source: e,
    })?;

    let mut cfg = PipelineConfig::from_toml(
        r#"
        transcripts = "chat.csv"
        dims = 8
        window = 10
        k = 3
        restarts = 10
        bootstrap = 10

        [topics]
        topics = 3
        relevant = [0]
        iterations = 100
        "#,
    )?;
    cfg.transcripts = chat;
    cfg.output_dir = dir.path().join("out");
    let summary = run_pipeline(&cfg)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    for f in &summary.outputs {
        println!("wrote {} ({})", f.path, &f.sha256[..12]);
    }
    assert_eq!(summary.n_groups, 8);
    Ok(())
}

fn main() -> gca::Result<()> {
    run()
}
