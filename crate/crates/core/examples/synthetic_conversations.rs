// Scripted conversations with known behavior, for sanity checks.
//
//     cargo run -p gca --example synthetic_conversations

use gca::measures::{profile, AnalysisConfig};
use gca::synth::{closed_space, gen_conversation, Script};

pub fn run() -> gca::Result<()> {
    // `echo` repeats whatever was just said, `fresh` always changes topic.
    let mut tags = Vec::new();
    for _ in 0..6 {
        tags.extend([
            ("lead", "new-topic"),
            ("echo", "echo-previous"),
            ("fresh", "new-topic"),
        ]);
    }
    let script = Script::from_tags("scripted", 4, tags)?;
    let gt = gen_conversation(&script)?;
    let space = closed_space(&script.vocabulary())?;
    let profiles = profile(
        &gt,
        &space,
        &AnalysisConfig {
            window: 3,
            ..Default::default()
        },
    )?;
    for p in &profiles {
        println!(
            "{:>5}: responsivity {:.3} newness {:.3} impact {:.3}",
            p.participant_id, p.overall_responsivity, p.newness, p.social_impact
        );
    }
    let get = |id: &str| {
        profiles
            .iter()
            .find(|p| p.participant_id == id)
            .expect("speaker")
    };
    assert!(get("echo").overall_responsivity > get("fresh").overall_responsivity);
    assert!(get("fresh").newness > get("echo").newness);

    // Scripts can also come from JSON.
    let json = r#"{"group_id": "j", "turns": [
        {"speaker": "a", "behavior": "new-topic"},
        {"speaker": "b", "behavior": "echo-previous"}]}"#;
    println!(
        "{} turns parsed from JSON",
        Script::from_json(json)?.turns.len()
    );
    Ok(())
}

fn main() -> gca::Result<()> {
    run()
}
