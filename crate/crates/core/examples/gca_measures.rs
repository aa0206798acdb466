// The six per-participant measures for a short conversation.
//
//     cargo run -p gca --example gca_measures

use gca::corpus::GroupTranscript;
use gca::measures::{
    given_new, participation_series, profile, responsivity_matrix, AnalysisConfig,
    ProjectedTranscript, DEFAULT_EPSILON,
};
use gca::synth::closed_space;

pub fn run() -> gca::Result<()> {
    let gt = GroupTranscript::from_turns(
        "demo",
        [
            ("ann", "photosynthesis needs light"),
            ("bo", "light and water yes"),
            ("cy", "what about carbon dioxide"),
            ("ann", "carbon dioxide and water then"),
            ("bo", "light water carbon dioxide"),
        ],
    )?;
    // One orthogonal axis per word keeps the arithmetic easy to follow.
    let vocab: Vec<String> = {
        let mut v: Vec<String> = gt
            .contributions
            .iter()
            .flat_map(|c| c.tokens.clone())
            .collect();
        v.sort();
        v.dedup();
        v
    };
    let space = closed_space(&vocab)?;

    let ps = participation_series(&gt);
    for (a, who) in ps.participants.iter().enumerate() {
        println!(
            "{who:>4}: {:?} relative participation {:+.3}",
            ps.series[a], ps.relative[a]
        );
    }

    let pt = ProjectedTranscript::new(&gt, &space);
    let r = responsivity_matrix(&pt, 4);
    for a in 0..r.k() {
        println!(
            "{:>4}: responsivity {:.3} impact {:.3} internal {:.3}",
            gt.participants[a],
            r.overall_responsivity(a),
            r.social_impact(a),
            r.internal_cohesion(a)
        );
    }

    let splits = given_new(&pt.vectors, DEFAULT_EPSILON);
    let newness: Vec<String> = splits.iter().map(|s| format!("{:.2}", s.newness)).collect();
    println!("newness by turn: {}", newness.join(" "));
    assert_eq!(splits[0].newness, 1.0);

    for p in profile(
        &gt,
        &space,
        &AnalysisConfig {
            window: 4,
            ..Default::default()
        },
    )? {
        println!("{p:?}");
    }
    Ok(())
}

fn main() -> gca::Result<()> {
    run()
}
