//! The sample log excerpt: one group, five students, 22 turns.

use gca::corpus::{ingest_transcripts, transcript_documents};
use gca::measures::{
    calibrate_window, min_self_gaps, participation_series, profile, AnalysisConfig,
};
use gca::semspace::{SemanticSpace, SpaceOptions};

fn path() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/figure1.csv")
}

#[test]
fn excerpt_is_ingested_in_file_order() {
    let ing = ingest_transcripts(path()).unwrap();
    assert_eq!(ing.groups.len(), 1);
    let g = &ing.groups[0];
    assert_eq!(g.group_id, "958");
    assert_eq!(g.n(), 22);
    assert_eq!(g.k(), 5);
    assert_eq!(g.participants, ["941", "347", "152", "343", "514"]);
    // The last two rows carry an earlier year; order still follows the file.
    assert_eq!(g.contributions[21].index, 22);
    assert!(g.contributions[21].timestamp < g.contributions[0].timestamp);
    assert_eq!(
        g.contributions[3].tokens[..4],
        ["okay", "so", "certain", "characteristics"]
    );
}

#[test]
fn participation_counts() {
    let g = &ingest_transcripts(path()).unwrap().groups[0];
    let ps = participation_series(g);
    assert_eq!(ps.counts, [5, 5, 9, 2, 1]);
    assert!((ps.mean[2] - 9.0 / 22.0).abs() < 1e-15);
    assert!((ps.relative[2] - (9.0 / 22.0 - 0.2)).abs() < 1e-15);
    assert!(ps.relative.iter().sum::<f64>().abs() < 1e-15);
}

#[test]
fn window_and_profiles() {
    let groups = ingest_transcripts(path()).unwrap().groups;
    let gaps = min_self_gaps(&groups[0]);
    // 514 speaks once and has no own pair.
    assert_eq!(gaps[4], None);
    assert_eq!(gaps[2], Some(1));
    let w = calibrate_window(&groups, 0.95).unwrap();
    assert!((1..=22).contains(&w));

    let space = SemanticSpace::build(
        &transcript_documents(&groups),
        &SpaceOptions {
            dims: 10,
            ..Default::default()
        },
    )
    .unwrap();
    let profiles = profile(&groups[0], &space, &AnalysisConfig::default()).unwrap();
    assert_eq!(profiles.len(), 5);
    for p in &profiles {
        assert!(p.features().iter().all(|x| x.is_finite()), "{p:?}");
        assert!((0.0..=1.0).contains(&p.newness));
    }
    assert_eq!(profiles[2].n_contributions, 9);
}
