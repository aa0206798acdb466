// Role mix, diversity and learning gain per group.
//
//     cargo run -p gca --example group_composition

use gca::composition::{
    default_label_set, diversity, group_report, learning_gain, proportions, GroupRelevanceScore,
    QuizScore, RoleAssignment,
};

pub fn run() -> gca::Result<()> {
    let labels = default_label_set();
    let even = proportions(
        &[
            "Driver",
            "Follower",
            "Lurker",
            "Over-rider",
            "Task-Leader",
            "Socially Detached",
        ],
        &labels,
    )?;
    let same = proportions(&["Follower", "Follower", "Follower"], &labels)?;
    let h =
        |p: &indexmap::IndexMap<String, f64>| diversity(&p.values().copied().collect::<Vec<_>>());
    println!(
        "diversity: one of each role {:.4} (ln 6 = {:.4}), all followers {:.4}",
        h(&even),
        6f64.ln(),
        h(&same)
    );

    // Gain is the share of the possible improvement actually achieved.
    println!(
        "pre 40% -> post 70%: gain {:.2}",
        learning_gain(40.0, 70.0)?
    );

    let a = |g: &str, p: &str, r: &str| RoleAssignment {
        group_id: g.into(),
        participant_id: p.into(),
        role: r.into(),
    };
    let q = |p: &str, pre: f64, post: f64| QuizScore {
        participant_id: p.into(),
        pre_pct: pre,
        post_pct: post,
    };
    let assignments = [
        a("g1", "p1", "Driver"),
        a("g1", "p2", "Follower"),
        a("g1", "p3", "Lurker"),
        a("g2", "p4", "Follower"),
        a("g2", "p5", "Follower"),
    ];
    let relevance = [GroupRelevanceScore {
        group_id: "g1".into(),
        relevance: 0.42,
    }];
    let quiz = [
        q("p1", 50.0, 75.0),
        q("p2", 20.0, 60.0),
        q("p4", 100.0, 100.0),
    ];
    for g in group_report(&assignments, &relevance, &quiz, &labels)? {
        println!("{}", serde_json::to_string(&g)?);
    }
    Ok(())
}

fn main() -> gca::Result<()> {
    run()
}
