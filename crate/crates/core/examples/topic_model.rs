// Fitting LDA and scoring how much of a conversation is on task.
//
//     cargo run -p gca --example topic_model

use gca::corpus::GroupTranscript;
use gca::topics::{fit_lda, topic_relevance, LdaOptions, RelevanceSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const THEMES: [[&str; 5]; 3] = [
    ["cell", "membrane", "protein", "enzyme", "dna"],
    ["goal", "match", "striker", "referee", "league"],
    ["oven", "flour", "butter", "recipe", "bake"],
];

pub fn run() -> gca::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let docs: Vec<Vec<&str>> = (0..150)
        .map(|d| {
            (0..20)
                .map(|_| THEMES[d % 3][rng.gen_range(0..5)])
                .collect()
        })
        .collect();
    let model = fit_lda(
        &docs,
        &LdaOptions {
            topics: 3,
            alpha: Some(0.1),
            iterations: 200,
            ..Default::default()
        },
    )?;
    for (q, words) in model.top_words(3).iter().enumerate() {
        println!("topic {q}: {words:?}");
    }

    // Relevant topics are whichever ones carry the biology words.
    let bio = (0..3)
        .max_by(|&a, &b| {
            model.topic_scores(&["protein"])[a].total_cmp(&model.topic_scores(&["protein"])[b])
        })
        .expect("three topics");
    let spec = RelevanceSpec::from_relevant([bio], 3)?;
    let on_task = GroupTranscript::from_turns(
        "g1",
        [
            ("a", "the enzyme binds the protein"),
            ("b", "dna in the cell"),
        ],
    )?;
    let off_task = GroupTranscript::from_turns(
        "g2",
        [
            ("a", "did you see the match"),
            ("b", "the striker scored a goal"),
        ],
    )?;
    let r1 = topic_relevance(&on_task, &model, &spec)?;
    let r2 = topic_relevance(&off_task, &model, &spec)?;
    println!(
        "relevance: on task {:.3}, off task {:.3}",
        r1.relevance, r2.relevance
    );
    assert!(r1.relevance > r2.relevance);
    Ok(())
}

fn main() -> gca::Result<()> {
    run()
}
