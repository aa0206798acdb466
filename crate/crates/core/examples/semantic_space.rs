// Building an LSA space from a small corpus and comparing words and turns.
//
//     cargo run -p gca --example semantic_space

use gca::corpus::{BackgroundDocument, SourceTag};
use gca::semspace::{cosine, SemanticSpace, SpaceOptions, Weighting};

const DOCS: [&str; 8] = [
    "the cat chased the mouse around the house",
    "a cat and a kitten sleep on the mat",
    "the kitten plays with a mouse toy",
    "dogs bark at the cat in the garden",
    "stocks fell as markets reacted to interest rates",
    "the bank raised interest rates again",
    "investors sold stocks and bought bonds",
    "bond markets rallied after the bank decision",
];

pub fn run() -> gca::Result<()> {
    let docs = DOCS
        .iter()
        .enumerate()
        .map(|(i, t)| BackgroundDocument::new(format!("d{i}"), SourceTag::AssignedReading, t))
        .collect::<gca::Result<Vec<_>>>()?;
    let opts = SpaceOptions {
        dims: 3,
        weighting: Weighting::LogEntropy,
        ..Default::default()
    };
    let space = SemanticSpace::build(&docs, &opts)?;
    println!(
        "{} terms in {} dims, singular values {:.3?}",
        space.vocabulary_len(),
        space.dims(),
        space.singular_values()
    );

    let v = |w: &str| space.term_vector(w).expect("in vocabulary").to_vec();
    let pets = cosine(&v("cat"), &v("kitten"));
    let mixed = cosine(&v("cat"), &v("stocks"));
    println!("cos(cat, kitten) = {pets:.3}, cos(cat, stocks) = {mixed:.3}");
    assert!(pets > mixed);

    // Turns are projected by summing weighted term vectors; unknown words
    // contribute nothing.
    let a = space.project(&["my", "kitten", "caught", "a", "mouse"]);
    let b = space.project(&["interest", "rates", "hit", "bonds"]);
    println!("cos(turn a, turn b) = {:.3}", cosine(&a, &b));
    Ok(())
}

fn main() -> gca::Result<()> {
    run()
}
