// Checking whether clusters are real and how well two labelings agree.
//
//     cargo run -p gca --example cluster_validation

use gca::synth::{gen_blobs, BlobSpec};
use gca::validation::{
    ari, cramers_v, hopkins, validate, CrossTab, HopkinsOptions, ValidationConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn run() -> gca::Result<()> {
    let blobs = gen_blobs(&BlobSpec::table4(40, 5))?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let uniform: Vec<Vec<f64>> = (0..240)
        .map(|_| (0..6).map(|_| rng.gen::<f64>()).collect())
        .collect();
    let h_blobs = hopkins(&blobs.table.rows, &HopkinsOptions::default())?;
    let h_unif = hopkins(&uniform, &HopkinsOptions::default())?;
    // Values near 0 mean clustered data, near 0.5 mean no structure.
    println!("Hopkins: blobs {h_blobs:.3}, uniform {h_unif:.3}");
    assert!(h_blobs < h_unif);

    let report = validate(
        &blobs.table.rows,
        &ValidationConfig {
            bootstrap: 20,
            ..Default::default()
        },
    )?;
    println!(
        "silhouette {:.3}, connectivity {:.1}, APN {:.3}, bootstrap Jaccard {:.2?} {:?}",
        report.silhouette,
        report.connectivity,
        report.stability.apn,
        report.bootstrap.per_cluster,
        report.bootstrap.interpretation
    );

    // Agreement read straight off a six-by-six cross-tabulation.
    let tab = CrossTab::from_counts(vec![
        vec![32, 0, 0, 0, 0, 0],
        vec![2, 29, 0, 0, 0, 0],
        vec![0, 0, 15, 2, 1, 0],
        vec![0, 0, 0, 18, 0, 0],
        vec![4, 0, 0, 1, 13, 0],
        vec![0, 0, 0, 0, 0, 19],
    ])?;
    println!("ARI {:.4}, Cramér's V {:.4}", ari(&tab)?, cramers_v(&tab)?);
    Ok(())
}

fn main() -> gca::Result<()> {
    run()
}
