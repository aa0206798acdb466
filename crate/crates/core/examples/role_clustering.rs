// Clustering learner profiles into roles and naming the clusters.
//
//     cargo run -p gca --example role_clustering

use gca::roles::{label_roles, select_k, KMeansOptions, RoleModel};
use gca::synth::{gen_blobs, BlobSpec};
use gca::validation::agreement;

pub fn run() -> gca::Result<()> {
    // Six well-separated archetype blobs, already in standardized units.
    let blobs = gen_blobs(&BlobSpec::table4(60, 3))?;
    let opts = KMeansOptions::default();

    let sel = select_k(
        &blobs.table.rows,
        2,
        9,
        &KMeansOptions {
            restarts: 5,
            ..opts
        },
    )?;
    println!("votes {:?}; recommended k = {}", sel.votes, sel.recommended);

    // No winsorizing here: the blobs are in z-space already.
    let (model, clusters) = RoleModel::fit(&blobs.table, 6, None, &opts)?;
    let model = label_roles(model, 1.5)?;
    for (c, centroid) in model.centroids.iter().enumerate() {
        let shown: Vec<String> = centroid.iter().map(|x| format!("{x:+.2}")).collect();
        println!("cluster {c} [{}] -> {}", shown.join(" "), model.labels[c]);
    }
    let agr = agreement(&blobs.labels, &clusters)?;
    println!("ARI against the generating blobs: {:.3}", agr.ari);
    assert!(agr.ari > 0.8);
    Ok(())
}

fn main() -> gca::Result<()> {
    run()
}
