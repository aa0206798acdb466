//! Invariants checked on generated inputs.

use gca::composition::{diversity, learning_gain, proportions};
use gca::corpus::{tokenize, GroupTranscript};
use gca::measures::{given_new, responsivity_matrix, ProjectedTranscript, DEFAULT_EPSILON};
use gca::roles::{kmeans, nearest, winsorize_standardize, FeatureTable, KMeansOptions};
use gca::semspace::cosine;
use gca::validation::{agreement, hopkins, silhouette, HopkinsOptions};
use proptest::prelude::*;

fn rows_strategy(max_rows: usize, dims: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-10.0f64..10.0, dims), 4..max_rows)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tokens_are_lowercase_alphanumeric(text in "\\PC{0,80}") {
        for t in tokenize(&text) {
            prop_assert!(!t.is_empty());
            prop_assert!(t.chars().all(char::is_alphanumeric));
            prop_assert_eq!(t.to_lowercase(), t.clone());
        }
    }

    #[test]
    fn cosine_is_bounded(u in prop::collection::vec(-5.0f64..5.0, 3), v in prop::collection::vec(-5.0f64..5.0, 3)) {
        let c = cosine(&u, &v);
        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&c));
    }

    #[test]
    fn newness_is_a_fraction(stream in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 4), 1..12)) {
        for s in given_new(&stream, DEFAULT_EPSILON) {
            prop_assert!((0.0..=1.0).contains(&s.newness));
        }
    }

    #[test]
    fn responsivity_entries_are_cosines(
        speakers in prop::collection::vec(0usize..3, 2..14),
        seed in any::<u64>(),
        w in 1usize..6,
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = speakers.len();
        let vectors = (0..n).map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let pt = ProjectedTranscript::from_parts(vec!["a".into(), "b".into(), "c".into()], speakers, vectors, vec![1; n]).unwrap();
        let r = responsivity_matrix(&pt, w);
        for a in 0..3 {
            for b in 0..3 {
                prop_assert!(r.get(a, b).abs() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn standardizing_keeps_order_and_centers(rows in rows_strategy(40, 3)) {
        let table = FeatureTable::new(vec!["a".into(), "b".into(), "c".into()], rows.clone()).unwrap();
        let (z, _) = winsorize_standardize(&table, 0.05, 0.95).unwrap();
        for c in 0..3 {
            let col = z.column(c);
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            prop_assert!(mean.abs() < 1e-9);
            for i in 0..rows.len() {
                for j in 0..rows.len() {
                    if rows[i][c] < rows[j][c] {
                        prop_assert!(col[i] <= col[j] + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn kmeans_assignments_are_nearest(rows in rows_strategy(30, 2), k in 1usize..4) {
        prop_assume!(k <= rows.len());
        let opts = KMeansOptions { restarts: 3, ..Default::default() };
        let fit = kmeans(&rows, k, &opts).unwrap();
        for (row, &a) in rows.iter().zip(&fit.assignments) {
            let (best, d2) = nearest(&fit.centroids, row);
            let own: f64 = row.iter().zip(&fit.centroids[a]).map(|(x, y)| (x - y).powi(2)).sum();
            prop_assert!(own <= d2 + 1e-9, "row assigned to {a} but {best} is nearer");
        }
        let again = kmeans(&rows, k, &opts).unwrap();
        prop_assert_eq!(again.assignments, fit.assignments);
    }

    #[test]
    fn silhouette_widths_are_bounded(rows in rows_strategy(30, 2), labels_seed in any::<u64>()) {
        let labels: Vec<usize> = (0..rows.len()).map(|i| ((labels_seed >> (i % 64)) as usize + i) % 3).collect();
        prop_assume!(labels.iter().collect::<std::collections::BTreeSet<_>>().len() >= 2);
        let s = silhouette(&rows, &labels).unwrap();
        prop_assert!(s.widths.iter().all(|w| (-1.0..=1.0).contains(w)));
    }

    #[test]
    fn hopkins_is_a_fraction(rows in rows_strategy(60, 3)) {
        prop_assume!(rows.len() >= 10);
        let h = hopkins(&rows, &HopkinsOptions { repetitions: 2, ..Default::default() }).unwrap();
        prop_assert!((0.0..=1.0).contains(&h));
    }

    #[test]
    fn agreement_is_relabeling_invariant(labels in prop::collection::vec(0usize..4, 4..50), shift in 1usize..4) {
        let renamed: Vec<usize> = labels.iter().map(|l| (l + shift) % 4 + 10).collect();
        let agr = agreement(&labels, &renamed).unwrap();
        prop_assert!((agr.ari - 1.0).abs() < 1e-12 || labels.iter().all(|&l| l == labels[0]));
        if let Some(v) = agr.cramers_v {
            prop_assert!((v - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn cramers_v_is_bounded(a in prop::collection::vec(0usize..3, 6..40), b_seed in any::<u64>()) {
        let b: Vec<usize> = (0..a.len()).map(|i| ((b_seed >> (i % 60)) & 3) as usize).collect();
        if let Ok(agr) = agreement(&a, &b) {
            if let Some(v) = agr.cramers_v {
                prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
            }
            prop_assert!(agr.ari <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn role_mix_is_a_distribution(roles in prop::collection::vec(prop::sample::select(vec!["Driver", "Follower", "Lurker", "Task-Leader"]), 1..20)) {
        let labels = gca::composition::default_label_set();
        let p = proportions(&roles, &labels).unwrap();
        let values: Vec<f64> = p.values().copied().collect();
        prop_assert!((values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let h = diversity(&values);
        prop_assert!(h >= 0.0 && h <= (labels.len() as f64).ln() + 1e-12);
    }

    #[test]
    fn gains_never_exceed_one(pre in 0.0f64..99.9, post in 0.0f64..100.0) {
        prop_assert!(learning_gain(pre, post).unwrap() <= 1.0);
    }

    #[test]
    fn transcript_indices_follow_order(turns in prop::collection::vec(("[a-c]", "[a-z ]{0,12}"), 1..20)) {
        let gt = GroupTranscript::from_turns("g", turns.clone()).unwrap();
        prop_assert_eq!(gt.n(), turns.len());
        for (i, c) in gt.contributions.iter().enumerate() {
            prop_assert_eq!(c.index, i + 1);
        }
    }
}
