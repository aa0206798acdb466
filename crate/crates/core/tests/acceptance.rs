//! Acceptance suite. Each test prints one `PASS`/`FAIL` line to the real
//! stdout (bypassing the harness capture) and then asserts.

#![allow(clippy::needless_range_loop)]

use std::io::Write;
use std::time::{Duration, Instant};

use gca::composition::diversity;
use gca::corpus::GroupTranscript;
use gca::measures::{
    given_new, participation_series, responsivity_matrix, ProjectedTranscript, DEFAULT_EPSILON,
};
use gca::roles::{kmeans, label_roles, KMeansOptions, RoleLabel, RoleModel};
use gca::synth::{closed_space, gen_blobs, gen_conversation, BlobSpec, Script};
use gca::topics::{fit_lda, topic_relevance, LdaOptions, RelevanceSpec};
use gca::validation::{agreement, ari, cramers_v, hopkins, CrossTab, HopkinsOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("acceptance {id:>2} {verdict} {name}: {detail}\n");
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
}

fn secs(d: Duration) -> String {
    format!("{:.3}s", d.as_secs_f64())
}

#[test]
fn criterion_01_contingency_tables() {
    let start = Instant::now();
    let tables: [(&str, Vec<Vec<u64>>, f64, f64); 3] = [
        (
            "crosstab 1",
            vec![
                vec![32, 0, 0, 0, 0, 0],
                vec![2, 29, 0, 0, 0, 0],
                vec![0, 0, 15, 2, 1, 0],
                vec![0, 0, 0, 18, 0, 0],
                vec![4, 0, 0, 1, 13, 0],
                vec![0, 0, 0, 0, 0, 19],
            ],
            0.84,
            0.92,
        ),
        (
            "crosstab 2",
            vec![
                vec![517, 17, 4, 0, 1, 15],
                vec![0, 469, 14, 0, 0, 0],
                vec![0, 5, 475, 1, 0, 10],
                vec![1, 0, 1, 208, 0, 4],
                vec![0, 0, 6, 6, 198, 0],
                vec![1, 0, 0, 3, 7, 415],
            ],
            0.90,
            0.95,
        ),
        (
            "crosstab 3",
            vec![
                vec![137, 0, 0, 0, 1, 1],
                vec![0, 90, 3, 9, 4, 0],
                vec![1, 12, 81, 0, 0, 0],
                vec![11, 0, 2, 106, 0, 0],
                vec![0, 0, 0, 0, 98, 0],
                vec![0, 0, 0, 0, 1, 138],
            ],
            0.86,
            0.92,
        ),
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, counts, want_ari, want_v) in tables {
        let tab = CrossTab::from_counts(counts).unwrap();
        let (a, v) = (ari(&tab).unwrap(), cramers_v(&tab).unwrap());
        pass &= (a - want_ari).abs() <= 0.01 && (v - want_v).abs() <= 0.01;
        detail.push(format!("{name} ARI {a:.4} V {v:.4}"));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(1);
    report(
        1,
        "contingency tables",
        pass,
        &format!("{}; {}", detail.join(", "), secs(elapsed)),
    );
    assert!(pass);
}

#[test]
fn criterion_02_hopkins_calibration() {
    let start = Instant::now();
    let runs = 50;
    let mut total = 0.0;
    for s in 0..runs {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + s);
        let rows: Vec<Vec<f64>> = (0..718)
            .map(|_| (0..6).map(|_| rng.gen::<f64>()).collect())
            .collect();
        total += hopkins(
            &rows,
            &HopkinsOptions {
                seed: s,
                ..Default::default()
            },
        )
        .unwrap();
    }
    let uniform = total / runs as f64;
    let blobs = gen_blobs(&BlobSpec::table4(120, 7)).unwrap();
    let clustered = hopkins(&blobs.table.rows, &HopkinsOptions::default()).unwrap();
    let elapsed = start.elapsed();
    let pass =
        (0.45..=0.57).contains(&uniform) && clustered < 0.30 && elapsed < Duration::from_secs(10);
    report(
        2,
        "Hopkins calibration",
        pass,
        &format!("uniform mean H {uniform:.4} (want 0.45..0.57), archetype blobs H {clustered:.4} (want < 0.30); {}", secs(elapsed)),
    );
    assert!(pass);
}

#[test]
fn criterion_03_planted_role_recovery() {
    let start = Instant::now();
    let blobs = gen_blobs(&BlobSpec::table4(120, 7)).unwrap();
    let opts = KMeansOptions {
        restarts: 25,
        ..Default::default()
    };
    // Blob rows are already on the standardized scale of the archetypes.
    let (model, clusters) = RoleModel::fit(&blobs.table, 6, None, &opts).unwrap();
    let model = label_roles(model, 1.5).unwrap();
    let a = agreement(&blobs.labels, &clusters).unwrap().ari;
    let mut labels = model.labels.clone();
    labels.sort_by_key(|l| l.as_str());
    labels.dedup();
    let injective = labels.len() == 6 && !labels.contains(&RoleLabel::Unlabeled);
    let elapsed = start.elapsed();
    let pass = a >= 0.80 && injective && elapsed < Duration::from_secs(5);
    report(
        3,
        "planted role recovery",
        pass,
        &format!("ARI {a:.4}, labels {:?}; {}", model.labels, secs(elapsed)),
    );
    assert!(pass);
}

#[test]
fn criterion_04_given_new() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_rec, mut worst_orth, mut worst_repeat) = (0.0f64, 0.0f64, 0.0f64);
    let mut first_ok = true;
    for _ in 0..10_000 {
        let dims = rng.gen_range(1..=12);
        let len = rng.gen_range(1..=15);
        let mut stream: Vec<Vec<f64>> = Vec::with_capacity(len);
        let mut repeats = Vec::new();
        for t in 0..len {
            if t > 0 && rng.gen_bool(0.2) {
                let src = rng.gen_range(0..t);
                stream.push(stream[src].clone());
                if stream[src].iter().any(|&x| x != 0.0) {
                    repeats.push(t);
                }
            } else {
                stream.push((0..dims).map(|_| rng.gen_range(-1.0..1.0)).collect());
            }
        }
        let splits = given_new(&stream, DEFAULT_EPSILON);
        first_ok &= splits[0].newness == 1.0;
        for (d, s) in stream.iter().zip(&splits) {
            let rec = d
                .iter()
                .zip(s.given.iter().zip(&s.new))
                .map(|(x, (g, n))| (x - g - n).powi(2))
                .sum::<f64>()
                .sqrt();
            worst_rec = worst_rec.max(rec);
            let gn: f64 = s.given.iter().zip(&s.new).map(|(g, n)| g * n).sum();
            let ng = s.given.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nn = s.new.iter().map(|x| x * x).sum::<f64>().sqrt();
            if ng > 0.0 && nn > 0.0 {
                worst_orth = worst_orth.max(gn.abs() / (ng * nn));
            }
        }
        for t in repeats {
            worst_repeat = worst_repeat.max(splits[t].newness);
        }
    }
    let pass = worst_rec <= 1e-9 && worst_orth <= 1e-9 && first_ok && worst_repeat <= 1e-9;
    report(
        4,
        "given-new correctness",
        pass,
        &format!(
            "10000 streams; max reconstruction {worst_rec:.2e}, max |g·n|/(‖g‖‖n‖) {worst_orth:.2e}, first newness 1: {first_ok}, max repeat newness {worst_repeat:.2e}"
        ),
    );
    assert!(pass);
}

fn random_transcript(rng: &mut ChaCha8Rng, n: usize, k: usize) -> GroupTranscript {
    let turns: Vec<(String, String)> = (0..n)
        .map(|_| {
            (
                format!("p{}", rng.gen_range(0..k)),
                format!("w{}", rng.gen_range(0..20)),
            )
        })
        .collect();
    GroupTranscript::from_turns("fuzz", turns).unwrap()
}

#[test]
fn criterion_05_participation_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_sum = 0.0f64;
    let mut columns_ok = true;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=60);
        let k = rng.gen_range(1..=8);
        let ps = participation_series(&random_transcript(&mut rng, n, k));
        worst_sum = worst_sum.max(ps.relative.iter().sum::<f64>().abs());
        columns_ok &= (0..ps.n()).all(|t| ps.column_sum(t) == 1);
    }
    let pass = worst_sum <= 1e-12 && columns_ok;
    report(
        5,
        "participation identities",
        pass,
        &format!(
            "1000 transcripts; max |Σ p̂| {worst_sum:.2e}, every column sums to 1: {columns_ok}"
        ),
    );
    assert!(pass);
}

/// Straight transcription of the lagged similarity sums. `out[a][b]` is
/// the responsivity of respondent `a` to initiator `b`.
fn responsivity_oracle(
    speakers: &[usize],
    vectors: &[Vec<f64>],
    k: usize,
    w: usize,
) -> Vec<Vec<f64>> {
    let n = speakers.len();
    let p = |a: usize, t: usize| if speakers[t] == a { 1.0 } else { 0.0 };
    let cos = |x: &[f64], y: &[f64]| {
        let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        let nx = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        let ny = y.iter().map(|a| a * a).sum::<f64>().sqrt();
        dot / (nx * ny)
    };
    // Cross-cohesion of initiator `a` to respondent `b` at lag `tau`.
    let xi = |a: usize, b: usize, tau: usize| {
        let mut norm = 0.0;
        let mut sum = 0.0;
        for t in tau..n {
            norm += p(a, t - tau) * p(b, t);
            sum += p(a, t - tau) * p(b, t) * cos(&vectors[t - tau], &vectors[t]);
        }
        if norm == 0.0 {
            0.0
        } else {
            sum / norm
        }
    };
    (0..k)
        .map(|resp| {
            (0..k)
                .map(|init| (1..=w).map(|tau| xi(init, resp, tau)).sum::<f64>() / w as f64)
                .collect()
        })
        .collect()
}

#[test]
fn criterion_06_responsivity_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(2..=12);
        let k = rng.gen_range(2..=4);
        let w = rng.gen_range(1..=n + 2);
        let dims = rng.gen_range(2..=6);
        let speakers: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let vectors: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dims).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let participants = (0..k).map(|a| format!("p{a}")).collect();
        let pt = ProjectedTranscript::from_parts(
            participants,
            speakers.clone(),
            vectors.clone(),
            vec![1; n],
        )
        .unwrap();
        let r = responsivity_matrix(&pt, w);
        let oracle = responsivity_oracle(&speakers, &vectors, k, w);
        for a in 0..k {
            for b in 0..k {
                worst = worst.max((r.get(a, b) - oracle[a][b]).abs());
            }
            let others: Vec<usize> = (0..k).filter(|&j| j != a).collect();
            let or = others.iter().map(|&j| oracle[a][j]).sum::<f64>() / (k - 1) as f64;
            let si = others.iter().map(|&j| oracle[j][a]).sum::<f64>() / (k - 1) as f64;
            worst = worst
                .max((r.internal_cohesion(a) - oracle[a][a]).abs())
                .max((r.overall_responsivity(a) - or).abs())
                .max((r.social_impact(a) - si).abs());
        }
    }
    let pass = worst <= 1e-9;
    report(
        6,
        "responsivity oracle",
        pass,
        &format!("100 transcripts; max deviation over R(w), IC, OR, SI {worst:.2e}"),
    );
    assert!(pass);
}

fn wss_of(rows: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    let dims = rows[0].len();
    let mut total = 0.0;
    for c in 0..k {
        let members: Vec<&Vec<f64>> = rows
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == c)
            .map(|(r, _)| r)
            .collect();
        if members.is_empty() {
            continue;
        }
        let mean: Vec<f64> = (0..dims)
            .map(|d| members.iter().map(|r| r[d]).sum::<f64>() / members.len() as f64)
            .collect();
        total += members
            .iter()
            .map(|r| {
                r.iter()
                    .zip(&mean)
                    .map(|(x, m)| (x - m).powi(2))
                    .sum::<f64>()
            })
            .sum::<f64>();
    }
    total
}

#[test]
fn criterion_07_kmeans_optimality() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut hits = 0;
    for i in 0..100 {
        let centers = [
            [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)],
            [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)],
        ];
        let rows: Vec<Vec<f64>> = (0..10)
            .map(|j| {
                let c = centers[j % 2];
                vec![
                    c[0] + rng.gen_range(-1.0..1.0),
                    c[1] + rng.gen_range(-1.0..1.0),
                ]
            })
            .collect();
        // Point 0 is pinned to cluster 0 to skip mirror-image partitions.
        let best = (0..1u32 << 9)
            .map(|mask| {
                let labels: Vec<usize> = (0..10)
                    .map(|j| {
                        if j == 0 {
                            0
                        } else {
                            ((mask >> (j - 1)) & 1) as usize
                        }
                    })
                    .collect();
                if labels.iter().all(|&l| l == 0) {
                    f64::INFINITY
                } else {
                    wss_of(&rows, &labels, 2)
                }
            })
            .fold(f64::INFINITY, f64::min);
        let fit = kmeans(
            &rows,
            2,
            &KMeansOptions {
                seed: i,
                ..Default::default()
            },
        )
        .unwrap();
        if fit.wss <= best + 1e-9 {
            hits += 1;
        }
    }
    let pass = hits >= 95;
    report(
        7,
        "k-means optimality",
        pass,
        &format!("brute-force optimum reached in {hits}/100 instances"),
    );
    assert!(pass);
}

#[test]
fn criterion_08_svd_oracle() {
    use gca::linalg::{truncated_svd, Matrix, SparseMatrix, SvdOptions};
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (m, n) = (50, 40);
    // Nonnegative, sparse-ish, log-scaled like a weighted count matrix.
    let data: Vec<f64> = (0..m * n)
        .map(|_| {
            if rng.gen_bool(0.3) {
                (1.0 + rng.gen_range(1..6) as f64).ln() * rng.gen_range(0.2..1.0)
            } else {
                0.0
            }
        })
        .collect();
    let dense = Matrix::from_vec(m, n, data.clone()).unwrap();
    let svd = truncated_svd(&SparseMatrix::from_dense(&dense), 10, SvdOptions::default()).unwrap();

    let a = nalgebra::DMatrix::from_row_slice(m, n, &data);
    let eig = nalgebra::SymmetricEigen::new(a.transpose() * &a);
    let mut oracle: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    oracle.sort_by(|x, y| y.total_cmp(x));
    let worst = (0..10)
        .map(|i| (svd.s[i] - oracle[i]).abs() / oracle[i])
        .fold(0.0f64, f64::max);
    let pass = svd.s.len() == 10 && worst <= 1e-6;
    report(
        8,
        "SVD oracle",
        pass,
        &format!("50x40, top-10 max relative error {worst:.2e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_09_lda_recovery() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let vocab: Vec<Vec<String>> = (0..3)
        .map(|q| (0..10).map(|i| format!("t{q}w{i}")).collect())
        .collect();
    let docs: Vec<Vec<String>> = (0..500)
        .map(|_| {
            let main = rng.gen_range(0..3);
            (0..40)
                .map(|_| {
                    let q = if rng.gen_bool(0.8) {
                        main
                    } else {
                        rng.gen_range(0..3)
                    };
                    vocab[q][rng.gen_range(0..10)].clone()
                })
                .collect()
        })
        .collect();
    let model = fit_lda(
        &docs,
        &LdaOptions {
            topics: 3,
            alpha: Some(0.1),
            iterations: 300,
            seed: 9,
            ..Default::default()
        },
    )
    .unwrap();

    let cosine_to = |q: usize, truth: usize| {
        let phi = model.phi(q);
        let mut dot = 0.0;
        for (i, w) in model.vocabulary().iter().enumerate() {
            if vocab[truth].contains(w) {
                dot += phi[i] * 0.1;
            }
        }
        let norm = phi.iter().map(|x| x * x).sum::<f64>().sqrt();
        dot / (norm * (10.0f64 * 0.01).sqrt())
    };
    let perms = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let matched: Vec<f64> = perms
        .iter()
        .map(|p| (0..3).map(|q| cosine_to(q, p[q])).collect::<Vec<f64>>())
        .max_by(|a, b| a.iter().sum::<f64>().total_cmp(&b.iter().sum::<f64>()))
        .unwrap();

    // Contributions include unknown words and empty turns.
    let mut worst_sum = 0.0f64;
    let mut t_ok = true;
    for g in 0..30 {
        let turns: Vec<(String, String)> = (0..rng.gen_range(1..8))
            .map(|i| {
                let words: Vec<String> = (0..rng.gen_range(0..6))
                    .map(|_| {
                        if rng.gen_bool(0.2) {
                            "unseen".to_string()
                        } else {
                            vocab[rng.gen_range(0..3)][rng.gen_range(0..10)].clone()
                        }
                    })
                    .collect();
                (format!("p{}", i % 3), words.join(" "))
            })
            .collect();
        let gt = GroupTranscript::from_turns(&format!("g{g}"), turns).unwrap();
        for c in &gt.contributions {
            worst_sum =
                worst_sum.max((model.topic_scores(&c.tokens).iter().sum::<f64>() - 1.0).abs());
        }
        let relevant: Vec<usize> = (0..3).filter(|_| rng.gen_bool(0.5)).collect();
        let spec = RelevanceSpec::from_relevant(relevant, 3).unwrap();
        let rel = topic_relevance(&gt, &model, &spec).unwrap();
        t_ok &= (0.0..=1.0).contains(&rel.relevance);
    }
    let pass = matched.iter().all(|&c| c >= 0.9) && worst_sum <= 1e-9 && t_ok;
    report(
        9,
        "LDA recovery",
        pass,
        &format!("matched cosines {matched:.4?}, max |Σ scores − 1| {worst_sum:.2e}, relevance in [0,1]: {t_ok}"),
    );
    assert!(pass);
}

#[test]
fn criterion_10_behavioral_ordering() {
    let mut tags = Vec::new();
    for _ in 0..8 {
        tags.extend([
            ("lead", "new-topic"),
            ("echo", "echo-previous"),
            ("fresh", "new-topic"),
        ]);
    }
    let script = Script::from_tags("scripted", 4, tags).unwrap();
    let gt = gen_conversation(&script).unwrap();
    let space = closed_space(&script.vocabulary()).unwrap();
    let cfg = gca::measures::AnalysisConfig {
        window: 3,
        ..Default::default()
    };
    let profiles = gca::measures::profile(&gt, &space, &cfg).unwrap();
    let get = |id: &str| profiles.iter().find(|p| p.participant_id == id).unwrap();
    let (echo, fresh) = (get("echo"), get("fresh"));
    let pass =
        echo.overall_responsivity > fresh.overall_responsivity && fresh.newness > echo.newness;
    report(
        10,
        "behavioral ordering",
        pass,
        &format!(
            "responsivity echo {:.4} vs new-topic {:.4}; newness new-topic {:.4} vs echo {:.4}",
            echo.overall_responsivity, fresh.overall_responsivity, fresh.newness, echo.newness
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_11_entropy() {
    let uniform = diversity(&[1.0 / 6.0; 6]);
    let homogeneous = diversity(&[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let pass = (uniform - 6f64.ln()).abs() <= 1e-12 && homogeneous == 0.0;
    report(
        11,
        "entropy exactness",
        pass,
        &format!(
            "uniform {uniform:.15} vs ln 6 {:.15}, homogeneous {homogeneous}",
            6f64.ln()
        ),
    );
    assert!(pass);
}
