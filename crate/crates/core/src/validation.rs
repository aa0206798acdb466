//! Clustering quality, stability and agreement statistics.
//!
//! All distances are Euclidean. Partitions are given as one cluster index
//! per row.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GcaError, Result};
use crate::roles::{kmeans, sq_dist, KMeansOptions};

fn dist(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(a, b).sqrt()
}

fn check_partition(rows: &[Vec<f64>], labels: &[usize]) -> Result<usize> {
    if rows.len() != labels.len() {
        return Err(GcaError::DimensionMismatch {
            expected: rows.len(),
            found: labels.len(),
        });
    }
    Ok(labels.iter().collect::<BTreeSet<_>>().len())
}

fn members(labels: &[usize]) -> BTreeMap<usize, Vec<usize>> {
    let mut m: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        m.entry(l).or_default().push(i);
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopkinsOptions {
    /// Share of rows sampled per repetition (at least 10 points).
    pub fraction: f64,
    pub repetitions: usize,
    pub seed: u64,
}

impl Default for HopkinsOptions {
    fn default() -> Self {
        HopkinsOptions {
            fraction: 0.1,
            repetitions: 10,
            seed: 7,
        }
    }
}

fn nn_dist(rows: &[Vec<f64>], p: &[f64], skip: Option<usize>) -> f64 {
    rows.iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != skip)
        .map(|(_, r)| sq_dist(r, p))
        .fold(f64::INFINITY, f64::min)
        .sqrt()
}

/// Hopkins statistic `Σw / (Σu + Σw)`, where `w` are nearest-neighbour
/// distances of sampled data points and `u` those of uniform points drawn
/// from the data's bounding box. About 0.5 for random data, near 0 for
/// strongly clustered data.
pub fn hopkins(rows: &[Vec<f64>], opts: &HopkinsOptions) -> Result<f64> {
    let n = rows.len();
    if n < 10 {
        return Err(GcaError::Argument(format!(
            "Hopkins needs ≥ 10 rows, got {n}"
        )));
    }
    let dims = rows[0].len();
    let lo: Vec<f64> = (0..dims)
        .map(|c| rows.iter().map(|r| r[c]).fold(f64::INFINITY, f64::min))
        .collect();
    let hi: Vec<f64> = (0..dims)
        .map(|c| rows.iter().map(|r| r[c]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let m = ((opts.fraction * n as f64).round() as usize)
        .max(10)
        .min(n - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let reps = opts.repetitions.max(1);
    let mut total = 0.0;
    for _ in 0..reps {
        let sample = rand::seq::index::sample(&mut rng, n, m);
        let w: f64 = sample
            .iter()
            .map(|i| nn_dist(rows, &rows[i], Some(i)))
            .sum();
        let u: f64 = (0..m)
            .map(|_| {
                let p: Vec<f64> = lo
                    .iter()
                    .zip(&hi)
                    .map(|(&a, &b)| if b > a { rng.gen_range(a..b) } else { a })
                    .collect();
                nn_dist(rows, &p, None)
            })
            .sum();
        total += if u + w > 0.0 { w / (u + w) } else { 0.0 };
    }
    Ok(total / reps as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Silhouette {
    pub widths: Vec<f64>,
    pub average: f64,
}

/// Rousseeuw silhouette; points in singleton clusters get width 0.
pub fn silhouette(rows: &[Vec<f64>], labels: &[usize]) -> Result<Silhouette> {
    if check_partition(rows, labels)? < 2 {
        return Err(GcaError::Argument(
            "silhouette needs at least 2 clusters".into(),
        ));
    }
    let groups = members(labels);
    let widths: Vec<f64> = (0..rows.len())
        .into_par_iter()
        .map(|i| {
            let own = &groups[&labels[i]];
            if own.len() == 1 {
                return 0.0;
            }
            let mean_to =
                |ms: &Vec<usize>| ms.iter().map(|&j| dist(&rows[i], &rows[j])).sum::<f64>();
            let a = mean_to(own) / (own.len() - 1) as f64;
            let b = groups
                .iter()
                .filter(|(l, _)| **l != labels[i])
                .map(|(_, ms)| mean_to(ms) / ms.len() as f64)
                .fold(f64::INFINITY, f64::min);
            let m = a.max(b);
            if m == 0.0 {
                0.0
            } else {
                (b - a) / m
            }
        })
        .collect();
    let average = widths.iter().sum::<f64>() / widths.len() as f64;
    Ok(Silhouette { widths, average })
}

/// Smallest between-cluster point distance over the largest cluster
/// diameter. `f64::INFINITY` when every cluster has zero diameter but the
/// clusters are separated.
pub fn dunn(rows: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
    if check_partition(rows, labels)? < 2 {
        return Err(GcaError::Argument(
            "Dunn index needs at least 2 clusters".into(),
        ));
    }
    let n = rows.len();
    let (sep, diam) = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut sep = f64::INFINITY;
            let mut diam: f64 = 0.0;
            for j in i + 1..n {
                let d = dist(&rows[i], &rows[j]);
                if labels[i] == labels[j] {
                    diam = diam.max(d);
                } else {
                    sep = sep.min(d);
                }
            }
            (sep, diam)
        })
        .reduce(|| (f64::INFINITY, 0.0), |a, b| (a.0.min(b.0), a.1.max(b.1)));
    if diam == 0.0 {
        return Ok(if sep > 0.0 { f64::INFINITY } else { 0.0 });
    }
    Ok(sep / diam)
}

/// Connectivity: each of a point's `l` nearest neighbours that sits in a
/// different cluster adds `1/rank`. Neighbour ties are broken by row index.
pub fn connectivity(rows: &[Vec<f64>], labels: &[usize], l: usize) -> Result<f64> {
    check_partition(rows, labels)?;
    if l == 0 {
        return Err(GcaError::Argument("connectivity needs L ≥ 1".into()));
    }
    let n = rows.len();
    let per_point: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut others: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (sq_dist(&rows[i], &rows[j]), j))
                .collect();
            others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            others
                .iter()
                .take(l)
                .enumerate()
                .filter(|(_, (_, j))| labels[*j] != labels[i])
                .map(|(rank, _)| 1.0 / (rank + 1) as f64)
                .sum::<f64>()
        })
        .collect();
    Ok(per_point.iter().sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stability {
    /// Average proportion of non-overlap.
    pub apn: f64,
    /// Average distance.
    pub ad: f64,
    /// Average distance between means.
    pub adm: f64,
    /// Figure of merit.
    pub fom: f64,
}

fn centroid(rows: &[Vec<f64>], idx: &[usize]) -> Vec<f64> {
    let mut c = vec![0.0; rows[0].len()];
    for &i in idx {
        for (s, x) in c.iter_mut().zip(&rows[i]) {
            *s += x;
        }
    }
    c.iter_mut().for_each(|s| *s /= idx.len() as f64);
    c
}

/// Leave-one-column-out stability. Every reclustering uses the same
/// k-means options, so differences come from the deleted column alone.
pub fn stability_loo(rows: &[Vec<f64>], k: usize, opts: &KMeansOptions) -> Result<Stability> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if m < 3 {
        return Err(GcaError::Argument(format!(
            "leave-one-column-out needs ≥ 3 columns, got {m}"
        )));
    }
    let full = kmeans(rows, k, opts)?.assignments;
    let full_groups = members(&full);
    let per_column: Vec<Stability> = (0..m)
        .into_par_iter()
        .map(|del| {
            let reduced: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|(c, _)| *c != del)
                        .map(|(_, x)| *x)
                        .collect()
                })
                .collect();
            let part = kmeans(&reduced, k, opts)?.assignments;
            let groups = members(&part);
            let full_cent: BTreeMap<usize, Vec<f64>> = full_groups
                .iter()
                .map(|(l, ms)| (*l, centroid(rows, ms)))
                .collect();
            let del_cent: BTreeMap<usize, Vec<f64>> = groups
                .iter()
                .map(|(l, ms)| (*l, centroid(rows, ms)))
                .collect();
            let del_set: BTreeMap<usize, BTreeSet<usize>> = groups
                .iter()
                .map(|(l, ms)| (*l, ms.iter().copied().collect()))
                .collect();
            let (mut apn, mut ad, mut adm) = (0.0, 0.0, 0.0);
            for i in 0..n {
                let c0 = &full_groups[&full[i]];
                let cl = &groups[&part[i]];
                let overlap = c0.iter().filter(|j| del_set[&part[i]].contains(j)).count();
                apn += 1.0 - overlap as f64 / c0.len() as f64;
                let mut s = 0.0;
                for &a in c0 {
                    for &b in cl {
                        s += dist(&rows[a], &rows[b]);
                    }
                }
                ad += s / (c0.len() * cl.len()) as f64;
                adm += dist(&full_cent[&full[i]], &del_cent[&part[i]]);
            }
            let fom_ss: f64 = groups
                .values()
                .map(|ms| {
                    let mean = ms.iter().map(|&i| rows[i][del]).sum::<f64>() / ms.len() as f64;
                    ms.iter()
                        .map(|&i| (rows[i][del] - mean).powi(2))
                        .sum::<f64>()
                })
                .sum();
            let correction = if n > k {
                (n as f64 / (n - k) as f64).sqrt()
            } else {
                1.0
            };
            Ok(Stability {
                apn: apn / n as f64,
                ad: ad / n as f64,
                adm: adm / n as f64,
                fom: (fom_ss / n as f64).sqrt() * correction,
            })
        })
        .collect::<Result<_>>()?;
    let mm = m as f64;
    Ok(Stability {
        apn: per_column.iter().map(|s| s.apn).sum::<f64>() / mm,
        ad: per_column.iter().map(|s| s.ad).sum::<f64>() / mm,
        adm: per_column.iter().map(|s| s.adm).sum::<f64>() / mm,
        fom: per_column.iter().map(|s| s.fom).sum::<f64>() / mm,
    })
}

fn jaccard(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Bootstrap stability of each cluster of the full-data k-means solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapJaccard {
    pub iterations: usize,
    /// Mean best-match Jaccard per original cluster, by cluster index.
    pub per_cluster: Vec<f64>,
    /// Verbal reading of each mean ("highly stable" from 0.85).
    pub interpretation: Vec<String>,
}

pub fn interpret_jaccard(j: f64) -> &'static str {
    if j >= 0.85 {
        "highly stable"
    } else if j >= 0.75 {
        "stable"
    } else if j >= 0.6 {
        "pattern"
    } else {
        "unstable"
    }
}

/// Draws `b` bootstrap resamples and scores them with
/// [`bootstrap_jaccard_with`].
pub fn bootstrap_jaccard(
    rows: &[Vec<f64>],
    k: usize,
    b: usize,
    opts: &KMeansOptions,
) -> Result<BootstrapJaccard> {
    if b == 0 {
        return Err(GcaError::Argument("bootstrap needs B ≥ 1".into()));
    }
    let n = rows.len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed_b007);
    let resamples: Vec<Vec<usize>> = (0..b)
        .map(|_| (0..n).map(|_| rng.gen_range(0..n)).collect())
        .collect();
    bootstrap_jaccard_with(rows, k, &resamples, opts)
}

/// Reclusters every resample (row indices, repeats allowed; resample `b`
/// uses seed `opts.seed + b`) and matches each original cluster to its
/// best-Jaccard bootstrap cluster over the points both contain.
pub fn bootstrap_jaccard_with(
    rows: &[Vec<f64>],
    k: usize,
    resamples: &[Vec<usize>],
    opts: &KMeansOptions,
) -> Result<BootstrapJaccard> {
    let original = kmeans(rows, k, opts)?.assignments;
    let orig_sets: Vec<BTreeSet<usize>> = (0..k)
        .map(|c| (0..rows.len()).filter(|&i| original[i] == c).collect())
        .collect();
    let per_resample: Vec<Vec<Option<f64>>> = resamples
        .par_iter()
        .enumerate()
        .map(|(b, idx)| {
            if idx.is_empty() || idx.iter().any(|&i| i >= rows.len()) {
                return Err(GcaError::Argument("bootstrap resample out of range".into()));
            }
            let data: Vec<Vec<f64>> = idx.iter().map(|&i| rows[i].clone()).collect();
            let opts_b = KMeansOptions {
                seed: opts.seed.wrapping_add(b as u64),
                ..*opts
            };
            let kk = k.min(idx.iter().collect::<BTreeSet<_>>().len());
            let part = kmeans(&data, kk, &opts_b)?.assignments;
            let mut boot: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); kk];
            for (&i, &c) in idx.iter().zip(&part) {
                boot[c].insert(i);
            }
            let present: BTreeSet<usize> = idx.iter().copied().collect();
            Ok(orig_sets
                .iter()
                .map(|c| {
                    let restricted: BTreeSet<usize> = c.intersection(&present).copied().collect();
                    if restricted.is_empty() {
                        return None;
                    }
                    Some(
                        boot.iter()
                            .map(|d| jaccard(&restricted, d))
                            .fold(0.0, f64::max),
                    )
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let per_cluster: Vec<f64> = (0..k)
        .map(|c| {
            let vals: Vec<f64> = per_resample.iter().filter_map(|r| r[c]).collect();
            if vals.is_empty() {
                0.0
            } else {
                vals.iter().sum::<f64>() / vals.len() as f64
            }
        })
        .collect();
    Ok(BootstrapJaccard {
        iterations: resamples.len(),
        interpretation: per_cluster
            .iter()
            .map(|&j| interpret_jaccard(j).to_string())
            .collect(),
        per_cluster,
    })
}

/// Contingency table between two partitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossTab {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
    pub row_totals: Vec<u64>,
    pub col_totals: Vec<u64>,
    pub total: u64,
}

impl CrossTab {
    /// Table from raw counts; labels are 1-based positions.
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let c = counts.first().map_or(0, Vec::len);
        if counts.iter().any(|r| r.len() != c) {
            return Err(GcaError::Argument("ragged contingency table".into()));
        }
        let row_labels = (1..=counts.len()).map(|i| i.to_string()).collect();
        let col_labels = (1..=c).map(|i| i.to_string()).collect();
        Ok(CrossTab::assemble(row_labels, col_labels, counts))
    }

    fn assemble(row_labels: Vec<String>, col_labels: Vec<String>, counts: Vec<Vec<u64>>) -> Self {
        let row_totals: Vec<u64> = counts.iter().map(|r| r.iter().sum()).collect();
        let col_totals: Vec<u64> = (0..col_labels.len())
            .map(|j| counts.iter().map(|r| r[j]).sum())
            .collect();
        let total = row_totals.iter().sum();
        CrossTab {
            row_labels,
            col_labels,
            counts,
            row_totals,
            col_totals,
            total,
        }
    }
}

/// Counts of items with label `i` in `a` and label `j` in `b`; labels are
/// sorted.
pub fn cross_tab<A, B>(a: &[A], b: &[B]) -> Result<CrossTab>
where
    A: Ord + ToString,
    B: Ord + ToString,
{
    if a.len() != b.len() {
        return Err(GcaError::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let rows: Vec<&A> = a.iter().collect::<BTreeSet<_>>().into_iter().collect();
    let cols: Vec<&B> = b.iter().collect::<BTreeSet<_>>().into_iter().collect();
    let mut counts = vec![vec![0u64; cols.len()]; rows.len()];
    for (x, y) in a.iter().zip(b) {
        let i = rows.binary_search(&x).expect("label present");
        let j = cols.binary_search(&y).expect("label present");
        counts[i][j] += 1;
    }
    Ok(CrossTab::assemble(
        rows.iter().map(|x| x.to_string()).collect(),
        cols.iter().map(|x| x.to_string()).collect(),
        counts,
    ))
}

fn choose2(x: u64) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

/// Adjusted Rand index (Hubert–Arabie). When the chance-corrected range is
/// empty the result is 0 if either partition is a single cluster, else 1.
pub fn ari(tab: &CrossTab) -> Result<f64> {
    if tab.total < 2 {
        return Err(GcaError::Argument("ARI needs at least 2 items".into()));
    }
    let index: f64 = tab.counts.iter().flatten().map(|&x| choose2(x)).sum();
    let sa: f64 = tab.row_totals.iter().map(|&x| choose2(x)).sum();
    let sb: f64 = tab.col_totals.iter().map(|&x| choose2(x)).sum();
    let expected = sa * sb / choose2(tab.total);
    let max = (sa + sb) / 2.0;
    if (max - expected).abs() < 1e-12 {
        let nonempty = |t: &[u64]| t.iter().filter(|&&x| x > 0).count();
        let trivial = nonempty(&tab.row_totals) < 2 || nonempty(&tab.col_totals) < 2;
        return Ok(if trivial { 0.0 } else { 1.0 });
    }
    Ok((index - expected) / (max - expected))
}

/// Cramér's V from the Pearson χ² of the table. Empty rows and columns are
/// ignored; fewer than two remaining rows or columns is an error.
pub fn cramers_v(tab: &CrossTab) -> Result<f64> {
    let rows: Vec<usize> = (0..tab.row_totals.len())
        .filter(|&i| tab.row_totals[i] > 0)
        .collect();
    let cols: Vec<usize> = (0..tab.col_totals.len())
        .filter(|&j| tab.col_totals[j] > 0)
        .collect();
    if rows.len() < 2 || cols.len() < 2 {
        return Err(GcaError::Argument(format!(
            "Cramér's V needs at least a 2×2 table, got {}×{}",
            rows.len(),
            cols.len()
        )));
    }
    let n = tab.total as f64;
    let mut chi2 = 0.0;
    for &i in &rows {
        for &j in &cols {
            let e = tab.row_totals[i] as f64 * tab.col_totals[j] as f64 / n;
            chi2 += (tab.counts[i][j] as f64 - e).powi(2) / e;
        }
    }
    let m = rows.len().min(cols.len()) as f64 - 1.0;
    Ok((chi2 / (n * m)).sqrt().clamp(0.0, 1.0))
}

/// Cross-tabulation with its agreement statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub crosstab: CrossTab,
    pub ari: f64,
    pub cramers_v: Option<f64>,
}

pub fn agreement<A, B>(a: &[A], b: &[B]) -> Result<Agreement>
where
    A: Ord + ToString,
    B: Ord + ToString,
{
    let crosstab = cross_tab(a, b)?;
    Ok(Agreement {
        ari: ari(&crosstab)?,
        cramers_v: cramers_v(&crosstab).ok(),
        crosstab,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    pub k: usize,
    pub bootstrap: usize,
    pub connectivity_neighbors: usize,
    pub hopkins: HopkinsOptions,
    pub kmeans: KMeansOptions,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            k: 6,
            bootstrap: 100,
            connectivity_neighbors: 10,
            hopkins: HopkinsOptions::default(),
            kmeans: KMeansOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Absent for fewer than 10 rows.
    pub hopkins: Option<f64>,
    pub silhouette: f64,
    /// Absent when every cluster has zero diameter (unbounded index).
    pub dunn: Option<f64>,
    pub dunn_unbounded: bool,
    pub connectivity: f64,
    pub stability: Stability,
    pub bootstrap: BootstrapJaccard,
    pub seed: u64,
    pub config: ValidationConfig,
}

/// Full battery on already-normalized rows.
pub fn validate(rows: &[Vec<f64>], cfg: &ValidationConfig) -> Result<ValidationReport> {
    let fit = kmeans(rows, cfg.k, &cfg.kmeans)?;
    let d = dunn(rows, &fit.assignments)?;
    Ok(ValidationReport {
        hopkins: if rows.len() >= 10 {
            Some(hopkins(rows, &cfg.hopkins)?)
        } else {
            None
        },
        silhouette: silhouette(rows, &fit.assignments)?.average,
        dunn: d.is_finite().then_some(d),
        dunn_unbounded: d.is_infinite(),
        connectivity: connectivity(rows, &fit.assignments, cfg.connectivity_neighbors)?,
        stability: stability_loo(rows, cfg.k, &cfg.kmeans)?,
        bootstrap: bootstrap_jaccard(rows, cfg.k, cfg.bootstrap, &cfg.kmeans)?,
        seed: cfg.kmeans.seed,
        config: *cfg,
    })
}
