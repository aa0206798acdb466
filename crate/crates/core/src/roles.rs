//! Role detection: feature normalization, k-means, choice of k, and
//! labeling of centroids against the six role archetypes.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{GcaError, Result};
use crate::measures::GcaProfile;
use crate::validation::{dunn, silhouette};

/// Clustering features in canonical order.
pub const FEATURE_NAMES: [&str; 6] = [
    "participation",
    "social_impact",
    "overall_responsivity",
    "internal_cohesion",
    "newness",
    "density",
];

pub const DEFAULT_LOWER_PCT: f64 = 0.05;
pub const DEFAULT_UPPER_PCT: f64 = 0.95;
pub const DEFAULT_RESTARTS: usize = 25;
/// Largest archetype distance (z-units) that still earns a label.
pub const DEFAULT_LABEL_THRESHOLD: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RoleLabel {
    #[serde(rename = "Over-rider")]
    OverRider,
    Driver,
    Follower,
    Lurker,
    #[serde(rename = "Socially Detached")]
    SociallyDetached,
    #[serde(rename = "Task-Leader")]
    TaskLeader,
    Unlabeled,
}

impl RoleLabel {
    /// The six archetypal roles, in archetype-table order.
    pub const ROLES: [RoleLabel; 6] = [
        RoleLabel::OverRider,
        RoleLabel::Driver,
        RoleLabel::Follower,
        RoleLabel::Lurker,
        RoleLabel::SociallyDetached,
        RoleLabel::TaskLeader,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RoleLabel::OverRider => "Over-rider",
            RoleLabel::Driver => "Driver",
            RoleLabel::Follower => "Follower",
            RoleLabel::Lurker => "Lurker",
            RoleLabel::SociallyDetached => "Socially Detached",
            RoleLabel::TaskLeader => "Task-Leader",
            RoleLabel::Unlabeled => "Unlabeled",
        }
    }
}

impl fmt::Display for RoleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RoleLabel {
    type Err = GcaError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        RoleLabel::ROLES
            .iter()
            .chain(std::iter::once(&RoleLabel::Unlabeled))
            .find(|r| r.as_str().eq_ignore_ascii_case(t))
            .copied()
            .ok_or_else(|| GcaError::Argument(format!("unknown role label '{s}'")))
    }
}

/// Archetype mean vectors (z-space, canonical feature order).
pub const ARCHETYPE_MEANS: [[f64; 6]; 6] = [
    [0.64, -0.50, -0.48, -0.30, -0.12, -0.09],
    [0.60, 0.51, 0.38, 0.39, -0.10, -0.13],
    [-0.66, 0.15, 0.21, -0.59, -0.31, -0.29],
    [-0.63, -0.66, -0.61, -0.65, -0.30, -0.26],
    [-0.37, -0.29, -0.28, 0.29, -0.25, -0.23],
    [-0.44, 0.63, 0.56, 0.55, -0.28, -0.31],
];

/// Archetype standard deviations, same layout as [`ARCHETYPE_MEANS`].
pub const ARCHETYPE_SDS: [[f64; 6]; 6] = [
    [0.23, 0.31, 0.31, 0.37, 0.14, 0.14],
    [0.24, 0.33, 0.38, 0.31, 0.14, 0.16],
    [0.28, 0.47, 0.46, 0.21, 0.14, 0.15],
    [0.27, 0.23, 0.24, 0.17, 0.13, 0.15],
    [0.36, 0.39, 0.36, 0.31, 0.15, 0.16],
    [0.32, 0.25, 0.28, 0.23, 0.12, 0.12],
];

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Rows of named numeric features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureTable {
    pub fn new(columns: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != columns.len()) {
            return Err(GcaError::DimensionMismatch {
                expected: columns.len(),
                found: bad.len(),
            });
        }
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err(GcaError::Argument(
                "feature table contains non-finite values".into(),
            ));
        }
        Ok(FeatureTable { columns, rows })
    }

    /// The six GCA features of each profile.
    pub fn from_profiles(profiles: &[GcaProfile]) -> Result<Self> {
        FeatureTable::new(
            FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            profiles.iter().map(|p| p.features().to_vec()).collect(),
        )
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[c]).collect()
    }

    /// SHA-256 of the column names and row values.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for c in &self.columns {
            h.update(c.as_bytes());
            h.update([0]);
        }
        for x in self.rows.iter().flatten() {
            h.update(x.to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

/// Per-column winsor bounds and z-score parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnParams {
    pub lower: f64,
    pub upper: f64,
    pub mean: f64,
    /// Sample standard deviation after clamping; 0 marks a constant column.
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub lower_pct: f64,
    pub upper_pct: f64,
    pub columns: Vec<String>,
    pub params: Vec<ColumnParams>,
}

impl Normalization {
    pub fn apply_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.params.len() {
            return Err(GcaError::DimensionMismatch {
                expected: self.params.len(),
                found: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(&self.params)
            .map(|(&x, p)| {
                if p.sd == 0.0 {
                    0.0
                } else {
                    (x.clamp(p.lower, p.upper) - p.mean) / p.sd
                }
            })
            .collect())
    }

    /// Normalizes `table` with these stored parameters.
    pub fn apply(&self, table: &FeatureTable) -> Result<FeatureTable> {
        check_columns(&self.columns, &table.columns)?;
        let rows = table
            .rows
            .iter()
            .map(|r| self.apply_row(r))
            .collect::<Result<_>>()?;
        Ok(FeatureTable {
            columns: table.columns.clone(),
            rows,
        })
    }
}

fn check_columns(expected: &[String], found: &[String]) -> Result<()> {
    if expected != found {
        return Err(GcaError::FeatureOrder {
            expected: expected.to_vec(),
            found: found.to_vec(),
        });
    }
    Ok(())
}

/// Quantile with linear interpolation between order statistics (the
/// common "type 7" definition). `sorted` must be non-empty and ascending.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Clamps each column to its empirical `lower`/`upper` quantiles, then
/// z-scores it (sample SD). Constant columns become zeros.
pub fn winsorize_standardize(
    table: &FeatureTable,
    lower: f64,
    upper: f64,
) -> Result<(FeatureTable, Normalization)> {
    if !(0.0 <= lower && lower < upper && upper <= 1.0) {
        return Err(GcaError::Argument(format!(
            "winsor percentiles must satisfy 0 ≤ lower < upper ≤ 1, got {lower}/{upper}"
        )));
    }
    let n = table.n_rows();
    if n < 2 {
        return Err(GcaError::EmptyInput(format!(
            "need at least 2 rows to standardize, got {n}"
        )));
    }
    let params = (0..table.n_cols())
        .map(|c| {
            let mut col = table.column(c);
            col.sort_by(f64::total_cmp);
            let lo = quantile(&col, lower);
            let hi = quantile(&col, upper);
            let clamped: Vec<f64> = col.iter().map(|x| x.clamp(lo, hi)).collect();
            let mean = clamped.iter().sum::<f64>() / n as f64;
            let var = clamped.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let sd = var.sqrt();
            let sd = if sd <= 1e-12 * (1.0 + mean.abs()) {
                0.0
            } else {
                sd
            };
            ColumnParams {
                lower: lo,
                upper: hi,
                mean,
                sd,
            }
        })
        .collect();
    let norm = Normalization {
        lower_pct: lower,
        upper_pct: upper,
        columns: table.columns.clone(),
        params,
    };
    let out = norm.apply(table)?;
    Ok((out, norm))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        KMeansOptions {
            restarts: DEFAULT_RESTARTS,
            max_iter: 300,
            seed: 7,
        }
    }
}

/// Result of the best k-means restart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansFit {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    /// Within-cluster sum of squares.
    pub wss: f64,
    pub iterations: usize,
}

/// Index of the nearest centroid; ties go to the lowest index.
pub fn nearest(centroids: &[Vec<f64>], row: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(c, row);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn plus_plus_seeds(rows: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut centroids = vec![rows[rng.gen_range(0..n)].clone()];
    let mut d2: Vec<f64> = rows.iter().map(|r| sq_dist(r, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let u = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if u < acc {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        let c = rows[pick].clone();
        for (d, r) in d2.iter_mut().zip(rows) {
            *d = d.min(sq_dist(r, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn lloyd(rows: &[Vec<f64>], mut centroids: Vec<Vec<f64>>, max_iter: usize) -> KMeansFit {
    let n = rows.len();
    let k = centroids.len();
    let dims = rows[0].len();
    let mut assignments = vec![usize::MAX; n];
    let mut previous = f64::INFINITY;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut changed = false;
        let mut dists = vec![0.0; n];
        for (i, r) in rows.iter().enumerate() {
            let (j, d) = nearest(&centroids, r);
            dists[i] = d;
            if assignments[i] != j {
                assignments[i] = j;
                changed = true;
            }
        }
        let mut sizes = vec![0usize; k];
        for &a in &assignments {
            sizes[a] += 1;
        }
        // Empty clusters take the point farthest from its own centroid.
        for j in 0..k {
            if sizes[j] == 0 {
                let far = (0..n)
                    .filter(|&i| sizes[assignments[i]] > 1)
                    .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)))
                    .expect("rows ≥ k guarantees a donor cluster");
                sizes[assignments[far]] -= 1;
                assignments[far] = j;
                sizes[j] = 1;
                dists[far] = 0.0;
                changed = true;
            }
        }
        let objective: f64 = dists.iter().sum();
        debug_assert!(
            objective <= previous * (1.0 + 1e-12) + 1e-12,
            "k-means objective increased: {previous} -> {objective}"
        );
        previous = objective;

        let mut sums = vec![vec![0.0; dims]; k];
        for (r, &a) in rows.iter().zip(&assignments) {
            for (s, x) in sums[a].iter_mut().zip(r) {
                *s += x;
            }
        }
        for (j, s) in sums.into_iter().enumerate() {
            centroids[j] = s.into_iter().map(|x| x / sizes[j] as f64).collect();
        }
        if !changed || iterations >= max_iter {
            break;
        }
    }
    let wss = rows
        .iter()
        .zip(&assignments)
        .map(|(r, &a)| sq_dist(r, &centroids[a]))
        .sum();
    KMeansFit {
        centroids,
        assignments,
        wss,
        iterations,
    }
}

/// Lloyd's algorithm with k-means++ seeding; best of `opts.restarts` runs by
/// within-cluster sum of squares. Restart `r` uses seed `opts.seed + r`.
pub fn kmeans(rows: &[Vec<f64>], k: usize, opts: &KMeansOptions) -> Result<KMeansFit> {
    if k == 0 {
        return Err(GcaError::Argument("k must be ≥ 1".into()));
    }
    if rows.len() < k {
        return Err(GcaError::Argument(format!(
            "cannot form {k} clusters from {} rows",
            rows.len()
        )));
    }
    let dims = rows[0].len();
    if let Some(bad) = rows.iter().find(|r| r.len() != dims) {
        return Err(GcaError::DimensionMismatch {
            expected: dims,
            found: bad.len(),
        });
    }
    let fits: Vec<KMeansFit> = (0..opts.restarts.max(1) as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(r));
            let seeds = plus_plus_seeds(rows, k, &mut rng);
            lloyd(rows, seeds, opts.max_iter.max(1))
        })
        .collect();
    let best = fits
        .into_iter()
        .reduce(|best, f| if f.wss < best.wss { f } else { best })
        .expect("at least one restart");
    Ok(best)
}

/// Fitted clustering in normalized feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleModel {
    pub k: usize,
    pub features: Vec<String>,
    pub centroids: Vec<Vec<f64>>,
    pub labels: Vec<RoleLabel>,
    /// Absent when the model was fitted on already-normalized rows.
    pub normalization: Option<Normalization>,
    pub seed: u64,
    pub restarts: usize,
    pub wss: f64,
    pub training_fingerprint: String,
}

impl RoleModel {
    /// Normalizes `raw` (when the model stores parameters) and fits k-means.
    pub fn fit(
        raw: &FeatureTable,
        k: usize,
        winsor: Option<(f64, f64)>,
        opts: &KMeansOptions,
    ) -> Result<(RoleModel, Vec<usize>)> {
        let (table, normalization) = match winsor {
            Some((lo, hi)) => {
                let (t, n) = winsorize_standardize(raw, lo, hi)?;
                (t, Some(n))
            }
            None => (raw.clone(), None),
        };
        let fit = kmeans(&table.rows, k, opts)?;
        let model = RoleModel {
            k,
            features: raw.columns.clone(),
            centroids: fit.centroids,
            labels: vec![RoleLabel::Unlabeled; k],
            normalization,
            seed: opts.seed,
            restarts: opts.restarts,
            wss: fit.wss,
            training_fingerprint: raw.fingerprint(),
        };
        Ok((model, fit.assignments))
    }

    /// Role label per row, through the cluster assignment.
    pub fn role_of(&self, cluster: usize) -> RoleLabel {
        self.labels[cluster]
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        crate::io::write_json(self, path.as_ref())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        crate::io::read_json(path.as_ref())
    }
}

/// Closest archetype to `centroid`, or `Unlabeled` beyond `threshold`.
pub fn nearest_archetype(centroid: &[f64], threshold: f64) -> (RoleLabel, f64) {
    let (j, d2) = ARCHETYPE_MEANS
        .iter()
        .enumerate()
        .map(|(j, a)| (j, sq_dist(a, centroid)))
        .fold((0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
    let d = d2.sqrt();
    if d > threshold {
        (RoleLabel::Unlabeled, d)
    } else {
        (RoleLabel::ROLES[j], d)
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Labels the centroids of a six-cluster model with the archetypes by the
/// one-to-one assignment minimizing total distance. Centroids farther than
/// `threshold` from their assigned archetype, and every centroid of a model
/// with `k ≠ 6`, are `Unlabeled`.
pub fn label_roles(mut model: RoleModel, threshold: f64) -> Result<RoleModel> {
    let canonical: Vec<String> = FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
    check_columns(&canonical, &model.features)?;
    if model.k != 6 {
        model.labels = vec![RoleLabel::Unlabeled; model.k];
        return Ok(model);
    }
    let cost: Vec<Vec<f64>> = model
        .centroids
        .iter()
        .map(|c| {
            ARCHETYPE_MEANS
                .iter()
                .map(|a| sq_dist(a, c).sqrt())
                .collect()
        })
        .collect();
    // 720 candidate assignments: exhaustive search is exact and cheap.
    let best = permutations(6)
        .into_iter()
        .map(|p| {
            let total: f64 = p.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
            (total, p)
        })
        .fold(
            (f64::INFINITY, Vec::new()),
            |b, c| if c.0 < b.0 { c } else { b },
        )
        .1;
    model.labels = best
        .iter()
        .enumerate()
        .map(|(i, &j)| {
            if cost[i][j] > threshold {
                RoleLabel::Unlabeled
            } else {
                RoleLabel::ROLES[j]
            }
        })
        .collect();
    Ok(model)
}

/// Nearest centroid for each already-normalized row.
pub fn assign(model: &RoleModel, rows: &[Vec<f64>]) -> Result<Vec<usize>> {
    let dims = model.features.len();
    rows.iter()
        .map(|r| {
            if r.len() != dims {
                return Err(GcaError::DimensionMismatch {
                    expected: dims,
                    found: r.len(),
                });
            }
            Ok(nearest(&model.centroids, r).0)
        })
        .collect()
}

/// Applies the model's stored normalization to `raw`, then assigns.
pub fn assign_raw(model: &RoleModel, raw: &FeatureTable) -> Result<Vec<usize>> {
    check_columns(&model.features, &raw.columns)?;
    match &model.normalization {
        Some(n) => assign(model, &n.apply(raw)?.rows),
        None => assign(model, &raw.rows),
    }
}

/// Cluster-quality indices for one k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KScores {
    pub k: usize,
    pub wss: f64,
    pub silhouette: f64,
    /// Absent (unbounded) when the within-cluster scatter is zero.
    pub calinski_harabasz: Option<f64>,
    /// Absent (unbounded) when every cluster has zero diameter.
    pub dunn: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSelection {
    pub recommended: usize,
    /// Winning k of each index: elbow, silhouette, calinski_harabasz, dunn.
    pub votes: Vec<(String, usize)>,
    pub scores: Vec<KScores>,
    /// Fewer than three indices agree, or the best silhouette is weak.
    pub low_confidence: bool,
}

fn calinski_harabasz(rows: &[Vec<f64>], wss: f64, k: usize) -> f64 {
    let n = rows.len();
    let dims = rows[0].len();
    let mut mean = vec![0.0; dims];
    for r in rows {
        for (m, x) in mean.iter_mut().zip(r) {
            *m += x / n as f64;
        }
    }
    let tss: f64 = rows.iter().map(|r| sq_dist(r, &mean)).sum();
    let between = tss - wss;
    if wss <= 0.0 || n <= k {
        return f64::INFINITY;
    }
    (between / (k - 1) as f64) / (wss / (n - k) as f64)
}

fn argmax_first(items: impl Iterator<Item = (usize, f64)>) -> usize {
    items
        .fold((0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b })
        .0
}

/// Majority vote of four indices over `kmin..=kmax`; ties go to the smaller k.
pub fn select_k(
    rows: &[Vec<f64>],
    kmin: usize,
    kmax: usize,
    opts: &KMeansOptions,
) -> Result<KSelection> {
    let n = rows.len();
    if kmin < 2 || kmax < kmin || kmax > n.saturating_sub(1) {
        return Err(GcaError::Argument(format!(
            "k range {kmin}..={kmax} must lie within [2, {}]",
            n.saturating_sub(1)
        )));
    }
    let lo = kmin - 1;
    let hi = (kmax + 1).min(n);
    let fits: Vec<(usize, KMeansFit)> = (lo..=hi)
        .map(|k| kmeans(rows, k, opts).map(|f| (k, f)))
        .collect::<Result<_>>()?;
    let wss_of = |k: usize| fits.iter().find(|(kk, _)| *kk == k).map(|(_, f)| f.wss);

    let mut scores = Vec::new();
    for (k, fit) in &fits {
        if *k < kmin || *k > kmax {
            continue;
        }
        let ch = calinski_harabasz(rows, fit.wss, *k);
        let d = dunn(rows, &fit.assignments)?;
        scores.push(KScores {
            k: *k,
            wss: fit.wss,
            silhouette: silhouette(rows, &fit.assignments)?.average,
            calinski_harabasz: ch.is_finite().then_some(ch),
            dunn: d.is_finite().then_some(d),
        });
    }
    let elbow = argmax_first(scores.iter().map(|s| {
        let prev = wss_of(s.k - 1).unwrap_or(s.wss);
        let next = wss_of(s.k + 1).unwrap_or(s.wss);
        (s.k, prev - 2.0 * s.wss + next)
    }));
    let votes = vec![
        ("elbow".to_string(), elbow),
        (
            "silhouette".to_string(),
            argmax_first(scores.iter().map(|s| (s.k, s.silhouette))),
        ),
        (
            "calinski_harabasz".to_string(),
            argmax_first(
                scores
                    .iter()
                    .map(|s| (s.k, s.calinski_harabasz.unwrap_or(f64::INFINITY))),
            ),
        ),
        (
            "dunn".to_string(),
            argmax_first(
                scores
                    .iter()
                    .map(|s| (s.k, s.dunn.unwrap_or(f64::INFINITY))),
            ),
        ),
    ];
    let mut tally: Vec<(usize, usize)> = Vec::new();
    for (_, k) in &votes {
        match tally.iter_mut().find(|(kk, _)| kk == k) {
            Some(t) => t.1 += 1,
            None => tally.push((*k, 1)),
        }
    }
    tally.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let (recommended, support) = tally[0];
    let best_sil = scores
        .iter()
        .map(|s| s.silhouette)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(KSelection {
        recommended,
        votes,
        scores,
        low_confidence: support < 3 || best_sil < 0.25,
    })
}
