//! End-to-end run: ingest, space, measures, roles, validation, topics and
//! group report, with a manifest rewritten after every stage.
//!
//! All outputs are deterministic for a fixed configuration, so two runs on
//! unchanged inputs produce byte-identical files.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::composition::{
    default_label_set, group_report, GroupComposition, GroupRelevanceScore, RoleAssignment,
};
use crate::corpus::{
    ingest_transcripts, load_background_corpus, transcript_documents, GroupTranscript,
};
use crate::error::{GcaError, Result};
use crate::measures::{
    calibrate_window, profile_all, AnalysisConfig, GcaProfile, DEFAULT_COVERAGE, DEFAULT_WINDOW,
};
use crate::roles::{
    assign_raw, label_roles, select_k, winsorize_standardize, FeatureTable, KMeansOptions,
    RoleModel,
};
use crate::semspace::{SemanticSpace, SpaceOptions, Weighting, DEFAULT_DIMS};
use crate::tables::{self, AssignmentRow};
use crate::topics::{fit_lda, topic_relevance, LdaOptions, RelevanceSpec, TopicModel};
use crate::validation::{validate, HopkinsOptions, ValidationConfig, ValidationReport};

/// Optional topic-relevance stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopicStage {
    pub topics: usize,
    /// Relevant topic ids (0-based); all others count as off-task.
    pub relevant: Vec<usize>,
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
}

impl Default for TopicStage {
    fn default() -> Self {
        let lda = LdaOptions::default();
        TopicStage {
            topics: lda.topics,
            relevant: Vec::new(),
            alpha: lda.alpha,
            beta: lda.beta,
            iterations: lda.iterations,
        }
    }
}

/// Pipeline settings, read from a flat TOML key–value file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub transcripts: PathBuf,
    /// Background documents (directory or JSONL); transcripts are always
    /// added.
    pub corpus: Option<PathBuf>,
    /// Prebuilt space; must exist when given.
    pub space: Option<PathBuf>,
    /// Prebuilt role model; when given, profiles are assigned instead of
    /// clustered.
    pub model: Option<PathBuf>,
    pub quiz: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub window: usize,
    /// Choose the window from the transcripts instead of `window`.
    pub calibrate_window: bool,
    pub coverage: f64,
    pub dims: usize,
    pub weighting: String,
    pub min_doc_freq: usize,
    pub winsor_lower: f64,
    pub winsor_upper: f64,
    pub k: usize,
    /// Pick k by index majority over `k_min..=k_max` instead of `k`.
    pub select_k: bool,
    pub k_min: usize,
    pub k_max: usize,
    pub seed: u64,
    pub restarts: usize,
    pub label_threshold: f64,
    pub validate: bool,
    pub bootstrap: usize,
    pub connectivity_neighbors: usize,
    /// Fail with a threshold error when the average silhouette is lower.
    pub min_silhouette: Option<f64>,
    /// Fail with a threshold error when any cluster's bootstrap Jaccard is
    /// lower.
    pub min_jaccard: Option<f64>,
    pub topics: Option<TopicStage>,
    pub threads: Option<usize>,
    pub log_level: Option<String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            transcripts: PathBuf::new(),
            corpus: None,
            space: None,
            model: None,
            quiz: None,
            output_dir: PathBuf::from("gca-out"),
            window: DEFAULT_WINDOW,
            calibrate_window: false,
            coverage: DEFAULT_COVERAGE,
            dims: DEFAULT_DIMS,
            weighting: "log-entropy".into(),
            min_doc_freq: 1,
            winsor_lower: crate::roles::DEFAULT_LOWER_PCT,
            winsor_upper: crate::roles::DEFAULT_UPPER_PCT,
            k: 6,
            select_k: false,
            k_min: 2,
            k_max: 10,
            seed: 7,
            restarts: crate::roles::DEFAULT_RESTARTS,
            label_threshold: crate::roles::DEFAULT_LABEL_THRESHOLD,
            validate: true,
            bootstrap: 100,
            connectivity_neighbors: 10,
            min_silhouette: None,
            min_jaccard: None,
            topics: None,
            threads: None,
            log_level: None,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| GcaError::Argument(format!("bad config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| GcaError::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        // Relative paths are taken relative to the config file.
        if let Some(base) = path.parent() {
            let fix = |p: &mut PathBuf| {
                if p.is_relative() && !p.as_os_str().is_empty() {
                    *p = base.join(&*p);
                }
            };
            fix(&mut cfg.transcripts);
            fix(&mut cfg.output_dir);
            for p in [
                &mut cfg.corpus,
                &mut cfg.space,
                &mut cfg.model,
                &mut cfg.quiz,
            ]
            .into_iter()
            .flatten()
            {
                fix(p);
            }
        }
        Ok(cfg)
    }

    pub fn check(&self) -> Result<()> {
        if self.transcripts.as_os_str().is_empty() {
            return Err(GcaError::Argument("config needs `transcripts`".into()));
        }
        if self.window == 0 || self.dims == 0 {
            return Err(GcaError::Argument("window and dims must be ≥ 1".into()));
        }
        self.weighting.parse::<Weighting>()?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, leaving out settings that cannot
    /// change results (output directory, threads, log level).
    pub fn fingerprint(&self) -> String {
        let relevant = PipelineConfig {
            output_dir: PathBuf::new(),
            threads: None,
            log_level: None,
            ..self.clone()
        };
        let json = serde_json::to_vec(&relevant).expect("config serializes");
        hex::encode(Sha256::digest(json))
    }

    fn kmeans(&self) -> KMeansOptions {
        KMeansOptions {
            restarts: self.restarts,
            seed: self.seed,
            ..Default::default()
        }
    }
}

/// A JSON output tagged with the producing tool version and configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stamped<T> {
    pub tool_version: String,
    pub config_fingerprint: String,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Stamped<T> {
    pub fn new(body: T, config_fingerprint: impl Into<String>) -> Self {
        Stamped {
            tool_version: crate::VERSION.to_string(),
            config_fingerprint: config_fingerprint.into(),
            body,
        }
    }
}

/// Groups wrapper so the report can carry a stamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupsFile {
    pub groups: Vec<GroupComposition>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub outputs: Vec<FileDigest>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub config_fingerprint: String,
    pub seed: u64,
    /// `running`, `complete` or `failed`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failed_stage: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub inputs: Vec<FileDigest>,
    pub stages: Vec<StageRecord>,
}

/// SHA-256 of a file, hex encoded.
/// Hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| GcaError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

/// SHA-256 over every file below `path` (sorted by relative name).
fn sha256_path(path: &Path) -> Result<String> {
    if !path.is_dir() {
        return sha256_file(path);
    }
    let mut files = Vec::new();
    let mut stack = vec![path.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).map_err(|e| GcaError::io(&dir, e))? {
            let p = entry.map_err(|e| GcaError::io(&dir, e))?.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.push(p);
            }
        }
    }
    files.sort();
    let mut h = Sha256::new();
    for f in files {
        h.update(
            f.strip_prefix(path)
                .unwrap_or(&f)
                .to_string_lossy()
                .as_bytes(),
        );
        h.update([0]);
        h.update(fs::read(&f).map_err(|e| GcaError::io(&f, e))?);
    }
    Ok(hex::encode(h.finalize()))
}

/// Machine-readable result of a complete run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSummary {
    pub output_dir: PathBuf,
    pub n_groups: usize,
    pub n_participants: usize,
    pub window: usize,
    pub k: usize,
    pub roles: Vec<String>,
    pub silhouette: Option<f64>,
    pub outputs: Vec<FileDigest>,
}

struct Run<'a> {
    cfg: &'a PipelineConfig,
    manifest: Manifest,
}

impl Run<'_> {
    fn out(&self, name: &str) -> PathBuf {
        self.cfg.output_dir.join(name)
    }

    fn save_manifest(&self) -> Result<()> {
        crate::io::write_json(&self.manifest, &self.out("manifest.json"))
    }

    /// Runs one stage and records its outputs (file names in the output
    /// directory) in the manifest.
    fn stage<T>(
        &mut self,
        name: &str,
        f: impl FnOnce(&Self) -> Result<(T, Vec<&'static str>)>,
    ) -> Result<T> {
        log::info!("stage {name}");
        match f(self).and_then(|(value, files)| {
            let outputs = files
                .into_iter()
                .map(|file| {
                    Ok(FileDigest {
                        path: file.to_string(),
                        sha256: sha256_file(&self.out(file))?,
                    })
                })
                .collect::<Result<_>>()?;
            Ok((value, outputs))
        }) {
            Ok((value, outputs)) => {
                self.manifest.stages.push(StageRecord {
                    name: name.to_string(),
                    outputs,
                });
                self.save_manifest()?;
                Ok(value)
            }
            Err(e) => {
                self.manifest.status = "failed".into();
                self.manifest.failed_stage = Some(name.to_string());
                self.manifest.error = Some(e.to_string());
                if let Err(m) = self.save_manifest() {
                    log::error!("could not write manifest: {m}");
                }
                Err(GcaError::Stage {
                    stage: name.to_string(),
                    source: Box::new(e),
                })
            }
        }
    }
}

fn stamp_json<T: Serialize>(value: T, fingerprint: &str, path: &Path) -> Result<()> {
    crate::io::write_json(&Stamped::new(value, fingerprint), path)
}

/// Executes every configured stage in order.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineSummary> {
    cfg.check()?;
    fs::create_dir_all(&cfg.output_dir).map_err(|e| GcaError::io(&cfg.output_dir, e))?;
    let fp = cfg.fingerprint();
    let mut inputs = Vec::new();
    for p in [
        Some(&cfg.transcripts),
        cfg.corpus.as_ref(),
        cfg.space.as_ref(),
        cfg.model.as_ref(),
        cfg.quiz.as_ref(),
    ]
    .into_iter()
    .flatten()
    {
        // Missing inputs are reported by the stage that reads them.
        if let Ok(sha256) = sha256_path(p) {
            inputs.push(FileDigest {
                path: p.display().to_string(),
                sha256,
            });
        }
    }
    let mut run = Run {
        cfg,
        manifest: Manifest {
            tool_version: crate::VERSION.to_string(),
            config_fingerprint: fp.clone(),
            seed: cfg.seed,
            status: "running".into(),
            failed_stage: None,
            error: None,
            inputs,
            stages: Vec::new(),
        },
    };

    let groups: Vec<GroupTranscript> = run.stage("ingest", |_| {
        let ing = ingest_transcripts(&cfg.transcripts)?;
        for w in &ing.warnings {
            log::warn!("{w}");
        }
        Ok((ing.groups, vec![]))
    })?;

    let space: SemanticSpace = run.stage("space", |r| match &cfg.space {
        Some(path) => Ok((SemanticSpace::load(path)?, vec![])),
        None => {
            let mut docs = match &cfg.corpus {
                Some(c) => load_background_corpus(c)?,
                None => Vec::new(),
            };
            docs.extend(transcript_documents(&groups));
            let opts = SpaceOptions {
                dims: cfg.dims,
                weighting: cfg.weighting.parse()?,
                min_doc_freq: cfg.min_doc_freq,
                ..Default::default()
            };
            let space = SemanticSpace::build(&docs, &opts)?;
            space.save(r.out("space.bin"))?;
            Ok((space, vec!["space.bin"]))
        }
    })?;

    let (profiles, window): (Vec<GcaProfile>, usize) = run.stage("measures", |r| {
        let window = if cfg.calibrate_window {
            calibrate_window(&groups, cfg.coverage)?
        } else {
            cfg.window
        };
        let acfg = AnalysisConfig {
            window,
            ..Default::default()
        };
        let profiles = profile_all(&groups, &space, &acfg)?;
        tables::write_profiles_file(&profiles, &r.out("profiles.csv"))?;
        Ok(((profiles, window), vec!["profiles.csv"]))
    })?;

    let raw = FeatureTable::from_profiles(&profiles)?;
    let (model, clusters): (RoleModel, Vec<usize>) = run.stage("cluster", |r| {
        let (model, clusters) = match &cfg.model {
            Some(path) => {
                let model = RoleModel::load(path)?;
                let clusters = assign_raw(&model, &raw)?;
                (model, clusters)
            }
            None => {
                let k = if cfg.select_k {
                    let (norm, _) =
                        winsorize_standardize(&raw, cfg.winsor_lower, cfg.winsor_upper)?;
                    let kmax = cfg.k_max.min(norm.n_rows().saturating_sub(1));
                    let sel = select_k(&norm.rows, cfg.k_min, kmax, &cfg.kmeans())?;
                    if sel.low_confidence {
                        log::warn!("k selection has low confidence: {:?}", sel.votes);
                    }
                    sel.recommended
                } else {
                    cfg.k
                };
                let (model, clusters) = RoleModel::fit(
                    &raw,
                    k,
                    Some((cfg.winsor_lower, cfg.winsor_upper)),
                    &cfg.kmeans(),
                )?;
                (label_roles(model, cfg.label_threshold)?, clusters)
            }
        };
        stamp_json(&model, &fp, &r.out("model.json"))?;
        let rows: Vec<AssignmentRow> = profiles
            .iter()
            .zip(&clusters)
            .map(|(p, &c)| AssignmentRow {
                group_id: p.group_id.clone(),
                participant_id: p.participant_id.clone(),
                cluster: c,
                role: model.labels[c].to_string(),
            })
            .collect();
        tables::write_assignments_file(&rows, &r.out("roles.csv"))?;
        Ok(((model, clusters), vec!["model.json", "roles.csv"]))
    })?;

    let report: Option<ValidationReport> = if cfg.validate {
        Some(run.stage("validate", |r| {
            let rows = match &model.normalization {
                Some(n) => n.apply(&raw)?.rows,
                None => raw.rows.clone(),
            };
            let vcfg = ValidationConfig {
                k: model.k,
                bootstrap: cfg.bootstrap,
                connectivity_neighbors: cfg.connectivity_neighbors,
                hopkins: HopkinsOptions {
                    seed: cfg.seed,
                    ..Default::default()
                },
                kmeans: cfg.kmeans(),
            };
            let report = validate(&rows, &vcfg)?;
            stamp_json(&report, &fp, &r.out("report.json"))?;
            check_thresholds(cfg, &report)?;
            Ok((report, vec!["report.json"]))
        })?)
    } else {
        None
    };

    let relevance: Vec<GroupRelevanceScore> = match &cfg.topics {
        Some(ts) => run.stage("topics", |r| {
            let mut docs = match &cfg.corpus {
                Some(c) => load_background_corpus(c)?,
                None => Vec::new(),
            };
            docs.extend(transcript_documents(&groups));
            let tokens: Vec<Vec<String>> = docs.into_iter().map(|d| d.tokens).collect();
            let model: TopicModel = fit_lda(
                &tokens,
                &LdaOptions {
                    topics: ts.topics,
                    alpha: ts.alpha,
                    beta: ts.beta,
                    iterations: ts.iterations,
                    seed: cfg.seed,
                    ..Default::default()
                },
            )?;
            model.save(r.out("topics.json"))?;
            let spec = RelevanceSpec::from_relevant(ts.relevant.iter().copied(), ts.topics)?;
            let scores = groups
                .iter()
                .map(|g| {
                    topic_relevance(g, &model, &spec).map(|gr| GroupRelevanceScore {
                        group_id: gr.group_id,
                        relevance: gr.relevance,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            tables::write_file(&r.out("relevance.csv"), |f| {
                tables::write_relevance(&scores, f)
            })?;
            Ok((scores, vec!["topics.json", "relevance.csv"]))
        })?,
        None => Vec::new(),
    };

    run.stage("report", |r| {
        let quiz = match &cfg.quiz {
            Some(q) => tables::read_file(q, tables::read_quiz)?,
            None => Vec::new(),
        };
        let assignments: Vec<RoleAssignment> = profiles
            .iter()
            .zip(&clusters)
            .map(|(p, &c)| RoleAssignment {
                group_id: p.group_id.clone(),
                participant_id: p.participant_id.clone(),
                role: model.labels[c].to_string(),
            })
            .collect();
        let groups = group_report(&assignments, &relevance, &quiz, &default_label_set())?;
        stamp_json(GroupsFile { groups }, &fp, &r.out("groups.json"))?;
        Ok(((), vec!["groups.json"]))
    })?;

    run.manifest.status = "complete".into();
    run.save_manifest()?;
    let outputs = run
        .manifest
        .stages
        .iter()
        .flat_map(|s| s.outputs.iter().cloned())
        .collect();
    let roles: BTreeSet<String> = clusters
        .iter()
        .map(|&c| model.labels[c].to_string())
        .collect();
    Ok(PipelineSummary {
        output_dir: cfg.output_dir.clone(),
        n_groups: groups.len(),
        n_participants: profiles.len(),
        window,
        k: model.k,
        roles: roles.into_iter().collect(),
        silhouette: report.as_ref().map(|r| r.silhouette),
        outputs,
    })
}

/// Applies the configured silhouette and Jaccard floors.
pub fn check_thresholds(cfg: &PipelineConfig, report: &ValidationReport) -> Result<()> {
    if let Some(min) = cfg.min_silhouette {
        if report.silhouette < min {
            return Err(GcaError::Threshold(format!(
                "average silhouette {:.4} < {min}",
                report.silhouette
            )));
        }
    }
    if let Some(min) = cfg.min_jaccard {
        if let Some((c, j)) = report
            .bootstrap
            .per_cluster
            .iter()
            .enumerate()
            .find(|(_, &j)| j < min)
        {
            return Err(GcaError::Threshold(format!(
                "cluster {c} bootstrap Jaccard {j:.4} < {min}"
            )));
        }
    }
    Ok(())
}
