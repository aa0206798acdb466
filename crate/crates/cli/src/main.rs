//! `gca`: command-line front end for group communication analysis.
//!
//! Exit codes: 0 success, 1 internal error, 2 input error, 3 a validation
//! statistic below its configured floor.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gca::composition::default_label_set;
use gca::corpus::{
    ingest_transcripts, load_background_corpus, transcript_documents, write_transcripts_csv,
};
use gca::measures::{calibrate_window, profile_all, AnalysisConfig, DEFAULT_COVERAGE};
use gca::pipeline::{
    check_thresholds, run_pipeline, sha256_hex, GroupsFile, PipelineConfig, Stamped,
};
use gca::roles::{
    assign_raw, label_roles, select_k, winsorize_standardize, FeatureTable, KMeansOptions,
    RoleModel,
};
use gca::semspace::{SemanticSpace, SpaceOptions};
use gca::synth::{closed_space, gen_blobs, gen_conversation, BlobSpec, Script};
use gca::tables::{self, AssignmentRow};
use gca::topics::{fit_lda, topic_relevance, LdaOptions, RelevanceSpec, TopicModel};
use gca::validation::{agreement, validate, HopkinsOptions, ValidationConfig};
use gca::{GcaError, Result};

#[derive(Parser, Debug)]
#[command(
    name = "gca",
    version,
    about = "Group communication analysis of chat transcripts"
)]
struct Cli {
    /// Key–value (TOML) configuration; supplies pipeline settings and
    /// defaults for the global flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every stochastic step (default 7).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// error, warn, info, debug or trace.
    #[arg(long, global = true)]
    log_level: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Read a transcript CSV and report its groups.
    Ingest {
        #[arg(long)]
        transcripts: PathBuf,
        /// Write the normalized transcripts here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build a semantic space.
    #[command(subcommand)]
    Space(SpaceCommand),
    /// Compute GCA profiles.
    Measures {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        transcripts: PathBuf,
        #[arg(long, default_value_t = gca::measures::DEFAULT_WINDOW, conflicts_with = "calibrate_window")]
        window: usize,
        /// Choose the window so 95% of participants have an own pair in it.
        #[arg(long)]
        calibrate_window: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// LDA topic model and topic relevance.
    #[command(subcommand)]
    Topics(TopicsCommand),
    /// Cluster profiles into roles.
    Cluster(ClusterArgs),
    /// Validation battery for a k-cluster solution.
    Validate {
        #[arg(long)]
        profiles: PathBuf,
        #[arg(long, default_value_t = 6)]
        k: usize,
        #[arg(long, default_value_t = 100)]
        bootstrap: usize,
        #[arg(long, default_value_t = gca::roles::DEFAULT_RESTARTS)]
        restarts: usize,
        /// Normalize with this model's stored parameters.
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        norm: NormArgs,
        #[arg(long, default_value_t = 10)]
        connectivity_neighbors: usize,
        /// Exit with code 3 when the average silhouette is lower.
        #[arg(long)]
        min_silhouette: Option<f64>,
        /// Exit with code 3 when any cluster's bootstrap Jaccard is lower.
        #[arg(long)]
        min_jaccard: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Cross-tabulate two labelings (ARI, Cramér's V).
    Agree {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value = "cluster")]
        column_a: String,
        #[arg(long, default_value = "cluster")]
        column_b: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Assign profiles to a fitted model's clusters.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        profiles: PathBuf,
        /// Column of reference labels to compare against.
        #[arg(long)]
        labels: Option<String>,
        /// Where to write the agreement JSON (stdout when omitted).
        #[arg(long)]
        agreement: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Group composition report.
    Report {
        #[arg(long)]
        assignments: PathBuf,
        #[arg(long)]
        relevance: Option<PathBuf>,
        #[arg(long)]
        quiz: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Synthetic fixtures.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// End-to-end run driven by --config.
    #[command(subcommand)]
    Pipeline(PipelineCommand),
}

#[derive(Subcommand, Debug)]
enum SpaceCommand {
    Build {
        /// Directory of documents or a JSON-lines file.
        #[arg(long)]
        docs: PathBuf,
        /// Also use these transcripts' contributions as documents.
        #[arg(long)]
        transcripts: Option<PathBuf>,
        #[arg(long, default_value_t = gca::semspace::DEFAULT_DIMS)]
        dims: usize,
        #[arg(long, default_value = "log-entropy")]
        weighting: String,
        #[arg(long, default_value_t = 1)]
        min_doc_freq: usize,
        /// `.json` writes JSON, anything else a binary bundle.
        #[arg(short, long)]
        output: PathBuf,
        /// Additionally write a JSON copy.
        #[arg(long)]
        export_json: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum TopicsCommand {
    Fit {
        #[arg(long)]
        docs: PathBuf,
        #[arg(long)]
        transcripts: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        k: usize,
        /// Default 50/k.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 0.01)]
        beta: f64,
        #[arg(long, default_value_t = 1000)]
        iterations: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    Relevance {
        #[arg(long)]
        model: PathBuf,
        /// Comma-separated relevant topic ids (0-based).
        #[arg(long, value_delimiter = ',')]
        relevant: Vec<usize>,
        #[arg(long)]
        transcripts: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    TopWords {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 10)]
        n: usize,
    },
}

#[derive(Args, Debug)]
struct NormArgs {
    #[arg(long, default_value_t = gca::roles::DEFAULT_LOWER_PCT)]
    winsor_lower: f64,
    #[arg(long, default_value_t = gca::roles::DEFAULT_UPPER_PCT)]
    winsor_upper: f64,
    /// Use the feature values as they are (already in z-space).
    #[arg(long)]
    no_normalize: bool,
}

#[derive(Args, Debug)]
#[command(args_conflicts_with_subcommands = true)]
struct ClusterArgs {
    #[arg(long)]
    profiles: Option<PathBuf>,
    #[arg(long, default_value_t = 6)]
    k: usize,
    #[arg(long, default_value_t = gca::roles::DEFAULT_RESTARTS)]
    restarts: usize,
    #[command(flatten)]
    norm: NormArgs,
    #[arg(long, default_value_t = gca::roles::DEFAULT_LABEL_THRESHOLD)]
    label_threshold: f64,
    /// Also write per-participant cluster and role.
    #[arg(long)]
    assignments: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    sub: Option<ClusterSub>,
}

#[derive(Subcommand, Debug)]
enum ClusterSub {
    /// Vote on k with four indices.
    SelectK {
        #[arg(long)]
        profiles: PathBuf,
        #[arg(long, default_value_t = 2)]
        kmin: usize,
        #[arg(long, default_value_t = 10)]
        kmax: usize,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[command(flatten)]
        norm: NormArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum SynthCommand {
    Blobs {
        #[arg(long, default_value = "table4")]
        preset: String,
        #[arg(long, default_value_t = 120)]
        per_cluster: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    Chat {
        #[arg(long)]
        script: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write the closed-vocabulary space for the script.
        #[arg(long)]
        space: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum PipelineCommand {
    Run {
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Context {
    seed: u64,
    fingerprint: String,
    config: Option<PipelineConfig>,
}

impl Context {
    fn kmeans(&self, restarts: usize) -> KMeansOptions {
        KMeansOptions {
            restarts,
            seed: self.seed,
            ..Default::default()
        }
    }

    fn write_json<T: serde::Serialize>(&self, value: T, path: &Path) -> Result<()> {
        gca::io::write_json(&Stamped::new(value, self.fingerprint.clone()), path)
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| GcaError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn normalized(raw: &FeatureTable, norm: &NormArgs) -> Result<FeatureTable> {
    if norm.no_normalize {
        Ok(raw.clone())
    } else {
        Ok(winsorize_standardize(raw, norm.winsor_lower, norm.winsor_upper)?.0)
    }
}

fn background(
    docs: &Path,
    transcripts: Option<&PathBuf>,
) -> Result<Vec<gca::corpus::BackgroundDocument>> {
    let mut out = load_background_corpus(docs)?;
    if let Some(t) = transcripts {
        out.extend(transcript_documents(&ingest_transcripts(t)?.groups));
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<()> {
    let config = cli
        .config
        .as_deref()
        .map(PipelineConfig::load)
        .transpose()?;
    let seed = cli.seed.or(config.as_ref().map(|c| c.seed)).unwrap_or(7);
    let threads = cli.threads.or(config.as_ref().and_then(|c| c.threads));
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| GcaError::Argument(format!("thread pool: {e}")))?;
    }
    // Stamped outputs record a digest of the arguments that produced them.
    let fingerprint = sha256_hex(format!("{:?}|{seed}", cli.command).as_bytes());
    let ctx = Context {
        seed,
        fingerprint,
        config,
    };
    dispatch(cli.command, &ctx)
}

fn dispatch(command: Command, ctx: &Context) -> Result<()> {
    match command {
        Command::Ingest {
            transcripts,
            output,
        } => {
            let ing = ingest_transcripts(&transcripts)?;
            if let Some(out) = output {
                let f = fs::File::create(&out).map_err(|e| GcaError::Io {
                    path: out.clone(),
                    source: e,
                })?;
                write_transcripts_csv(&ing.groups, f)?;
            }
            let summary = serde_json::json!({
                "groups": ing.groups.len(),
                "contributions": ing.groups.iter().map(|g| g.n()).sum::<usize>(),
                "participants": ing.groups.iter().map(|g| g.k()).sum::<usize>(),
                "warnings": ing.warnings,
            });
            print_json(&summary)
        }
        Command::Space(SpaceCommand::Build {
            docs,
            transcripts,
            dims,
            weighting,
            min_doc_freq,
            output,
            export_json,
        }) => {
            let corpus = background(&docs, transcripts.as_ref())?;
            let opts = SpaceOptions {
                dims,
                weighting: weighting.parse()?,
                min_doc_freq,
                ..Default::default()
            };
            let space = SemanticSpace::build(&corpus, &opts)?;
            space.save(&output)?;
            if let Some(j) = export_json {
                space.save(&j)?;
            }
            print_json(&serde_json::json!({
                "terms": space.vocabulary_len(),
                "dims": space.dims(),
                "fingerprint": space.fingerprint(),
            }))
        }
        Command::Measures {
            space,
            transcripts,
            window,
            calibrate_window: calibrate,
            output,
        } => {
            let space = SemanticSpace::load(&space)?;
            let groups = ingest_transcripts(&transcripts)?.groups;
            let window = if calibrate {
                calibrate_window(&groups, DEFAULT_COVERAGE)?
            } else {
                window
            };
            let profiles = profile_all(
                &groups,
                &space,
                &AnalysisConfig {
                    window,
                    ..Default::default()
                },
            )?;
            tables::write_profiles_file(&profiles, &output)?;
            log::info!("window {window}: {} profiles", profiles.len());
            Ok(())
        }
        Command::Topics(cmd) => topics(cmd, ctx),
        Command::Cluster(args) => cluster(args, ctx),
        Command::Validate {
            profiles,
            k,
            bootstrap,
            restarts,
            model,
            norm,
            connectivity_neighbors,
            min_silhouette,
            min_jaccard,
            output,
        } => {
            let raw = tables::read_profiles_file(&profiles)?.features;
            let rows = match model {
                Some(m) => match RoleModel::load(&m)?.normalization {
                    Some(n) => n.apply(&raw)?.rows,
                    None => raw.rows,
                },
                None => normalized(&raw, &norm)?.rows,
            };
            let cfg = ValidationConfig {
                k,
                bootstrap,
                connectivity_neighbors,
                hopkins: HopkinsOptions {
                    seed: ctx.seed,
                    ..Default::default()
                },
                kmeans: ctx.kmeans(restarts),
            };
            let report = validate(&rows, &cfg)?;
            match &output {
                Some(out) => ctx.write_json(&report, out)?,
                None => print_json(&report)?,
            }
            let floors = PipelineConfig {
                min_silhouette,
                min_jaccard,
                ..Default::default()
            };
            check_thresholds(&floors, &report)
        }
        Command::Agree {
            a,
            b,
            column_a,
            column_b,
            output,
        } => {
            let la = tables::read_file(&a, |f| tables::read_label_column(f, &column_a))?;
            let lb = tables::read_file(&b, |f| tables::read_label_column(f, &column_b))?;
            let bmap: std::collections::HashMap<&str, &str> =
                lb.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
            if la.len() != lb.len() {
                return Err(GcaError::Join(format!(
                    "{} rows in {} but {} in {}",
                    la.len(),
                    a.display(),
                    lb.len(),
                    b.display()
                )));
            }
            let mut xs = Vec::with_capacity(la.len());
            let mut ys = Vec::with_capacity(la.len());
            for (key, v) in &la {
                let w = bmap.get(key.as_str()).ok_or_else(|| {
                    GcaError::Join(format!(
                        "row {} of {} has no partner",
                        key.replace('\u{1f}', "/"),
                        a.display()
                    ))
                })?;
                xs.push(v.clone());
                ys.push(w.to_string());
            }
            let agr = agreement(&xs, &ys)?;
            match output {
                Some(out) => ctx.write_json(&agr, &out),
                None => print_json(&agr),
            }
        }
        Command::Predict {
            model,
            profiles,
            labels,
            agreement: agreement_out,
            output,
        } => {
            let model = RoleModel::load(&model)?;
            let table = tables::read_profiles_file(&profiles)?;
            let clusters = assign_raw(&model, &table.features)?;
            let rows: Vec<AssignmentRow> = table
                .keys
                .iter()
                .zip(&clusters)
                .map(|((g, p), &c)| AssignmentRow {
                    group_id: g.clone(),
                    participant_id: p.clone(),
                    cluster: c,
                    role: model.labels[c].to_string(),
                })
                .collect();
            tables::write_assignments_file(&rows, &output)?;
            if let Some(col) = labels {
                let reference = table.column(&col)?;
                let agr = agreement(reference, &clusters)?;
                match agreement_out {
                    Some(out) => ctx.write_json(&agr, &out)?,
                    None => print_json(&agr)?,
                }
            }
            Ok(())
        }
        Command::Report {
            assignments,
            relevance,
            quiz,
            output,
        } => {
            let asg = tables::read_assignments_file(&assignments)?;
            let rel = match relevance {
                Some(p) => tables::read_file(&p, tables::read_relevance)?,
                None => Vec::new(),
            };
            let quiz = match quiz {
                Some(p) => tables::read_file(&p, tables::read_quiz)?,
                None => Vec::new(),
            };
            let groups = gca::composition::group_report(&asg, &rel, &quiz, &default_label_set())?;
            ctx.write_json(GroupsFile { groups }, &output)
        }
        Command::Synth(SynthCommand::Blobs {
            preset,
            per_cluster,
            output,
        }) => {
            let blobs = gen_blobs(&BlobSpec::preset(&preset, per_cluster, ctx.seed)?)?;
            tables::write_file(&output, |f| {
                tables::write_labeled_features(&blobs.table, "blobs", &blobs.labels, f)
            })
        }
        Command::Synth(SynthCommand::Chat {
            script,
            output,
            space,
        }) => {
            let script = Script::from_json(&read_text(&script)?)?;
            let gt = gen_conversation(&script)?;
            let f = fs::File::create(&output).map_err(|e| GcaError::Io {
                path: output.clone(),
                source: e,
            })?;
            write_transcripts_csv(&[gt], f)?;
            if let Some(s) = space {
                closed_space(&script.vocabulary())?.save(&s)?;
            }
            Ok(())
        }
        Command::Pipeline(PipelineCommand::Run { out }) => {
            let mut cfg = ctx
                .config
                .clone()
                .ok_or_else(|| GcaError::Argument("pipeline run needs --config FILE".into()))?;
            cfg.seed = ctx.seed;
            if let Some(o) = out {
                cfg.output_dir = o;
            }
            let summary = run_pipeline(&cfg)?;
            print_json(&summary)
        }
    }
}

fn topics(cmd: TopicsCommand, ctx: &Context) -> Result<()> {
    match cmd {
        TopicsCommand::Fit {
            docs,
            transcripts,
            k,
            alpha,
            beta,
            iterations,
            output,
        } => {
            let corpus = background(&docs, transcripts.as_ref())?;
            let tokens: Vec<Vec<String>> = corpus.into_iter().map(|d| d.tokens).collect();
            let model = fit_lda(
                &tokens,
                &LdaOptions {
                    topics: k,
                    alpha,
                    beta,
                    iterations,
                    seed: ctx.seed,
                    ..Default::default()
                },
            )?;
            model.save(&output)
        }
        TopicsCommand::Relevance {
            model,
            relevant,
            transcripts,
            output,
        } => {
            let model = TopicModel::load(&model)?;
            let spec = RelevanceSpec::from_relevant(relevant, model.topics)?;
            let groups = ingest_transcripts(&transcripts)?.groups;
            let scores = groups
                .iter()
                .map(|g| {
                    topic_relevance(g, &model, &spec).map(|r| {
                        gca::composition::GroupRelevanceScore {
                            group_id: r.group_id,
                            relevance: r.relevance,
                        }
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            tables::write_file(&output, |f| tables::write_relevance(&scores, f))
        }
        TopicsCommand::TopWords { model, n } => {
            let model = TopicModel::load(&model)?;
            for (q, words) in model.top_words(n).iter().enumerate() {
                let list: Vec<String> =
                    words.iter().map(|(w, p)| format!("{w} ({p:.4})")).collect();
                println!("topic {q}: {}", list.join(", "));
            }
            Ok(())
        }
    }
}

fn cluster(args: ClusterArgs, ctx: &Context) -> Result<()> {
    if let Some(ClusterSub::SelectK {
        profiles,
        kmin,
        kmax,
        restarts,
        norm,
        output,
    }) = args.sub
    {
        let raw = tables::read_profiles_file(&profiles)?.features;
        let rows = normalized(&raw, &norm)?.rows;
        let sel = select_k(&rows, kmin, kmax, &ctx.kmeans(restarts))?;
        return match output {
            Some(out) => ctx.write_json(&sel, &out),
            None => print_json(&sel),
        };
    }
    let profiles = args
        .profiles
        .ok_or_else(|| GcaError::Argument("cluster needs --profiles".into()))?;
    let output = args
        .output
        .ok_or_else(|| GcaError::Argument("cluster needs -o/--output".into()))?;
    let table = tables::read_profiles_file(&profiles)?;
    let winsor =
        (!args.norm.no_normalize).then_some((args.norm.winsor_lower, args.norm.winsor_upper));
    let (model, clusters) =
        RoleModel::fit(&table.features, args.k, winsor, &ctx.kmeans(args.restarts))?;
    let model = label_roles(model, args.label_threshold)?;
    ctx.write_json(&model, &output)?;
    if let Some(path) = args.assignments {
        let rows: Vec<AssignmentRow> = table
            .keys
            .iter()
            .zip(&clusters)
            .map(|((g, p), &c)| AssignmentRow {
                group_id: g.clone(),
                participant_id: p.clone(),
                cluster: c,
                role: model.labels[c].to_string(),
            })
            .collect();
        tables::write_assignments_file(&rows, &path)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = cli.log_level.clone().unwrap_or_else(|| "warn".into());
    env_logger::Builder::new().parse_filters(&level).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_threshold() {
                ExitCode::from(3)
            } else if e.is_input_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
