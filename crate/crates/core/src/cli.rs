//! Command-line front end. Records go to stdout as JSON lines, summaries to
//! stderr.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::annotation::{annotation_curve, CurveConfig};
use crate::ensemble::{select_all, vote_self_consistency, EnsembleError, SelectorDecision, Strategy};
use crate::eval::{answers_from_decisions, evaluate, robustness_report, EvalError};
use crate::features::{extract_features, FeatureError};
use crate::fixture::{make_fixture, FixtureError, FixtureSpec, SignalCarrier};
use crate::metrics::{exact_match, prediction_correct, Quadrants};
use crate::reference::{WIKISQL, WTQ};
use crate::repair::{execute_prediction, repair_sql};
use crate::router::{
    route_or_fallback, HttpBackend, JudgeBackend, RecordingBackend, ReplayBackend, RouterError, StubBackend,
    TemplateSet, VerdictRecord,
};
use crate::selector::{
    build_training_set, exclusive_label, load_model, save_model, train_forest, train_knn, train_logistic,
    ForestParams, LogisticParams, SelectorError, SelectorModel,
};
use crate::sql::run_sql;
use crate::table::{
    by_instance, load_instances, load_predictions, load_tables, IngestSummary, ModelPrediction, QaInstance,
    TableData, TableError, DEFAULT_BUDGET,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Selector(#[from] SelectorError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Router(#[from] RouterError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Fixture(#[from] FixtureError),
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    /// 2 for bad input, 1 for environment failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. }
            | CliError::Table(TableError::Io { .. })
            | CliError::Selector(SelectorError::Io { .. })
            | CliError::Router(RouterError::BackendUnavailable(_)) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "tqa", version, about = "Table QA answer selection and evaluation")]
pub struct Cli {
    /// Seed for every random choice made by the command.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Token budget used when linearizing tables.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    pub budget: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Directory of `<table_id>.csv` files.
    #[arg(long)]
    pub tables: PathBuf,
    /// Instance records, one JSON object per line.
    #[arg(long)]
    pub instances: PathBuf,
    /// Restrict to instances of this split.
    #[arg(long)]
    pub split: Option<String>,
}

#[derive(Debug, Args)]
pub struct PairArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Text-to-SQL predictions.
    #[arg(long)]
    pub sql: PathBuf,
    /// E2E predictions.
    #[arg(long)]
    pub e2e: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelKind {
    /// Random forest.
    Rf,
    /// L2-regularized logistic regression.
    Lr,
    Knn,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SelectMode {
    Oracle,
    Rf,
    Confidence,
    Vote,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BackendKind {
    /// Answers NO to every yes/no module and picks E2E on comparison.
    Stub,
    Replay,
    Http,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Benchmark {
    Wtq,
    Wikisql,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate tables and instances and report counts.
    Ingest(DataArgs),
    /// Run one query, or re-execute the SQL of a prediction file.
    ExecSql {
        #[arg(long)]
        tables: PathBuf,
        /// Table for `--query`.
        #[arg(long)]
        table: Option<String>,
        #[arg(long)]
        query: Option<String>,
        /// Predictions whose `sql_text` is executed; needs `--instances`.
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[arg(long)]
        instances: Option<PathBuf>,
        /// Repair queries before executing them.
        #[arg(long)]
        repair: bool,
    },
    /// Report the repairs for one query, or for each SQL prediction.
    Repair {
        #[arg(long)]
        tables: PathBuf,
        #[arg(long)]
        table: Option<String>,
        #[arg(long)]
        query: Option<String>,
        #[arg(long)]
        instances: Option<PathBuf>,
        #[arg(long)]
        predictions: Option<PathBuf>,
    },
    /// Emit the selector feature vector of every instance.
    Featurize(PairArgs),
    /// Train a selector on the exclusive-correct instances.
    Train {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_enum, default_value_t = ModelKind::Rf)]
        selector: ModelKind,
        /// Model output path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        trees: usize,
        #[arg(long)]
        max_depth: Option<usize>,
        #[arg(long, default_value_t = 5)]
        k: usize,
    },
    /// Pick one answer per instance.
    Select {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_enum)]
        mode: SelectMode,
        /// Trained model, required by `--mode rf`.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Accuracy of both models, the oracle, and optionally a selector.
    Evaluate {
        #[command(flatten)]
        pair: PairArgs,
        /// Selector decisions to score.
        #[arg(long)]
        decisions: Option<PathBuf>,
    },
    /// Correctness quadrants and oracle accuracy.
    Oracle(PairArgs),
    /// Self-consistency vote over each prediction's sampled candidates.
    Vote {
        #[arg(long)]
        predictions: PathBuf,
        /// Break count ties by summed candidate confidence.
        #[arg(long)]
        weighted: bool,
    },
    /// Route each instance through the LLM judge modules.
    Route {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_enum, default_value_t = BackendKind::Stub)]
        backend: BackendKind,
        /// Verdict log read by the replay backend.
        #[arg(long)]
        replay: Option<PathBuf>,
        /// Write every verdict to this file.
        #[arg(long)]
        record: Option<PathBuf>,
        /// Directory of `<module>.v1.txt` prompt templates.
        #[arg(long)]
        templates: Option<PathBuf>,
        /// Endpoint for the http backend; defaults to the environment.
        #[arg(long)]
        endpoint: Option<String>,
        #[arg(long, default_value_t = 30)]
        timeout_secs: u64,
        #[arg(long, default_value_t = 2)]
        retries: usize,
    },
    /// Accuracy as a function of the annotated share.
    AnnotationCurve {
        #[command(flatten)]
        pair: PairArgs,
        /// Comma-separated sorted fractions.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.1, 0.25, 0.5, 1.0])]
        fractions: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        trees: usize,
    },
    /// Pre/post perturbation accuracy and both R-Acc variants.
    Robustness {
        #[arg(long)]
        tables: PathBuf,
        #[arg(long)]
        pre_instances: PathBuf,
        #[arg(long)]
        post_instances: PathBuf,
        /// Pre-perturbation decisions or predictions.
        #[arg(long)]
        pre: PathBuf,
        /// Post-perturbation decisions or predictions.
        #[arg(long)]
        post: PathBuf,
    },
    /// Write a synthetic dataset with prediction files.
    MakeFixture {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Benchmark::Wtq)]
        shape: Benchmark,
        /// Probability that an instance carries the selection signal.
        #[arg(long, default_value_t = 1.0)]
        signal: f64,
        #[arg(long)]
        table_size_signal: bool,
        #[arg(long, default_value_t = 0.5)]
        train_fraction: f64,
        /// SQL always right, E2E right only on tables within this budget.
        #[arg(long)]
        truncation_budget: Option<usize>,
    },
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| CliError::Invalid(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

struct Out(BufWriter<io::StdoutLock<'static>>);

impl Out {
    fn new() -> Self {
        Out(BufWriter::new(io::stdout().lock()))
    }

    fn record<T: Serialize>(&mut self, r: &T) -> Result<(), CliError> {
        let line = serde_json::to_string(r).expect("records serialize");
        writeln!(self.0, "{line}").map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        })
    }

    /// Plain lines, one value each.
    fn lines(&mut self, values: impl Iterator<Item = String>) -> Result<(), CliError> {
        let io_err = |source| CliError::Io {
            path: "<stdout>".into(),
            source,
        };
        for v in values {
            writeln!(self.0, "{v}").map_err(io_err)?;
        }
        self.0.flush().map_err(io_err)
    }

    fn records<T: Serialize>(&mut self, rs: &[T]) -> Result<(), CliError> {
        rs.iter().try_for_each(|r| self.record(r))?;
        self.0.flush().map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        })
    }
}

struct Loaded {
    tables: BTreeMap<String, TableData>,
    instances: Vec<QaInstance>,
}

fn load_data(args: &DataArgs) -> Result<Loaded, CliError> {
    let tables = load_tables(&args.tables)?;
    let mut instances = load_instances(&args.instances, &tables)?;
    if let Some(split) = &args.split {
        instances.retain(|i| &i.split == split);
    }
    Ok(Loaded { tables, instances })
}

type PredMap = HashMap<String, ModelPrediction>;

fn load_pair(args: &PairArgs) -> Result<(Loaded, PredMap, PredMap), CliError> {
    let data = load_data(&args.data)?;
    let sql = by_instance(load_predictions(&args.sql)?);
    let e2e = by_instance(load_predictions(&args.e2e)?);
    Ok((data, sql, e2e))
}

fn table_for<'a>(tables: &'a BTreeMap<String, TableData>, inst: &QaInstance) -> Result<&'a TableData, CliError> {
    tables
        .get(&inst.table_id)
        .ok_or_else(|| CliError::Invalid(format!("instance `{}`: unknown table `{}`", inst.id, inst.table_id)))
}

fn pct(x: f64) -> String {
    format!("{:.2}", 100.0 * x)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let budget = cli.budget;
    let seed = cli.seed;
    let mut out = Out::new();
    match cli.command {
        Command::Ingest(args) => {
            let data = load_data(&args)?;
            let summary = IngestSummary::new(&data.tables, &data.instances);
            eprintln!(
                "{} tables, {} instances, {} with gold SQL",
                summary.tables, summary.instances, summary.with_gold_sql
            );
            out.records(&[summary])?;
        }
        Command::ExecSql {
            tables,
            table,
            query,
            predictions,
            instances,
            repair,
        } => {
            let tables = load_tables(&tables)?;
            match (query, predictions) {
                (Some(q), None) => {
                    let id = table.ok_or_else(|| CliError::Invalid("--query needs --table".into()))?;
                    let t = tables
                        .get(&id)
                        .ok_or_else(|| CliError::Invalid(format!("unknown table `{id}`")))?;
                    let text = if repair {
                        repair_sql(&q, t).map(|r| r.repaired_sql).unwrap_or(q)
                    } else {
                        q
                    };
                    let vals = run_sql(&text, t).map_err(|e| CliError::Invalid(e.to_string()))?;
                    eprintln!("{} value(s) from {text}", vals.len());
                    out.lines(vals.iter().map(|v| v.to_string()))?;
                }
                (None, Some(path)) => {
                    let inst_path =
                        instances.ok_or_else(|| CliError::Invalid("--predictions needs --instances".into()))?;
                    let insts: HashMap<String, QaInstance> = load_instances(&inst_path, &tables)?
                        .into_iter()
                        .map(|i| (i.id.clone(), i))
                        .collect();
                    let mut done = Vec::new();
                    for p in load_predictions(&path)? {
                        let inst = insts
                            .get(&p.instance_id)
                            .ok_or_else(|| CliError::Invalid(format!("unknown instance `{}`", p.instance_id)))?;
                        done.push(execute_prediction(&p, table_for(&tables, inst)?, repair));
                    }
                    let ok = done.iter().filter(|p| p.executed()).count();
                    eprintln!("{ok}/{} queries executed", done.len());
                    out.records(&done)?;
                }
                _ => return Err(CliError::Invalid("give exactly one of --query or --predictions".into())),
            }
        }
        Command::Repair {
            tables,
            table,
            query,
            instances,
            predictions,
        } => {
            let tables = load_tables(&tables)?;
            match (query, predictions) {
                (Some(q), None) => {
                    let id = table.ok_or_else(|| CliError::Invalid("--query needs --table".into()))?;
                    let t = tables
                        .get(&id)
                        .ok_or_else(|| CliError::Invalid(format!("unknown table `{id}`")))?;
                    let report = repair_sql(&q, t).map_err(|e| CliError::Invalid(e.to_string()))?;
                    eprintln!("{} edit(s): {}", report.edits.len(), report.repaired_sql);
                    out.records(&[report])?;
                }
                (None, Some(path)) => {
                    let inst_path =
                        instances.ok_or_else(|| CliError::Invalid("--predictions needs --instances".into()))?;
                    let insts = load_instances(&inst_path, &tables)?;
                    let preds = by_instance(load_predictions(&path)?);
                    let mut reports = Vec::new();
                    let (mut repaired, mut failed) = (0, 0);
                    for inst in &insts {
                        let Some(sql) = preds.get(&inst.id).and_then(|p| p.sql_text.as_ref()) else {
                            continue;
                        };
                        match repair_sql(sql, table_for(&tables, inst)?) {
                            Ok(r) => {
                                repaired += usize::from(!r.edits.is_empty());
                                reports.push(serde_json::json!({"instance_id": inst.id, "report": r}));
                            }
                            Err(e) => {
                                failed += 1;
                                reports.push(serde_json::json!({"instance_id": inst.id, "error": e.to_string()}));
                            }
                        }
                    }
                    eprintln!("{} queries, {repaired} repaired, {failed} unrepairable", reports.len());
                    out.records(&reports)?;
                }
                _ => return Err(CliError::Invalid("give exactly one of --query or --predictions".into())),
            }
        }
        Command::Featurize(pair) => {
            let (data, sql, e2e) = load_pair(&pair)?;
            let mut rows = Vec::new();
            for inst in &data.instances {
                let (Some(s), Some(e)) = (sql.get(&inst.id), e2e.get(&inst.id)) else {
                    log::warn!("{}: missing prediction, skipped", inst.id);
                    continue;
                };
                let fv = extract_features(inst, table_for(&data.tables, inst)?, s, e, budget)?;
                rows.push(serde_json::json!({
                    "instance_id": inst.id,
                    "vector": fv.encode(),
                    "features": fv,
                    "label": exclusive_label(&inst.gold_answers, s, e),
                }));
            }
            eprintln!("{} feature vectors", rows.len());
            out.records(&rows)?;
        }
        Command::Train {
            pair,
            selector,
            out: path,
            trees,
            max_depth,
            k,
        } => {
            let (data, sql, e2e) = load_pair(&pair)?;
            let set = build_training_set(&data.instances, &data.tables, &sql, &e2e, budget)?;
            let model = match selector {
                ModelKind::Rf => {
                    let params = ForestParams {
                        n_trees: trees,
                        max_depth,
                        ..ForestParams::default()
                    };
                    SelectorModel::Forest(train_forest(&set, params, seed)?)
                }
                ModelKind::Lr => SelectorModel::Logistic(train_logistic(&set, LogisticParams::default())?),
                ModelKind::Knn => SelectorModel::Knn(train_knn(&set, k)?),
            };
            save_model(&model, &path)?;
            let [n_sql, n_e2e] = set.class_counts();
            let acc = model.accuracy(&set)?;
            eprintln!(
                "trained on {} instances ({n_sql} SQL-correct, {n_e2e} E2E-correct), training accuracy {}",
                set.len(),
                pct(acc)
            );
            out.records(&[serde_json::json!({
                "model": path.display().to_string(),
                "n_train": set.len(),
                "class_counts": [n_sql, n_e2e],
                "train_accuracy": acc,
            })])?;
        }
        Command::Select { pair, mode, model } => {
            let (data, sql, e2e) = load_pair(&pair)?;
            let loaded;
            let strategy = match mode {
                SelectMode::Oracle => Strategy::Oracle,
                SelectMode::Confidence => Strategy::Confidence,
                SelectMode::Vote => Strategy::Vote,
                SelectMode::Rf => {
                    let path = model.ok_or_else(|| CliError::Invalid("--mode rf needs --model".into()))?;
                    loaded = load_model(&path)?;
                    Strategy::Model(&loaded)
                }
            };
            let ds = select_all(strategy, &data.instances, &data.tables, &sql, &e2e, budget)?;
            let correct = data
                .instances
                .iter()
                .zip(&ds)
                .filter(|(i, d)| exact_match(&d.answers, &i.gold_answers))
                .count();
            eprintln!("{} decisions, {correct} correct", ds.len());
            out.records(&ds)?;
        }
        Command::Evaluate { pair, decisions } => {
            let (data, sql, e2e) = load_pair(&pair)?;
            let ds: Option<Vec<SelectorDecision>> = decisions.as_deref().map(read_jsonl).transpose()?;
            let report = evaluate(&data.instances, &data.tables, &sql, &e2e, ds.as_deref())?;
            eprint!("{}", report.to_text());
            out.records(&[report])?;
        }
        Command::Oracle(pair) => {
            let (data, sql, e2e) = load_pair(&pair)?;
            let mut q = Quadrants::default();
            for inst in &data.instances {
                let (Some(s), Some(e)) = (sql.get(&inst.id), e2e.get(&inst.id)) else {
                    return Err(CliError::Invalid(format!("instance `{}` lacks a prediction pair", inst.id)));
                };
                q.add(
                    prediction_correct(s, &inst.gold_answers),
                    prediction_correct(e, &inst.gold_answers),
                );
            }
            eprintln!(
                "oracle {} (exclusive {}) over {} instances",
                pct(q.oracle_accuracy()),
                pct(q.exclusive_share()),
                q.n()
            );
            out.records(&[serde_json::json!({
                "quadrants": q,
                "oracle_accuracy": q.oracle_accuracy(),
                "exclusive_share": q.exclusive_share(),
            })])?;
        }
        Command::Vote { predictions, weighted } => {
            let preds = load_predictions(&predictions)?;
            let mut rows = Vec::new();
            for p in &preds {
                let cands = match &p.candidates {
                    Some(c) if !c.is_empty() => c.clone(),
                    _ => vec![p.answers.clone()],
                };
                let confs = if weighted { p.candidate_confidences.as_deref() } else { None };
                let answers = vote_self_consistency(&cands, confs)?;
                rows.push(serde_json::json!({
                    "instance_id": p.instance_id,
                    "source": p.source,
                    "answers": answers,
                    "n_candidates": cands.len(),
                }));
            }
            eprintln!("{} votes", rows.len());
            out.records(&rows)?;
        }
        Command::Route {
            pair,
            backend,
            replay,
            record,
            templates,
            endpoint,
            timeout_secs,
            retries,
        } => {
            let (data, sql, e2e) = load_pair(&pair)?;
            let templates = match templates {
                Some(dir) => TemplateSet::from_dir(&dir).map_err(|source| CliError::Io {
                    path: dir.display().to_string(),
                    source,
                })?,
                None => TemplateSet::builtin(),
            };
            let timeout = Duration::from_secs(timeout_secs);
            let inner: Box<dyn JudgeBackend> = match backend {
                BackendKind::Stub => Box::new(StubBackend::all_no()),
                BackendKind::Replay => {
                    let path = replay.ok_or_else(|| CliError::Invalid("--backend replay needs --replay".into()))?;
                    Box::new(ReplayBackend::new(read_jsonl::<VerdictRecord>(&path)?))
                }
                BackendKind::Http => match endpoint {
                    Some(url) => Box::new(HttpBackend::new(url, timeout, retries)),
                    None => Box::new(HttpBackend::from_env(timeout, retries)?),
                },
            };
            let recorder = RecordingBackend::new(inner);
            let mut ds = Vec::new();
            for inst in &data.instances {
                let (Some(s), Some(e)) = (sql.get(&inst.id), e2e.get(&inst.id)) else {
                    return Err(CliError::Invalid(format!("instance `{}` lacks a prediction pair", inst.id)));
                };
                let table = table_for(&data.tables, inst)?;
                ds.push(route_or_fallback(inst, table, s, e, &recorder, &templates, budget)?);
            }
            if let Some(path) = record {
                crate::table::write_jsonl(&path, &recorder.records())?;
            }
            let mut tags: BTreeMap<&str, usize> = BTreeMap::new();
            for d in &ds {
                *tags.entry(d.rationale_tag.as_str()).or_default() += 1;
            }
            eprintln!("{} decisions, {} judge calls, by rationale {tags:?}", ds.len(), recorder.records().len());
            out.records(&ds)?;
        }
        Command::AnnotationCurve { pair, fractions, trees } => {
            let (data, sql, e2e) = load_pair(&pair)?;
            let config = CurveConfig {
                seed,
                forest: ForestParams {
                    n_trees: trees,
                    ..ForestParams::default()
                },
                forest_seed: seed,
                budget,
            };
            let curve = annotation_curve(&data.instances, &data.tables, &sql, &e2e, &fractions, &config)?;
            for c in &curve {
                eprintln!("p={:<5} accuracy {}", c.p, pct(c.accuracy));
            }
            out.records(&curve)?;
        }
        Command::Robustness {
            tables,
            pre_instances,
            post_instances,
            pre,
            post,
        } => {
            let tables = load_tables(&tables)?;
            let pre_i = load_instances(&pre_instances, &tables)?;
            let post_i = load_instances(&post_instances, &tables)?;
            let rows = robustness_report(&pre_i, &post_i, &read_answers(&pre)?, &read_answers(&post)?)?;
            for r in &rows {
                eprintln!(
                    "{:<26} pre {} post {} r-acc(ratio) {} r-acc(consistency) {}",
                    r.perturbation,
                    pct(r.pre_accuracy),
                    pct(r.post_accuracy),
                    pct(r.r_acc_ratio),
                    pct(r.r_acc_consistency)
                );
            }
            out.records(&rows)?;
        }
        Command::MakeFixture {
            out: dir,
            n,
            shape,
            signal,
            table_size_signal,
            train_fraction,
            truncation_budget,
        } => {
            let row = match shape {
                Benchmark::Wtq => &WTQ,
                Benchmark::Wikisql => &WIKISQL,
            };
            let mut spec = FixtureSpec::shaped_like(row, n, signal, seed);
            spec.train_fraction = train_fraction;
            spec.truncation_budget = truncation_budget;
            if table_size_signal {
                spec.carrier = SignalCarrier::TableSize;
            }
            let fx = make_fixture(&spec)?;
            fs::create_dir_all(&dir).map_err(|source| CliError::Io {
                path: dir.display().to_string(),
                source,
            })?;
            fx.write(&dir)?;
            eprintln!("wrote {} instances to {}", fx.instances.len(), dir.display());
            out.records(&[serde_json::json!({"out": dir.display().to_string(), "spec": spec})])?;
        }
    }
    Ok(())
}

/// Reads answers keyed by instance id from either decision or prediction
/// records.
fn read_answers(path: &Path) -> Result<HashMap<String, Vec<String>>, CliError> {
    if let Ok(ds) = read_jsonl::<SelectorDecision>(path) {
        return Ok(answers_from_decisions(&ds));
    }
    let preds = by_instance(load_predictions(path)?);
    Ok(crate::eval::answers_from_predictions(&preds))
}
