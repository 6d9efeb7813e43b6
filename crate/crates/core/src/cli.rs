//! Command-line front end.
//!
//! [`run`] parses arguments, executes one subcommand and returns the process
//! exit code: 0 on success, 2 for usage errors, 3 for data, parse and I/O
//! errors, 4 for numerical failures. Output goes to caller-supplied writers
//! so the whole surface can be driven in-process from tests.
//!
//! Each run first echoes its resolved configuration. With `--json` the
//! command prints a single JSON document (configuration included) in place
//! of the text tables.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::data::{
    export_label_graph, generate_toy, load_dataset_with_preprocessor, load_raw, to_dense_csv,
    DataFormat, DatasetSpec, ModelDocument, Normalization, Preprocessor, ToySpec,
    DEFAULT_GRAPH_THRESHOLD,
};
use crate::error::{CorrLogError, Result};
use crate::eval::{
    compute_metrics, cross_validate_raw, predict_all, stability_experiment, Trainer,
};
use crate::inference::BpConfig;
use crate::model::{Label, ModelParams, MultilabelDataset};
use crate::objective::RegularizationConfig;
use crate::optimizer::{
    train_corrlog_with_progress, train_ilrs_with_trace, StepPolicy, TrainConfig, TrainTrace,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "corrlog",
    version,
    about = "Pairwise-correlated logistic regression for multilabel data"
)]
pub struct Cli {
    /// Print one JSON document instead of text tables.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model and write it as a model document.
    Train(TrainArgs),
    /// Predict label vectors for every instance of a dataset.
    Predict(PredictArgs),
    /// Evaluate a saved model on a labelled dataset.
    Eval(EvalArgs),
    /// k-fold cross-validation with paired t-tests against the other trainer.
    Cv(CvArgs),
    /// Write the two-label unit-disc toy problem as dense CSV files.
    Synth(SynthArgs),
    /// Export the learned label graph (DOT, or JSON with --json).
    Graph(GraphArgs),
    /// Replace-one retraining experiment against the stability bound.
    Stability(StabilityArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    /// Header `f1,...|l1,...`, then feature values followed by labels.
    Dense,
    /// `labels index:value ...` with 1-based indices.
    Sparse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormalizeArg {
    None,
    /// Divide by the largest training-set feature norm.
    MaxNorm,
}

#[derive(Debug, Clone, Args)]
pub struct FormatArgs {
    /// Dataset file format.
    #[arg(long, value_enum, default_value_t = FormatArg::Dense)]
    pub format: FormatArg,
    /// Label count for sparse files (otherwise header or largest index).
    #[arg(long)]
    pub num_labels: Option<usize>,
    /// Feature count for sparse files (otherwise header or largest index).
    #[arg(long)]
    pub num_features: Option<usize>,
}

impl FormatArgs {
    fn data_format(&self) -> DataFormat {
        match self.format {
            FormatArg::Dense => DataFormat::DenseCsv,
            FormatArg::Sparse => DataFormat::SparseMultilabel {
                num_labels: self.num_labels,
                num_features: self.num_features,
            },
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    #[command(flatten)]
    pub format: FormatArgs,
    /// Feature normalisation fitted on the training data.
    #[arg(long, value_enum, default_value_t = NormalizeArg::MaxNorm)]
    pub normalize: NormalizeArg,
    /// Do not append the constant bias feature.
    #[arg(long)]
    pub no_bias: bool,
}

impl DataArgs {
    fn spec(&self) -> DatasetSpec {
        DatasetSpec {
            format: self.format.data_format(),
            normalization: self.normalization(),
            add_bias: !self.no_bias,
        }
    }

    fn normalization(&self) -> Normalization {
        match self.normalize {
            NormalizeArg::None => Normalization::None,
            NormalizeArg::MaxNorm => Normalization::GlobalMaxNorm,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OptArgs {
    /// Weight of the coefficient penalty.
    #[arg(long, default_value_t = 0.001)]
    pub lambda1: f64,
    /// Weight of the pairwise penalty.
    #[arg(long, default_value_t = 0.001)]
    pub lambda2: f64,
    /// Elastic-net mixing: 0 is pure ℓ₂, larger values add more ℓ₁.
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
    /// Iteration cap for the proximal gradient solver.
    #[arg(long, default_value_t = 5000)]
    pub max_iters: usize,
    /// Relative tolerance on objective change and optimality residual
    /// [default: 1e-7, or 1e-9 for stability].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Disable momentum acceleration.
    #[arg(long)]
    pub no_accel: bool,
    /// Use this fixed step size instead of backtracking.
    #[arg(long)]
    pub step: Option<f64>,
}

impl OptArgs {
    fn config(&self, default_tol: f64) -> Result<TrainConfig> {
        let reg = RegularizationConfig::new(self.lambda1, self.lambda2, self.epsilon)?;
        let mut cfg = TrainConfig::with_reg(reg);
        cfg.max_iters = self.max_iters;
        cfg.rel_tol = self.tol.unwrap_or(default_tol);
        cfg.accelerate = !self.no_accel;
        if let Some(eta) = self.step {
            cfg.step_policy = StepPolicy::Fixed(eta);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct BpArgs {
    /// Maximum belief-propagation sweeps.
    #[arg(long, default_value_t = 50)]
    pub bp_iters: usize,
    /// Message damping in [0, 1).
    #[arg(long, default_value_t = 0.0)]
    pub bp_damping: f64,
    /// Stop when no message moves by more than this.
    #[arg(long, default_value_t = 1e-9)]
    pub bp_tol: f64,
}

impl BpArgs {
    fn config(&self) -> Result<BpConfig> {
        let cfg = BpConfig {
            max_iters: self.bp_iters,
            damping: self.bp_damping,
            convergence_tol: self.bp_tol,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training data file.
    pub data: PathBuf,
    #[command(flatten)]
    pub data_args: DataArgs,
    #[command(flatten)]
    pub opt: OptArgs,
    /// Train independent logistic regressions (no label coupling).
    #[arg(long)]
    pub ilrs: bool,
    /// Where to write the model document.
    #[arg(long)]
    pub model_out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Model document written by `train`.
    pub model: PathBuf,
    /// Data file; any labels it carries are ignored.
    pub data: PathBuf,
    #[command(flatten)]
    pub format: FormatArgs,
    #[command(flatten)]
    pub bp: BpArgs,
    /// Write predictions here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Model document written by `train`.
    pub model: PathBuf,
    /// Labelled evaluation data.
    pub data: PathBuf,
    #[command(flatten)]
    pub format: FormatArgs,
    #[command(flatten)]
    pub bp: BpArgs,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    /// Labelled data file.
    pub data: PathBuf,
    #[command(flatten)]
    pub data_args: DataArgs,
    #[command(flatten)]
    pub opt: OptArgs,
    #[command(flatten)]
    pub bp: BpArgs,
    /// Number of folds.
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Seed for the fold shuffle.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cross-validate the independent baseline as the primary method.
    #[arg(long)]
    pub ilrs: bool,
    /// Skip the second method and the paired t-tests.
    #[arg(long)]
    pub no_compare: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 500)]
    pub n_train: usize,
    #[arg(long, default_value_t = 500)]
    pub n_test: usize,
    /// First boundary as `a,b,c` (label 1 is the sign of a·x₁ + b·x₂ + c).
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [1.0, 1.0, -0.5], allow_negative_numbers = true)]
    pub eta1: Vec<f64>,
    /// Second boundary as `a,b,c`.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [-1.0, 1.0, -0.5], allow_negative_numbers = true)]
    pub eta2: Vec<f64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// File name prefix: writes `<prefix>_train.csv` and `<prefix>_test.csv`.
    #[arg(long, default_value = "toy")]
    pub prefix: String,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Model document written by `train`.
    pub model: PathBuf,
    /// Drop edges with |weight| at or below this.
    #[arg(long, default_value_t = DEFAULT_GRAPH_THRESHOLD)]
    pub threshold: f64,
    /// Write the graph here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    /// Training data; without it the toy problem is generated from --seed.
    pub data: Option<PathBuf>,
    /// Held-out instances used as replacements (required with DATA).
    #[arg(long)]
    pub pool: Option<PathBuf>,
    #[command(flatten)]
    pub data_args: DataArgs,
    #[command(flatten)]
    pub opt: OptArgs,
    /// Number of replace-one retraining trials.
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Maps an error onto the documented exit codes.
pub fn exit_code(err: &CorrLogError) -> i32 {
    match err {
        CorrLogError::InvalidConfig(_) => EXIT_USAGE,
        e if e.is_numeric() => EXIT_NUMERIC,
        _ => EXIT_DATA,
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let mut ctx = Output {
        out,
        json: cli.json,
    };
    match &cli.command {
        Command::Train(a) => cmd_train(a, &mut ctx),
        Command::Predict(a) => cmd_predict(a, &mut ctx),
        Command::Eval(a) => cmd_eval(a, &mut ctx),
        Command::Cv(a) => cmd_cv(a, &mut ctx),
        Command::Synth(a) => cmd_synth(a, &mut ctx),
        Command::Graph(a) => cmd_graph(a, &mut ctx),
        Command::Stability(a) => cmd_stability(a, &mut ctx),
    }
}

struct Output<'a> {
    out: &'a mut dyn Write,
    json: bool,
}

impl Output<'_> {
    fn config(&mut self, command: &str, config: &Value) -> Result<()> {
        if !self.json {
            writeln!(self.out, "# {command} config: {config}")?;
        }
        Ok(())
    }

    fn text(&mut self, s: &str) -> Result<()> {
        if !self.json {
            write!(self.out, "{s}")?;
        }
        Ok(())
    }

    fn document(&mut self, command: &str, config: Value, body: Value) -> Result<()> {
        if self.json {
            let doc = json!({ "command": command, "config": config, "result": body });
            writeln!(self.out, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
        Ok(())
    }
}

fn train_config_json(cfg: &TrainConfig) -> Value {
    json!({
        "lambda1": cfg.reg.lambda1,
        "lambda2": cfg.reg.lambda2,
        "epsilon": cfg.reg.epsilon,
        "max_iters": cfg.max_iters,
        "tol": cfg.rel_tol,
        "accelerate": cfg.accelerate,
        "step_policy": cfg.step_policy,
    })
}

fn data_config_json(path: &Path, spec: &DatasetSpec) -> Value {
    json!({ "path": path.display().to_string(), "dataset": spec })
}

fn trace_json(trace: &TrainTrace, params: &ModelParams) -> Value {
    json!({
        "final_objective": trace.final_objective(),
        "iterations": trace.iterations,
        "converged": trace.converged,
        "optimality_residual": trace.optimality_residual,
        "nnz_alpha": params.nnz_alpha(),
        "nnz_beta": params.nnz_beta(),
    })
}

fn cmd_train(a: &TrainArgs, ctx: &mut Output) -> Result<()> {
    let spec = a.data_args.spec();
    let cfg = a.opt.config(1e-7)?;
    let trainer = if a.ilrs {
        Trainer::Ilrs
    } else {
        Trainer::CorrLog
    };
    let config = json!({
        "data": data_config_json(&a.data, &spec),
        "trainer": trainer.name(),
        "train": train_config_json(&cfg),
        "model_out": a.model_out.display().to_string(),
    });
    ctx.config("train", &config)?;
    let (ds, pre) = load_dataset_with_preprocessor(&a.data, &spec)?;
    let (params, trace) = match trainer {
        Trainer::CorrLog => train_corrlog_with_progress(&ds, &cfg, &mut |_| {})?,
        Trainer::Ilrs => train_ilrs_with_trace(&ds, &cfg)?,
    };
    let mut doc = ModelDocument::new(&params, &cfg.reg);
    doc.preprocessor = Some(pre);
    doc.label_names = Some(ds.label_names().to_vec());
    doc.metadata = BTreeMap::from([
        ("trainer".to_string(), trainer.name().to_string()),
        ("training_instances".to_string(), ds.len().to_string()),
        ("iterations".to_string(), trace.iterations.to_string()),
        ("converged".to_string(), trace.converged.to_string()),
        (
            "final_objective".to_string(),
            format!("{:?}", trace.final_objective()),
        ),
    ]);
    doc.save(&a.model_out)?;
    let summary = trace_json(&trace, &params);
    ctx.text(&format!(
        "final objective {:.12}\niterations {} (converged: {})\noptimality residual {:.3e}\nnnz(alpha) {}\nnnz(beta) {}\n",
        trace.final_objective(),
        trace.iterations,
        trace.converged,
        trace.optimality_residual,
        params.nnz_alpha(),
        params.nnz_beta()
    ))?;
    ctx.document("train", config, summary)
}

/// Loads a model and a dataset transformed with the model's own
/// preprocessing.
fn load_for_model(
    model: &Path,
    data: &Path,
    format: &FormatArgs,
) -> Result<(ModelDocument, ModelParams, MultilabelDataset)> {
    let doc = ModelDocument::load(model)?;
    let params = doc.params()?;
    let pre = doc.preprocessor.unwrap_or_else(Preprocessor::identity);
    let data_format = match format.data_format() {
        DataFormat::SparseMultilabel {
            num_labels,
            num_features,
        } => DataFormat::SparseMultilabel {
            num_labels: num_labels.or(Some(params.num_labels())),
            num_features: num_features.or(Some(params.num_features() - usize::from(pre.add_bias))),
        },
        other => other,
    };
    let raw = load_raw(data, data_format)?;
    if raw.num_labels() != params.num_labels() {
        return Err(CorrLogError::DimensionMismatch {
            what: "label count of data vs model",
            expected: params.num_labels(),
            found: raw.num_labels(),
        });
    }
    if pre.output_dim(raw.num_features()) != params.num_features() {
        return Err(CorrLogError::DimensionMismatch {
            what: "feature count of data vs model",
            expected: params.num_features(),
            found: pre.output_dim(raw.num_features()),
        });
    }
    let ds = pre.apply(&raw)?;
    Ok((doc, params, ds))
}

fn label_line(y: &[Label]) -> String {
    y.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn cmd_predict(a: &PredictArgs, ctx: &mut Output) -> Result<()> {
    let bp = a.bp.config()?;
    let config = json!({
        "model": a.model.display().to_string(),
        "data": a.data.display().to_string(),
        "format": a.format.data_format(),
        "bp": bp,
        "out": a.out.as_ref().map(|p| p.display().to_string()),
    });
    ctx.config("predict", &config)?;
    let (doc, params, ds) = load_for_model(&a.model, &a.data, &a.format)?;
    let (preds, unconverged) = predict_all(&params, &ds, &bp)?;
    let names = doc.label_names.unwrap_or_else(|| ds.label_names().to_vec());

    let mut flagged = vec![false; preds.len()];
    unconverged.iter().for_each(|&i| flagged[i] = true);
    let mut table = format!("{},bp_converged\n", names.join(","));
    for (y, bad) in preds.iter().zip(&flagged) {
        table.push_str(&format!("{},{}\n", label_line(y), u8::from(!bad)));
    }
    let body = json!({
        "label_names": names,
        "predictions": preds,
        "bp_unconverged": unconverged,
    });
    match &a.out {
        Some(path) => {
            if ctx.json {
                std::fs::write(path, serde_json::to_string_pretty(&body)? + "\n")?;
            } else {
                std::fs::write(path, &table)?;
            }
            ctx.text(&format!(
                "{} predictions written to {} ({} without BP convergence)\n",
                preds.len(),
                path.display(),
                unconverged.len()
            ))?;
            ctx.document(
                "predict",
                config,
                json!({ "count": preds.len(), "bp_unconverged": body["bp_unconverged"] }),
            )
        }
        None => {
            ctx.text(&table)?;
            ctx.document("predict", config, body)
        }
    }
}

fn cmd_eval(a: &EvalArgs, ctx: &mut Output) -> Result<()> {
    let bp = a.bp.config()?;
    let config = json!({
        "model": a.model.display().to_string(),
        "data": a.data.display().to_string(),
        "format": a.format.data_format(),
        "bp": bp,
    });
    ctx.config("eval", &config)?;
    let (_, params, ds) = load_for_model(&a.model, &a.data, &a.format)?;
    let (preds, unconverged) = predict_all(&params, &ds, &bp)?;
    let truth: Vec<Vec<Label>> = ds.instances().iter().map(|i| i.labels.clone()).collect();
    let report = compute_metrics(&truth, &preds)?;
    ctx.text(&report.to_table())?;
    ctx.text(&format!("bp unconverged: {}\n", unconverged.len()))?;
    let mut body = serde_json::to_value(&report)?;
    body["bp_unconverged"] = json!(unconverged.len());
    ctx.document("eval", config, body)
}

fn cmd_cv(a: &CvArgs, ctx: &mut Output) -> Result<()> {
    let spec = a.data_args.spec();
    let cfg = a.opt.config(1e-7)?;
    let bp = a.bp.config()?;
    let (primary, secondary) = if a.ilrs {
        (Trainer::Ilrs, Trainer::CorrLog)
    } else {
        (Trainer::CorrLog, Trainer::Ilrs)
    };
    let config = json!({
        "data": data_config_json(&a.data, &spec),
        "train": train_config_json(&cfg),
        "bp": bp,
        "folds": a.folds,
        "seed": a.seed,
        "trainer": primary.name(),
        "compare_with": (!a.no_compare).then(|| secondary.name()),
    });
    ctx.config("cv", &config)?;
    let raw = load_raw(&a.data, spec.format)?;
    let run = |t| {
        cross_validate_raw(
            &raw,
            spec.normalization,
            spec.add_bias,
            a.folds,
            t,
            &cfg,
            &bp,
            a.seed,
        )
    };
    let mut result = run(primary)?;
    let baseline = if a.no_compare {
        None
    } else {
        let other = run(secondary)?;
        result.compare_with(&other)?;
        Some(other)
    };
    ctx.text(&result.to_table())?;
    if let Some(b) = &baseline {
        ctx.text("\n")?;
        ctx.text(&b.to_table())?;
    }
    let body = json!({
        "primary": result.to_json(),
        "baseline": baseline.as_ref().map(|b| b.to_json()),
    });
    ctx.document("cv", config, body)
}

fn three(v: &[f64], flag: &str) -> Result<[f64; 3]> {
    v.try_into()
        .map_err(|_| CorrLogError::InvalidConfig(format!("--{flag} needs exactly three values")))
}

fn cmd_synth(a: &SynthArgs, ctx: &mut Output) -> Result<()> {
    let spec = ToySpec {
        n_train: a.n_train,
        n_test: a.n_test,
        eta1: three(&a.eta1, "eta1")?,
        eta2: three(&a.eta2, "eta2")?,
        seed: a.seed,
        add_bias: false,
    };
    let train_path = a.out_dir.join(format!("{}_train.csv", a.prefix));
    let test_path = a.out_dir.join(format!("{}_test.csv", a.prefix));
    let config = json!({
        "toy": spec,
        "train_out": train_path.display().to_string(),
        "test_out": test_path.display().to_string(),
    });
    ctx.config("synth", &config)?;
    let (train, test) = generate_toy(&spec)?;
    std::fs::create_dir_all(&a.out_dir)?;
    std::fs::write(&train_path, to_dense_csv(&train, None))?;
    std::fs::write(&test_path, to_dense_csv(&test, None))?;
    let counts = |ds: &MultilabelDataset| {
        let mut c = BTreeMap::new();
        for i in ds.instances() {
            *c.entry(label_line(&i.labels)).or_insert(0usize) += 1;
        }
        c
    };
    let (ct, cs) = (counts(&train), counts(&test));
    ctx.text(&format!(
        "wrote {} training and {} test instances\ntrain label combinations {:?}\ntest label combinations {:?}\n",
        train.len(),
        test.len(),
        ct,
        cs
    ))?;
    ctx.document(
        "synth",
        config,
        json!({ "train": { "n": train.len(), "combinations": ct }, "test": { "n": test.len(), "combinations": cs } }),
    )
}

fn cmd_graph(a: &GraphArgs, ctx: &mut Output) -> Result<()> {
    let config = json!({
        "model": a.model.display().to_string(),
        "threshold": a.threshold,
        "out": a.out.as_ref().map(|p| p.display().to_string()),
    });
    ctx.config("graph", &config)?;
    let doc = ModelDocument::load(&a.model)?;
    let params = doc.params()?;
    let names = doc
        .label_names
        .clone()
        .unwrap_or_else(|| (1..=params.num_labels()).map(|i| format!("l{i}")).collect());
    let graph = export_label_graph(&params, &names, a.threshold)?;
    let rendered = if ctx.json {
        serde_json::to_string_pretty(&graph.to_json())? + "\n"
    } else {
        graph.to_dot()
    };
    match &a.out {
        Some(path) => {
            std::fs::write(path, &rendered)?;
            ctx.text(&format!(
                "{} nodes, {} edges written to {}\n",
                graph.nodes.len(),
                graph.edges.len(),
                path.display()
            ))?;
        }
        None => ctx.text(&rendered)?,
    }
    ctx.document("graph", config, graph.to_json())
}

fn cmd_stability(a: &StabilityArgs, ctx: &mut Output) -> Result<()> {
    let cfg = a.opt.config(1e-9)?;
    let spec = a.data_args.spec();
    let source = match (&a.data, &a.pool) {
        (Some(d), Some(p)) => {
            json!({ "data": data_config_json(d, &spec), "pool": p.display().to_string() })
        }
        (Some(_), None) => {
            return Err(CorrLogError::InvalidConfig(
                "--pool is required when a data file is given".into(),
            ))
        }
        (None, _) => json!({ "toy": ToySpec { seed: a.seed, ..ToySpec::default() } }),
    };
    let config = json!({
        "source": source,
        "train": train_config_json(&cfg),
        "trials": a.trials,
        "seed": a.seed,
    });
    ctx.config("stability", &config)?;
    let (train, pool) = match (&a.data, &a.pool) {
        (Some(d), Some(p)) => {
            let (train, pre) = load_dataset_with_preprocessor(d, &spec)?;
            let pool_raw = load_raw(p, spec.format)?;
            (train, pre.apply(&pool_raw)?)
        }
        _ => generate_toy(&ToySpec {
            seed: a.seed,
            ..ToySpec::default()
        })?,
    };
    let report = stability_experiment(&train, pool.instances(), &cfg, a.trials, a.seed)?;
    ctx.text(&report.to_table())?;
    ctx.document("stability", config, serde_json::to_value(&report)?)
}
