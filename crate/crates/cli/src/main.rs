//! `ssi`: generate synthetic data, train and evaluate exclusive-cluster
//! ensembles, cross-validate, and plot 2-D data with decision regions.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data or I/O
//! error, 3 internal error.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(
    name = "ssi",
    version,
    about = "Exclusive-cluster classification of partially separable data"
)]
struct Cli {
    /// `key = value` configuration file applied before flags.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    seed: Option<String>,
    /// Worker threads (0: one per core).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic dataset, its ground truth and a config echo.
    Gen(GenArgs),
    /// Fit an ensemble and write the model file plus a trace log.
    Train(TrainArgs),
    /// Subject-level metrics for a model or the global baseline.
    Eval(EvalArgs),
    /// Subject-grouped stratified cross-validation.
    Xval(XvalArgs),
    /// SVG scatter plot of 2-D data, optionally with decision regions.
    Plot(PlotArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Output prefix: writes `<out>.csv`, `<out>.truth.csv` and `<out>.meta.txt`.
    #[arg(short, long)]
    out: PathBuf,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    neg_subjects: Option<String>,
    #[arg(long)]
    pos_subjects: Option<String>,
    #[arg(long = "instances")]
    instances_per_subject: Option<String>,
    #[arg(long)]
    subgroups: Option<String>,
    #[arg(long = "offset")]
    subgroup_offset: Option<String>,
    #[arg(long = "sigma")]
    subgroup_sigma: Option<String>,
    #[arg(long)]
    separable_fraction: Option<String>,
    #[arg(long = "inseparable-fraction")]
    inseparable_subject_fraction: Option<String>,
}

#[derive(Args, Debug)]
struct SsiArgs {
    /// Cluster-size stop threshold: `auto`, a count, or a fraction such as `0.1`.
    #[arg(long)]
    rho: Option<String>,
    /// s: minimum positives for an exclusive cluster (exclusive bound), or `auto`.
    #[arg(long)]
    min_positives: Option<String>,
    /// t: bound on negatives per positive in an exclusive cluster.
    #[arg(long)]
    neg_tolerance: Option<String>,
    /// st: gate sensitivity a detector must exceed.
    #[arg(long)]
    min_sensitivity: Option<String>,
    #[arg(long)]
    kmax: Option<String>,
    /// `linear` or `rbf`.
    #[arg(long)]
    classifier: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    /// Keep this many features per detector, ranked by mutual information.
    #[arg(long)]
    feature_select: Option<String>,
    /// `balanced` or `none`.
    #[arg(long)]
    class_weighting: Option<String>,
    #[arg(long)]
    l2_lambda: Option<String>,
    #[arg(long)]
    learning_rate: Option<String>,
    #[arg(long)]
    max_epochs: Option<String>,
    #[arg(long = "holdout")]
    gate_holdout_fraction: Option<String>,
    /// `true` or `false`.
    #[arg(long)]
    remove_only_if_accepted: Option<String>,
    /// `true` or `false`.
    #[arg(long)]
    standardize: Option<String>,
    #[arg(long)]
    n_bins: Option<String>,
    #[arg(long)]
    decision_threshold: Option<String>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Training CSV (`subject_id,label,<features...>`).
    data: PathBuf,
    /// Model file to write; the trace goes next to it as `<stem>.trace.log`.
    #[arg(short, long)]
    out: PathBuf,
    #[command(flatten)]
    ssi: SsiArgs,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Evaluation CSV.
    data: PathBuf,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Training CSV for `--baseline global`.
    #[arg(long)]
    train: Option<PathBuf>,
    /// `any`, `majority` or `best-chance`.
    #[arg(long)]
    pooling: Option<String>,
    /// `global` or `none`.
    #[arg(long)]
    baseline: Option<String>,
    #[arg(long)]
    baseline_gamma: Option<String>,
    /// Optional CSV report.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct XvalArgs {
    data: PathBuf,
    #[arg(long)]
    folds: Option<String>,
    #[command(flatten)]
    ssi: SsiArgs,
    /// Optional per-fold CSV.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PlotArgs {
    data: PathBuf,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Ground-truth CSV from `ssi gen`, to color subgroup members.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(short, long)]
    out: PathBuf,
}

type Overrides<'a> = Vec<(&'static str, Option<&'a String>)>;

impl SsiArgs {
    fn overrides(&self) -> Overrides<'_> {
        vec![
            ("rho", self.rho.as_ref()),
            ("min_positives", self.min_positives.as_ref()),
            ("neg_tolerance", self.neg_tolerance.as_ref()),
            ("min_sensitivity", self.min_sensitivity.as_ref()),
            ("kmax", self.kmax.as_ref()),
            ("classifier", self.classifier.as_ref()),
            ("gamma", self.gamma.as_ref()),
            ("feature_select", self.feature_select.as_ref()),
            ("class_weighting", self.class_weighting.as_ref()),
            ("l2_lambda", self.l2_lambda.as_ref()),
            ("learning_rate", self.learning_rate.as_ref()),
            ("max_epochs", self.max_epochs.as_ref()),
            ("gate_holdout_fraction", self.gate_holdout_fraction.as_ref()),
            (
                "remove_only_if_accepted",
                self.remove_only_if_accepted.as_ref(),
            ),
            ("standardize", self.standardize.as_ref()),
            ("n_bins", self.n_bins.as_ref()),
            ("decision_threshold", self.decision_threshold.as_ref()),
        ]
    }
}

impl Command {
    fn overrides(&self) -> Overrides<'_> {
        match self {
            Command::Gen(a) => vec![
                ("dim", a.dim.as_ref()),
                ("neg_subjects", a.neg_subjects.as_ref()),
                ("pos_subjects", a.pos_subjects.as_ref()),
                ("instances_per_subject", a.instances_per_subject.as_ref()),
                ("subgroups", a.subgroups.as_ref()),
                ("subgroup_offset", a.subgroup_offset.as_ref()),
                ("subgroup_sigma", a.subgroup_sigma.as_ref()),
                ("separable_fraction", a.separable_fraction.as_ref()),
                (
                    "inseparable_subject_fraction",
                    a.inseparable_subject_fraction.as_ref(),
                ),
            ],
            Command::Train(a) => a.ssi.overrides(),
            Command::Eval(a) => vec![
                ("pooling", a.pooling.as_ref()),
                ("baseline", a.baseline.as_ref()),
                ("baseline_gamma", a.baseline_gamma.as_ref()),
            ],
            Command::Xval(a) => {
                let mut o = a.ssi.overrides();
                o.push(("folds", a.folds.as_ref()));
                o
            }
            Command::Plot(_) => Vec::new(),
        }
    }
}

fn resolve_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_file(path)?;
    }
    let shared: Overrides<'_> = vec![
        ("seed", cli.seed.as_ref()),
        ("threads", cli.threads.as_ref()),
    ];
    for (key, value) in shared.into_iter().chain(cli.command.overrides()) {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = resolve_config(&cli)?;
    let threads = cfg.threads()?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Gen(a) => commands::gen(&cfg, &a.out),
        Command::Train(a) => commands::train(&cfg, &a.data, &a.out),
        Command::Eval(a) => commands::eval(
            &cfg,
            &a.data,
            a.model.as_deref(),
            a.train.as_deref(),
            a.out.as_deref(),
        ),
        Command::Xval(a) => commands::xval(&cfg, &a.data, a.out.as_deref()),
        Command::Plot(a) => commands::plot(
            &cfg,
            &a.data,
            a.model.as_deref(),
            a.truth.as_deref(),
            &a.out,
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ssi: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
