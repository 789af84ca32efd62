use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use ssi_core::dataset::{self, Dataset};
use ssi_core::eval::{self, MetricsReport, PoolingKind};
use ssi_core::model_io::{ModelFile, FORMAT_VERSION};
use ssi_core::plot::{self, PlotOptions};
use ssi_core::{ssi, synth};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = OsString::from(prefix.as_os_str());
    s.push(suffix);
    PathBuf::from(s)
}

fn stdout(text: &str) -> CliResult<()> {
    std::io::stdout()
        .lock()
        .write_all(text.as_bytes())
        .map_err(|e| CliError::Data(format!("stdout: {e}")))
}

fn header(cfg: &RunConfig, prefix: &str) -> String {
    format!(
        "{prefix}format_version = {FORMAT_VERSION}\n{}",
        cfg.echo_lines(prefix)
    )
}

fn load(path: &Path) -> CliResult<Dataset> {
    Ok(dataset::load_csv(path)?)
}

pub fn gen(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let synth_cfg = cfg.synth()?;
    let (data, truth) = synth::generate(&synth_cfg)?;
    let prefix = if out.extension().is_some_and(|e| e == "csv") {
        out.with_extension("")
    } else {
        out.to_path_buf()
    };
    let data_path = with_suffix(&prefix, ".csv");
    write_file(&data_path, &data.to_csv_string())?;
    write_file(&with_suffix(&prefix, ".truth.csv"), &truth.to_csv_string())?;
    let meta = format!(
        "{}instances = {}\nsubjects = {}\n",
        header(cfg, ""),
        data.len(),
        truth.subjects.len()
    );
    write_file(&with_suffix(&prefix, ".meta.txt"), &meta)?;
    eprintln!(
        "wrote {} instances from {} subjects to {}",
        data.len(),
        truth.subjects.len(),
        data_path.display()
    );
    Ok(())
}

pub fn train(cfg: &RunConfig, data_path: &Path, out: &Path) -> CliResult<()> {
    let ssi_cfg = cfg.ssi()?;
    let data = load(data_path)?;
    let outcome = ssi::fit(&data, &ssi_cfg)?;
    let trace = &outcome.trace;
    let n_detectors = outcome.model.detectors.len();
    let file = ModelFile::new(outcome.model.clone(), ssi_cfg.seed, cfg.echo());
    file.save(out)?;
    let trace_path = out.with_extension("trace.log");
    write_file(
        &trace_path,
        &format!("{}{}", header(cfg, "# "), trace.to_log()),
    )?;

    eprintln!(
        "accepted {n_detectors} detector(s) in {} rounds; {} of {} positive instances left unexplained",
        trace.rounds(),
        trace.remaining_positives.len(),
        trace.initial_positives.len()
    );
    if trace.hit_k_max() {
        eprintln!(
            "warning: cluster count reached k_max = {}",
            trace.resolved.k_max
        );
    }
    if n_detectors == 0 {
        eprintln!("warning: no detectors accepted");
    }
    Ok(())
}

pub fn eval(
    cfg: &RunConfig,
    data_path: &Path,
    model: Option<&Path>,
    train: Option<&Path>,
    out: Option<&Path>,
) -> CliResult<()> {
    let pooling = cfg.pooling()?;
    let report: MetricsReport = if cfg.global_baseline()? {
        let spec = cfg.baseline_spec()?;
        let train_path =
            train.ok_or_else(|| CliError::Usage("--baseline global needs --train <csv>".into()))?;
        let data = load(data_path)?;
        let baseline = eval::train_global_baseline(&load(train_path)?, &spec)?;
        eval::evaluate(
            &baseline,
            &data,
            pooling.unwrap_or(PoolingKind::Majority),
            "global-rbf",
        )?
    } else {
        let model_path = model.ok_or_else(|| {
            CliError::Usage("--model is required unless --baseline global".into())
        })?;
        let data = load(data_path)?;
        let file = ModelFile::load(model_path)?;
        eval::evaluate(
            &file.model,
            &data,
            pooling.unwrap_or(PoolingKind::AnyInstance),
            "ssi",
        )?
    };
    stdout(&format!(
        "format_version = {FORMAT_VERSION}\n{}[config]\n{}",
        report.to_kv(),
        cfg.echo_lines("")
    ))?;
    if let Some(path) = out {
        write_file(
            path,
            &format!(
                "{}{}\n{}\n",
                header(cfg, "# "),
                MetricsReport::CSV_HEADER,
                report.to_csv_row()
            ),
        )?;
    }
    Ok(())
}

pub fn xval(cfg: &RunConfig, data_path: &Path, out: Option<&Path>) -> CliResult<()> {
    let ssi_cfg = cfg.ssi()?;
    let folds = cfg.folds()?;
    let data = load(data_path)?;
    let cv = eval::cross_validate(&data, &ssi_cfg, folds, cfg.seed()?)?;
    stdout(&format!(
        "format_version = {FORMAT_VERSION}\n{}[config]\n{}",
        cv.to_kv(),
        cfg.echo_lines("")
    ))?;
    if let Some(path) = out {
        write_file(path, &format!("{}{}", header(cfg, "# "), cv.to_csv()))?;
    }
    Ok(())
}

/// Reads the `instance_index,subgroup_id` file written by `gen`.
fn load_truth(path: &Path, n: usize) -> CliResult<Vec<usize>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut groups = vec![0; n];
    let mut seen = 0;
    for (row, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let bad = || {
            CliError::Data(format!(
                "{}: row {row}: expected `index,subgroup`",
                path.display()
            ))
        };
        let (i, g) = line.split_once(',').ok_or_else(bad)?;
        let i: usize = i.trim().parse().map_err(|_| bad())?;
        let g: usize = g.trim().parse().map_err(|_| bad())?;
        *groups.get_mut(i).ok_or_else(bad)? = g;
        seen += 1;
    }
    if seen != n {
        return Err(CliError::Data(format!(
            "{}: {seen} rows for {n} instances",
            path.display()
        )));
    }
    Ok(groups)
}

pub fn plot(
    cfg: &RunConfig,
    data_path: &Path,
    model: Option<&Path>,
    truth: Option<&Path>,
    out: &Path,
) -> CliResult<()> {
    let data = load(data_path)?;
    if data.dim() != 2 {
        return Err(CliError::Usage(format!(
            "plot needs 2-D data, {} has {} features",
            data_path.display(),
            data.dim()
        )));
    }
    let model = model.map(ModelFile::load).transpose()?;
    let subgroups = truth.map(|p| load_truth(p, data.len())).transpose()?;
    let mut comment = header(cfg, "");
    if let Some(m) = &model {
        comment.push_str(&format!("detectors = {}\n", m.model.detectors.len()));
    }
    let opts = PlotOptions {
        subgroups,
        comment: Some(comment),
        ..PlotOptions::default()
    };
    let svg = plot::render_svg(&data, model.as_ref().map(|m| &m.model), &opts)?;
    write_file(out, &svg)?;
    eprintln!("wrote {}", out.display());
    Ok(())
}
