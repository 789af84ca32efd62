//! Labeled, subject-grouped instance data.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Population standard deviations below this are clamped so constant features
/// do not divide by zero.
pub const STDDEV_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    pub fn from_bool(positive: bool) -> Self {
        if positive {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    /// File encoding: 1 for positive, 0 for negative.
    pub fn as_digit(self) -> u8 {
        match self {
            Label::Positive => 1,
            Label::Negative => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub subject_id: String,
    pub label: Label,
    pub features: Vec<f64>,
}

/// Ordered instances sharing one dimensionality. The position of an instance
/// is its identity everywhere downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    instances: Vec<Instance>,
    dim: usize,
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(feature_names: Vec<String>, instances: Vec<Instance>) -> Result<Self> {
        let dim = feature_names.len();
        if dim == 0 {
            return Err(Error::invalid("dataset needs at least one feature"));
        }
        for (i, inst) in instances.iter().enumerate() {
            if inst.features.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: inst.features.len(),
                });
            }
            if let Some(j) = inst.features.iter().position(|v| !v.is_finite()) {
                return Err(Error::invalid(format!(
                    "instance {i}, feature `{}` is not finite",
                    feature_names[j]
                )));
            }
        }
        Ok(Self {
            instances,
            dim,
            feature_names,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn instance(&self, index: usize) -> &Instance {
        &self.instances[index]
    }

    pub fn features(&self, index: usize) -> &[f64] {
        &self.instances[index].features
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn labels(&self) -> Vec<Label> {
        self.instances.iter().map(|i| i.label).collect()
    }

    /// New dataset holding the given instances, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            instances: indices.iter().map(|&i| self.instances[i].clone()).collect(),
            dim: self.dim,
            feature_names: self.feature_names.clone(),
        }
    }

    /// Fails unless both classes are present; every training entry point calls this.
    pub fn require_both_classes(&self) -> Result<()> {
        let (pos, neg) = split_by_label(self);
        if pos.is_empty() {
            return Err(Error::MissingClass("positive"));
        }
        if neg.is_empty() {
            return Err(Error::MissingClass("negative"));
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("subject_id,label");
        for name in &self.feature_names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for inst in &self.instances {
            let _ = write!(out, "{},{}", inst.subject_id, inst.label.as_digit());
            for v in &inst.features {
                // `{}` on f64 is the shortest string that parses back exactly.
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(&text, &path.display().to_string())
}

/// Parses `subject_id,label,<features...>` text. `source` names the input in errors.
pub fn parse_csv(text: &str, source: &str) -> Result<Dataset> {
    let parse_err = |row: usize, column: &str, message: String| Error::Parse {
        path: source.to_string(),
        row,
        column: column.to_string(),
        message,
    };

    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(0, "", "empty file".into()))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();

    for (expected, position) in [("subject_id", 0usize), ("label", 1)] {
        match columns.get(position) {
            Some(&c) if c == expected => {}
            _ => {
                return Err(parse_err(
                    0,
                    expected,
                    format!("header must start with `subject_id,label`, found `{header}`"),
                ))
            }
        }
    }
    let feature_names: Vec<String> = columns[2..].iter().map(|s| s.to_string()).collect();
    if feature_names.is_empty() {
        return Err(parse_err(0, "", "no feature columns".into()));
    }
    let mut seen = HashMap::new();
    for (i, name) in columns.iter().enumerate() {
        if name.is_empty() {
            return Err(parse_err(
                0,
                "",
                format!("column {} has an empty name", i + 1),
            ));
        }
        if seen.insert(*name, i).is_some() {
            return Err(parse_err(0, name, "duplicate header column".into()));
        }
    }

    let mut instances = Vec::new();
    for (row, (_, line)) in lines.enumerate() {
        let row = row + 1;
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != columns.len() {
            return Err(parse_err(
                row,
                "",
                format!("expected {} cells, found {}", columns.len(), cells.len()),
            ));
        }
        let subject_id = cells[0];
        if subject_id.is_empty() {
            return Err(parse_err(row, "subject_id", "empty subject id".into()));
        }
        let label = match cells[1] {
            "1" => Label::Positive,
            "0" => Label::Negative,
            other => {
                return Err(parse_err(
                    row,
                    "label",
                    format!("label must be 0 or 1, found `{other}`"),
                ))
            }
        };
        let mut features = Vec::with_capacity(feature_names.len());
        for (cell, name) in cells[2..].iter().zip(&feature_names) {
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(row, name, format!("`{cell}` is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(row, name, format!("`{cell}` is not finite")));
            }
            features.push(v);
        }
        instances.push(Instance {
            subject_id: subject_id.to_string(),
            label,
            features,
        });
    }
    if instances.is_empty() {
        return Err(parse_err(1, "", "no data rows".into()));
    }
    Dataset::new(feature_names, instances)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationParams {
    pub mean: Vec<f64>,
    pub stddev: Vec<f64>,
}

impl StandardizationParams {
    /// Leaves every value unchanged.
    pub fn identity(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            stddev: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(x.iter()
            .zip(self.mean.iter().zip(&self.stddev))
            .map(|(v, (m, s))| (v - m) / s)
            .collect())
    }

    pub fn inverse(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: z.len(),
            });
        }
        Ok(z.iter()
            .zip(self.mean.iter().zip(&self.stddev))
            .map(|(v, (m, s))| v * s + m)
            .collect())
    }
}

/// Per-feature mean and population standard deviation (floored at [`STDDEV_FLOOR`]).
pub fn fit_standardizer(data: &Dataset) -> Result<StandardizationParams> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = data.len() as f64;
    let d = data.dim();
    let mut mean = vec![0.0; d];
    for inst in data.instances() {
        for (m, v) in mean.iter_mut().zip(&inst.features) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; d];
    for inst in data.instances() {
        for ((s, v), m) in var.iter_mut().zip(&inst.features).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let stddev = var
        .into_iter()
        .map(|s| (s / n).sqrt().max(STDDEV_FLOOR))
        .collect();
    Ok(StandardizationParams { mean, stddev })
}

pub fn apply_standardizer(data: &Dataset, params: &StandardizationParams) -> Result<Dataset> {
    let instances = data
        .instances()
        .iter()
        .map(|inst| {
            Ok(Instance {
                subject_id: inst.subject_id.clone(),
                label: inst.label,
                features: params.transform(&inst.features)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        instances,
        dim: data.dim,
        feature_names: data.feature_names.clone(),
    })
}

/// Indices of positive and negative instances, each in dataset order.
pub fn split_by_label(data: &Dataset) -> (Vec<usize>, Vec<usize>) {
    (0..data.len()).partition(|&i| data.instance(i).label.is_positive())
}

/// One bag: a subject's instance indices (dataset order) and its single label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subject {
    pub id: String,
    pub label: Label,
    pub indices: Vec<usize>,
}

/// Groups instances by subject in order of first appearance.
pub fn group_by_subject(data: &Dataset) -> Result<Vec<Subject>> {
    let mut slot: HashMap<&str, usize> = HashMap::new();
    let mut subjects: Vec<Subject> = Vec::new();
    for (i, inst) in data.instances().iter().enumerate() {
        match slot.get(inst.subject_id.as_str()) {
            Some(&s) => {
                if subjects[s].label != inst.label {
                    return Err(Error::MixedLabelSubject(inst.subject_id.clone()));
                }
                subjects[s].indices.push(i);
            }
            None => {
                slot.insert(&inst.subject_id, subjects.len());
                subjects.push(Subject {
                    id: inst.subject_id.clone(),
                    label: inst.label,
                    indices: vec![i],
                });
            }
        }
    }
    Ok(subjects)
}
