//! Flat run configuration: built-in defaults, then an optional `key = value`
//! file, then command-line flags.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use ssi_core::classify::{ClassWeighting, ClassifierKind, ClassifierSpec};
use ssi_core::eval::PoolingKind;
use ssi_core::infotheory::BinningSpec;
use ssi_core::ssi::{RhoRule, SsiConfig};
use ssi_core::synth::SynthConfig;

use crate::error::{CliError, CliResult};

/// Keys left out of the echo because they cannot change any result.
const NOT_ECHOED: &[&str] = &["threads"];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<&'static str, String>,
}

fn defaults() -> Vec<(&'static str, String)> {
    let synth = SynthConfig::default();
    let ssi = SsiConfig::default();
    let clf = ssi.classifier;
    let base = ClassifierSpec::rbf(0.5);
    let gamma = match ClassifierSpec::default().kind {
        ClassifierKind::Rbf { gamma } => gamma,
        ClassifierKind::Linear => 0.5,
    };
    let kind = match clf.kind {
        ClassifierKind::Linear => "linear",
        ClassifierKind::Rbf { .. } => "rbf",
    };
    vec![
        ("seed", synth.seed.to_string()),
        ("threads", "0".into()),
        // data generation
        ("dim", synth.dim.to_string()),
        ("neg_subjects", synth.n_neg_subjects.to_string()),
        ("pos_subjects", synth.n_pos_subjects.to_string()),
        (
            "instances_per_subject",
            synth.instances_per_subject.to_string(),
        ),
        ("subgroups", synth.n_subgroups.to_string()),
        ("subgroup_offset", synth.subgroup_offset.to_string()),
        ("subgroup_sigma", synth.subgroup_sigma.to_string()),
        ("separable_fraction", synth.separable_fraction.to_string()),
        (
            "inseparable_subject_fraction",
            synth.inseparable_subject_fraction.to_string(),
        ),
        // training
        ("rho", "auto".into()),
        ("min_positives", "auto".into()),
        ("neg_tolerance", ssi.neg_tolerance.to_string()),
        ("min_sensitivity", ssi.min_sensitivity.to_string()),
        ("kmax", "auto".into()),
        ("standardize", ssi.standardize.to_string()),
        (
            "remove_only_if_accepted",
            ssi.remove_only_if_accepted.to_string(),
        ),
        (
            "gate_holdout_fraction",
            ssi.gate_holdout_fraction.to_string(),
        ),
        ("feature_select", "none".into()),
        ("n_bins", ssi.binning.n_bins.to_string()),
        ("decision_threshold", ssi.decision_threshold.to_string()),
        ("classifier", kind.into()),
        ("gamma", gamma.to_string()),
        ("l2_lambda", clf.l2_lambda.to_string()),
        ("learning_rate", clf.learning_rate.to_string()),
        ("max_epochs", clf.max_epochs.to_string()),
        ("tolerance", clf.tolerance.to_string()),
        (
            "class_weighting",
            weighting_name(clf.class_weighting).into(),
        ),
        // evaluation
        ("pooling", "auto".into()),
        ("baseline", "none".into()),
        ("baseline_gamma", gamma.to_string()),
        (
            "baseline_class_weighting",
            weighting_name(base.class_weighting).into(),
        ),
        ("folds", "5".into()),
    ]
}

fn weighting_name(w: ClassWeighting) -> &'static str {
    match w {
        ClassWeighting::Balanced => "balanced",
        ClassWeighting::None => "none",
    }
}

fn bad(key: &str, value: &str, expected: &str) -> CliError {
    CliError::Usage(format!("{key}: `{value}` is not {expected}"))
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            values: defaults().into_iter().collect(),
        }
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        match self.values.keys().find(|k| **k == key) {
            Some(&k) => {
                self.values.insert(k, value.trim().to_string());
                Ok(())
            }
            None => Err(CliError::Usage(format!(
                "unknown configuration key `{key}`"
            ))),
        }
    }

    /// Applies a `key = value` file; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, source: &str) -> CliResult<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("{source}:{}: expected `key = value`", n + 1))
            })?;
            self.set(key.trim(), value)
                .map_err(|e| CliError::Usage(format!("{source}:{}: {}", n + 1, strip(&e))))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> CliResult<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("config file {}: {e}", path.display())))?;
        self.apply_text(&text, &path.display().to_string())
    }

    pub fn get(&self, key: &str) -> &str {
        self.values
            .get(key)
            .unwrap_or_else(|| panic!("configuration key `{key}` is not registered"))
    }

    fn parse<T: FromStr>(&self, key: &str, expected: &str) -> CliResult<T> {
        let v = self.get(key);
        v.parse().map_err(|_| bad(key, v, expected))
    }

    fn usize(&self, key: &str) -> CliResult<usize> {
        self.parse(key, "a non-negative integer")
    }

    fn f64(&self, key: &str) -> CliResult<f64> {
        let v: f64 = self.parse(key, "a number")?;
        if !v.is_finite() {
            return Err(bad(key, self.get(key), "a finite number"));
        }
        Ok(v)
    }

    fn bool(&self, key: &str) -> CliResult<bool> {
        self.parse(key, "true or false")
    }

    /// `auto`/`none` map to `None`.
    fn optional_usize(&self, key: &str) -> CliResult<Option<usize>> {
        match self.get(key) {
            "auto" | "none" => Ok(None),
            _ => self.usize(key).map(Some),
        }
    }

    fn weighting(&self, key: &str) -> CliResult<ClassWeighting> {
        match self.get(key) {
            "balanced" => Ok(ClassWeighting::Balanced),
            "none" => Ok(ClassWeighting::None),
            v => Err(bad(key, v, "`balanced` or `none`")),
        }
    }

    pub fn seed(&self) -> CliResult<u64> {
        self.parse("seed", "a non-negative integer")
    }

    pub fn threads(&self) -> CliResult<usize> {
        self.usize("threads")
    }

    pub fn folds(&self) -> CliResult<usize> {
        self.usize("folds")
    }

    pub fn synth(&self) -> CliResult<SynthConfig> {
        let cfg = SynthConfig {
            dim: self.usize("dim")?,
            n_neg_subjects: self.usize("neg_subjects")?,
            n_pos_subjects: self.usize("pos_subjects")?,
            instances_per_subject: self.usize("instances_per_subject")?,
            n_subgroups: self.usize("subgroups")?,
            subgroup_offset: self.f64("subgroup_offset")?,
            subgroup_sigma: self.f64("subgroup_sigma")?,
            separable_fraction: self.f64("separable_fraction")?,
            inseparable_subject_fraction: self.f64("inseparable_subject_fraction")?,
            seed: self.seed()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `auto`, an integer count, or a fraction of the clustered pool (contains a `.`).
    fn rho(&self) -> CliResult<RhoRule> {
        let v = self.get("rho");
        if v == "auto" {
            Ok(RhoRule::Auto)
        } else if v.contains('.') {
            let f: f64 = v.parse().map_err(|_| bad("rho", v, "a fraction"))?;
            Ok(RhoRule::Fraction(f))
        } else {
            Ok(RhoRule::Count(self.usize("rho")?))
        }
    }

    fn classifier(&self) -> CliResult<ClassifierSpec> {
        let kind = match self.get("classifier") {
            "linear" => ClassifierKind::Linear,
            "rbf" => ClassifierKind::Rbf {
                gamma: self.f64("gamma")?,
            },
            v => return Err(bad("classifier", v, "`linear` or `rbf`")),
        };
        Ok(ClassifierSpec {
            kind,
            l2_lambda: self.f64("l2_lambda")?,
            learning_rate: self.f64("learning_rate")?,
            max_epochs: self.usize("max_epochs")?,
            tolerance: self.f64("tolerance")?,
            class_weighting: self.weighting("class_weighting")?,
            seed: 0,
        })
    }

    pub fn ssi(&self) -> CliResult<SsiConfig> {
        let cfg = SsiConfig {
            rho: self.rho()?,
            min_positives: self.optional_usize("min_positives")?,
            neg_tolerance: self.f64("neg_tolerance")?,
            min_sensitivity: self.f64("min_sensitivity")?,
            k_max: self.optional_usize("kmax")?,
            classifier: self.classifier()?,
            standardize: self.bool("standardize")?,
            seed: self.seed()?,
            remove_only_if_accepted: self.bool("remove_only_if_accepted")?,
            gate_holdout_fraction: self.f64("gate_holdout_fraction")?,
            feature_select: self.optional_usize("feature_select")?,
            binning: BinningSpec {
                n_bins: self.usize("n_bins")?,
            },
            decision_threshold: self.f64("decision_threshold")?,
        };
        // Dataset sizes only matter for defaults; this checks ranges.
        cfg.resolve(1, 2)?;
        Ok(cfg)
    }

    pub fn baseline_spec(&self) -> CliResult<ClassifierSpec> {
        let spec = ClassifierSpec {
            kind: ClassifierKind::Rbf {
                gamma: self.f64("baseline_gamma")?,
            },
            class_weighting: self.weighting("baseline_class_weighting")?,
            ..self.classifier()?
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `None` when left on `auto`.
    pub fn pooling(&self) -> CliResult<Option<PoolingKind>> {
        match self.get("pooling") {
            "auto" => Ok(None),
            v => PoolingKind::from_str(v)
                .map(Some)
                .map_err(|_| bad("pooling", v, "`any`, `majority` or `best-chance`")),
        }
    }

    pub fn global_baseline(&self) -> CliResult<bool> {
        match self.get("baseline") {
            "global" => Ok(true),
            "none" => Ok(false),
            v => Err(bad("baseline", v, "`global` or `none`")),
        }
    }

    /// Resolved keys and values for embedding in output artifacts.
    pub fn echo(&self) -> BTreeMap<String, String> {
        self.values
            .iter()
            .filter(|(k, _)| !NOT_ECHOED.contains(k))
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect()
    }

    /// The echo as `<prefix>key = value` lines.
    pub fn echo_lines(&self, prefix: &str) -> String {
        self.echo()
            .iter()
            .map(|(k, v)| format!("{prefix}{k} = {v}\n"))
            .collect()
    }
}

fn strip(e: &CliError) -> String {
    match e {
        CliError::Usage(m) | CliError::Data(m) | CliError::Internal(m) => m.clone(),
    }
}
