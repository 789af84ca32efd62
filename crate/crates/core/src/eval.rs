//! Subject-level metrics, bag pooling rules and cross-validation.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::classify::{self, ClassifierSpec, TrainedClassifier};
use crate::dataset::{self, Dataset, Label, StandardizationParams, Subject};
use crate::error::{Error, Result};
use crate::par::map_ordered;
use crate::rng::SeededRng;
use crate::ssi::{self, EnsembleModel, SsiConfig};

/// Threshold above every possible flag fraction: no bag is called positive.
pub const NOTHING_POSITIVE: f64 = 1.0 + 1e-9;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn from_pairs(predicted: &[bool], actual: &[bool]) -> Result<Self> {
        if predicted.len() != actual.len() {
            return Err(Error::LengthMismatch {
                expected: actual.len(),
                found: predicted.len(),
            });
        }
        let mut c = Self::default();
        for (&p, &a) in predicted.iter().zip(actual) {
            c.record(p, a);
        }
        Ok(c)
    }

    pub fn record(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fn_ += 1,
        }
    }

    pub fn positives(&self) -> usize {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> usize {
        self.tn + self.fp
    }

    pub fn total(&self) -> usize {
        self.positives() + self.negatives()
    }
}

pub fn sensitivity(c: &ConfusionCounts) -> Result<f64> {
    if c.positives() == 0 {
        return Err(Error::MissingClass("positive"));
    }
    Ok(c.tp as f64 / c.positives() as f64)
}

pub fn specificity(c: &ConfusionCounts) -> Result<f64> {
    if c.negatives() == 0 {
        return Err(Error::MissingClass("negative"));
    }
    Ok(c.tn as f64 / c.negatives() as f64)
}

pub fn accuracy(c: &ConfusionCounts) -> Result<f64> {
    if c.total() == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok((c.tp + c.tn) as f64 / c.total() as f64)
}

/// A proportion as a percentage cut (not rounded) to two decimals, trailing
/// zeros dropped: `10/14` renders as `71.42`, `1` as `100`.
pub fn render_percent(p: f64) -> String {
    if !p.is_finite() {
        return "NA".into();
    }
    // Scaled hundredths; the nudge absorbs representation error such as 0.29 * 1e4 = 2899.999...
    let hundredths = (p * 10_000.0 + 1e-6).floor() as i64;
    let sign = if hundredths < 0 { "-" } else { "" };
    let h = hundredths.unsigned_abs();
    let (whole, frac) = (h / 100, h % 100);
    match frac {
        0 => format!("{sign}{whole}"),
        f if f % 10 == 0 => format!("{sign}{whole}.{}", f / 10),
        f => format!("{sign}{whole}.{f:02}"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolingKind {
    Majority,
    BestChance,
    AnyInstance,
}

impl PoolingKind {
    pub fn name(self) -> &'static str {
        match self {
            PoolingKind::Majority => "majority",
            PoolingKind::BestChance => "best_chance",
            PoolingKind::AnyInstance => "any_instance",
        }
    }

    pub fn is_oracle(self) -> bool {
        self == PoolingKind::BestChance
    }
}

impl std::str::FromStr for PoolingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "majority" => Ok(PoolingKind::Majority),
            "best-chance" | "best_chance" => Ok(PoolingKind::BestChance),
            "any" | "any_instance" | "any-instance" => Ok(PoolingKind::AnyInstance),
            other => Err(Error::config(format!("unknown pooling `{other}`"))),
        }
    }
}

/// A pooling rule with its resolved threshold on the flagged fraction.
/// `AnyInstance` ignores the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoolingStrategy {
    pub kind: PoolingKind,
    pub threshold: f64,
}

impl PoolingStrategy {
    pub fn majority() -> Self {
        Self {
            kind: PoolingKind::Majority,
            threshold: 0.5,
        }
    }

    pub fn any_instance() -> Self {
        Self {
            kind: PoolingKind::AnyInstance,
            threshold: 0.0,
        }
    }

    pub fn best_chance(threshold: f64) -> Self {
        Self {
            kind: PoolingKind::BestChance,
            threshold,
        }
    }
}

pub fn pool_subject(flags: &[bool], strategy: &PoolingStrategy) -> Result<bool> {
    if flags.is_empty() {
        return Err(Error::invalid("cannot pool an empty bag"));
    }
    let hits = flags.iter().filter(|&&f| f).count();
    Ok(match strategy.kind {
        PoolingKind::AnyInstance => hits >= 1,
        PoolingKind::Majority | PoolingKind::BestChance => {
            hits as f64 / flags.len() as f64 >= strategy.threshold
        }
    })
}

/// Threshold on per-bag flag fractions with the best accuracy against the
/// given labels. This looks at the labels it is scored on.
///
/// Candidates are 0, every observed fraction, 0.5 and [`NOTHING_POSITIVE`].
/// Ties go to 0.5, then to the lowest threshold.
pub fn best_chance_threshold(fractions: &[f64], labels: &[bool]) -> Result<(f64, f64)> {
    if fractions.is_empty() {
        return Err(Error::invalid("best-chance search needs at least one bag"));
    }
    if fractions.len() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: labels.len(),
            found: fractions.len(),
        });
    }
    let correct_at = |th: f64| {
        fractions
            .iter()
            .zip(labels)
            .filter(|(&f, &l)| (f >= th) == l)
            .count()
    };
    let mut candidates: Vec<f64> = fractions.to_vec();
    candidates.extend([0.0, NOTHING_POSITIVE]);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let mut best = (0.5, correct_at(0.5));
    for &th in &candidates {
        let c = correct_at(th);
        if c > best.1 {
            best = (th, c);
        }
    }
    Ok((best.0, best.1 as f64 / fractions.len() as f64))
}

/// Instance-level flagging rule that subject pooling runs on.
pub trait InstanceFlagger {
    fn dim(&self) -> usize;
    fn flag(&self, x: &[f64]) -> Result<bool>;
}

impl InstanceFlagger for EnsembleModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn flag(&self, x: &[f64]) -> Result<bool> {
        EnsembleModel::flag(self, x)
    }
}

/// One classifier trained on every positive instance against every negative one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalBaseline {
    pub standardizer: StandardizationParams,
    pub classifier: TrainedClassifier,
    pub decision_threshold: f64,
}

impl InstanceFlagger for GlobalBaseline {
    fn dim(&self) -> usize {
        self.standardizer.dim()
    }

    fn flag(&self, x: &[f64]) -> Result<bool> {
        let z = self.standardizer.transform(x)?;
        Ok(self.classifier.predict_proba(&z)? >= self.decision_threshold)
    }
}

/// The spec used for the global baseline unless told otherwise.
pub fn default_baseline_spec() -> ClassifierSpec {
    ClassifierSpec::rbf(0.5)
}

pub fn train_global_baseline(data: &Dataset, spec: &ClassifierSpec) -> Result<GlobalBaseline> {
    data.require_both_classes()?;
    let standardizer = dataset::fit_standardizer(data)?;
    let z = dataset::apply_standardizer(data, &standardizer)?;
    let (pi, ni) = dataset::split_by_label(&z);
    let rows =
        |idx: &[usize]| -> Vec<Vec<f64>> { idx.iter().map(|&i| z.features(i).to_vec()).collect() };
    let classifier = classify::train(&rows(&pi), &rows(&ni), spec)?;
    Ok(GlobalBaseline {
        standardizer,
        classifier,
        decision_threshold: 0.5,
    })
}

/// Per-subject instance flags.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectFlags {
    pub id: String,
    pub label: Label,
    pub flags: Vec<bool>,
}

impl SubjectFlags {
    pub fn fraction(&self) -> f64 {
        self.flags.iter().filter(|&&f| f).count() as f64 / self.flags.len() as f64
    }
}

pub fn subject_flags<F: InstanceFlagger + ?Sized>(
    flagger: &F,
    data: &Dataset,
) -> Result<Vec<SubjectFlags>> {
    if data.dim() != flagger.dim() {
        return Err(Error::DimensionMismatch {
            expected: flagger.dim(),
            found: data.dim(),
        });
    }
    dataset::group_by_subject(data)?
        .into_iter()
        .map(|s: Subject| {
            let flags = s
                .indices
                .iter()
                .map(|&i| flagger.flag(data.features(i)))
                .collect::<Result<Vec<_>>>()?;
            Ok(SubjectFlags {
                id: s.id,
                label: s.label,
                flags,
            })
        })
        .collect()
}

/// Subject-level results for one method and pooling rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub method: String,
    pub pooling: PoolingStrategy,
    pub counts: ConfusionCounts,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub accuracy: f64,
}

impl MetricsReport {
    pub fn from_counts(
        method: &str,
        pooling: PoolingStrategy,
        counts: ConfusionCounts,
    ) -> Result<Self> {
        Ok(Self {
            method: method.to_string(),
            pooling,
            counts,
            sensitivity: sensitivity(&counts).ok(),
            specificity: specificity(&counts).ok(),
            accuracy: accuracy(&counts)?,
        })
    }

    pub fn is_oracle(&self) -> bool {
        self.pooling.kind.is_oracle()
    }

    fn threshold_text(&self) -> String {
        match self.pooling.kind {
            PoolingKind::AnyInstance => "any".into(),
            _ => format!("{}", self.pooling.threshold),
        }
    }

    pub fn to_kv(&self) -> String {
        let pct = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), render_percent);
        let mut out = String::new();
        let _ = writeln!(out, "method = {}", self.method);
        let _ = writeln!(out, "pooling = {}", self.pooling.kind.name());
        let _ = writeln!(out, "threshold = {}", self.threshold_text());
        if self.is_oracle() {
            let _ = writeln!(out, "note = oracle baseline");
        }
        let c = &self.counts;
        let _ = writeln!(
            out,
            "tp = {}\nfp = {}\ntn = {}\nfn = {}",
            c.tp, c.fp, c.tn, c.fn_
        );
        let _ = writeln!(out, "sensitivity = {}", pct(self.sensitivity));
        let _ = writeln!(out, "specificity = {}", pct(self.specificity));
        let _ = writeln!(out, "accuracy = {}", render_percent(self.accuracy));
        out
    }

    pub const CSV_HEADER: &'static str =
        "method,pooling,sensitivity,specificity,accuracy,threshold";

    pub fn to_csv_row(&self) -> String {
        let pct = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), render_percent);
        let method = if self.is_oracle() {
            format!("{} (oracle baseline)", self.method)
        } else {
            self.method.clone()
        };
        format!(
            "{},{},{},{},{},{}",
            method,
            self.pooling.kind.name(),
            pct(self.sensitivity),
            pct(self.specificity),
            render_percent(self.accuracy),
            self.threshold_text()
        )
    }
}

/// Pools every subject of `data` and scores the result. `BestChance` picks its
/// threshold on these same subjects.
pub fn evaluate<F: InstanceFlagger + ?Sized>(
    flagger: &F,
    data: &Dataset,
    kind: PoolingKind,
    method: &str,
) -> Result<MetricsReport> {
    let subjects = subject_flags(flagger, data)?;
    evaluate_flags(&subjects, kind, method)
}

pub fn evaluate_flags(
    subjects: &[SubjectFlags],
    kind: PoolingKind,
    method: &str,
) -> Result<MetricsReport> {
    if subjects.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let strategy = match kind {
        PoolingKind::Majority => PoolingStrategy::majority(),
        PoolingKind::AnyInstance => PoolingStrategy::any_instance(),
        PoolingKind::BestChance => {
            let fractions: Vec<f64> = subjects.iter().map(SubjectFlags::fraction).collect();
            let labels: Vec<bool> = subjects.iter().map(|s| s.label.is_positive()).collect();
            PoolingStrategy::best_chance(best_chance_threshold(&fractions, &labels)?.0)
        }
    };
    let mut counts = ConfusionCounts::default();
    for s in subjects {
        counts.record(pool_subject(&s.flags, &strategy)?, s.label.is_positive());
    }
    MetricsReport::from_counts(method, strategy, counts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self {
            mean,
            std: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub test_subjects: Vec<String>,
    pub n_detectors: usize,
    pub report: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub folds: Vec<FoldResult>,
    pub sensitivity: MeanStd,
    pub specificity: MeanStd,
    pub accuracy: MeanStd,
}

impl CrossValidation {
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        for f in &self.folds {
            let _ = writeln!(out, "[fold {}]", f.fold);
            let _ = writeln!(out, "detectors = {}", f.n_detectors);
            out.push_str(&f.report.to_kv());
        }
        let _ = writeln!(out, "[aggregate]");
        for (name, m) in [
            ("sensitivity", self.sensitivity),
            ("specificity", self.specificity),
            ("accuracy", self.accuracy),
        ] {
            let _ = writeln!(
                out,
                "{name} = {} +/- {}",
                render_percent(m.mean),
                render_percent(m.std)
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("fold,{}\n", MetricsReport::CSV_HEADER);
        for f in &self.folds {
            let _ = writeln!(out, "{},{}", f.fold, f.report.to_csv_row());
        }
        out
    }
}

/// Fold index per subject (in `subjects` order), stratified by label.
/// Each class is shuffled with its own stream and dealt round-robin.
pub fn assign_folds(subjects: &[Subject], folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::config("folds must be at least 2"));
    }
    let mut fold_of = vec![0; subjects.len()];
    for (tag, label) in [(0u64, Label::Negative), (1, Label::Positive)] {
        let mut members: Vec<usize> = (0..subjects.len())
            .filter(|&i| subjects[i].label == label)
            .collect();
        if members.len() < folds {
            return Err(Error::config(format!(
                "{} {} subjects cannot fill {folds} folds",
                members.len(),
                if label.is_positive() {
                    "positive"
                } else {
                    "negative"
                }
            )));
        }
        SeededRng::derived(seed, tag).shuffle(&mut members);
        for (pos, &s) in members.iter().enumerate() {
            fold_of[s] = pos % folds;
        }
    }
    Ok(fold_of)
}

/// Subject-grouped stratified cross-validation of [`ssi::fit`] with
/// any-instance pooling.
pub fn cross_validate(
    data: &Dataset,
    cfg: &SsiConfig,
    folds: usize,
    seed: u64,
) -> Result<CrossValidation> {
    let subjects = dataset::group_by_subject(data)?;
    let fold_of = assign_folds(&subjects, folds, seed)?;
    let fold_ids: Vec<usize> = (0..folds).collect();
    let results = map_ordered(&fold_ids, |&f| -> Result<FoldResult> {
        let mut train_idx = Vec::new();
        let mut test_idx = Vec::new();
        let mut test_subjects = Vec::new();
        for (s, subj) in subjects.iter().enumerate() {
            if fold_of[s] == f {
                test_idx.extend_from_slice(&subj.indices);
                test_subjects.push(subj.id.clone());
            } else {
                train_idx.extend_from_slice(&subj.indices);
            }
        }
        train_idx.sort_unstable();
        test_idx.sort_unstable();
        let outcome = ssi::fit(&data.subset(&train_idx), cfg)?;
        let report = evaluate(
            &outcome.model,
            &data.subset(&test_idx),
            PoolingKind::AnyInstance,
            "ssi",
        )?;
        Ok(FoldResult {
            fold: f,
            test_subjects,
            n_detectors: outcome.model.detectors.len(),
            report,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let collect = |g: fn(&MetricsReport) -> Option<f64>| -> Vec<f64> {
        results.iter().filter_map(|r| g(&r.report)).collect()
    };
    Ok(CrossValidation {
        sensitivity: MeanStd::of(&collect(|r| r.sensitivity)),
        specificity: MeanStd::of(&collect(|r| r.specificity)),
        accuracy: MeanStd::of(&collect(|r| Some(r.accuracy))),
        folds: results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Instance;
    use proptest::prelude::*;

    fn counts(tp: usize, fp: usize, tn: usize, fn_: usize) -> ConfusionCounts {
        ConfusionCounts { tp, fp, tn, fn_ }
    }

    #[test]
    fn table_cells_render() {
        let s = |tp, fn_| render_percent(sensitivity(&counts(tp, 0, 0, fn_)).unwrap());
        let sp = |tn, fp| render_percent(specificity(&counts(0, fp, tn, 0)).unwrap());
        assert_eq!(s(12, 2), "85.71");
        assert_eq!(s(5, 9), "35.71");
        assert_eq!(s(10, 4), "71.42");
        assert_eq!(sp(14, 0), "100");
        assert_eq!(sp(12, 2), "85.71");
        assert_eq!(sp(7, 7), "50");
    }

    #[test]
    fn render_edge_cases() {
        assert_eq!(render_percent(0.0), "0");
        assert_eq!(render_percent(0.29), "29");
        assert_eq!(render_percent(0.505), "50.5");
        assert_eq!(render_percent(1.0 / 3.0), "33.33");
        assert_eq!(render_percent(2.0 / 3.0), "66.66");
        assert_eq!(render_percent(f64::NAN), "NA");
    }

    #[test]
    fn metrics_need_their_class() {
        assert!(sensitivity(&counts(0, 3, 4, 0)).is_err());
        assert!(specificity(&counts(3, 0, 0, 4)).is_err());
        assert!(accuracy(&ConfusionCounts::default()).is_err());
        let c =
            ConfusionCounts::from_pairs(&[true, false, true, false], &[true, true, false, false])
                .unwrap();
        assert_eq!(c, counts(1, 1, 1, 1));
    }

    #[test]
    fn pooling_rules() {
        let mut seven = vec![true; 7];
        seven.extend([false; 3]);
        assert!(pool_subject(&seven, &PoolingStrategy::majority()).unwrap());
        let none = [false; 10];
        for st in [
            PoolingStrategy::majority(),
            PoolingStrategy::any_instance(),
            PoolingStrategy::best_chance(0.05),
        ] {
            assert!(!pool_subject(&none, &st).unwrap());
        }
        let mut one = vec![false; 10];
        one[4] = true;
        assert!(pool_subject(&one, &PoolingStrategy::any_instance()).unwrap());
        assert!(!pool_subject(&one, &PoolingStrategy::majority()).unwrap());
        assert!(pool_subject(&[], &PoolingStrategy::majority()).is_err());
    }

    /// Scans a fine grid plus every candidate, independently of the search.
    fn brute_best(fr: &[f64], lab: &[bool]) -> usize {
        let mut grid: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
        grid.extend_from_slice(fr);
        grid.push(2.0);
        grid.iter()
            .map(|&t| fr.iter().zip(lab).filter(|(&f, &l)| (f >= t) == l).count())
            .max()
            .unwrap()
    }

    #[test]
    fn best_chance_prefers_half() {
        let (th, acc) =
            best_chance_threshold(&[0.6, 0.8, 0.1, 0.2], &[true, true, false, false]).unwrap();
        assert_eq!(th, 0.5);
        assert_eq!(acc, 1.0);
    }

    #[test]
    fn best_chance_degenerate() {
        let (th, acc) =
            best_chance_threshold(&[0.0; 5], &[true, false, false, false, true]).unwrap();
        assert_eq!(acc, 0.6);
        assert!(th > 0.0);
        let (th, acc) = best_chance_threshold(&[0.0; 3], &[true, true, false]).unwrap();
        assert_eq!((th, acc), (0.0, 2.0 / 3.0));
        assert!(best_chance_threshold(&[], &[]).is_err());
    }

    #[test]
    fn best_chance_lower_tie() {
        let (th, acc) = best_chance_threshold(&[0.4, 0.2], &[true, false]).unwrap();
        assert_eq!((th, acc), (0.4, 1.0));
        // 0, 0.3 and the sentinel each get one bag right; 0.5 gets none.
        let (th, acc) = best_chance_threshold(&[0.6, 0.3], &[false, true]).unwrap();
        assert_eq!((th, acc), (0.0, 0.5));
    }

    fn inst(id: &str, pos: bool, x: f64) -> Instance {
        Instance {
            subject_id: id.into(),
            label: Label::from_bool(pos),
            features: vec![x],
        }
    }

    #[test]
    fn folds_are_stratified_partitions() {
        let mut rows = Vec::new();
        for s in 0..4 {
            rows.push(inst(&format!("n{s}"), false, s as f64));
            rows.push(inst(&format!("p{s}"), true, s as f64));
        }
        let data = Dataset::new(vec!["x".into()], rows).unwrap();
        let subjects = dataset::group_by_subject(&data).unwrap();
        let f = assign_folds(&subjects, 2, 3).unwrap();
        for fold in 0..2 {
            for label in [Label::Negative, Label::Positive] {
                let n = (0..8)
                    .filter(|&s| f[s] == fold && subjects[s].label == label)
                    .count();
                assert_eq!(n, 2);
            }
        }
        assert_eq!(f, assign_folds(&subjects, 2, 3).unwrap());
        assert!(assign_folds(&subjects, 5, 3).is_err());
        assert!(assign_folds(&subjects, 1, 3).is_err());
    }

    proptest! {
        #[test]
        fn best_chance_dominates_majority(
            bags in prop::collection::vec((1usize..12, 0usize..12, any::<bool>()), 1..30)
        ) {
            let subjects: Vec<SubjectFlags> = bags.iter().enumerate().map(|(i, &(m, k, l))| {
                let k = k.min(m);
                SubjectFlags {
                    id: format!("s{i}"),
                    label: Label::from_bool(l),
                    flags: (0..m).map(|j| j < k).collect(),
                }
            }).collect();
            let mp = evaluate_flags(&subjects, PoolingKind::Majority, "m").unwrap();
            let bp = evaluate_flags(&subjects, PoolingKind::BestChance, "m").unwrap();
            prop_assert!(bp.accuracy >= mp.accuracy);
            let fr: Vec<f64> = subjects.iter().map(SubjectFlags::fraction).collect();
            let lab: Vec<bool> = subjects.iter().map(|s| s.label.is_positive()).collect();
            let best = brute_best(&fr, &lab);
            prop_assert_eq!((bp.accuracy * fr.len() as f64).round() as usize, best);
        }

        #[test]
        fn majority_is_best_chance_at_half(flags in prop::collection::vec(any::<bool>(), 1..20)) {
            prop_assert_eq!(
                pool_subject(&flags, &PoolingStrategy::majority()).unwrap(),
                pool_subject(&flags, &PoolingStrategy::best_chance(0.5)).unwrap()
            );
        }

        #[test]
        fn metric_locality(tp in 0usize..20, fp in 0usize..20, tn in 0usize..20, fn_ in 1usize..20, extra in 1usize..20) {
            let c = counts(tp, fp, tn, fn_);
            let more_tn = counts(tp, fp, tn + extra, fn_);
            prop_assert_eq!(sensitivity(&c).unwrap(), sensitivity(&more_tn).unwrap());
            let c = counts(tp, fp + 1, tn, fn_);
            let more_tp = counts(tp + extra, fp + 1, tn, fn_);
            prop_assert_eq!(specificity(&c).unwrap(), specificity(&more_tp).unwrap());
        }
    }
}
