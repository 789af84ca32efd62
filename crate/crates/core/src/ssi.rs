//! Exclusive-cluster discovery and the OR-ensemble built from it.
//!
//! [`fit`] repeatedly clusters the remaining positives together with all
//! negatives, growing the cluster count until some cluster is *exclusive*
//! (enough positives, few enough negatives). Each exclusive cluster gets a
//! classifier trained against every negative; classifiers that recover their
//! own cluster well enough join the ensemble. The cluster's positives are then
//! removed and the search restarts from two clusters. An instance is positive
//! if any detector flags it; a subject is positive if any instance is.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::classify::{self, ClassWeighting, ClassifierSpec, TrainedClassifier};
use crate::cluster::{self, ClusterStats};
use crate::dataset::{self, Dataset, Label, StandardizationParams};
use crate::error::{Error, Result};
use crate::infotheory::{self, BinningSpec};
use crate::par::map_ordered;
use crate::rng::SeededRng;

/// Probability threshold at which the sensitivity gate counts a positive as recovered.
pub const GATE_THRESHOLD: f64 = 0.5;

/// Stop threshold on cluster size, re-resolved every round against the
/// number of instances still being clustered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "value", rename_all = "lowercase")]
pub enum RhoRule {
    /// `max(2 (s + 1), ceil(0.05 · pool))`.
    Auto,
    Count(usize),
    Fraction(f64),
}

impl RhoRule {
    pub fn resolve(&self, pool: usize, min_positives: usize) -> usize {
        let raw = match *self {
            RhoRule::Auto => (2 * (min_positives + 1)).max(ceil_frac(0.05, pool)),
            RhoRule::Count(c) => c,
            RhoRule::Fraction(f) => ceil_frac(f, pool),
        };
        raw.max(1)
    }
}

fn ceil_frac(f: f64, n: usize) -> usize {
    (f * n as f64 - 1e-9).ceil().max(0.0) as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsiConfig {
    pub rho: RhoRule,
    /// `s`: an exclusive cluster needs strictly more positives than this.
    /// `None` resolves to `max(5, ceil(0.01 |P|))`.
    pub min_positives: Option<usize>,
    /// `t`: an exclusive cluster needs `N_j / P_j` strictly below this.
    pub neg_tolerance: f64,
    /// `st`: a detector joins the ensemble when its gate sensitivity is strictly above this.
    pub min_sensitivity: f64,
    /// Cap on the cluster count. `None` resolves to `min(50, |P ∪ N|)`.
    pub k_max: Option<usize>,
    pub classifier: ClassifierSpec,
    pub standardize: bool,
    pub seed: u64,
    /// Keep a rejected cluster's positives in the pool instead of removing
    /// them. The cluster count then only resets when something was removed.
    pub remove_only_if_accepted: bool,
    /// Fraction of a cluster's positives held out for the gate (0: gate on training positives).
    pub gate_holdout_fraction: f64,
    /// Per-detector feature selection: keep this many features by mutual information.
    pub feature_select: Option<usize>,
    pub binning: BinningSpec,
    pub decision_threshold: f64,
}

impl Default for SsiConfig {
    fn default() -> Self {
        Self {
            rho: RhoRule::Auto,
            min_positives: None,
            neg_tolerance: 0.2,
            min_sensitivity: 0.9,
            k_max: None,
            classifier: ClassifierSpec {
                class_weighting: ClassWeighting::None,
                ..ClassifierSpec::linear()
            },
            standardize: true,
            seed: 0,
            remove_only_if_accepted: true,
            gate_holdout_fraction: 0.0,
            feature_select: None,
            binning: BinningSpec::default(),
            decision_threshold: 0.5,
        }
    }
}

/// Values of `s` and `k_max` after defaults are applied to a concrete dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedParams {
    pub min_positives: usize,
    pub k_max: usize,
}

impl SsiConfig {
    pub fn resolve(&self, n_pos: usize, n_total: usize) -> Result<ResolvedParams> {
        let min_positives = self
            .min_positives
            .unwrap_or_else(|| 5.max(ceil_frac(0.01, n_pos)));
        let k_max = self.k_max.unwrap_or_else(|| 50.min(n_total));
        if min_positives < 1 {
            return Err(Error::config("min_positives (s) must be at least 1"));
        }
        if k_max < 2 {
            return Err(Error::config("k_max must be at least 2"));
        }
        if self.neg_tolerance.is_nan() || self.neg_tolerance < 0.0 {
            return Err(Error::config("neg_tolerance (t) must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.min_sensitivity) {
            return Err(Error::config("min_sensitivity (st) must lie in [0, 1]"));
        }
        if !(0.0..1.0).contains(&self.gate_holdout_fraction) {
            return Err(Error::config("gate_holdout_fraction must lie in [0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.decision_threshold) {
            return Err(Error::config("decision_threshold must lie in [0, 1]"));
        }
        match self.rho {
            RhoRule::Count(0) => return Err(Error::config("rho count must be at least 1")),
            RhoRule::Fraction(f) if !(f > 0.0 && f <= 1.0) => {
                return Err(Error::config("rho fraction must lie in (0, 1]"))
            }
            _ => {}
        }
        if self.feature_select == Some(0) {
            return Err(Error::config("feature_select must be at least 1"));
        }
        if self.binning.n_bins < 2 {
            return Err(Error::config("n_bins must be at least 2"));
        }
        self.classifier.validate()?;
        Ok(ResolvedParams {
            min_positives,
            k_max,
        })
    }
}

/// Clusters qualifying as exclusive: `P_j > 0`, `N_j / P_j < t` and `P_j > s`,
/// in ascending cluster index.
pub fn find_exclusive_clusters(stats: &[ClusterStats], t: f64, s: usize) -> Vec<usize> {
    stats
        .iter()
        .enumerate()
        .filter(|(_, c)| is_exclusive(c, t, s))
        .map(|(j, _)| j)
        .collect()
}

fn is_exclusive(c: &ClusterStats, t: f64, s: usize) -> bool {
    c.positives > 0 && c.positives > s && (c.negatives as f64) / (c.positives as f64) < t
}

/// Where a detector came from. Member indices refer to the training dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub round: usize,
    pub n: usize,
    pub cluster: usize,
    pub positives: usize,
    pub negatives: usize,
    pub centroid: Vec<f64>,
    pub positive_members: Vec<usize>,
    pub negative_members: Vec<usize>,
    /// Positives the sensitivity gate was evaluated on.
    pub gate_members: Vec<usize>,
    /// Best single-feature mutual information with membership (bits), when computed.
    pub separability: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detector {
    pub classifier: TrainedClassifier,
    pub source: ClusterSummary,
    pub selected_features: Option<Vec<usize>>,
    pub gate_sensitivity: f64,
    pub accepted: bool,
}

impl Detector {
    /// Probability for an already standardized input.
    pub fn predict_proba(&self, z: &[f64]) -> Result<f64> {
        match &self.selected_features {
            Some(sel) => self.classifier.predict_proba(&project(z, sel)),
            None => self.classifier.predict_proba(z),
        }
    }
}

fn project(z: &[f64], selected: &[usize]) -> Vec<f64> {
    selected.iter().map(|&j| z[j]).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub dim: usize,
    /// Accepted detectors only, in discovery order.
    pub detectors: Vec<Detector>,
    pub standardizer: StandardizationParams,
    pub decision_threshold: f64,
    pub config: SsiConfig,
    pub resolved: ResolvedParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstancePrediction {
    pub flag: bool,
    pub probabilities: Vec<f64>,
}

impl EnsembleModel {
    /// An ensemble with no detectors; it flags nothing.
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            detectors: Vec::new(),
            standardizer: StandardizationParams::identity(dim),
            decision_threshold: 0.5,
            config: SsiConfig::default(),
            resolved: ResolvedParams {
                min_positives: 5,
                k_max: 50,
            },
        }
    }

    pub fn predict_instance(&self, x: &[f64]) -> Result<InstancePrediction> {
        let z = self.standardizer.transform(x)?;
        let probabilities = self
            .detectors
            .iter()
            .map(|d| d.predict_proba(&z))
            .collect::<Result<Vec<_>>>()?;
        let flag = probabilities.iter().any(|&p| p >= self.decision_threshold);
        Ok(InstancePrediction {
            flag,
            probabilities,
        })
    }

    pub fn flag(&self, x: &[f64]) -> Result<bool> {
        Ok(self.predict_instance(x)?.flag)
    }

    /// True iff any instance of the bag is flagged.
    pub fn predict_subject(&self, bag: &[Vec<f64>]) -> Result<bool> {
        if bag.is_empty() {
            return Err(Error::invalid("cannot classify an empty bag"));
        }
        for x in bag {
            if self.flag(x)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterDecision {
    Exclusive,
    NoPositives,
    TooFewPositives,
    TooManyNegatives,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Clustered {
        round: usize,
        n: usize,
        rho: usize,
        stats: Vec<ClusterStats>,
        decisions: Vec<ClusterDecision>,
    },
    Gate {
        round: usize,
        n: usize,
        cluster: usize,
        positives: usize,
        negatives: usize,
        gate_sensitivity: f64,
        accepted: bool,
        separability: Option<f64>,
        selected_features: Option<Vec<usize>>,
    },
    Removed {
        round: usize,
        n: usize,
        cluster: usize,
        indices: Vec<usize>,
    },
    KMaxReached {
        round: usize,
        n: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitTrace {
    pub resolved: ResolvedParams,
    pub initial_positives: Vec<usize>,
    pub remaining_positives: Vec<usize>,
    pub events: Vec<TraceEvent>,
}

impl FitTrace {
    /// Initial positives minus every traced removal.
    pub fn replay_remaining(&self) -> Vec<usize> {
        let mut removed = std::collections::HashSet::new();
        for e in &self.events {
            if let TraceEvent::Removed { indices, .. } = e {
                removed.extend(indices.iter().copied());
            }
        }
        self.initial_positives
            .iter()
            .copied()
            .filter(|i| !removed.contains(i))
            .collect()
    }

    pub fn rounds(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, TraceEvent::Clustered { .. }))
            .count()
    }

    pub fn hit_k_max(&self) -> bool {
        self.events
            .iter()
            .any(|e| matches!(e, TraceEvent::KMaxReached { .. }))
    }

    /// One event per line: `round=.. n=.. cluster=.. P_j=.. N_j=.. decision=..`.
    pub fn to_log(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            match e {
                TraceEvent::Clustered {
                    round,
                    n,
                    rho,
                    stats,
                    decisions,
                } => {
                    for (j, (s, d)) in stats.iter().zip(decisions).enumerate() {
                        let decision = match d {
                            ClusterDecision::Exclusive => "exclusive",
                            ClusterDecision::NoPositives => "no_positives",
                            ClusterDecision::TooFewPositives => "too_few_positives",
                            ClusterDecision::TooManyNegatives => "too_many_negatives",
                        };
                        let _ = writeln!(
                            out,
                            "round={round} n={n} cluster={j} size={} P_j={} N_j={} rho={rho} decision={decision}",
                            s.size, s.positives, s.negatives
                        );
                    }
                }
                TraceEvent::Gate {
                    round,
                    n,
                    cluster,
                    positives,
                    negatives,
                    gate_sensitivity,
                    accepted,
                    separability,
                    selected_features,
                } => {
                    let decision = if *accepted { "accepted" } else { "rejected" };
                    let _ = write!(
                        out,
                        "round={round} n={n} cluster={cluster} P_j={positives} N_j={negatives} decision={decision} gate_sensitivity={gate_sensitivity}"
                    );
                    if let Some(s) = separability {
                        let _ = write!(out, " separability_bits={s}");
                    }
                    if let Some(sel) = selected_features {
                        let list: Vec<String> = sel.iter().map(usize::to_string).collect();
                        let _ = write!(out, " features={}", list.join(";"));
                    }
                    out.push('\n');
                }
                TraceEvent::Removed {
                    round,
                    n,
                    cluster,
                    indices,
                } => {
                    let list: Vec<String> = indices.iter().map(usize::to_string).collect();
                    let _ = writeln!(
                        out,
                        "round={round} n={n} cluster={cluster} decision=removed count={} indices={}",
                        indices.len(),
                        list.join(";")
                    );
                }
                TraceEvent::KMaxReached { round, n } => {
                    let _ = writeln!(out, "round={round} n={n} decision=warning_k_max_reached");
                }
            }
        }
        let _ = writeln!(
            out,
            "done rounds={} remaining_positives={}",
            self.rounds(),
            self.remaining_positives.len()
        );
        out
    }
}

/// Learned ensemble plus the full record of how it was found.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOutcome {
    pub model: EnsembleModel,
    pub trace: FitTrace,
}

fn round_seed(seed: u64, round: usize) -> u64 {
    SeededRng::derived(seed, round as u64).next_u64()
}

pub fn fit(data: &Dataset, cfg: &SsiConfig) -> Result<FitOutcome> {
    data.require_both_classes()?;
    let (pos_idx, neg_idx) = dataset::split_by_label(data);
    let resolved = cfg.resolve(pos_idx.len(), data.len())?;
    let s = resolved.min_positives;

    let standardizer = if cfg.standardize {
        dataset::fit_standardizer(data)?
    } else {
        StandardizationParams::identity(data.dim())
    };
    let z = dataset::apply_standardizer(data, &standardizer)?;
    let point = |i: usize| z.features(i).to_vec();
    let negatives: Vec<Vec<f64>> = neg_idx.iter().map(|&i| point(i)).collect();

    let mut remaining = pos_idx.clone();
    let mut events = Vec::new();
    let mut detectors = Vec::new();
    let mut n = 1usize;
    let mut last_sizes: Vec<usize> = Vec::new();
    let mut round = 0usize;

    loop {
        let pool = merge_sorted(&remaining, &neg_idx);
        let rho = cfg.rho.resolve(pool.len(), s);
        if !(n == 1 || last_sizes.iter().any(|&size| size > rho)) {
            break;
        }
        if n >= resolved.k_max {
            events.push(TraceEvent::KMaxReached { round, n });
            break;
        }
        if n + 1 > pool.len() {
            break;
        }
        n += 1;
        round += 1;

        let points: Vec<Vec<f64>> = pool.iter().map(|&i| point(i)).collect();
        let labels: Vec<Label> = pool.iter().map(|&i| data.instance(i).label).collect();
        let km = cluster::kmeans(&points, n, round_seed(cfg.seed, round))?;
        let stats = cluster::cluster_stats(&km.assignments, n, &labels)?;
        let decisions = stats
            .iter()
            .map(|c| {
                if c.positives == 0 {
                    ClusterDecision::NoPositives
                } else if c.positives <= s {
                    ClusterDecision::TooFewPositives
                } else if is_exclusive(c, cfg.neg_tolerance, s) {
                    ClusterDecision::Exclusive
                } else {
                    ClusterDecision::TooManyNegatives
                }
            })
            .collect();
        let exclusive = find_exclusive_clusters(&stats, cfg.neg_tolerance, s);
        last_sizes = stats.iter().map(|c| c.size).collect();
        events.push(TraceEvent::Clustered {
            round,
            n,
            rho,
            stats: stats.clone(),
            decisions,
        });
        if exclusive.is_empty() {
            continue;
        }

        let candidates: Vec<ClusterSummary> = exclusive
            .iter()
            .map(|&j| {
                let members = pool.iter().zip(&km.assignments).filter(|(_, &a)| a == j);
                let (p, q): (Vec<usize>, Vec<usize>) = members
                    .map(|(&i, _)| i)
                    .partition(|&i| data.instance(i).label.is_positive());
                ClusterSummary {
                    round,
                    n,
                    cluster: j,
                    positives: stats[j].positives,
                    negatives: stats[j].negatives,
                    centroid: km.centroids[j].clone(),
                    positive_members: p,
                    negative_members: q,
                    gate_members: Vec::new(),
                    separability: None,
                }
            })
            .collect();

        let trained = map_ordered(&candidates, |summary| {
            train_detector(summary.clone(), &z, &negatives, cfg)
        });

        let mut removed_any = false;
        for detector in trained {
            let detector = detector?;
            let src = &detector.source;
            events.push(TraceEvent::Gate {
                round,
                n,
                cluster: src.cluster,
                positives: src.positives,
                negatives: src.negatives,
                gate_sensitivity: detector.gate_sensitivity,
                accepted: detector.accepted,
                separability: src.separability,
                selected_features: detector.selected_features.clone(),
            });
            if detector.accepted || !cfg.remove_only_if_accepted {
                let gone = &src.positive_members;
                remaining.retain(|i| gone.binary_search(i).is_err());
                events.push(TraceEvent::Removed {
                    round,
                    n,
                    cluster: src.cluster,
                    indices: gone.clone(),
                });
                removed_any = true;
            }
            if detector.accepted {
                detectors.push(detector);
            }
        }
        if removed_any {
            n = 1;
            last_sizes.clear();
        }
    }

    let model = EnsembleModel {
        dim: data.dim(),
        detectors,
        standardizer,
        decision_threshold: cfg.decision_threshold,
        config: cfg.clone(),
        resolved,
    };
    let trace = FitTrace {
        resolved,
        initial_positives: pos_idx,
        remaining_positives: remaining,
        events,
    };
    Ok(FitOutcome { model, trace })
}

fn merge_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] < b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Trains one cluster's classifier against all negatives and applies the gate.
/// `z` is the standardized dataset.
fn train_detector(
    mut source: ClusterSummary,
    z: &Dataset,
    negatives: &[Vec<f64>],
    cfg: &SsiConfig,
) -> Result<Detector> {
    let members = &source.positive_members;
    let (train_members, gate_members) = if cfg.gate_holdout_fraction > 0.0 && members.len() >= 2 {
        let mut shuffled = members.clone();
        let tag = ((source.round as u64) << 32) | source.cluster as u64;
        SeededRng::derived(cfg.seed ^ 0x6A7E, tag).shuffle(&mut shuffled);
        let held = ceil_frac(cfg.gate_holdout_fraction, members.len()).clamp(1, members.len() - 1);
        let (gate, train) = shuffled.split_at(held);
        let mut train = train.to_vec();
        let mut gate = gate.to_vec();
        train.sort_unstable();
        gate.sort_unstable();
        (train, gate)
    } else {
        (members.clone(), members.clone())
    };

    let full =
        |idx: &[usize]| -> Vec<Vec<f64>> { idx.iter().map(|&i| z.features(i).to_vec()).collect() };
    let train_pos = full(&train_members);
    let gate_pos = full(&gate_members);

    let selected = match cfg.feature_select {
        Some(m) => {
            source.separability = Some(infotheory::partition_separability(
                &train_pos,
                negatives,
                cfg.binning,
            )?);
            Some(infotheory::select_features(
                &train_pos,
                negatives,
                m.min(z.dim()),
                cfg.binning,
            )?)
        }
        None => None,
    };
    let view = |xs: &[Vec<f64>]| -> Vec<Vec<f64>> {
        match &selected {
            Some(sel) => xs.iter().map(|x| project(x, sel)).collect(),
            None => xs.to_vec(),
        }
    };

    let classifier = classify::train(&view(&train_pos), &view(negatives), &cfg.classifier)?;
    let gate_sensitivity = classify::sensitivity_on(&classifier, &view(&gate_pos), GATE_THRESHOLD)?;
    source.gate_members = gate_members;
    Ok(Detector {
        classifier,
        source,
        selected_features: selected,
        gate_sensitivity,
        accepted: gate_sensitivity > cfg.min_sensitivity,
    })
}
