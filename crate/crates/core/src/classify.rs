//! Base classifiers: class-weighted, L2-regularized logistic regression on
//! either the raw features (`linear`) or an RBF kernel feature map (`rbf`),
//! trained by full-batch gradient descent from zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed for a loss increase between consecutive epochs before the
/// step size is declared too large.
pub const LOSS_INCREASE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClassifierKind {
    Linear,
    Rbf { gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassWeighting {
    /// Each class contributes half of the total loss weight.
    Balanced,
    /// Every instance has the same weight.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    pub l2_lambda: f64,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub tolerance: f64,
    pub class_weighting: ClassWeighting,
    pub seed: u64,
}

impl Default for ClassifierSpec {
    fn default() -> Self {
        Self {
            kind: ClassifierKind::Rbf { gamma: 0.5 },
            l2_lambda: 1e-3,
            learning_rate: 0.1,
            max_epochs: 2000,
            tolerance: 1e-6,
            class_weighting: ClassWeighting::Balanced,
            seed: 0,
        }
    }
}

impl ClassifierSpec {
    pub fn linear() -> Self {
        Self {
            kind: ClassifierKind::Linear,
            ..Self::default()
        }
    }

    pub fn rbf(gamma: f64) -> Self {
        Self {
            kind: ClassifierKind::Rbf { gamma },
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let ClassifierKind::Rbf { gamma } = self.kind {
            if !(gamma > 0.0 && gamma.is_finite()) {
                return Err(Error::config("rbf gamma must be positive"));
            }
        }
        if !(self.l2_lambda >= 0.0 && self.l2_lambda.is_finite()) {
            return Err(Error::config("l2_lambda must be non-negative"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("learning_rate must be positive"));
        }
        if self.max_epochs == 0 {
            return Err(Error::config("max_epochs must be at least 1"));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::config("tolerance must be positive"));
        }
        Ok(())
    }
}

/// Per-instance loss weights for the positive and negative class.
pub fn class_weights(n_pos: usize, n_neg: usize, weighting: ClassWeighting) -> (f64, f64) {
    match weighting {
        ClassWeighting::Balanced => (0.5 / n_pos.max(1) as f64, 0.5 / n_neg.max(1) as f64),
        ClassWeighting::None => {
            let w = 1.0 / (n_pos + n_neg).max(1) as f64;
            (w, w)
        }
    }
}

/// Logistic function, kept strictly inside (0, 1).
pub fn logistic(z: f64) -> f64 {
    const ONE_BELOW: f64 = 1.0 - f64::EPSILON / 2.0;
    let p = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    p.clamp(f64::MIN_POSITIVE, ONE_BELOW)
}

/// log(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

/// The training objective for one (pos, neg) problem, over the parameter
/// vector `[w_1, ..., w_p, bias]`.
///
/// For `rbf`, the design matrix holds `c · k(x_i, r_j)` for the `m` training
/// points `r_j`. The scale `c` is 1 unless the configured step would exceed
/// the inverse curvature bound of the loss, in which case it shrinks the
/// features just enough that the fixed step stays a descent step. The penalty
/// is scaled by `c²` alongside, so in terms of the kernel coefficients `c · w`
/// the objective is unchanged; only the effective step shrinks.
#[derive(Debug, Clone)]
pub struct LogisticObjective {
    rows: Vec<Vec<f64>>,
    targets: Vec<f64>,
    weights: Vec<f64>,
    l2_lambda: f64,
    feature_scale: f64,
}

impl LogisticObjective {
    pub fn new(pos: &[Vec<f64>], neg: &[Vec<f64>], spec: &ClassifierSpec) -> Result<Self> {
        let (wp, wn) = class_weights(pos.len(), neg.len(), spec.class_weighting);
        let mut objective = Self::with_class_weights(pos, neg, spec.kind, spec.l2_lambda, wp, wn)?;
        if matches!(spec.kind, ClassifierKind::Rbf { .. }) {
            let bound = 0.25 * objective.weighted_gram_top_eigenvalue() + spec.l2_lambda;
            let step = spec.learning_rate * bound;
            if step > 1.0 {
                objective.rescale(1.0 / step.sqrt());
            }
        }
        Ok(objective)
    }

    pub fn with_class_weights(
        pos: &[Vec<f64>],
        neg: &[Vec<f64>],
        kind: ClassifierKind,
        l2_lambda: f64,
        pos_weight: f64,
        neg_weight: f64,
    ) -> Result<Self> {
        if pos.is_empty() {
            return Err(Error::MissingClass("positive"));
        }
        if neg.is_empty() {
            return Err(Error::MissingClass("negative"));
        }
        let dim = pos[0].len();
        if let Some(bad) = pos.iter().chain(neg).find(|x| x.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        let points: Vec<&Vec<f64>> = pos.iter().chain(neg).collect();
        let (rows, feature_scale) = match kind {
            ClassifierKind::Linear => (points.iter().map(|x| x.to_vec()).collect(), 1.0),
            ClassifierKind::Rbf { gamma } => {
                let rows = points
                    .iter()
                    .map(|x| points.iter().map(|r| rbf_kernel(x, r, gamma)).collect())
                    .collect();
                (rows, 1.0)
            }
        };
        let targets = pos
            .iter()
            .map(|_| 1.0)
            .chain(neg.iter().map(|_| 0.0))
            .collect();
        let weights = pos
            .iter()
            .map(|_| pos_weight)
            .chain(neg.iter().map(|_| neg_weight))
            .collect();
        Ok(Self {
            rows,
            targets,
            weights,
            l2_lambda,
            feature_scale,
        })
    }

    fn rescale(&mut self, factor: f64) {
        for row in &mut self.rows {
            row.iter_mut().for_each(|v| *v *= factor);
        }
        self.feature_scale *= factor;
        self.l2_lambda *= factor * factor;
    }

    /// Largest eigenvalue of `Σ c_i φ_i φ_iᵀ` by power iteration. The result
    /// is pushed up by 5% since the iteration approaches it from below.
    fn weighted_gram_top_eigenvalue(&self) -> f64 {
        let p = self.rows[0].len();
        let mut v = vec![1.0 / (p as f64).sqrt(); p];
        let mut lambda = 0.0;
        for _ in 0..50 {
            let mut next = vec![0.0; p];
            for (row, &c) in self.rows.iter().zip(&self.weights) {
                let dot: f64 = row.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (n, a) in next.iter_mut().zip(row) {
                    *n += c * dot * a;
                }
            }
            let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            let converged = (norm - lambda).abs() <= 1e-6 * norm;
            lambda = norm;
            v = next.into_iter().map(|x| x / norm).collect();
            if converged {
                break;
            }
        }
        lambda * 1.05
    }

    /// Length of the parameter vector, bias included.
    pub fn n_params(&self) -> usize {
        self.rows[0].len() + 1
    }

    fn logits(&self, theta: &[f64]) -> Vec<f64> {
        let (w, b) = theta.split_at(theta.len() - 1);
        self.rows
            .iter()
            .map(|r| r.iter().zip(w).map(|(x, w)| x * w).sum::<f64>() + b[0])
            .collect()
    }

    fn loss_from_logits(&self, theta: &[f64], z: &[f64]) -> f64 {
        let data: f64 = z
            .iter()
            .zip(self.targets.iter().zip(&self.weights))
            .map(|(&z, (&y, &c))| c * (softplus(z) - y * z))
            .sum();
        let w = &theta[..theta.len() - 1];
        data + 0.5 * self.l2_lambda * w.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn loss(&self, theta: &[f64]) -> f64 {
        self.loss_from_logits(theta, &self.logits(theta))
    }

    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        self.loss_and_gradient(theta).1
    }

    pub fn loss_and_gradient(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let z = self.logits(theta);
        let loss = self.loss_from_logits(theta, &z);
        let p = theta.len() - 1;
        let mut grad = vec![0.0; p + 1];
        for ((row, &z), (&y, &c)) in self
            .rows
            .iter()
            .zip(&z)
            .zip(self.targets.iter().zip(&self.weights))
        {
            let r = c * (logistic_unclamped(z) - y);
            for (g, x) in grad[..p].iter_mut().zip(row) {
                *g += r * x;
            }
            grad[p] += r;
        }
        for (g, w) in grad[..p].iter_mut().zip(&theta[..p]) {
            *g += self.l2_lambda * w;
        }
        (loss, grad)
    }
}

/// Exact logistic for the gradient; the clamp in [`logistic`] is only for outputs.
fn logistic_unclamped(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelParams {
    Linear {
        weights: Vec<f64>,
    },
    Rbf {
        gamma: f64,
        references: Vec<Vec<f64>>,
        coefficients: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub final_loss: f64,
    pub epochs: usize,
    pub converged: bool,
    /// Fraction of the training positives scored at or above 0.5.
    pub train_sensitivity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedClassifier {
    pub params: ModelParams,
    pub bias: f64,
    pub report: TrainingReport,
}

impl TrainedClassifier {
    /// The untrained model: zero weights, zero bias.
    pub fn zero(kind: ClassifierKind, dim: usize) -> Self {
        let params = match kind {
            ClassifierKind::Linear => ModelParams::Linear {
                weights: vec![0.0; dim],
            },
            ClassifierKind::Rbf { gamma } => ModelParams::Rbf {
                gamma,
                references: Vec::new(),
                coefficients: Vec::new(),
            },
        };
        Self {
            params,
            bias: 0.0,
            report: TrainingReport {
                final_loss: f64::NAN,
                epochs: 0,
                converged: false,
                train_sensitivity: f64::NAN,
            },
        }
    }

    /// Input dimension, when it is pinned by the parameters.
    pub fn dim(&self) -> Option<usize> {
        match &self.params {
            ModelParams::Linear { weights } => Some(weights.len()),
            ModelParams::Rbf { references, .. } => references.first().map(Vec::len),
        }
    }

    pub fn score(&self, x: &[f64]) -> Result<f64> {
        if let Some(d) = self.dim() {
            if x.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: x.len(),
                });
            }
        }
        let s = match &self.params {
            ModelParams::Linear { weights } => {
                weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
            }
            ModelParams::Rbf {
                gamma,
                references,
                coefficients,
            } => references
                .iter()
                .zip(coefficients)
                .map(|(r, a)| a * rbf_kernel(x, r, *gamma))
                .sum::<f64>(),
        };
        Ok(s + self.bias)
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        Ok(logistic(self.score(x)?))
    }
}

pub fn train(
    pos: &[Vec<f64>],
    neg: &[Vec<f64>],
    spec: &ClassifierSpec,
) -> Result<TrainedClassifier> {
    spec.validate()?;
    let objective = LogisticObjective::new(pos, neg, spec)?;
    let mut theta = vec![0.0; objective.n_params()];
    let (mut loss, mut grad) = objective.loss_and_gradient(&theta);
    let mut epochs = 0;
    let mut converged = false;
    while epochs < spec.max_epochs {
        if grad.iter().fold(0.0f64, |m, g| m.max(g.abs())) < spec.tolerance {
            converged = true;
            break;
        }
        for (t, g) in theta.iter_mut().zip(&grad) {
            *t -= spec.learning_rate * g;
        }
        epochs += 1;
        let (next_loss, next_grad) = objective.loss_and_gradient(&theta);
        if !next_loss.is_finite() {
            return Err(Error::Diverged(format!(
                "non-finite loss at epoch {epochs}"
            )));
        }
        if next_loss > loss + LOSS_INCREASE_SLACK {
            return Err(Error::Diverged(format!(
                "loss rose from {loss} to {next_loss} at epoch {epochs}; learning rate {} is too large",
                spec.learning_rate
            )));
        }
        loss = next_loss;
        grad = next_grad;
    }

    let bias = theta[theta.len() - 1];
    let w = &theta[..theta.len() - 1];
    let params = match spec.kind {
        ClassifierKind::Linear => ModelParams::Linear {
            weights: w.to_vec(),
        },
        ClassifierKind::Rbf { gamma } => ModelParams::Rbf {
            gamma,
            references: pos.iter().chain(neg).cloned().collect(),
            coefficients: w.iter().map(|a| a * objective.feature_scale).collect(),
        },
    };
    let mut model = TrainedClassifier {
        params,
        bias,
        report: TrainingReport {
            final_loss: loss,
            epochs,
            converged,
            train_sensitivity: 0.0,
        },
    };
    model.report.train_sensitivity = sensitivity_on(&model, pos, 0.5)?;
    Ok(model)
}

/// Fraction of `pos` with predicted probability at or above `threshold`.
pub fn sensitivity_on(model: &TrainedClassifier, pos: &[Vec<f64>], threshold: f64) -> Result<f64> {
    if pos.is_empty() {
        return Err(Error::invalid(
            "sensitivity needs at least one positive instance",
        ));
    }
    let mut hits = 0usize;
    for x in pos {
        if model.predict_proba(x)? >= threshold {
            hits += 1;
        }
    }
    Ok(hits as f64 / pos.len() as f64)
}
