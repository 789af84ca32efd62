//! Browser bindings: three operations over a 2-D synthetic scenario.
//!
//! The `*_json` functions hold the logic and are callable natively; the
//! exported wrappers only convert errors for JavaScript.

use serde_json::json;
use ssi_core::classify::ClassifierSpec;
use ssi_core::eval::{self, PoolingKind};
use ssi_core::plot::{self, PlotOptions};
use ssi_core::ssi::{self, SsiConfig};
use ssi_core::synth::{self, SynthConfig};
use ssi_core::{EnsembleModel, Result};
use wasm_bindgen::prelude::*;

const PLOT_SIZE: u32 = 520;
const TEST_SUBJECTS: usize = 14;

fn scenario(subgroups: usize, offset: f64, sigma: f64, seed: u64) -> SynthConfig {
    SynthConfig {
        n_subgroups: subgroups,
        subgroup_offset: offset,
        subgroup_sigma: sigma,
        seed,
        ..SynthConfig::default()
    }
}

fn ssi_config(
    classifier: &str,
    gamma: f64,
    neg_tolerance: f64,
    min_sensitivity: f64,
    seed: u64,
) -> Result<SsiConfig> {
    let base = SsiConfig::default();
    let classifier = match classifier {
        "linear" => base.classifier,
        "rbf" => ClassifierSpec {
            class_weighting: base.classifier.class_weighting,
            ..ClassifierSpec::rbf(gamma)
        },
        other => {
            return Err(ssi_core::Error::Config(format!(
                "unknown classifier `{other}`"
            )))
        }
    };
    Ok(SsiConfig {
        classifier,
        neg_tolerance,
        min_sensitivity,
        seed,
        ..base
    })
}

fn options(subgroups: Vec<usize>) -> PlotOptions {
    PlotOptions {
        width: PLOT_SIZE,
        height: PLOT_SIZE,
        subgroups: Some(subgroups),
        ..PlotOptions::default()
    }
}

/// Generated training set as an SVG scatter plot, markers colored by subgroup.
pub fn scatter_json(subgroups: usize, offset: f64, sigma: f64, seed: u64) -> Result<String> {
    let (data, truth) = synth::generate(&scenario(subgroups, offset, sigma, seed))?;
    let svg = plot::render_svg::<EnsembleModel>(&data, None, &options(truth.subgroup.clone()))?;
    Ok(json!({ "svg": svg, "instances": data.len() }).to_string())
}

/// Fits the ensemble and draws the region it flags over the training set.
#[allow(clippy::too_many_arguments)]
pub fn regions_json(
    subgroups: usize,
    offset: f64,
    sigma: f64,
    seed: u64,
    classifier: &str,
    gamma: f64,
    neg_tolerance: f64,
    min_sensitivity: f64,
) -> Result<String> {
    let (data, truth) = synth::generate(&scenario(subgroups, offset, sigma, seed))?;
    let cfg = ssi_config(classifier, gamma, neg_tolerance, min_sensitivity, seed)?;
    let out = ssi::fit(&data, &cfg)?;
    let svg = plot::render_svg(&data, Some(&out.model), &options(truth.subgroup.clone()))?;
    let detectors: Vec<_> = out
        .model
        .detectors
        .iter()
        .map(|d| {
            json!({
                "positives": d.source.positives,
                "negatives": d.source.negatives,
                "gate_sensitivity": d.gate_sensitivity,
            })
        })
        .collect();
    Ok(json!({
        "svg": svg,
        "rounds": out.trace.rounds(),
        "remaining_positives": out.trace.remaining_positives.len(),
        "initial_positives": out.trace.initial_positives.len(),
        "hit_k_max": out.trace.hit_k_max(),
        "detectors": detectors,
        "log": out.trace.to_log(),
    })
    .to_string())
}

/// Subject-level metrics on a fresh balanced test set: the ensemble with
/// any-instance pooling against a global RBF model under majority and
/// best-chance pooling.
#[allow(clippy::too_many_arguments)]
pub fn compare_json(
    subgroups: usize,
    offset: f64,
    sigma: f64,
    seed: u64,
    classifier: &str,
    gamma: f64,
    neg_tolerance: f64,
    min_sensitivity: f64,
) -> Result<String> {
    let (train, _) = synth::generate(&scenario(subgroups, offset, sigma, seed))?;
    let (test, _) = synth::generate(&SynthConfig {
        n_pos_subjects: TEST_SUBJECTS,
        n_neg_subjects: TEST_SUBJECTS,
        ..scenario(subgroups, offset, sigma, seed.wrapping_add(1))
    })?;
    let cfg = ssi_config(classifier, gamma, neg_tolerance, min_sensitivity, seed)?;
    let model = ssi::fit(&train, &cfg)?.model;
    let baseline = eval::train_global_baseline(&train, &eval::default_baseline_spec())?;
    let flags = eval::subject_flags(&baseline, &test)?;
    let rows = [
        eval::evaluate(&model, &test, PoolingKind::AnyInstance, "ssi")?,
        eval::evaluate_flags(&flags, PoolingKind::Majority, "global-rbf")?,
        eval::evaluate_flags(&flags, PoolingKind::BestChance, "global-rbf")?,
    ];
    let pct = |p: Option<f64>| p.map_or_else(|| "NA".to_string(), eval::render_percent);
    let rows: Vec<_> = rows
        .iter()
        .map(|r| {
            json!({
                "method": r.method,
                "pooling": r.pooling.kind.name(),
                "oracle": r.pooling.kind.is_oracle(),
                "threshold": r.pooling.threshold,
                "sensitivity": pct(r.sensitivity),
                "specificity": pct(r.specificity),
                "accuracy": eval::render_percent(r.accuracy),
                "counts": r.counts,
            })
        })
        .collect();
    Ok(json!({ "detectors": model.detectors.len(), "rows": rows }).to_string())
}

fn js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn scatter(
    subgroups: usize,
    offset: f64,
    sigma: f64,
    seed: u64,
) -> std::result::Result<String, JsError> {
    js(scatter_json(subgroups, offset, sigma, seed))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn regions(
    subgroups: usize,
    offset: f64,
    sigma: f64,
    seed: u64,
    classifier: &str,
    gamma: f64,
    neg_tolerance: f64,
    min_sensitivity: f64,
) -> std::result::Result<String, JsError> {
    js(regions_json(
        subgroups,
        offset,
        sigma,
        seed,
        classifier,
        gamma,
        neg_tolerance,
        min_sensitivity,
    ))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn compare(
    subgroups: usize,
    offset: f64,
    sigma: f64,
    seed: u64,
    classifier: &str,
    gamma: f64,
    neg_tolerance: f64,
    min_sensitivity: f64,
) -> std::result::Result<String, JsError> {
    js(compare_json(
        subgroups,
        offset,
        sigma,
        seed,
        classifier,
        gamma,
        neg_tolerance,
        min_sensitivity,
    ))
}
