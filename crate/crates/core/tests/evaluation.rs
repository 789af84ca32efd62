use std::collections::{BTreeMap, HashMap};

use ssi_core::classify::ClassifierSpec;
use ssi_core::dataset::{self, Dataset, Instance, Label};
use ssi_core::eval::{self, PoolingKind};
use ssi_core::model_io::ModelFile;
use ssi_core::rng::SeededRng;
use ssi_core::ssi::{self, SsiConfig};
use ssi_core::synth::{self, SynthConfig};

fn small_cfg() -> SsiConfig {
    SsiConfig {
        seed: 3,
        ..SsiConfig::default()
    }
}

#[test]
fn folds_partition_subjects_and_aggregate_is_the_mean() {
    let (d, _) = synth::generate(&SynthConfig {
        seed: 31,
        ..SynthConfig::default()
    })
    .unwrap();
    let cv = eval::cross_validate(&d, &small_cfg(), 4, 9).unwrap();
    assert_eq!(cv.folds.len(), 4);

    let mut fold_count: HashMap<&str, usize> = HashMap::new();
    for f in &cv.folds {
        for s in &f.test_subjects {
            *fold_count.entry(s.as_str()).or_default() += 1;
        }
    }
    let subjects = dataset::group_by_subject(&d).unwrap();
    assert_eq!(fold_count.len(), subjects.len());
    assert!(fold_count.values().all(|&c| c == 1));

    // Recompute each fold's accuracy from its counts, then the mean by hand.
    let accs: Vec<f64> = cv
        .folds
        .iter()
        .map(|f| {
            let c = f.report.counts;
            (c.tp + c.tn) as f64 / (c.tp + c.tn + c.fp + c.fn_) as f64
        })
        .collect();
    let mean = accs.iter().sum::<f64>() / accs.len() as f64;
    let var = accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / accs.len() as f64;
    assert!((cv.accuracy.mean - mean).abs() < 1e-12);
    assert!((cv.accuracy.std - var.sqrt()).abs() < 1e-12);

    let again = eval::cross_validate(&d, &small_cfg(), 4, 9).unwrap();
    assert_eq!(cv, again);
}

#[test]
fn two_subjects_per_class_two_folds() {
    let rows = ["n0", "n1", "p0", "p1"]
        .iter()
        .flat_map(|id| {
            let pos = id.starts_with('p');
            (0..3).map(move |k| Instance {
                subject_id: id.to_string(),
                label: Label::from_bool(pos),
                features: vec![k as f64, if pos { 5.0 } else { 0.0 }],
            })
        })
        .collect();
    let d = Dataset::new(vec!["a".into(), "b".into()], rows).unwrap();
    let subjects = dataset::group_by_subject(&d).unwrap();
    for seed in 0..5 {
        let folds = eval::assign_folds(&subjects, 2, seed).unwrap();
        for f in 0..2 {
            let members: Vec<&str> = (0..4)
                .filter(|&s| folds[s] == f)
                .map(|s| subjects[s].id.as_str())
                .collect();
            assert_eq!(members.len(), 2);
            assert_eq!(members.iter().filter(|id| id.starts_with('p')).count(), 1);
        }
    }
}

#[test]
fn model_file_round_trip_is_exact() {
    let (d, _) = synth::generate(&SynthConfig {
        dim: 3,
        seed: 17,
        ..SynthConfig::default()
    })
    .unwrap();
    for cfg in [
        SsiConfig {
            seed: 17,
            classifier: ClassifierSpec::rbf(0.5),
            ..SsiConfig::default()
        },
        SsiConfig {
            seed: 17,
            feature_select: Some(2),
            ..SsiConfig::default()
        },
    ] {
        let model = ssi::fit(&d, &cfg).unwrap().model;
        assert!(!model.detectors.is_empty());
        let mut echo = BTreeMap::new();
        echo.insert("seed".to_string(), "17".to_string());
        let file = ModelFile::new(model.clone(), 17, echo);
        let text = file.to_json().unwrap();
        let back = ModelFile::from_json(&text).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.to_json().unwrap(), text);

        let mut rng = SeededRng::new(99);
        for _ in 0..1000 {
            let x: Vec<f64> = (0..3).map(|_| 5.0 * rng.normal()).collect();
            let p = model.predict_instance(&x).unwrap();
            let q = back.model.predict_instance(&x).unwrap();
            assert_eq!(p.flag, q.flag);
            for (a, b) in p.probabilities.iter().zip(&q.probabilities) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}

#[test]
fn damaged_model_files_are_rejected() {
    let (d, _) = synth::generate(&SynthConfig::default()).unwrap();
    let model = ssi::fit(
        &d,
        &SsiConfig {
            seed: 7,
            ..SsiConfig::default()
        },
    )
    .unwrap()
    .model;
    let mut file = ModelFile::new(model, 7, BTreeMap::new());
    file.model.dim = 3;
    let text = file.to_json().unwrap();
    assert!(ModelFile::from_json(&text).is_err());
}

#[test]
fn baseline_reports_and_pooling() {
    let (train, _) = synth::generate(&SynthConfig::default()).unwrap();
    let (test, _) = synth::generate(&SynthConfig {
        seed: 1234,
        n_pos_subjects: 14,
        n_neg_subjects: 14,
        ..SynthConfig::default()
    })
    .unwrap();
    let base = eval::train_global_baseline(&train, &eval::default_baseline_spec()).unwrap();
    let flags = eval::subject_flags(&base, &test).unwrap();
    let mp = eval::evaluate_flags(&flags, PoolingKind::Majority, "global-rbf").unwrap();
    let bp = eval::evaluate_flags(&flags, PoolingKind::BestChance, "global-rbf").unwrap();
    let any = eval::evaluate_flags(&flags, PoolingKind::AnyInstance, "global-rbf").unwrap();
    assert!(bp.accuracy >= mp.accuracy);
    assert_eq!(mp.counts.total(), 28);
    assert!(bp.to_kv().contains("note = oracle baseline"));
    assert!(bp.to_csv_row().contains("(oracle baseline)"));
    assert!(!mp.to_kv().contains("oracle"));
    assert!(any.to_csv_row().ends_with(",any"));
    assert_eq!(mp.pooling.threshold, 0.5);

    let (cube, _) = synth::generate(&SynthConfig {
        dim: 3,
        ..SynthConfig::default()
    })
    .unwrap();
    assert!(eval::subject_flags(&base, &cube).is_err());
}
