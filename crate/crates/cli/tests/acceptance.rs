//! Acceptance suite. Prints one PASS/FAIL line per criterion, then fails if
//! any criterion failed. Run with `cargo test --test acceptance -- --nocapture`.

use std::collections::HashSet;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rayon::prelude::*;
use ssi_core::classify::{ClassifierSpec, LogisticObjective};
use ssi_core::cluster::{self, squared_distance};
use ssi_core::dataset::{self, Dataset, Label};
use ssi_core::eval::{self, render_percent, ConfusionCounts, PoolingKind, SubjectFlags};
use ssi_core::infotheory::{mutual_information, ContingencyTable};
use ssi_core::model_io::ModelFile;
use ssi_core::rng::SeededRng;
use ssi_core::ssi::{self, ClusterDecision, RhoRule, SsiConfig, TraceEvent};
use ssi_core::synth::{self, SynthConfig};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

// ---------------------------------------------------------------- 1

struct SeedResult {
    ssi_sep_sensitivity: f64,
    ssi_specificity: f64,
    mp_sensitivity: f64,
    ssi_acc: f64,
    bp_acc: f64,
    mp_acc: f64,
}

fn table_seed(s: u64) -> SeedResult {
    let train_cfg = SynthConfig {
        seed: s,
        ..SynthConfig::default()
    };
    let test_cfg = SynthConfig {
        seed: 10_000 + s,
        n_pos_subjects: 14,
        n_neg_subjects: 14,
        ..SynthConfig::default()
    };
    let (train, _) = synth::generate(&train_cfg).unwrap();
    let (test, truth) = synth::generate(&test_cfg).unwrap();

    let cfg = SsiConfig {
        seed: s,
        ..SsiConfig::default()
    };
    let model = ssi::fit(&train, &cfg).unwrap().model;
    let flags = eval::subject_flags(&model, &test).unwrap();
    let mut sep = ConfusionCounts::default();
    for f in &flags {
        if f.label.is_positive() && truth.has_separable_instance(&f.id) {
            sep.record(f.flags.iter().any(|&b| b), true);
        }
    }
    let ssi_report = eval::evaluate_flags(&flags, PoolingKind::AnyInstance, "ssi").unwrap();

    let baseline = eval::train_global_baseline(&train, &eval::default_baseline_spec()).unwrap();
    let base_flags: Vec<SubjectFlags> = eval::subject_flags(&baseline, &test).unwrap();
    let mp = eval::evaluate_flags(&base_flags, PoolingKind::Majority, "global-rbf").unwrap();
    let bp = eval::evaluate_flags(&base_flags, PoolingKind::BestChance, "global-rbf").unwrap();

    SeedResult {
        ssi_sep_sensitivity: eval::sensitivity(&sep).unwrap(),
        ssi_specificity: ssi_report.specificity.unwrap(),
        mp_sensitivity: mp.sensitivity.unwrap(),
        ssi_acc: ssi_report.accuracy,
        bp_acc: bp.accuracy,
        mp_acc: mp.accuracy,
    }
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let seeds: Vec<u64> = (1..=20).collect();
    let results: Vec<SeedResult> = seeds.par_iter().map(|&s| table_seed(s)).collect();
    let secs = start.elapsed().as_secs_f64();
    let n = results.len() as f64;
    let mean = |f: fn(&SeedResult) -> f64| results.iter().map(f).sum::<f64>() / n;
    let sep_sens = mean(|r| r.ssi_sep_sensitivity);
    let spec = mean(|r| r.ssi_specificity);
    let mp_sens = mean(|r| r.mp_sensitivity);
    let ordered = results
        .iter()
        .filter(|r| r.ssi_acc > r.bp_acc && r.bp_acc >= r.mp_acc)
        .count();
    let pass = mp_sens <= 0.50 && sep_sens >= 0.95 && spec >= 0.90 && ordered >= 16 && secs < 60.0;
    verdict(
        pass,
        format!(
            "MP sens {mp_sens:.3} (<=0.50), SSI sens on separable {sep_sens:.3} (>=0.95), \
             SSI spec {spec:.3} (>=0.90), SSI>BP>=MP in {ordered}/20 (>=16), {secs:.1}s (<60)"
        ),
    )
}

// ---------------------------------------------------------------- 2

fn criterion_2() -> Verdict {
    let sens = |tp, fn_| {
        render_percent(
            eval::sensitivity(&ConfusionCounts {
                tp,
                fn_,
                ..Default::default()
            })
            .unwrap(),
        )
    };
    let spec = |tn, fp| {
        render_percent(
            eval::specificity(&ConfusionCounts {
                tn,
                fp,
                ..Default::default()
            })
            .unwrap(),
        )
    };
    let got = [
        sens(12, 2),
        sens(5, 9),
        sens(10, 4),
        spec(14, 0),
        spec(12, 2),
    ];
    let want = ["85.71", "35.71", "71.42", "100", "85.71"];
    verdict(got == want, format!("rendered {got:?}, expected {want:?}"))
}

// ---------------------------------------------------------------- 3

fn max_gradient_error(spec: &ClassifierSpec, rng: &mut SeededRng) -> f64 {
    let dim = 1 + rng.below(4);
    let mut points = |n: usize, shift: f64| -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| (0..dim).map(|_| shift + rng.normal()).collect())
            .collect()
    };
    let pos = points(3 + (dim * 2), 0.8);
    let neg = points(4 + dim, -0.4);
    let obj = LogisticObjective::new(&pos, &neg, spec).unwrap();
    let theta: Vec<f64> = (0..obj.n_params()).map(|_| rng.normal()).collect();
    let analytic = obj.gradient(&theta);
    let h = 1e-5;
    let numeric: Vec<f64> = (0..theta.len())
        .map(|i| {
            let mut up = theta.clone();
            let mut down = theta.clone();
            up[i] += h;
            down[i] -= h;
            (obj.loss(&up) - obj.loss(&down)) / (2.0 * h)
        })
        .collect();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, b)| a - b).collect();
    norm(&diff) / norm(&analytic).max(norm(&numeric)).max(1e-300)
}

fn criterion_3() -> Verdict {
    let mut rng = SeededRng::new(303);
    let mut worst: Vec<(String, f64)> = Vec::new();
    for (name, spec) in [
        ("linear", ClassifierSpec::linear()),
        ("rbf", ClassifierSpec::rbf(0.7)),
    ] {
        let w = (0..20)
            .map(|_| max_gradient_error(&spec, &mut rng))
            .fold(0.0, f64::max);
        worst.push((name.into(), w));
    }
    let pass = worst.iter().all(|(_, w)| *w < 1e-5);
    verdict(
        pass,
        format!(
            "worst relative error linear {:.2e}, rbf {:.2e} (<1e-5, 20 points each)",
            worst[0].1, worst[1].1
        ),
    )
}

// ---------------------------------------------------------------- 4

fn as_partition(assignments: &[usize]) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut seen: Vec<usize> = Vec::new();
    for (i, &a) in assignments.iter().enumerate() {
        match seen.iter().position(|&s| s == a) {
            Some(g) => groups[g].push(i),
            None => {
                seen.push(a);
                groups.push(vec![i]);
            }
        }
    }
    groups.sort();
    groups
}

fn brute_force_two_partition(p: &[Vec<f64>]) -> (f64, Vec<Vec<usize>>) {
    let n = p.len();
    let mut best = (f64::INFINITY, Vec::new());
    for mask in 1u32..(1 << n) - 1 {
        let labels: Vec<usize> = (0..n).map(|i| ((mask >> i) & 1) as usize).collect();
        let mut cost = 0.0;
        for c in 0..2 {
            let members: Vec<&Vec<f64>> =
                (0..n).filter(|&i| labels[i] == c).map(|i| &p[i]).collect();
            let d = p[0].len();
            let mean: Vec<f64> = (0..d)
                .map(|j| members.iter().map(|m| m[j]).sum::<f64>() / members.len() as f64)
                .collect();
            cost += members
                .iter()
                .map(|m| squared_distance(m, &mean))
                .sum::<f64>();
        }
        if cost < best.0 {
            best = (cost, as_partition(&labels));
        }
    }
    best
}

fn criterion_4() -> Verdict {
    let mut rng = SeededRng::new(404);
    let points: Vec<Vec<f64>> = (0..100)
        .map(|i| {
            let c = (i % 3) as f64 * 4.0;
            vec![c + rng.normal(), rng.normal(), 0.5 * rng.normal()]
        })
        .collect();
    let mut monotone = true;
    let mut fixed = true;
    for (k, seed) in [(2, 1), (3, 2), (5, 3), (8, 4)] {
        let m = cluster::kmeans(&points, k, seed).unwrap();
        monotone &= m.inertia_history.windows(2).all(|w| w[1] <= w[0]);
        let mut again = vec![0; points.len()];
        cluster::assign(&points, &m.centroids, &mut again);
        fixed &= again == m.assignments;
    }

    let four = vec![
        vec![0.0, 0.0],
        vec![0.1, 0.0],
        vec![9.0, 9.0],
        vec![9.1, 9.0],
    ];
    let (best_cost, best_part) = brute_force_two_partition(&four);
    let m = cluster::kmeans(&four, 2, 7).unwrap();
    let four_ok =
        as_partition(&m.assignments) == best_part && (m.inertia - best_cost).abs() < 1e-12;

    verdict(
        monotone && fixed && four_ok,
        format!("inertia non-increasing {monotone}, fixed point {fixed}, 4-point brute-force match {four_ok}"),
    )
}

// ---------------------------------------------------------------- 5

/// Plug-in mutual information in bits, summed in natural log and converted.
fn mi_oracle(t: &[Vec<u64>]) -> f64 {
    let n: f64 = t.iter().flatten().sum::<u64>() as f64;
    let rows: Vec<f64> = t.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let cols: Vec<f64> = (0..t[0].len())
        .map(|j| t.iter().map(|r| r[j]).sum::<u64>() as f64)
        .collect();
    let mut nats = 0.0;
    for (i, r) in t.iter().enumerate() {
        for (j, &c) in r.iter().enumerate() {
            if c > 0 {
                let pxy = c as f64 / n;
                nats += pxy * (pxy / ((rows[i] / n) * (cols[j] / n))).ln();
            }
        }
    }
    (nats / std::f64::consts::LN_2).max(0.0)
}

fn criterion_5() -> Verdict {
    let mut rng = SeededRng::new(505);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let (r, c) = (2 + rng.below(4), 2 + rng.below(4));
        let mut t: Vec<Vec<u64>> = (0..r)
            .map(|_| (0..c).map(|_| rng.below(30) as u64).collect())
            .collect();
        t[0][0] += 1;
        let got = mutual_information(&ContingencyTable::new(t.clone()).unwrap());
        worst = worst.max((got - mi_oracle(&t)).abs());
    }
    let mut factorizing_zero = true;
    for _ in 0..50 {
        let u: Vec<u64> = (0..2 + rng.below(4))
            .map(|_| 1 + rng.below(9) as u64)
            .collect();
        let v: Vec<u64> = (0..2 + rng.below(4))
            .map(|_| 1 + rng.below(9) as u64)
            .collect();
        let t: Vec<Vec<u64>> = u
            .iter()
            .map(|a| v.iter().map(|b| a * b).collect())
            .collect();
        factorizing_zero &= mutual_information(&ContingencyTable::new(t).unwrap()) == 0.0;
    }
    let one_bit = [1u64, 2, 7, 100, 12345].iter().all(|&n| {
        mutual_information(&ContingencyTable::new(vec![vec![n, 0], vec![0, n]]).unwrap()) == 1.0
    });
    verdict(
        worst < 1e-12 && factorizing_zero && one_bit,
        format!("max |MI - oracle| {worst:.1e} (<1e-12), factorizing tables exactly 0 {factorizing_zero}, diagonal exactly 1 bit {one_bit}"),
    )
}

// ---------------------------------------------------------------- 6

fn random_scenario(seed: u64) -> (Dataset, SsiConfig) {
    let mut rng = SeededRng::derived(606, seed);
    let dim = 1 + rng.below(4);
    let max_groups = if dim == 1 { 2 } else { 4 };
    let synth_cfg = SynthConfig {
        dim,
        n_neg_subjects: 3 + rng.below(18),
        n_pos_subjects: 3 + rng.below(18),
        instances_per_subject: 2 + rng.below(14),
        n_subgroups: rng.below(max_groups + 1),
        subgroup_offset: 1.0 + 7.0 * rng.uniform(),
        subgroup_sigma: 0.2 + 1.3 * rng.uniform(),
        separable_fraction: rng.uniform(),
        inseparable_subject_fraction: rng.uniform(),
        seed,
    };
    let (data, _) = synth::generate(&synth_cfg).unwrap();
    let mut cfg = SsiConfig {
        seed,
        neg_tolerance: 0.05 + 0.5 * rng.uniform(),
        min_sensitivity: 0.5 + 0.45 * rng.uniform(),
        remove_only_if_accepted: rng.below(2) == 0,
        ..SsiConfig::default()
    };
    if rng.below(2) == 0 {
        cfg.min_positives = Some(1 + rng.below(8));
    }
    match rng.below(3) {
        0 => cfg.rho = RhoRule::Count(5 + rng.below(60)),
        1 => cfg.rho = RhoRule::Fraction(0.02 + 0.3 * rng.uniform()),
        _ => {}
    }
    if rng.below(4) == 0 {
        cfg.classifier = ClassifierSpec::rbf(0.5);
        cfg.classifier.max_epochs = 300;
    }
    if rng.below(4) == 0 {
        cfg.gate_holdout_fraction = 0.3;
    }
    if rng.below(4) == 0 {
        cfg.feature_select = Some(1);
    }
    (data, cfg)
}

/// Violations found in one fitted scenario; empty when all invariants hold.
fn check_fit_invariants(seed: u64) -> Vec<String> {
    let (data, cfg) = random_scenario(seed);
    if data.len() > 1000 {
        return vec![format!("seed {seed}: scenario too large")];
    }
    let out = match ssi::fit(&data, &cfg) {
        Ok(o) => o,
        Err(e) => return vec![format!("seed {seed}: fit failed: {e}")],
    };
    let (t, s) = (cfg.neg_tolerance, out.trace.resolved.min_positives);
    let exclusive = |p: usize, n: usize| (n as f64) / (p as f64) < t && p > s;
    let mut bad = Vec::new();
    let mut removed = HashSet::new();
    for e in &out.trace.events {
        match e {
            TraceEvent::Clustered {
                stats, decisions, ..
            } => {
                for (st, d) in stats.iter().zip(decisions) {
                    if (*d == ClusterDecision::Exclusive)
                        != (st.positives > 0 && exclusive(st.positives, st.negatives))
                    {
                        bad.push(format!("seed {seed}: cluster {st:?} mislabelled {d:?}"));
                    }
                }
            }
            TraceEvent::Gate {
                positives,
                negatives,
                ..
            } => {
                if !exclusive(*positives, *negatives) {
                    bad.push(format!(
                        "seed {seed}: gated non-exclusive cluster P={positives} N={negatives}"
                    ));
                }
            }
            TraceEvent::Removed { indices, .. } => {
                for &i in indices {
                    if !removed.insert(i) {
                        bad.push(format!("seed {seed}: instance {i} removed twice"));
                    }
                    if data.instance(i).label != Label::Positive {
                        bad.push(format!("seed {seed}: removed negative {i}"));
                    }
                }
            }
            TraceEvent::KMaxReached { .. } => {}
        }
    }
    let model = &out.model;
    for d in &model.detectors {
        let hits = d
            .source
            .gate_members
            .iter()
            .filter(|&&i| {
                let z = model.standardizer.transform(data.features(i)).unwrap();
                d.predict_proba(&z).unwrap() >= ssi::GATE_THRESHOLD
            })
            .count();
        let recomputed = hits as f64 / d.source.gate_members.len() as f64;
        if !(d.accepted && recomputed > cfg.min_sensitivity && recomputed == d.gate_sensitivity) {
            bad.push(format!(
                "seed {seed}: detector gate {} recomputed {recomputed} vs st {}",
                d.gate_sensitivity, cfg.min_sensitivity
            ));
        }
    }
    if out.trace.replay_remaining() != out.trace.remaining_positives {
        bad.push(format!(
            "seed {seed}: removal replay disagrees with remaining set"
        ));
    }
    bad
}

fn criterion_6() -> Verdict {
    let seeds: Vec<u64> = (0..200).collect();
    let start = Instant::now();
    let violations: Vec<String> = seeds
        .par_iter()
        .flat_map(|&s| check_fit_invariants(s))
        .collect();
    let detail = match violations.first() {
        None => format!(
            "200 random datasets, all invariants hold ({:.1}s)",
            start.elapsed().as_secs_f64()
        ),
        Some(v) => format!("{} violations, first: {v}", violations.len()),
    };
    verdict(violations.is_empty(), detail)
}

// ---------------------------------------------------------------- 7

fn criterion_7() -> Verdict {
    let mut rng = SeededRng::new(707);
    let mut failures = 0;
    for c in 0..100 {
        let bags = 1 + rng.below(30);
        let subjects: Vec<SubjectFlags> = (0..bags)
            .map(|b| {
                let m = 1 + rng.below(15);
                let p = rng.uniform();
                SubjectFlags {
                    id: format!("c{c}b{b}"),
                    label: Label::from_bool(rng.below(2) == 1),
                    flags: (0..m).map(|_| rng.uniform() < p).collect(),
                }
            })
            .collect();
        let mp = eval::evaluate_flags(&subjects, PoolingKind::Majority, "x").unwrap();
        let bp = eval::evaluate_flags(&subjects, PoolingKind::BestChance, "x").unwrap();
        if bp.accuracy < mp.accuracy {
            failures += 1;
        }
    }
    verdict(
        failures == 0,
        format!("BP < MP in {failures}/100 random configurations"),
    )
}

// ---------------------------------------------------------------- 8

fn run_train(dir: &Path, extra: &[&str], out: &str) -> Vec<u8> {
    let status = Command::new(env!("CARGO_BIN_EXE_ssi"))
        .current_dir(dir)
        .args(["train", "train.csv", "--seed", "7", "-o", out])
        .args(extra)
        .output()
        .unwrap();
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    std::fs::read(dir.join(out)).unwrap()
}

fn criterion_8() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (train, _) = synth::generate(&SynthConfig::default()).unwrap();
    std::fs::write(d.join("train.csv"), train.to_csv_string()).unwrap();

    let mut identical = true;
    let mut exact = true;
    let mut compared = 0;
    let mut rng = SeededRng::new(808);
    for (tag, extra) in [
        ("linear", &[][..]),
        ("rbf", &["--classifier", "rbf", "--threads", "3"][..]),
    ] {
        let a = run_train(d, extra, &format!("{tag}-a.json"));
        let b = run_train(d, extra, &format!("{tag}-b.json"));
        identical &= a == b;

        let loaded = ModelFile::load(d.join(format!("{tag}-a.json")))
            .unwrap()
            .model;
        let mut cfg = SsiConfig {
            seed: 7,
            ..SsiConfig::default()
        };
        if tag == "rbf" {
            cfg.classifier.kind = ssi_core::classify::ClassifierKind::Rbf { gamma: 0.5 };
        }
        let fresh = ssi::fit(
            &dataset::parse_csv(&train.to_csv_string(), "mem").unwrap(),
            &cfg,
        )
        .unwrap()
        .model;
        exact &= fresh == loaded;
        for _ in 0..1000 {
            let x: Vec<f64> = (0..2).map(|_| 4.0 * rng.normal()).collect();
            let p = fresh.predict_instance(&x).unwrap().probabilities;
            let q = loaded.predict_instance(&x).unwrap().probabilities;
            exact &=
                p.iter().zip(&q).all(|(a, b)| a.to_bits() == b.to_bits()) && p.len() == q.len();
            compared += 1;
        }
    }
    verdict(
        identical && exact,
        format!("byte-identical model files {identical}, round-trip predictions bit-exact on {compared} vectors {exact}"),
    )
}

// ---------------------------------------------------------------- 9

fn criterion_9() -> Verdict {
    let (data, truth) = synth::generate(&SynthConfig::default()).unwrap();
    let cfg = SsiConfig {
        seed: 7,
        ..SsiConfig::default()
    };
    let model = ssi::fit(&data, &cfg).unwrap().model;
    let purities: Vec<f64> = model
        .detectors
        .iter()
        .map(|d| {
            let members = &d.source.positive_members;
            let mut counts = [0usize; 8];
            for &i in members {
                counts[truth.subgroup[i]] += 1;
            }
            let top = counts[1..].iter().max().copied().unwrap_or(0);
            top as f64 / members.len() as f64
        })
        .collect();
    let pass = model.detectors.len() == 2 && purities.iter().all(|&p| p >= 0.9);
    verdict(
        pass,
        format!(
            "{} detectors (want 2), source purity {:?} (each >=0.90)",
            model.detectors.len(),
            purities
                .iter()
                .map(|p| format!("{p:.2}"))
                .collect::<Vec<_>>()
        ),
    )
}

#[test]
fn acceptance() {
    type Criterion = (&'static str, fn() -> Verdict);
    let criteria: [Criterion; 9] = [
        ("1 table pattern on synthetic data", criterion_1),
        ("2 metric rendering", criterion_2),
        ("3 gradient oracle", criterion_3),
        ("4 clustering invariants", criterion_4),
        ("5 mutual information oracle", criterion_5),
        ("6 exclusive-cluster loop invariants", criterion_6),
        ("7 pooling ordering", criterion_7),
        ("8 determinism and persistence", criterion_8),
        ("9 subgroup recovery", criterion_9),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        let v = run();
        println!(
            "{} criterion {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        if !v.pass {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
