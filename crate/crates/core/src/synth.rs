//! Synthetic partially separable datasets.
//!
//! Negatives and the "background" instances of positive subjects are drawn from
//! the same standard normal, so they carry no class signal. Each separable
//! positive subject additionally contributes a fixed number of instances from
//! one compact subgroup placed away from the origin. Some positive subjects get
//! no subgroup instances at all and cannot be told apart from negatives.

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Instance, Label};
use crate::error::{Error, Result};
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub dim: usize,
    pub n_neg_subjects: usize,
    pub n_pos_subjects: usize,
    pub instances_per_subject: usize,
    /// Number of separable subgroups K. Zero means no positive instance is separable.
    pub n_subgroups: usize,
    /// Distance of each subgroup center from the origin.
    pub subgroup_offset: f64,
    pub subgroup_sigma: f64,
    /// Fraction of a separable subject's instances drawn from its subgroup (rounded up).
    pub separable_fraction: f64,
    /// Fraction of positive subjects with no subgroup instance (rounded up).
    pub inseparable_subject_fraction: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            n_neg_subjects: 20,
            n_pos_subjects: 20,
            instances_per_subject: 10,
            n_subgroups: 2,
            subgroup_offset: 6.0,
            subgroup_sigma: 0.5,
            separable_fraction: 0.3,
            inseparable_subject_fraction: 0.2,
            seed: 7,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::config("dim must be at least 1"));
        }
        if self.n_neg_subjects == 0 || self.n_pos_subjects == 0 {
            return Err(Error::config("subject counts must be at least 1"));
        }
        if self.instances_per_subject == 0 {
            return Err(Error::config("instances_per_subject must be at least 1"));
        }
        if !(self.subgroup_offset > 0.0 && self.subgroup_offset.is_finite()) {
            return Err(Error::config("subgroup_offset must be positive"));
        }
        if !(self.subgroup_sigma > 0.0 && self.subgroup_sigma.is_finite()) {
            return Err(Error::config("subgroup_sigma must be positive"));
        }
        for (name, v) in [
            ("separable_fraction", self.separable_fraction),
            (
                "inseparable_subject_fraction",
                self.inseparable_subject_fraction,
            ),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(format!("{name} must lie in [0, 1]")));
            }
        }
        if self.dim == 1 && self.n_subgroups > 2 {
            return Err(Error::config(
                "more than two subgroups need at least two dimensions",
            ));
        }
        Ok(())
    }

    /// Positive subjects that receive only background instances.
    pub fn n_inseparable_subjects(&self) -> usize {
        if self.n_subgroups == 0 {
            return self.n_pos_subjects;
        }
        ceil_count(self.inseparable_subject_fraction, self.n_pos_subjects)
    }

    /// Subgroup instances per separable subject.
    pub fn n_subgroup_instances(&self) -> usize {
        ceil_count(self.separable_fraction, self.instances_per_subject)
    }

    /// Center of subgroup `k` (1-based).
    pub fn subgroup_center(&self, k: usize) -> Vec<f64> {
        assert!(k >= 1 && k <= self.n_subgroups, "subgroup {k} out of range");
        let mut center = vec![0.0; self.dim];
        let k0 = k - 1;
        if self.n_subgroups <= 2 * self.dim {
            // +e1, -e1, +e2, -e2, ...
            let sign = if k0.is_multiple_of(2) { 1.0 } else { -1.0 };
            center[k0 / 2] = sign * self.subgroup_offset;
        } else {
            let angle = std::f64::consts::TAU * k0 as f64 / self.n_subgroups as f64;
            center[0] = self.subgroup_offset * angle.cos();
            center[1] = self.subgroup_offset * angle.sin();
        }
        center
    }
}

fn ceil_count(fraction: f64, n: usize) -> usize {
    // The epsilon keeps 0.2 * 10 from rounding up to 3 through representation error.
    ((fraction * n as f64 - 1e-9).ceil().max(0.0) as usize).min(n)
}

/// Hidden subgroup membership, made observable for diagnostics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// 0 for background, `1..=K` for subgroup members.
    pub subgroup: Vec<usize>,
    /// Per subject in dataset order: whether any of its instances is a subgroup member.
    pub subjects: Vec<(String, bool)>,
}

impl GroundTruth {
    pub fn has_separable_instance(&self, subject_id: &str) -> bool {
        self.subjects
            .iter()
            .any(|(id, sep)| id == subject_id && *sep)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("instance_index,subgroup_id\n");
        for (i, g) in self.subgroup.iter().enumerate() {
            out.push_str(&format!("{i},{g}\n"));
        }
        out
    }
}

/// Draws a dataset: negative subjects first, then positive subjects; the
/// first `n_inseparable_subjects` positive subjects are background-only and
/// the rest take subgroups round-robin.
pub fn generate(cfg: &SynthConfig) -> Result<(Dataset, GroundTruth)> {
    cfg.validate()?;
    let mut rng = SeededRng::new(cfg.seed);
    let d = cfg.dim;
    let m = cfg.instances_per_subject;
    let centers: Vec<Vec<f64>> = (1..=cfg.n_subgroups)
        .map(|k| cfg.subgroup_center(k))
        .collect();

    let total = (cfg.n_neg_subjects + cfg.n_pos_subjects) * m;
    let mut instances = Vec::with_capacity(total);
    let mut subgroup = Vec::with_capacity(total);
    let mut subjects = Vec::with_capacity(cfg.n_neg_subjects + cfg.n_pos_subjects);

    let background = |rng: &mut SeededRng| -> Vec<f64> { (0..d).map(|_| rng.normal()).collect() };

    for s in 0..cfg.n_neg_subjects {
        let id = format!("neg{s:03}");
        for _ in 0..m {
            instances.push(Instance {
                subject_id: id.clone(),
                label: Label::Negative,
                features: background(&mut rng),
            });
            subgroup.push(0);
        }
        subjects.push((id, false));
    }

    let n_insep = cfg.n_inseparable_subjects();
    let n_from_group = cfg.n_subgroup_instances();
    for s in 0..cfg.n_pos_subjects {
        let id = format!("pos{s:03}");
        let group = if s < n_insep {
            0
        } else {
            (s - n_insep) % cfg.n_subgroups + 1
        };
        let mut separable = false;
        for i in 0..m {
            let (features, g) = if group > 0 && i < n_from_group {
                let c = &centers[group - 1];
                let x = c
                    .iter()
                    .map(|&mu| mu + cfg.subgroup_sigma * rng.normal())
                    .collect();
                (x, group)
            } else {
                (background(&mut rng), 0)
            };
            separable |= g > 0;
            instances.push(Instance {
                subject_id: id.clone(),
                label: Label::Positive,
                features,
            });
            subgroup.push(g);
        }
        subjects.push((id, separable));
    }

    let names = (1..=d).map(|j| format!("f{j}")).collect();
    let data = Dataset::new(names, instances)?;
    Ok((data, GroundTruth { subgroup, subjects }))
}
