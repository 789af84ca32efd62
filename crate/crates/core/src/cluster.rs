//! Seeded k-means (k-means++ seeding, Lloyd iterations).

use serde::{Deserialize, Serialize};

use crate::dataset::Label;
use crate::error::{Error, Result};
use crate::rng::SeededRng;

pub const MAX_ITERATIONS: usize = 100;
pub const RELATIVE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub k: usize,
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    pub inertia: f64,
    pub iterations_run: usize,
    /// Inertia after each assignment step; the last entry equals `inertia`.
    pub inertia_history: Vec<f64>,
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid and its squared distance; ties go to the lowest index.
pub fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, squared_distance(point, &centroids[0]));
    for (j, c) in centroids.iter().enumerate().skip(1) {
        let d = squared_distance(point, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Assigns every point to its nearest centroid; returns the total squared distance.
pub fn assign(points: &[Vec<f64>], centroids: &[Vec<f64>], assignments: &mut [usize]) -> f64 {
    let mut inertia = 0.0;
    for (a, p) in assignments.iter_mut().zip(points) {
        let (j, d) = nearest(p, centroids);
        *a = j;
        inertia += d;
    }
    inertia
}

pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Result<ClusterModel> {
    if k == 0 {
        return Err(Error::Cluster("k must be positive".into()));
    }
    if k > points.len() {
        return Err(Error::Cluster(format!(
            "k = {k} exceeds the number of points ({})",
            points.len()
        )));
    }
    let dim = points[0].len();
    if let Some(bad) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.len(),
        });
    }

    let mut rng = SeededRng::new(seed);
    let mut centroids = plus_plus_seeds(points, k, &mut rng);
    let mut assignments = vec![usize::MAX; points.len()];
    let mut previous = assignments.clone();
    let mut history = Vec::new();
    let mut iterations = 0;

    loop {
        let inertia = assign(points, &centroids, &mut assignments);
        iterations += 1;
        let converged = match history.last() {
            Some(&prev) => {
                assignments == previous
                    || inertia == 0.0
                    || (prev - inertia) / prev < RELATIVE_TOLERANCE
            }
            None => inertia == 0.0,
        };
        history.push(inertia);
        if converged || iterations >= MAX_ITERATIONS {
            break;
        }
        update_centroids(points, &mut assignments, &mut centroids);
        previous.clone_from(&assignments);
    }

    Ok(ClusterModel {
        k,
        centroids,
        inertia: *history.last().expect("at least one iteration"),
        assignments,
        iterations_run: iterations,
        inertia_history: history,
    })
}

/// k-means++: the first center uniformly, each next one with probability
/// proportional to squared distance from the nearest chosen center.
fn plus_plus_seeds(points: &[Vec<f64>], k: usize, rng: &mut SeededRng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = vec![false; n];
    let first = rng.below(n);
    chosen[first] = true;
    let mut centroids = vec![points[first].clone()];
    let mut d2: Vec<f64> = points
        .iter()
        .map(|p| squared_distance(p, &centroids[0]))
        .collect();

    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.uniform() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // Rounding can leave `acc` just short of `target`; take the last weighted point.
            pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).expect("total > 0"))
        } else {
            // Only duplicates remain: pick an unchosen index uniformly.
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng.below(free.len())]
        };
        chosen[pick] = true;
        centroids.push(points[pick].clone());
        let c = centroids.last().expect("just pushed");
        for (w, p) in d2.iter_mut().zip(points) {
            *w = w.min(squared_distance(p, c));
        }
    }
    centroids
}

/// Moves each centroid to the mean of its members. An empty cluster takes the
/// point farthest from its own centroid (lowest index on ties) from a cluster
/// that can spare one.
fn update_centroids(points: &[Vec<f64>], assignments: &mut [usize], centroids: &mut [Vec<f64>]) {
    let k = centroids.len();
    let dim = points[0].len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assignments.iter()) {
        counts[a] += 1;
        for (s, v) in sums[a].iter_mut().zip(p) {
            *s += v;
        }
    }
    for j in 0..k {
        if counts[j] > 0 {
            centroids[j] = sums[j].iter().map(|s| s / counts[j] as f64).collect();
        }
    }
    for j in 0..k {
        if counts[j] > 0 {
            continue;
        }
        let mut far: Option<(usize, f64)> = None;
        for (i, p) in points.iter().enumerate() {
            let a = assignments[i];
            if counts[a] < 2 {
                continue;
            }
            let d = squared_distance(p, &centroids[a]);
            if far.is_none_or(|(_, best)| d > best) {
                far = Some((i, d));
            }
        }
        if let Some((i, _)) = far {
            counts[assignments[i]] -= 1;
            assignments[i] = j;
            counts[j] = 1;
            centroids[j] = points[i].clone();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterStats {
    pub size: usize,
    pub positives: usize,
    pub negatives: usize,
}

/// Per-cluster size and label counts.
pub fn cluster_stats(
    assignments: &[usize],
    k: usize,
    labels: &[Label],
) -> Result<Vec<ClusterStats>> {
    if assignments.len() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: assignments.len(),
            found: labels.len(),
        });
    }
    let mut stats = vec![
        ClusterStats {
            size: 0,
            positives: 0,
            negatives: 0
        };
        k
    ];
    for (&a, &l) in assignments.iter().zip(labels) {
        if a >= k {
            return Err(Error::invalid(format!(
                "assignment {a} out of range for k = {k}"
            )));
        }
        let s = &mut stats[a];
        s.size += 1;
        if l.is_positive() {
            s.positives += 1;
        } else {
            s.negatives += 1;
        }
    }
    Ok(stats)
}
