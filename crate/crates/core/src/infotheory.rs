//! Plug-in mutual information over histogram-discretized features.
//!
//! Used to score how well a discovered cluster's positives separate from the
//! negatives, and to pick the most informative features per cluster.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    counts: Vec<Vec<u64>>,
    total: u64,
}

impl ContingencyTable {
    pub fn new(counts: Vec<Vec<u64>>) -> Result<Self> {
        let cols = counts.first().map_or(0, Vec::len);
        if counts.is_empty() || cols == 0 {
            return Err(Error::invalid("contingency table needs at least one cell"));
        }
        if counts.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("contingency table rows differ in length"));
        }
        let total: u64 = counts.iter().flatten().sum();
        if total == 0 {
            return Err(Error::invalid("contingency table is empty"));
        }
        Ok(Self { counts, total })
    }

    /// Cross-tabulates two paired label sequences.
    pub fn from_pairs(rows: &[usize], cols: &[usize]) -> Result<Self> {
        if rows.len() != cols.len() {
            return Err(Error::LengthMismatch {
                expected: rows.len(),
                found: cols.len(),
            });
        }
        let r = rows.iter().max().map_or(0, |m| m + 1);
        let c = cols.iter().max().map_or(0, |m| m + 1);
        let mut counts = vec![vec![0u64; c]; r];
        for (&a, &b) in rows.iter().zip(cols) {
            counts[a][b] += 1;
        }
        Self::new(counts)
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

/// Plug-in estimate of I(row; column) in bits. Empty cells contribute nothing.
pub fn mutual_information(table: &ContingencyTable) -> f64 {
    let n = table.total as f64;
    let rows: Vec<u64> = table.counts.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<u64> = (0..table.counts[0].len())
        .map(|j| table.counts.iter().map(|r| r[j]).sum())
        .collect();
    let mut mi = 0.0;
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c == 0 {
                continue;
            }
            // p(r,c) / (p(r) p(c)) = c n / (row_i col_j), exact in integers up to 2^53
            let ratio = (c as f64 * n) / (rows[i] as f64 * cols[j] as f64);
            mi += (c as f64 / n) * ratio.log2();
        }
    }
    // Factorizing tables give ratio 1 everywhere but can round a hair below 0.
    mi.max(0.0)
}

/// Entropy of a discrete distribution given by counts, in bits.
pub fn entropy(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinningSpec {
    pub n_bins: usize,
}

impl Default for BinningSpec {
    fn default() -> Self {
        Self { n_bins: 10 }
    }
}

/// Equal-width bins over `[min, max]` of `values`; the maximum lands in the
/// last bin and a constant input lands entirely in bin 0.
pub fn discretize(values: &[f64], spec: BinningSpec) -> Result<Vec<usize>> {
    if spec.n_bins < 2 {
        return Err(Error::config("n_bins must be at least 2"));
    }
    if values.is_empty() {
        return Err(Error::invalid("cannot discretize an empty sequence"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("cannot discretize non-finite values"));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = hi - lo;
    let last = spec.n_bins - 1;
    Ok(values
        .iter()
        .map(|&v| {
            if width <= 0.0 {
                0
            } else {
                (((v - lo) / width * spec.n_bins as f64).floor() as usize).min(last)
            }
        })
        .collect())
}

fn check_groups(positives: &[Vec<f64>], negatives: &[Vec<f64>]) -> Result<usize> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::invalid("both groups must be non-empty"));
    }
    let d = positives[0].len();
    if let Some(bad) = positives.iter().chain(negatives).find(|x| x.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: bad.len(),
        });
    }
    Ok(d)
}

/// I(f_j; membership) for every feature, with bin edges fit on the pooled values.
pub fn feature_scores(
    positives: &[Vec<f64>],
    negatives: &[Vec<f64>],
    spec: BinningSpec,
) -> Result<Vec<f64>> {
    let d = check_groups(positives, negatives)?;
    let membership: Vec<usize> = positives
        .iter()
        .map(|_| 1)
        .chain(negatives.iter().map(|_| 0))
        .collect();
    (0..d)
        .map(|j| {
            let column: Vec<f64> = positives.iter().chain(negatives).map(|x| x[j]).collect();
            let bins = discretize(&column, spec)?;
            Ok(mutual_information(&ContingencyTable::from_pairs(
                &bins,
                &membership,
            )?))
        })
        .collect()
}

/// Best single-feature mutual information between cluster membership and the
/// discretized features. A diagnostic; it does not gate anything.
pub fn partition_separability(
    positives: &[Vec<f64>],
    negatives: &[Vec<f64>],
    spec: BinningSpec,
) -> Result<f64> {
    Ok(feature_scores(positives, negatives, spec)?
        .into_iter()
        .fold(0.0, f64::max))
}

/// Top-`m` features by score, best first; equal scores keep index order.
pub fn select_features(
    positives: &[Vec<f64>],
    negatives: &[Vec<f64>],
    m: usize,
    spec: BinningSpec,
) -> Result<Vec<usize>> {
    let scores = feature_scores(positives, negatives, spec)?;
    if m == 0 || m > scores.len() {
        return Err(Error::config(format!(
            "cannot select {m} of {} features",
            scores.len()
        )));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(m);
    Ok(order)
}
