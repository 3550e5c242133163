//! Distance thresholds for the binary proximity series.
//!
//! The continuous pairwise-distance distribution is summarised two ways:
//! a weighted empirical survival curve ([`eccdf`]) for inspection, and a
//! threshold set for feature extraction. Thresholds either come from exact
//! weighted 1-D k-means over the sub-cutoff distances ([`cluster_1d`]) or
//! from a static list in the config.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One observed value with a positive weight (here: a distance in metres
/// weighted by how many dyad-bins produced it).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedSample {
    pub value: f64,
    pub weight: f64,
}

/// Static fallback threshold list (metres), usable when no pooled distance
/// distribution is available to cluster.
pub const DEFAULT_STATIC_THRESHOLDS_M: [f64; 10] =
    [207.0, 422.0, 626.0, 822.0, 1001.0, 1178.0, 1373.0, 1570.0, 1776.0, 2000.0];

/// Strictly increasing positive distance thresholds; the last one doubles as
/// the distance cutoff the clustering ran under.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet {
    pub thresholds_m: Vec<f64>,
}

impl ThresholdSet {
    pub fn new(thresholds_m: Vec<f64>) -> Result<Self> {
        if thresholds_m.is_empty() {
            return Err(Error::contract("threshold set is empty"));
        }
        for w in thresholds_m.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::contract(format!(
                    "thresholds must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if !thresholds_m.iter().all(|t| t.is_finite() && *t > 0.0) {
            return Err(Error::contract("thresholds must be finite and positive"));
        }
        Ok(ThresholdSet { thresholds_m })
    }

    pub fn count(&self) -> usize {
        self.thresholds_m.len()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("threshold set serializes");
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let set: ThresholdSet =
            serde_json::from_str(&text).map_err(|e| Error::contract(format!("{}: {e}", path.display())))?;
        ThresholdSet::new(set.thresholds_m)
    }
}

/// Weighted empirical survival curve: `survival(x)` is the weight fraction
/// of samples strictly greater than `x`, a right-continuous step function
/// stepping down at each distinct value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EccdfCurve {
    pub total_weight: f64,
    /// (value, survival at that value), sorted by value ascending.
    pub points: Vec<(f64, f64)>,
}

impl EccdfCurve {
    /// Fraction of total weight strictly above `x`.
    pub fn survival(&self, x: f64) -> f64 {
        // Last point with value <= x carries the survival level at x.
        match self.points.partition_point(|&(v, _)| v <= x) {
            0 => 1.0,
            i => self.points[i - 1].1,
        }
    }
}

/// Build the weighted survival curve over the samples.
pub fn eccdf(samples: &[WeightedSample]) -> Result<EccdfCurve> {
    let agg = aggregate(samples)?;
    let total: f64 = agg.iter().map(|&(_, w)| w).sum();
    let mut points = Vec::with_capacity(agg.len());
    let mut below = 0.0;
    for &(value, weight) in &agg {
        below += weight;
        points.push((value, (total - below) / total));
    }
    Ok(EccdfCurve {
        total_weight: total,
        points,
    })
}

/// Exact weighted 1-D k-means: partition the distinct values into `k`
/// contiguous clusters minimising total weighted squared deviation from the
/// cluster means (dynamic program over prefix sums, O(k n^2)).
///
/// Returned thresholds are the k-1 midpoints between the maximum of one
/// cluster and the minimum of the next, closed by `cutoff` as the final
/// threshold, so the result always has `k` entries. Every input value must
/// lie strictly below `cutoff`.
pub fn cluster_1d(samples: &[WeightedSample], k: usize, cutoff: f64) -> Result<ThresholdSet> {
    if k == 0 {
        return Err(Error::contract("cluster count k must be at least 1"));
    }
    if !(cutoff.is_finite() && cutoff > 0.0) {
        return Err(Error::contract("cutoff must be finite and positive"));
    }
    let agg = aggregate(samples)?;
    if let Some(&(v, _)) = agg.iter().find(|&&(v, _)| v >= cutoff) {
        return Err(Error::contract(format!(
            "value {v} is not below the cutoff {cutoff}; filter before clustering"
        )));
    }
    if agg.len() < k {
        return Err(Error::contract(format!(
            "cannot split {} distinct values into {k} clusters",
            agg.len()
        )));
    }
    let (starts, _) = dp_partition(&agg, k);
    let mut thresholds = Vec::with_capacity(k);
    for c in 1..k {
        let prev_max = agg[starts[c] - 1].0;
        let next_min = agg[starts[c]].0;
        thresholds.push((prev_max + next_min) / 2.0);
    }
    thresholds.push(cutoff);
    ThresholdSet::new(thresholds)
}

/// Validate, sort and merge duplicate values, summing their weights.
fn aggregate(samples: &[WeightedSample]) -> Result<Vec<(f64, f64)>> {
    if samples.is_empty() {
        return Err(Error::contract("no samples"));
    }
    for s in samples {
        if !s.value.is_finite() {
            return Err(Error::contract("sample value must be finite"));
        }
        if !(s.weight.is_finite() && s.weight > 0.0) {
            return Err(Error::contract("sample weight must be finite and positive"));
        }
    }
    let mut sorted: Vec<(f64, f64)> = samples.iter().map(|s| (s.value, s.weight)).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let mut agg: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
    for (v, w) in sorted {
        match agg.last_mut() {
            Some(last) if last.0 == v => last.1 += w,
            _ => agg.push((v, w)),
        }
    }
    Ok(agg)
}

/// Contiguous-partition DP. Returns the start index of each cluster
/// (starts[0] == 0) and the minimal total cost.
pub(crate) fn dp_partition(agg: &[(f64, f64)], k: usize) -> (Vec<usize>, f64) {
    let n = agg.len();
    debug_assert!(k >= 1 && n >= k);
    // Prefix sums of weight, weight*value, weight*value^2.
    let mut pw = vec![0.0; n + 1];
    let mut ps = vec![0.0; n + 1];
    let mut pq = vec![0.0; n + 1];
    for (i, &(v, w)) in agg.iter().enumerate() {
        pw[i + 1] = pw[i] + w;
        ps[i + 1] = ps[i] + w * v;
        pq[i + 1] = pq[i] + w * v * v;
    }
    // Weighted SSE of items i..j inclusive. A single item is exactly zero,
    // short-circuited to dodge catastrophic cancellation in q - s^2/w.
    let cost = |i: usize, j: usize| -> f64 {
        if i == j {
            return 0.0;
        }
        let w = pw[j + 1] - pw[i];
        let s = ps[j + 1] - ps[i];
        let q = pq[j + 1] - pq[i];
        (q - s * s / w).max(0.0)
    };
    // best[m][j]: minimal cost splitting items 0..=j into m+1 clusters.
    let mut best = vec![vec![f64::INFINITY; n]; k];
    let mut split = vec![vec![0usize; n]; k];
    for j in 0..n {
        best[0][j] = cost(0, j);
    }
    for m in 1..k {
        for j in m..n {
            for i in m..=j {
                let c = best[m - 1][i - 1] + cost(i, j);
                if c < best[m][j] {
                    best[m][j] = c;
                    split[m][j] = i;
                }
            }
        }
    }
    let mut starts = vec![0usize; k];
    let mut j = n - 1;
    for m in (1..k).rev() {
        starts[m] = split[m][j];
        j = split[m][j] - 1;
    }
    (starts, best[k - 1][n - 1])
}
