//! Correlation-based feature subset selection.
//!
//! A subset's merit rewards features that correlate with the class and
//! penalises features that correlate with each other. The search is
//! best-first over subsets, expanding the most promising frontier state and
//! giving up after a fixed number of expansions that fail to improve the
//! best merit seen. Feature-feature correlations are computed lazily and
//! cached, since most of the quadratic pair space is never visited.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap, HashSet};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Merit of a k-feature subset from the mean absolute feature-class
/// correlation and the mean absolute feature-feature correlation.
pub fn cfs_merit(k: usize, mean_rcf: f64, mean_rff: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let kf = k as f64;
    kf * mean_rcf / (kf + kf * (kf - 1.0) * mean_rff).sqrt()
}

/// Absolute Pearson correlation with pairwise deletion: rows where either
/// side is NaN are dropped. Degenerate inputs (fewer than two complete
/// rows, or zero variance) score 0 so they never look attractive.
pub fn abs_pearson(xs: &[f64], ys: &[f64]) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    let pairs: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(a, b)| !a.is_nan() && !b.is_nan())
        .map(|(&a, &b)| (a, b))
        .collect();
    if pairs.len() < 2 {
        return 0.0;
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in pairs {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    (cov / (vx * vy).sqrt()).abs()
}

struct CorrelationCache<'a> {
    x: &'a [&'a [f64]],
    class_corr: Vec<f64>,
    pair_corr: HashMap<(usize, usize), f64>,
}

impl<'a> CorrelationCache<'a> {
    fn new(x: &'a [&'a [f64]], y: &[bool], candidates: &[usize]) -> CorrelationCache<'a> {
        let width = x.first().map(|r| r.len()).unwrap_or(0);
        let class: Vec<f64> = y.iter().map(|&l| l as u8 as f64).collect();
        let mut class_corr = vec![0.0; width];
        for &f in candidates {
            let col: Vec<f64> = x.iter().map(|r| r[f]).collect();
            class_corr[f] = abs_pearson(&col, &class);
        }
        CorrelationCache {
            x,
            class_corr,
            pair_corr: HashMap::new(),
        }
    }

    fn class_corr(&self, f: usize) -> f64 {
        self.class_corr[f]
    }

    fn pair_corr(&mut self, a: usize, b: usize) -> f64 {
        let key = (a.min(b), a.max(b));
        if let Some(&r) = self.pair_corr.get(&key) {
            return r;
        }
        let ca: Vec<f64> = self.x.iter().map(|r| r[key.0]).collect();
        let cb: Vec<f64> = self.x.iter().map(|r| r[key.1]).collect();
        let r = abs_pearson(&ca, &cb);
        self.pair_corr.insert(key, r);
        r
    }

    fn merit(&mut self, set: &BTreeSet<usize>) -> f64 {
        let k = set.len();
        if k == 0 {
            return 0.0;
        }
        let sum_rcf: f64 = set.iter().map(|&f| self.class_corr(f)).sum();
        let mut sum_rff = 0.0;
        let features: Vec<usize> = set.iter().copied().collect();
        for i in 0..features.len() {
            for j in (i + 1)..features.len() {
                sum_rff += self.pair_corr(features[i], features[j]);
            }
        }
        // merit = k*mean_rcf / sqrt(k + k(k-1)*mean_rff), with the means
        // expanded into the sums computed above.
        sum_rcf / (k as f64 + 2.0 * sum_rff).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub selected: Vec<usize>,
    pub merit: f64,
}

struct OpenState {
    merit: f64,
    set: Vec<usize>,
}

impl PartialEq for OpenState {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for OpenState {}
impl PartialOrd for OpenState {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OpenState {
    fn cmp(&self, other: &Self) -> Ordering {
        // Higher merit pops first; the set breaks exact ties so the heap
        // order (and therefore the search) is fully deterministic.
        self.merit
            .total_cmp(&other.merit)
            .then_with(|| other.set.cmp(&self.set))
    }
}

/// Best-first subset search. `max_stale` is the number of consecutive
/// expansions allowed without improving the best merit before giving up.
pub fn select(x: &[&[f64]], y: &[bool], candidates: &[usize], max_stale: usize) -> SelectionResult {
    assert_eq!(x.len(), y.len());
    let mut cache = CorrelationCache::new(x, y, candidates);
    let mut best = SelectionResult {
        selected: Vec::new(),
        merit: 0.0,
    };
    let mut open: BinaryHeap<OpenState> = BinaryHeap::new();
    let mut visited: HashSet<Vec<usize>> = HashSet::new();
    open.push(OpenState {
        merit: 0.0,
        set: Vec::new(),
    });
    visited.insert(Vec::new());
    let mut stale = 0usize;
    while let Some(state) = open.pop() {
        let base: BTreeSet<usize> = state.set.iter().copied().collect();
        let mut improved = false;
        for &f in candidates {
            if base.contains(&f) {
                continue;
            }
            // A candidate perfectly correlated with a feature already in the
            // set carries zero new information, yet raw merit can still rise
            // by counting its class correlation again while the size penalty
            // grows sublinearly. Refuse such candidates outright: the
            // criterion wants features correlated with the class and
            // uncorrelated with one another, and an exact duplicate is the
            // extreme violation of the latter.
            if base.iter().any(|&g| cache.pair_corr(f, g) == 1.0) {
                continue;
            }
            let mut child = base.clone();
            child.insert(f);
            let key: Vec<usize> = child.iter().copied().collect();
            if !visited.insert(key.clone()) {
                continue;
            }
            let merit = cache.merit(&child);
            if merit > best.merit {
                best = SelectionResult {
                    selected: key.clone(),
                    merit,
                };
                improved = true;
            }
            open.push(OpenState { merit, set: key });
        }
        if improved {
            stale = 0;
        } else {
            stale += 1;
            if stale >= max_stale {
                break;
            }
        }
    }
    best
}

/// Selection counts across resampling folds. A feature is kept when it was
/// selected in at least `threshold` of the `folds` runs, each run seeing
/// the training side of one fold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityResult {
    pub folds: usize,
    pub threshold: usize,
    pub counts: BTreeMap<usize, usize>,
    pub selected: Vec<usize>,
}

pub fn stability_select(
    x: &[&[f64]],
    y: &[bool],
    candidates: &[usize],
    folds: usize,
    threshold: usize,
    max_stale: usize,
    rng: &mut impl Rng,
) -> Result<StabilityResult> {
    if folds < 2 || threshold > folds {
        return Err(Error::contract(format!(
            "stability selection needs folds >= 2 and threshold <= folds, got {folds}/{threshold}"
        )));
    }
    if x.len() < folds {
        return Err(Error::contract(format!(
            "{} rows cannot form {folds} folds",
            x.len()
        )));
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for fold in 0..folds {
        let train: Vec<usize> = order
            .iter()
            .enumerate()
            .filter(|(pos, _)| pos % folds != fold)
            .map(|(_, &r)| r)
            .collect();
        let xs: Vec<&[f64]> = train.iter().map(|&r| x[r]).collect();
        let ys: Vec<bool> = train.iter().map(|&r| y[r]).collect();
        let result = select(&xs, &ys, candidates, max_stale);
        for f in result.selected {
            *counts.entry(f).or_insert(0) += 1;
        }
    }
    let selected: Vec<usize> = counts
        .iter()
        .filter(|(_, &c)| c >= threshold)
        .map(|(&f, _)| f)
        .collect();
    Ok(StabilityResult {
        folds,
        threshold,
        counts,
        selected,
    })
}

/// Selected columns by name, bound to the schema they index into.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectedFeatures {
    pub schema_hash: String,
    pub target: String,
    pub folds: usize,
    pub threshold: usize,
    pub counts: BTreeMap<String, usize>,
    pub columns: Vec<String>,
}

impl SelectedFeatures {
    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("selection serializes");
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<SelectedFeatures> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::contract(format!("{}: {e}", path.display())))
    }
}
