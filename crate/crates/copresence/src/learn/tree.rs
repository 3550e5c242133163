//! Weighted classification tree with native missing-value routing.
//!
//! Splits minimise weighted Gini impurity over the rows where the feature
//! is defined; rows with a missing value follow the heavier (by defined
//! training weight) child, and that direction is frozen into the node so
//! prediction needs no imputation. Ties between candidate splits resolve
//! to the lowest feature index and threshold, which keeps fitting
//! deterministic for a fixed RNG.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub max_depth: usize,
    /// Minimum defined rows on each side of a split.
    pub min_leaf: usize,
    /// Candidate features drawn per split; None tries every allowed one.
    pub mtry: Option<usize>,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: 8,
            min_leaf: 5,
            mtry: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        p: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        missing_left: bool,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    /// Positive-class probability from the reached leaf.
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { p } => return *p,
                Node::Split {
                    feature,
                    threshold,
                    missing_left,
                    left,
                    right,
                } => {
                    let v = row[*feature];
                    let go_left = if v.is_nan() { *missing_left } else { v <= *threshold };
                    at = if go_left { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

struct BestSplit {
    gain: f64,
    feature: usize,
    threshold: f64,
}

/// Weighted impurity mass 2*wp*wn/(wp+wn), the Gini index times the total
/// weight. Summing it over children and subtracting from the parent gives
/// the weighted impurity decrease directly.
fn impurity_mass(wp: f64, wn: f64) -> f64 {
    let t = wp + wn;
    if t <= 0.0 {
        0.0
    } else {
        2.0 * wp * wn / t
    }
}

fn best_split_on_feature(
    x: &[&[f64]],
    y: &[bool],
    w: &[f64],
    rows: &[usize],
    feature: usize,
    min_leaf: usize,
) -> Option<BestSplit> {
    let mut items: Vec<(f64, bool, f64)> = rows
        .iter()
        .filter_map(|&r| {
            let v = x[r][feature];
            if v.is_nan() {
                None
            } else {
                Some((v, y[r], w[r]))
            }
        })
        .collect();
    if items.len() < 2 * min_leaf.max(1) {
        return None;
    }
    items.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("defined values are finite"));
    let (mut wp_right, mut wn_right) = (0.0f64, 0.0f64);
    for &(_, label, weight) in &items {
        if label {
            wp_right += weight;
        } else {
            wn_right += weight;
        }
    }
    let parent_mass = impurity_mass(wp_right, wn_right);
    if parent_mass == 0.0 {
        return None;
    }
    let mut best: Option<BestSplit> = None;
    let (mut wp_left, mut wn_left) = (0.0f64, 0.0f64);
    for i in 0..items.len() - 1 {
        let (v, label, weight) = items[i];
        if label {
            wp_left += weight;
            wp_right -= weight;
        } else {
            wn_left += weight;
            wn_right -= weight;
        }
        if v == items[i + 1].0 {
            continue; // not a boundary between distinct values
        }
        let (nl, nr) = (i + 1, items.len() - i - 1);
        if nl < min_leaf || nr < min_leaf {
            continue;
        }
        let gain = parent_mass - impurity_mass(wp_left, wn_left) - impurity_mass(wp_right, wn_right);
        if best.as_ref().is_none_or(|b| gain > b.gain) {
            let mut threshold = (v + items[i + 1].0) / 2.0;
            if !(v < threshold && threshold < items[i + 1].0) {
                threshold = v; // adjacent floats: fall back to "<= lower value"
            }
            best = Some(BestSplit {
                gain,
                feature,
                threshold,
            });
        }
    }
    best
}

fn build(
    x: &[&[f64]],
    y: &[bool],
    w: &[f64],
    rows: Vec<usize>,
    allowed: &[usize],
    config: &TreeConfig,
    depth: usize,
    rng: &mut ChaCha8Rng,
    nodes: &mut Vec<Node>,
) -> usize {
    let leaf = |nodes: &mut Vec<Node>, rows: &[usize]| -> usize {
        let wp: f64 = rows.iter().filter(|&&r| y[r]).map(|&r| w[r]).sum();
        let wt: f64 = rows.iter().map(|&r| w[r]).sum();
        let p = if wt > 0.0 {
            wp / wt
        } else {
            rows.iter().filter(|&&r| y[r]).count() as f64 / rows.len().max(1) as f64
        };
        nodes.push(Node::Leaf { p });
        nodes.len() - 1
    };
    let pure = rows.iter().all(|&r| y[r]) || rows.iter().all(|&r| !y[r]);
    if depth >= config.max_depth || pure || rows.len() < 2 * config.min_leaf.max(1) {
        return leaf(nodes, &rows);
    }

    // Sample the candidate features for this split, keeping them sorted so
    // the lowest-index tie-break is stable.
    let candidates: Vec<usize> = match config.mtry {
        Some(m) if m < allowed.len() => {
            let mut pool: Vec<usize> = allowed.to_vec();
            for i in 0..m {
                let j = rng.random_range(i..pool.len());
                pool.swap(i, j);
            }
            let mut picked = pool[..m].to_vec();
            picked.sort_unstable();
            picked
        }
        _ => allowed.to_vec(),
    };

    let mut best: Option<BestSplit> = None;
    for &feature in &candidates {
        if let Some(cand) = best_split_on_feature(x, y, w, &rows, feature, config.min_leaf) {
            let better = best.as_ref().is_none_or(|b| cand.gain > b.gain + 1e-15);
            if better {
                best = Some(cand);
            }
        }
    }
    let Some(split) = best else {
        return leaf(nodes, &rows);
    };
    if split.gain <= 1e-12 {
        return leaf(nodes, &rows);
    }

    let mut left_rows = Vec::new();
    let mut right_rows = Vec::new();
    let mut missing_rows = Vec::new();
    let (mut w_left, mut w_right) = (0.0f64, 0.0f64);
    for &r in &rows {
        let v = x[r][split.feature];
        if v.is_nan() {
            missing_rows.push(r);
        } else if v <= split.threshold {
            w_left += w[r];
            left_rows.push(r);
        } else {
            w_right += w[r];
            right_rows.push(r);
        }
    }
    let missing_left = w_left >= w_right;
    if missing_left {
        left_rows.extend(missing_rows);
    } else {
        right_rows.extend(missing_rows);
    }

    let at = nodes.len();
    nodes.push(Node::Leaf { p: 0.0 }); // placeholder until children exist
    let left = build(x, y, w, left_rows, allowed, config, depth + 1, rng, nodes);
    let right = build(x, y, w, right_rows, allowed, config, depth + 1, rng, nodes);
    nodes[at] = Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        missing_left,
        left,
        right,
    };
    at
}

/// Fit a tree on weighted rows. `allowed` lists the feature indices splits
/// may use (feature selection and per-split sampling both flow through it).
pub fn fit(
    x: &[&[f64]],
    y: &[bool],
    w: &[f64],
    allowed: &[usize],
    config: &TreeConfig,
    rng: &mut ChaCha8Rng,
) -> DecisionTree {
    assert_eq!(x.len(), y.len());
    assert_eq!(x.len(), w.len());
    assert!(!x.is_empty(), "cannot fit a tree on zero rows");
    let rows: Vec<usize> = (0..x.len()).collect();
    let mut nodes = Vec::new();
    build(x, y, w, rows, allowed, config, 0, rng, &mut nodes);
    DecisionTree { nodes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(99)
    }

    fn fit_plain(rows: &[(Vec<f64>, bool)], config: &TreeConfig) -> DecisionTree {
        let x: Vec<&[f64]> = rows.iter().map(|(v, _)| v.as_slice()).collect();
        let y: Vec<bool> = rows.iter().map(|&(_, l)| l).collect();
        let w = vec![1.0; rows.len()];
        let allowed: Vec<usize> = (0..rows[0].0.len()).collect();
        fit(&x, &y, &w, &allowed, config, &mut rng())
    }

    #[test]
    fn learns_xor_with_depth_two() {
        // Unbalanced XOR: the extra (0,0) row gives the first axis split a
        // positive impurity decrease, then each side separates exactly.
        let mut rows = Vec::new();
        for _ in 0..3 {
            rows.push((vec![0.0, 0.0], false));
        }
        for _ in 0..2 {
            rows.push((vec![0.0, 1.0], true));
            rows.push((vec![1.0, 0.0], true));
            rows.push((vec![1.0, 1.0], false));
        }
        let tree = fit_plain(
            &rows,
            &TreeConfig {
                max_depth: 2,
                min_leaf: 1,
                mtry: None,
            },
        );
        assert_eq!(tree.depth(), 2);
        for (v, label) in &rows {
            let p = tree.predict(v);
            assert_eq!(p >= 0.5, *label, "row {v:?}");
        }
    }

    #[test]
    fn respects_max_depth_and_purity() {
        let rows = vec![
            (vec![0.0], false),
            (vec![1.0], false),
            (vec![2.0], true),
            (vec![3.0], true),
        ];
        let stump = fit_plain(
            &rows,
            &TreeConfig {
                max_depth: 1,
                min_leaf: 1,
                mtry: None,
            },
        );
        assert_eq!(stump.depth(), 1);
        let pure_rows = vec![(vec![0.0], true), (vec![5.0], true)];
        let leaf_only = fit_plain(&pure_rows, &TreeConfig::default());
        assert_eq!(leaf_only.depth(), 0);
        assert_eq!(leaf_only.predict(&[123.0]), 1.0);
    }

    #[test]
    fn missing_values_follow_the_heavier_branch() {
        // Eight defined rows split cleanly; the left side is heavier, so a
        // missing value must land there.
        let rows = vec![
            (vec![1.0], false),
            (vec![2.0], false),
            (vec![3.0], false),
            (vec![4.0], false),
            (vec![5.0], false),
            (vec![10.0], true),
            (vec![11.0], true),
            (vec![12.0], true),
        ];
        let tree = fit_plain(
            &rows,
            &TreeConfig {
                max_depth: 1,
                min_leaf: 1,
                mtry: None,
            },
        );
        match &tree.nodes[0] {
            Node::Split { missing_left, .. } => assert!(*missing_left),
            other => panic!("expected a split, got {other:?}"),
        }
        assert!(tree.predict(&[f64::NAN]) < 0.5);
    }

    #[test]
    fn missing_rows_are_excluded_from_split_scoring() {
        // The second feature is perfectly informative where defined.
        let rows = vec![
            (vec![0.0, f64::NAN], false),
            (vec![1.0, 0.0], false),
            (vec![2.0, 0.0], false),
            (vec![3.0, 1.0], true),
            (vec![4.0, 1.0], true),
            (vec![5.0, f64::NAN], true),
        ];
        let tree = fit_plain(
            &rows,
            &TreeConfig {
                max_depth: 3,
                min_leaf: 1,
                mtry: None,
            },
        );
        for (v, label) in rows.iter().filter(|(v, _)| !v[1].is_nan()) {
            assert_eq!(tree.predict(v) >= 0.5, *label);
        }
    }

    #[test]
    fn weights_shift_the_chosen_split() {
        // Unweighted, the majority at x=1 is negative; weighting the single
        // positive there flips the leaf.
        let x_rows = [vec![1.0], vec![1.0], vec![1.0]];
        let x: Vec<&[f64]> = x_rows.iter().map(|v| v.as_slice()).collect();
        let y = vec![true, false, false];
        let allowed = [0usize];
        let config = TreeConfig {
            max_depth: 1,
            min_leaf: 1,
            mtry: None,
        };
        let flat = fit(&x, &y, &[1.0, 1.0, 1.0], &allowed, &config, &mut rng());
        assert!(flat.predict(&[1.0]) < 0.5);
        let tilted = fit(&x, &y, &[5.0, 1.0, 1.0], &allowed, &config, &mut rng());
        assert!(tilted.predict(&[1.0]) > 0.5);
    }

    /// Brute-force the best impurity decrease over every feature and every
    /// boundary between distinct values.
    fn stump_oracle(x: &[&[f64]], y: &[bool], w: &[f64], min_leaf: usize) -> f64 {
        let p = x[0].len();
        let mut best = 0.0f64;
        for f in 0..p {
            let mut defined: Vec<(f64, bool, f64)> = (0..x.len())
                .filter(|&r| !x[r][f].is_nan())
                .map(|r| (x[r][f], y[r], w[r]))
                .collect();
            defined.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let mut boundaries: Vec<f64> = Vec::new();
            for i in 0..defined.len().saturating_sub(1) {
                if defined[i].0 != defined[i + 1].0 {
                    boundaries.push((defined[i].0 + defined[i + 1].0) / 2.0);
                }
            }
            let mass = |items: &[(f64, bool, f64)]| {
                let wp: f64 = items.iter().filter(|i| i.1).map(|i| i.2).sum();
                let wn: f64 = items.iter().filter(|i| !i.1).map(|i| i.2).sum();
                impurity_mass(wp, wn)
            };
            for b in boundaries {
                let left: Vec<_> = defined.iter().cloned().filter(|i| i.0 <= b).collect();
                let right: Vec<_> = defined.iter().cloned().filter(|i| i.0 > b).collect();
                if left.len() < min_leaf || right.len() < min_leaf {
                    continue;
                }
                let gain = mass(&defined) - mass(&left) - mass(&right);
                best = best.max(gain);
            }
        }
        best
    }

    #[test]
    fn stump_split_matches_exhaustive_enumeration() {
        let mut r = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..40 {
            let n = r.random_range(6..60);
            let p = r.random_range(1..6);
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    (0..p)
                        .map(|_| {
                            if r.random_bool(0.15) {
                                f64::NAN
                            } else {
                                r.random_range(0..8) as f64
                            }
                        })
                        .collect()
                })
                .collect();
            let x: Vec<&[f64]> = rows.iter().map(|v| v.as_slice()).collect();
            let y: Vec<bool> = (0..n).map(|_| r.random_bool(0.5)).collect();
            let w: Vec<f64> = (0..n).map(|_| r.random_range(1..5) as f64).collect();
            let all_rows: Vec<usize> = (0..n).collect();
            let oracle = stump_oracle(&x, &y, &w, 1);
            let mut got = 0.0f64;
            for f in 0..p {
                if let Some(s) = best_split_on_feature(&x, &y, &w, &all_rows, f, 1) {
                    got = got.max(s.gain);
                }
            }
            assert!(
                (got - oracle).abs() < 1e-9,
                "stump gain {got} vs oracle {oracle}"
            );
        }
    }

    #[test]
    fn serialization_round_trips() {
        let rows = vec![
            (vec![0.0, 3.0], false),
            (vec![1.0, 2.0], false),
            (vec![2.0, 1.0], true),
            (vec![3.0, f64::NAN], true),
        ];
        let tree = fit_plain(
            &rows,
            &TreeConfig {
                max_depth: 3,
                min_leaf: 1,
                mtry: None,
            },
        );
        let json = serde_json::to_string(&tree).unwrap();
        let back: DecisionTree = serde_json::from_str(&json).unwrap();
        assert_eq!(back, tree);
    }
}
