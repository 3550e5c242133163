//! Discrete adaptive boosting of shallow trees.
//!
//! Classic reweighting scheme: each round fits a tree to the current row
//! weights, upweights its mistakes, and earns a vote proportional to its
//! log-odds of being right. Rounds stop early when a tree is no better
//! than chance (its vote would be worthless) or perfect (nothing left to
//! reweight).

use serde::{Deserialize, Serialize};

use crate::learn::tree::{self, DecisionTree, TreeConfig};
use crate::substream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostConfig {
    pub rounds: usize,
    pub tree: TreeConfig,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig {
            rounds: 50,
            tree: TreeConfig {
                max_depth: 2,
                min_leaf: 2,
                mtry: None,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaBoost {
    /// (tree, vote weight) per round that survived.
    pub stages: Vec<(DecisionTree, f64)>,
    /// Training positive rate, the fallback score when no stage survived.
    pub prior: f64,
}

impl AdaBoost {
    /// Vote margin mapped onto [0, 1]: 0.5 is the decision boundary.
    pub fn predict(&self, row: &[f64]) -> f64 {
        if self.stages.is_empty() {
            return self.prior;
        }
        let mut vote = 0.0;
        let mut total = 0.0;
        for (tree, alpha) in &self.stages {
            let h = if tree.predict(row) >= 0.5 { 1.0 } else { -1.0 };
            vote += alpha * h;
            total += alpha;
        }
        (vote / total + 1.0) / 2.0
    }
}

pub fn fit(x: &[&[f64]], y: &[bool], allowed: &[usize], config: &BoostConfig, seed: u64) -> AdaBoost {
    assert!(!x.is_empty(), "cannot boost zero rows");
    let n = x.len();
    let prior = y.iter().filter(|&&l| l).count() as f64 / n as f64;
    let mut w = vec![1.0 / n as f64; n];
    let mut stages: Vec<(DecisionTree, f64)> = Vec::new();
    for round in 0..config.rounds {
        let mut rng = substream(seed, &format!("boost/round/{round}"));
        let tree = tree::fit(x, y, &w, allowed, &config.tree, &mut rng);
        let predicted: Vec<bool> = x.iter().map(|row| tree.predict(row) >= 0.5).collect();
        let total: f64 = w.iter().sum();
        let err: f64 = w
            .iter()
            .zip(predicted.iter().zip(y.iter()))
            .filter(|(_, (p, l))| p != l)
            .map(|(wi, _)| wi)
            .sum::<f64>()
            / total;
        if err <= 0.0 {
            // A perfect stage decides everything by itself.
            stages.push((tree, 1.0));
            break;
        }
        if err >= 0.5 {
            break;
        }
        let alpha = 0.5 * ((1.0 - err) / err).ln();
        for i in 0..n {
            let sign = if predicted[i] == y[i] { -1.0 } else { 1.0 };
            w[i] *= (sign * alpha).exp();
        }
        let sum: f64 = w.iter().sum();
        for wi in &mut w {
            *wi /= sum;
        }
        stages.push((tree, alpha));
    }
    AdaBoost { stages, prior }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn perfect_stump_stops_after_one_round() {
        let rows = [vec![0.0], vec![1.0], vec![10.0], vec![11.0]];
        let x: Vec<&[f64]> = rows.iter().map(|v| v.as_slice()).collect();
        let y = vec![false, false, true, true];
        let model = fit(&x, &y, &[0], &BoostConfig::default(), 1);
        assert_eq!(model.stages.len(), 1);
        assert_eq!(model.predict(&[0.5]), 0.0);
        assert_eq!(model.predict(&[10.5]), 1.0);
    }

    #[test]
    fn constant_feature_degenerates_to_the_majority_vote() {
        // Balanced labels on a constant feature: the first tree is exactly
        // chance, no stage survives, and the prior comes back.
        let rows = [vec![1.0], vec![1.0], vec![1.0], vec![1.0]];
        let x: Vec<&[f64]> = rows.iter().map(|v| v.as_slice()).collect();
        let y = vec![true, true, false, false];
        let model = fit(&x, &y, &[0], &BoostConfig::default(), 1);
        assert!(model.stages.is_empty());
        assert_eq!(model.predict(&[1.0]), 0.5);
        // Imbalanced labels: a constant-leaf tree IS better than chance
        // (it errs only on the minority), so boosting keeps it and then
        // stops once reweighting pushes the error to one half.
        let y = vec![true, false, false, false];
        let model = fit(&x, &y, &[0], &BoostConfig::default(), 1);
        assert!(!model.stages.is_empty());
        assert!(model.predict(&[1.0]) < 0.5);
    }

    #[test]
    fn boosting_solves_xor_that_stumps_cannot() {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for _ in 0..3 {
            rows.push(vec![0.0, 0.0]);
            y.push(false);
        }
        for _ in 0..2 {
            rows.push(vec![0.0, 1.0]);
            y.push(true);
            rows.push(vec![1.0, 0.0]);
            y.push(true);
            rows.push(vec![1.0, 1.0]);
            y.push(false);
        }
        let x: Vec<&[f64]> = rows.iter().map(|v| v.as_slice()).collect();
        let config = BoostConfig {
            rounds: 30,
            tree: TreeConfig {
                max_depth: 2,
                min_leaf: 1,
                mtry: None,
            },
        };
        let model = fit(&x, &y, &[0, 1], &config, 3);
        for (row, label) in rows.iter().zip(&y) {
            assert_eq!(model.predict(row) >= 0.5, *label, "row {row:?}");
        }
    }

    #[test]
    fn boosting_is_reproducible_and_improves_on_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let n = 240;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
            .collect();
        let y: Vec<bool> = rows
            .iter()
            .map(|r| {
                let noisy = rng.random_bool(0.15);
                (r[0] > 0.45) ^ noisy
            })
            .collect();
        let x: Vec<&[f64]> = rows.iter().map(|v| v.as_slice()).collect();
        let a = fit(&x[..160], &y[..160], &[0, 1], &BoostConfig::default(), 7);
        let b = fit(&x[..160], &y[..160], &[0, 1], &BoostConfig::default(), 7);
        assert_eq!(a, b);
        let correct = (160..n)
            .filter(|&i| (a.predict(x[i]) >= 0.5) == y[i])
            .count();
        assert!(correct > 56, "held-out accuracy {correct}/80");
    }
}
