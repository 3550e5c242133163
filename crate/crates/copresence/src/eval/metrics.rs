//! Classification metrics for imbalanced dyadic targets.
//!
//! Accuracy alone is useless here (predicting "no tie" everywhere scores in
//! the high nineties), so every evaluation reports the no-information rate,
//! an exact binomial test against it, Matthews correlation, and the
//! rank-based AUC alongside the usual confusion-matrix ratios.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn from_predictions(pairs: impl IntoIterator<Item = (bool, bool)>) -> ConfusionCounts {
        let mut c = ConfusionCounts::default();
        for (label, predicted) in pairs {
            match (label, predicted) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (false, false) => c.tn += 1,
                (true, false) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn specificity(&self) -> f64 {
        ratio(self.tn, self.tn + self.fp)
    }

    pub fn f1(&self) -> f64 {
        let p = self.precision();
        let r = self.recall();
        if p + r == 0.0 {
            return f64::NAN;
        }
        2.0 * p * r / (p + r)
    }

    /// Matthews correlation coefficient; 0 by convention when any marginal
    /// is empty (the correlation is undefined there).
    pub fn mcc(&self) -> f64 {
        let (tp, fp, tn, fn_) = (self.tp as f64, self.fp as f64, self.tn as f64, self.fn_ as f64);
        let factors = [tp + fp, tp + fn_, tn + fp, tn + fn_];
        if factors.iter().any(|&f| f == 0.0) {
            return 0.0;
        }
        (tp * tn - fp * fn_) / factors.iter().product::<f64>().sqrt()
    }
}

fn ratio(num: u64, denom: u64) -> f64 {
    if denom == 0 {
        f64::NAN
    } else {
        num as f64 / denom as f64
    }
}

/// Majority-class frequency: the accuracy of always guessing the most
/// common label among the evaluated rows.
pub fn nir(labels: &[bool]) -> f64 {
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    pos.max(neg) as f64 / labels.len() as f64
}

/// Exact Clopper-Pearson two-sided interval for a binomial proportion.
pub fn clopper_pearson(successes: u64, n: u64, alpha: f64) -> (f64, f64) {
    assert!(successes <= n && n > 0, "need 0 <= successes <= n, n > 0");
    assert!(alpha > 0.0 && alpha < 1.0);
    let (x, n_f) = (successes as f64, n as f64);
    let low = if successes == 0 {
        0.0
    } else {
        Beta::new(x, n_f - x + 1.0)
            .expect("valid beta parameters")
            .inverse_cdf(alpha / 2.0)
    };
    let high = if successes == n {
        1.0
    } else {
        Beta::new(x + 1.0, n_f - x)
            .expect("valid beta parameters")
            .inverse_cdf(1.0 - alpha / 2.0)
    };
    (low, high)
}

/// Exact one-sided binomial tail P[X >= correct] for X ~ Bin(n, p0),
/// computed with a log-space term recurrence and a log-sum-exp fold.
pub fn binomial_exceed_p(correct: u64, n: u64, p0: f64) -> f64 {
    assert!(correct <= n, "need correct <= n");
    assert!((0.0..=1.0).contains(&p0), "p0 must be a probability");
    if correct == 0 {
        return 1.0;
    }
    if p0 == 0.0 {
        return 0.0;
    }
    if p0 == 1.0 {
        return 1.0;
    }
    let (lp, lq) = (p0.ln(), (1.0 - p0).ln());
    // Walk log C(n,k) p^k q^(n-k) upward from k = 0.
    let mut log_term = n as f64 * lq;
    let mut tail: Vec<f64> = Vec::with_capacity((n - correct + 1) as usize);
    for k in 0..=n {
        if k >= correct {
            tail.push(log_term);
        }
        if k < n {
            log_term += ((n - k) as f64).ln() - ((k + 1) as f64).ln() + lp - lq;
        }
    }
    let max = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return 0.0;
    }
    let sum: f64 = tail.iter().map(|&t| (t - max).exp()).sum();
    (max + sum.ln()).exp().clamp(0.0, 1.0)
}

/// Rank-based AUC with tied scores counted one half. None when only one
/// class is present.
pub fn auc(scored: &[(f64, bool)]) -> Option<f64> {
    let pos = scored.iter().filter(|(_, l)| *l).count();
    let neg = scored.len() - pos;
    if pos == 0 || neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&a, &b| scored[a].0.partial_cmp(&scored[b].0).expect("finite scores"));
    // Average ranks across ties, 1-based.
    let mut rank = vec![0.0; scored.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scored[order[j + 1]].0 == scored[order[i]].0 {
            j += 1;
        }
        let avg = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            rank[idx] = avg;
        }
        i = j + 1;
    }
    let pos_rank_sum: f64 = scored
        .iter()
        .enumerate()
        .filter(|(_, (_, l))| *l)
        .map(|(i, _)| rank[i])
        .sum();
    let p = pos as f64;
    Some((pos_rank_sum - p * (p + 1.0) / 2.0) / (p * neg as f64))
}

/// Everything measured on one pooled set of (label, score) predictions.
/// Ratios that are undefined on this data come back as None.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsBundle {
    pub rows: usize,
    pub positives: usize,
    pub nir: f64,
    pub confusion: ConfusionCounts,
    pub accuracy: f64,
    pub accuracy_ci95: (f64, f64),
    pub p_value_vs_nir: f64,
    pub mcc: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub specificity: Option<f64>,
    pub f1: Option<f64>,
    pub auc: Option<f64>,
}

fn defined(v: f64) -> Option<f64> {
    if v.is_nan() {
        None
    } else {
        Some(v)
    }
}

/// Score >= 0.5 predicts positive.
pub fn evaluate_predictions(predictions: &[(bool, f64)]) -> MetricsBundle {
    assert!(!predictions.is_empty(), "no predictions to evaluate");
    let labels: Vec<bool> = predictions.iter().map(|&(l, _)| l).collect();
    let confusion = ConfusionCounts::from_predictions(predictions.iter().map(|&(l, s)| (l, s >= 0.5)));
    let correct = confusion.tp + confusion.tn;
    let n = confusion.total();
    let nir_value = nir(&labels);
    let scored: Vec<(f64, bool)> = predictions.iter().map(|&(l, s)| (s, l)).collect();
    MetricsBundle {
        rows: predictions.len(),
        positives: labels.iter().filter(|&&l| l).count(),
        nir: nir_value,
        confusion,
        accuracy: confusion.accuracy(),
        accuracy_ci95: clopper_pearson(correct, n, 0.05),
        p_value_vs_nir: binomial_exceed_p(correct, n, nir_value),
        mcc: confusion.mcc(),
        precision: defined(confusion.precision()),
        recall: defined(confusion.recall()),
        specificity: defined(confusion.specificity()),
        f1: defined(confusion.f1()),
        auc: auc(&scored),
    }
}
