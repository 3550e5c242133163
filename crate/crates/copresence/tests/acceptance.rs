//! Release gate: one test per acceptance criterion.
//!
//! Each test prints exactly one `acceptance: <criterion> ... PASS|FAIL`
//! line (visible with `cargo test --test acceptance -- --nocapture`) and
//! asserts the criterion at its stated tolerance. Derived expectations are
//! checked against independent brute-force oracles computed inside this
//! file, never against the library's own internals.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;
use std::time::Instant;

use rand::prelude::*;

use copresence::config::Period;
use copresence::dyads::{build_dyad_series, eligible_dyads, Dyad};
use copresence::eval::{assign_folds, evaluate_predictions, ConfusionCounts, CvSchema};
use copresence::features::{FeatureMatrix, FeatureSchema};
use copresence::ingest::{build_grid, SurveyTie, TieType};
use copresence::learn::{assemble, cfs, forest, tree::TreeConfig, ModelKind};
use copresence::networks::{build_label_table, build_networks, LabelRow, Target};
use copresence::pipeline::{
    cmd_evaluate, cmd_extract, cmd_ingest, cmd_simulate, cmd_thresholds, EvalReport, EvalSpec,
    FeatureMode,
};
use copresence::synth::{generate, leakage_fixture, SynthConfig};
use copresence::thresholds::{cluster_1d, WeightedSample};
use copresence::{derive_seed, substream};

fn report(name: &str, pass: bool, detail: &str) {
    println!("acceptance: {name} ... {}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "acceptance criterion failed: {name} ({detail})");
}

// ---------------------------------------------------------------------------
// Shared pipeline fixtures
// ---------------------------------------------------------------------------

/// The reference cohort: 48 devices over 56 days gives exactly 1,128 dyads
/// observed in two 4-week periods. Strong planted co-location, stable ties,
/// light missingness, so the planted-signal criterion has an honest target.
fn reference_synth() -> SynthConfig {
    SynthConfig {
        co_location_lift: 0.8,
        change_rate: 0.0,
        missing_rate: 0.15,
        seed: 7,
        ..SynthConfig::default()
    }
}

struct ReferenceCohort {
    dir: tempfile::TempDir,
    extract_secs: f64,
}

impl ReferenceCohort {
    fn path(&self) -> &std::path::Path {
        self.dir.path()
    }
}

fn run_to_extract(out: &std::path::Path, synth: &SynthConfig) -> f64 {
    cmd_simulate(out, synth, false).expect("simulate");
    let data = out.join("data");
    cmd_ingest(
        out,
        &data.join("config.json"),
        &data.join("locations.csv"),
        &data.join("wifi.csv"),
        &data.join("surveys.csv"),
    )
    .expect("ingest");
    cmd_thresholds(out).expect("thresholds");
    let started = Instant::now();
    cmd_extract(out, true).expect("extract");
    started.elapsed().as_secs_f64()
}

fn reference_cohort() -> &'static ReferenceCohort {
    static COHORT: OnceLock<ReferenceCohort> = OnceLock::new();
    COHORT.get_or_init(|| {
        let dir = tempfile::tempdir().expect("tempdir");
        let extract_secs = run_to_extract(dir.path(), &reference_synth());
        ReferenceCohort { dir, extract_secs }
    })
}

fn reference_label_rows() -> Vec<LabelRow> {
    let out = reference_cohort().path();
    let ties: Vec<SurveyTie> = serde_json::from_str(
        &std::fs::read_to_string(out.join("ties.json")).expect("ties.json"),
    )
    .expect("ties parse");
    let networks = build_networks(&ties);
    let matrix = FeatureMatrix::load(&out.join("features.csv")).expect("features");
    let available: BTreeSet<_> = matrix.rows.iter().map(|r| (r.dyad.clone(), r.period)).collect();
    build_label_table(Target::Friend, &networks, &available)
        .expect("label table")
        .rows
}

// ---------------------------------------------------------------------------
// Criterion: exact column counts and extraction runtime
// ---------------------------------------------------------------------------

#[test]
fn feature_matrix_shape_and_extraction_runtime() {
    let cohort = reference_cohort();
    let schema = FeatureSchema::load(&cohort.path().join("schema.json")).expect("schema");
    let matrix = FeatureMatrix::load(&cohort.path().join("features.csv")).expect("matrix");

    // The WiFi-less column count is schema arithmetic, so a small cohort
    // exercises it just as faithfully as the big one.
    let small = tempfile::tempdir().expect("tempdir");
    let synth = SynthConfig {
        n_nodes: 8,
        house_residents: 2,
        days: 3,
        seed: 5,
        ..SynthConfig::default()
    };
    run_to_extract(small.path(), &synth);
    cmd_extract(small.path(), false).expect("wifi-less extract");
    let no_wifi = FeatureSchema::load(&small.path().join("schema.json")).expect("schema");

    let pass = schema.width() == 2513
        && matrix.rows.len() == 2256
        && no_wifi.width() == 2163
        && cohort.extract_secs < 300.0;
    report(
        "feature matrix shape and extraction runtime",
        pass,
        &format!(
            "width {} (want 2513), rows {} (want 2256 = 1128 dyads x 2 periods), \
             wifi-less width {} (want 2163), extract took {:.1}s (limit 300s)",
            schema.width(),
            matrix.rows.len(),
            no_wifi.width(),
            cohort.extract_secs
        ),
    );
}

// ---------------------------------------------------------------------------
// Criterion: metric suite vs brute-force oracles
// ---------------------------------------------------------------------------

fn oracle_binomial_tail(correct: u64, n: u64, p0: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    if correct == 0 || p0 == 1.0 {
        return 1.0;
    }
    if p0 == 0.0 {
        return 0.0;
    }
    (correct..=n)
        .map(|k| {
            let log_choose = ln_gamma(n as f64 + 1.0)
                - ln_gamma(k as f64 + 1.0)
                - ln_gamma((n - k) as f64 + 1.0);
            (log_choose + k as f64 * p0.ln() + (n - k) as f64 * (1.0 - p0).ln()).exp()
        })
        .sum::<f64>()
        .min(1.0)
}

struct OracleMetrics {
    nir: f64,
    accuracy: f64,
    mcc: f64,
    precision: Option<f64>,
    recall: Option<f64>,
    specificity: Option<f64>,
    f1: Option<f64>,
    auc: Option<f64>,
    p_value: f64,
}

/// Everything recomputed by direct counting over the prediction pairs.
fn oracle_metrics(predictions: &[(bool, f64)]) -> OracleMetrics {
    let n = predictions.len() as f64;
    let mut tp = 0f64;
    let mut fp = 0f64;
    let mut tn = 0f64;
    let mut fn_ = 0f64;
    for &(label, score) in predictions {
        match (label, score >= 0.5) {
            (true, true) => tp += 1.0,
            (false, true) => fp += 1.0,
            (false, false) => tn += 1.0,
            (true, false) => fn_ += 1.0,
        }
    }
    let pos = tp + fn_;
    let neg = tn + fp;
    let nir = pos.max(neg) / n;
    let ratio = |num: f64, den: f64| if den == 0.0 { None } else { Some(num / den) };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    let factors = [tp + fp, tp + fn_, tn + fp, tn + fn_];
    let mcc = if factors.contains(&0.0) {
        0.0
    } else {
        (tp * tn - fp * fn_) / factors.iter().product::<f64>().sqrt()
    };
    let pos_scores: Vec<f64> = predictions.iter().filter(|(l, _)| *l).map(|&(_, s)| s).collect();
    let neg_scores: Vec<f64> = predictions.iter().filter(|(l, _)| !*l).map(|&(_, s)| s).collect();
    let auc = if pos_scores.is_empty() || neg_scores.is_empty() {
        None
    } else {
        let mut wins = 0.0;
        for &sp in &pos_scores {
            for &sn in &neg_scores {
                if sp > sn {
                    wins += 1.0;
                } else if sp == sn {
                    wins += 0.5;
                }
            }
        }
        Some(wins / (pos * neg))
    };
    OracleMetrics {
        nir,
        accuracy: (tp + tn) / n,
        mcc,
        precision,
        recall,
        specificity: ratio(tn, tn + fp),
        f1,
        auc,
        p_value: oracle_binomial_tail((tp + tn) as u64, n as u64, nir),
    }
}

fn rel_close(got: f64, want: f64) -> bool {
    if want == 0.0 {
        return got == 0.0;
    }
    (got - want).abs() <= 1e-9 * want.abs()
}

fn opt_close(got: Option<f64>, want: Option<f64>) -> bool {
    match (got, want) {
        (None, None) => true,
        (Some(g), Some(w)) => rel_close(g, w),
        _ => false,
    }
}

#[test]
fn metric_suite_matches_counting_oracles() {
    let mut rng = substream(404, "acceptance/metric-oracles");
    let mut failures = Vec::new();
    for fixture in 0..100 {
        let n = rng.random_range(5..=1000);
        let q = rng.random_range(0.05..0.95);
        let coarse = rng.random_bool(0.5);
        let predictions: Vec<(bool, f64)> = (0..n)
            .map(|_| {
                let label = rng.random_bool(q);
                let score = if coarse {
                    rng.random_range(0..=10) as f64 / 10.0
                } else {
                    rng.random_range(0.0..1.0)
                };
                (label, score)
            })
            .collect();
        let got = evaluate_predictions(&predictions);
        let want = oracle_metrics(&predictions);
        let checks = [
            ("nir", rel_close(got.nir, want.nir)),
            ("accuracy", rel_close(got.accuracy, want.accuracy)),
            ("mcc", rel_close(got.mcc, want.mcc)),
            ("precision", opt_close(got.precision, want.precision)),
            ("recall", opt_close(got.recall, want.recall)),
            ("specificity", opt_close(got.specificity, want.specificity)),
            ("f1", opt_close(got.f1, want.f1)),
            ("auc", opt_close(got.auc, want.auc)),
            ("p_value", rel_close(got.p_value_vs_nir, want.p_value)),
        ];
        for (metric, ok) in checks {
            if !ok {
                failures.push(format!("fixture {fixture} ({n} rows): {metric}"));
            }
        }
    }
    report(
        "metric suite matches counting oracles on 100 fixtures",
        failures.is_empty(),
        &failures.join("; "),
    );
}

// ---------------------------------------------------------------------------
// Criterion: correlation-coefficient conventions
// ---------------------------------------------------------------------------

#[test]
fn mcc_convention_fixtures() {
    // A constant majority-class predictor must score exactly zero.
    let majority: Vec<(bool, f64)> = (0..100).map(|i| (i < 30, 0.1)).collect();
    let majority_mcc = evaluate_predictions(&majority).mcc;

    // A perfect predictor must score exactly one.
    let perfect: Vec<(bool, f64)> = (0..100).map(|i| (i < 30, if i < 30 { 0.9 } else { 0.1 })).collect();
    let perfect_mcc = evaluate_predictions(&perfect).mcc;

    // Hand-checked confusion fixture.
    let hand = ConfusionCounts {
        tp: 90,
        fn_: 10,
        tn: 80,
        fp: 20,
    }
    .mcc();

    let pass = majority_mcc == 0.0 && perfect_mcc == 1.0 && (hand - 0.7035).abs() <= 1e-4;
    report(
        "correlation coefficient conventions",
        pass,
        &format!("majority {majority_mcc}, perfect {perfect_mcc}, hand fixture {hand} (want 0.7035 +/- 1e-4)"),
    );
}

// ---------------------------------------------------------------------------
// Criterion: clustering optimality and weight-scaling invariance
// ---------------------------------------------------------------------------

/// Weighted SSE of a contiguous partition, computed the slow direct way.
fn partition_cost(values: &[(f64, f64)], breaks: &[usize]) -> f64 {
    let mut cost = 0.0;
    let mut start = 0;
    for &end in breaks.iter().chain(std::iter::once(&values.len())) {
        let cluster = &values[start..end];
        let w: f64 = cluster.iter().map(|&(_, w)| w).sum();
        let mean = cluster.iter().map(|&(v, w)| v * w).sum::<f64>() / w;
        cost += cluster.iter().map(|&(v, w)| w * (v - mean) * (v - mean)).sum::<f64>();
        start = end;
    }
    cost
}

/// All ways to split `n` sorted values into `k` contiguous runs.
fn exhaustive_min_cost(values: &[(f64, f64)], k: usize) -> f64 {
    fn go(values: &[(f64, f64)], k: usize, from: usize, breaks: &mut Vec<usize>, best: &mut f64) {
        if breaks.len() == k - 1 {
            let cost = partition_cost(values, breaks);
            if cost < *best {
                *best = cost;
            }
            return;
        }
        for next in (from + 1)..=(values.len() - (k - 1 - breaks.len())) {
            breaks.push(next);
            go(values, k, next, breaks, best);
            breaks.pop();
        }
    }
    let mut best = f64::INFINITY;
    go(values, k, 0, &mut Vec::new(), &mut best);
    best
}

#[test]
fn clustering_matches_exhaustive_partitions() {
    let mut rng = substream(404, "acceptance/kmeans-oracle");
    let mut failures = Vec::new();
    for fixture in 0..60 {
        let k = rng.random_range(1..=4usize);
        let n = rng.random_range(k.max(2)..=14usize);
        let mut values: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.random_range(0.0..1500.0), rng.random_range(0.1..5.0)))
            .collect();
        values.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        values.dedup_by(|a, b| a.0 == b.0);
        if values.len() < k {
            continue;
        }
        let samples: Vec<WeightedSample> = values
            .iter()
            .map(|&(value, weight)| WeightedSample { value, weight })
            .collect();
        let cutoff = 2000.0;
        let set = cluster_1d(&samples, k, cutoff).expect("cluster");

        // Recover the partition the returned thresholds imply, then price it
        // with an independent cost function against the exhaustive optimum.
        let mut breaks = Vec::new();
        for t in &set.thresholds_m[..k - 1] {
            breaks.push(values.iter().position(|&(v, _)| v > *t).expect("interior threshold"));
        }
        let dp_cost = partition_cost(&values, &breaks);
        let best = exhaustive_min_cost(&values, k);
        if (dp_cost - best).abs() > 1e-9 * (1.0 + best) {
            failures.push(format!("fixture {fixture}: dp {dp_cost} vs exhaustive {best}"));
        }

        // Scaling every weight by a power of two (up or down) must leave the
        // chosen boundaries bit-identical.
        for factor in [4.0, 0.25] {
            let scaled: Vec<WeightedSample> = samples
                .iter()
                .map(|s| WeightedSample {
                    value: s.value,
                    weight: s.weight * factor,
                })
                .collect();
            let scaled_set = cluster_1d(&scaled, k, cutoff).expect("cluster scaled");
            if scaled_set.thresholds_m != set.thresholds_m {
                failures.push(format!(
                    "fixture {fixture}: thresholds moved under weight scaling by {factor}"
                ));
            }
        }
    }
    report(
        "clustering matches exhaustive contiguous partitions",
        failures.is_empty(),
        &failures.join("; "),
    );
}

// ---------------------------------------------------------------------------
// Criterion: feature selection vs exhaustive subset search
// ---------------------------------------------------------------------------

/// Merit of a feature subset from scratch: absolute Pearson correlations
/// folded into sum_rcf / sqrt(k + 2 * sum_rff).
fn oracle_merit(x: &[Vec<f64>], y01: &[f64], subset: &[usize]) -> f64 {
    let k = subset.len() as f64;
    let col = |f: usize| -> Vec<f64> { x.iter().map(|row| row[f]).collect() };
    let sum_rcf: f64 = subset.iter().map(|&f| cfs::abs_pearson(&col(f), y01)).sum();
    let mut sum_rff = 0.0;
    for i in 0..subset.len() {
        for j in (i + 1)..subset.len() {
            sum_rff += cfs::abs_pearson(&col(subset[i]), &col(subset[j]));
        }
    }
    sum_rcf / (k + 2.0 * sum_rff).sqrt()
}

fn random_selection_fixture(rng: &mut impl Rng, p: usize, n: usize) -> (Vec<Vec<f64>>, Vec<bool>) {
    let y: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
    let x: Vec<Vec<f64>> = y
        .iter()
        .map(|&label| {
            let z = label as u8 as f64;
            (0..p)
                .map(|f| {
                    // A mix of informative, redundant, and noise columns.
                    let signal = match f % 3 {
                        0 => z,
                        1 => 0.5 * z,
                        _ => 0.0,
                    };
                    signal + rng.random_range(-1.0..1.0)
                })
                .collect()
        })
        .collect();
    (x, y)
}

#[test]
fn feature_selection_matches_exhaustive_search() {
    let mut rng = substream(404, "acceptance/cfs-oracle");
    let mut failures = Vec::new();
    for fixture in 0..50 {
        let p = rng.random_range(3..=10usize);
        let n = rng.random_range(30..=80usize);
        let (x, y) = random_selection_fixture(&mut rng, p, n);
        let rows: Vec<&[f64]> = x.iter().map(|r| r.as_slice()).collect();
        let candidates: Vec<usize> = (0..p).collect();
        let got = cfs::select(&rows, &y, &candidates, 5);

        let y01: Vec<f64> = y.iter().map(|&l| l as u8 as f64).collect();
        let mut best = 0.0f64;
        for mask in 1u32..(1 << p) {
            let subset: Vec<usize> = (0..p).filter(|f| mask & (1 << f) != 0).collect();
            best = best.max(oracle_merit(&x, &y01, &subset));
        }
        if (got.merit - best).abs() > 1e-12 * best.max(1.0) {
            failures.push(format!(
                "fixture {fixture} (p={p}): best-first merit {} vs exhaustive {best}",
                got.merit
            ));
        }
    }

    // A duplicated column must never be selected twice: the copy adds
    // nothing to class correlation but inflates the redundancy penalty.
    for round in 0..20 {
        let (mut x, y) = random_selection_fixture(&mut rng, 6, 60);
        for row in &mut x {
            let dup = row[0];
            row.push(dup);
        }
        let rows: Vec<&[f64]> = x.iter().map(|r| r.as_slice()).collect();
        let candidates: Vec<usize> = (0..7).collect();
        let got = cfs::select(&rows, &y, &candidates, 5);
        if got.selected.contains(&0) && got.selected.contains(&6) {
            failures.push(format!("round {round}: both copies of a duplicated column selected"));
        }
    }
    report(
        "feature selection matches exhaustive subset search",
        failures.is_empty(),
        &failures.join("; "),
    );
}

// ---------------------------------------------------------------------------
// Criterion: fold-plan contracts
// ---------------------------------------------------------------------------

fn chi_square_uniform_p(counts: &[usize]) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let total: usize = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).expect("df");
    1.0 - dist.cdf(stat)
}

#[test]
fn fold_plans_respect_grouping_contracts() {
    let rows = reference_label_rows();
    let dyads: BTreeSet<&Dyad> = rows.iter().map(|r| &r.dyad).collect();
    assert!(dyads.len() >= 1000, "need at least 1000 dyads, got {}", dyads.len());
    let mut failures = Vec::new();

    // Dyad-level assignment must never split a dyad across folds.
    let mut rng = substream(404, "acceptance/folds/dyadic");
    let plan = assign_folds(CvSchema::Dyadic, &rows, 5, &mut rng).expect("dyadic plan");
    let mut seen: BTreeMap<&Dyad, BTreeSet<usize>> = BTreeMap::new();
    for (row, &fold) in rows.iter().zip(&plan.assignment) {
        seen.entry(&row.dyad).or_default().insert(fold);
    }
    let split_dyads = seen.values().filter(|folds| folds.len() > 1).count();
    if split_dyads > 0 {
        failures.push(format!("{split_dyads} dyads split across folds"));
    }

    // The temporal schema trains strictly on first-period rows and tests
    // strictly on second-period rows.
    let mut rng = substream(404, "acceptance/folds/temporal");
    let plan = assign_folds(CvSchema::TemporalBlock, &rows, 5, &mut rng).expect("temporal plan");
    let splits = plan.splits();
    if splits.len() != 1 {
        failures.push(format!("temporal plan produced {} splits", splits.len()));
    }
    for (train, test) in &splits {
        let bad_train = train.iter().filter(|&&r| rows[r].period != Period::P1).count();
        let bad_test = test.iter().filter(|&&r| rows[r].period != Period::P2).count();
        if bad_train > 0 || bad_test > 0 {
            failures.push(format!(
                "temporal split leaked periods: {bad_train} non-P1 train rows, {bad_test} non-P2 test rows"
            ));
        }
    }

    // Fold sizes are uniform in expectation. Counted in each schema's own
    // assignment units (rows / dyads), pooled over 100 seeds.
    let mut row_counts = vec![0usize; 5];
    let mut dyad_counts = vec![0usize; 5];
    for seed in 0..100u64 {
        let mut rng = substream(seed, "acceptance/folds/uniform/unrestricted");
        let plan = assign_folds(CvSchema::Unrestricted, &rows, 5, &mut rng).expect("plan");
        for &f in &plan.assignment {
            row_counts[f] += 1;
        }
        let mut rng = substream(seed, "acceptance/folds/uniform/dyadic");
        let plan = assign_folds(CvSchema::Dyadic, &rows, 5, &mut rng).expect("plan");
        let mut per_dyad: BTreeMap<&Dyad, usize> = BTreeMap::new();
        for (row, &f) in rows.iter().zip(&plan.assignment) {
            per_dyad.insert(&row.dyad, f);
        }
        for &f in per_dyad.values() {
            dyad_counts[f] += 1;
        }
    }
    let p_rows = chi_square_uniform_p(&row_counts);
    let p_dyads = chi_square_uniform_p(&dyad_counts);
    if p_rows <= 0.01 {
        failures.push(format!("unrestricted fold sizes non-uniform (p = {p_rows:.4})"));
    }
    if p_dyads <= 0.01 {
        failures.push(format!("dyadic fold sizes non-uniform (p = {p_dyads:.4})"));
    }

    report(
        "fold plans respect grouping contracts",
        failures.is_empty(),
        &failures.join("; "),
    );
}

// ---------------------------------------------------------------------------
// Criterion: planted signal detected, null cohort flat
// ---------------------------------------------------------------------------

#[test]
fn planted_signal_detected_and_null_cohort_flat() {
    // Planted cohort: strong co-location lift must be detectable.
    let spec = EvalSpec {
        target: Target::Friend,
        cv: CvSchema::Unrestricted,
        folds: 5,
        model: ModelKind::Forest,
        features: FeatureMode::All,
        seed: 7,
    };
    let (_, report_path) = cmd_evaluate(reference_cohort().path(), &spec).expect("planted evaluate");
    let planted: EvalReport =
        serde_json::from_str(&std::fs::read_to_string(&report_path).expect("report")).expect("json");

    // Null cohort: no planted signal. Judged under dyad-level folds — the
    // schema that closes the twin-row memorisation channel — because this
    // criterion is about absent signal, not about fold leakage (which the
    // leakage criterion measures on its own fixture).
    let null_dir = tempfile::tempdir().expect("tempdir");
    let null_synth = SynthConfig {
        n_nodes: 32,
        house_residents: 7,
        days: 28,
        co_location_lift: 0.0,
        change_rate: 0.0,
        seed: 7,
        ..SynthConfig::default()
    };
    run_to_extract(null_dir.path(), &null_synth);
    let null_spec = EvalSpec {
        cv: CvSchema::Dyadic,
        ..spec
    };
    let (_, null_path) = cmd_evaluate(null_dir.path(), &null_spec).expect("null evaluate");
    let null: EvalReport =
        serde_json::from_str(&std::fs::read_to_string(&null_path).expect("report")).expect("json");

    let pass = planted.metrics.mcc >= 0.3 && null.rows >= 1000 && null.metrics.mcc.abs() <= 0.05;
    report(
        "planted signal detected and null cohort flat",
        pass,
        &format!(
            "planted mcc {:.4} (want >= 0.3) on {} rows; null mcc {:.4} (want |mcc| <= 0.05) on {} rows",
            planted.metrics.mcc, planted.rows, null.metrics.mcc, null.rows
        ),
    );
}

// ---------------------------------------------------------------------------
// Criterion: row-level folds inflate skill on the leakage cohort
// ---------------------------------------------------------------------------

fn leakage_mcc(ds: &copresence::learn::Dataset, rows: &[LabelRow], schema: CvSchema, seed: u64) -> f64 {
    let config = forest::ForestConfig {
        trees: 30,
        tree: TreeConfig {
            max_depth: 8,
            min_leaf: 2,
            mtry: None,
        },
    };
    let allowed: Vec<usize> = (0..ds.width).collect();
    let mut rng = substream(seed, &format!("acceptance/leakage/folds/{}", schema.label()));
    let plan = assign_folds(schema, rows, 3, &mut rng).expect("plan");
    let mut pooled = Vec::new();
    for (split, (train, test)) in plan.splits().into_iter().enumerate() {
        if train.is_empty() || test.is_empty() {
            continue;
        }
        let tx: Vec<&[f64]> = train.iter().map(|&r| ds.x[r]).collect();
        let ty: Vec<bool> = train.iter().map(|&r| ds.y[r]).collect();
        let model = forest::fit(
            &tx,
            &ty,
            &allowed,
            &config,
            derive_seed(seed, &format!("acceptance/leakage/{}/{split}", schema.label())),
        );
        pooled.extend(test.iter().map(|&r| (ds.y[r], model.predict(ds.x[r]))));
    }
    evaluate_predictions(&pooled).mcc
}

#[test]
fn row_level_folds_inflate_skill_on_leakage_cohort() {
    let seeds: Vec<u64> = (100..124).collect();
    let mut gaps = Vec::new();
    for &seed in &seeds {
        let synth = SynthConfig {
            n_nodes: 16,
            house_residents: 3,
            days: 14,
            co_location_lift: 0.15,
            seed,
            ..SynthConfig::default()
        };
        let data = leakage_fixture(&synth).expect("fixture");
        let grids = build_grid(&data.locations, &data.wifi, &data.study);
        let pooled = copresence::dyads::pooled_distances(&grids, data.study.distance_elbow_m);
        let thresholds = cluster_1d(&pooled, 10, data.study.distance_elbow_m).expect("thresholds");
        let nodes: BTreeSet<String> = data
            .ties
            .iter()
            .flat_map(|t| [t.ego.clone(), t.alter.clone()])
            .collect();
        let (dyads, _) = eligible_dyads(&grids, &nodes);
        let matrix = copresence::features::extract_matrix(&grids, &dyads, &thresholds, &data.study, true)
            .expect("matrix");
        let networks = build_networks(&data.ties);
        let available: BTreeSet<_> = matrix.rows.iter().map(|r| (r.dyad.clone(), r.period)).collect();
        let table = build_label_table(Target::Friend, &networks, &available).expect("labels");
        let ds = assemble(&matrix, &table).expect("dataset");
        let unrestricted = leakage_mcc(&ds, &table.rows, CvSchema::Unrestricted, seed);
        let dyadic = leakage_mcc(&ds, &table.rows, CvSchema::Dyadic, seed);
        gaps.push(unrestricted - dyadic);
    }
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let positive = gaps.iter().filter(|&&g| g > 0.0).count();
    report(
        "row-level folds inflate skill on the leakage cohort",
        mean > 0.0,
        &format!(
            "mean inflation {mean:+.4} over {} seeds ({positive} positive) — want > 0",
            gaps.len()
        ),
    );
}

// ---------------------------------------------------------------------------
// Criterion: tied pairs stay closer in every single week
// ---------------------------------------------------------------------------

#[test]
fn tied_pairs_stay_closer_every_week() {
    use copresence::networks::{tie_distance_profile, TieCategory};
    use copresence::thresholds::ThresholdSet;

    let synth = SynthConfig {
        n_nodes: 20,
        house_residents: 5,
        days: 28,
        co_location_lift: 0.8,
        change_rate: 0.0,
        seed: 7,
        ..SynthConfig::default()
    };
    let data = generate(&synth).expect("cohort");
    let grids = build_grid(&data.locations, &data.wifi, &data.study);
    let thresholds = ThresholdSet::new(vec![100.0]).expect("thresholds");
    let nodes: BTreeSet<String> = data.truth.nodes.iter().cloned().collect();
    let (dyads, _) = eligible_dyads(&grids, &nodes);
    let by_id: BTreeMap<&str, _> = grids.iter().map(|g| (g.device_id.as_str(), g)).collect();
    let networks = build_networks(&data.ties);
    let friend_net = networks.get(&(2, TieType::Friend)).expect("friend net");
    let series_iter = dyads.iter().filter_map(|d| {
        let ga = by_id.get(d.a.as_str())?;
        let gb = by_id.get(d.b.as_str())?;
        build_dyad_series(ga, gb, &thresholds, &data.study).ok()
    });
    let profile = tie_distance_profile(series_iter, friend_net, &data.study);

    let mut failures = Vec::new();
    if profile.len() != 4 {
        failures.push(format!("expected 4 study weeks, got {}", profile.len()));
    }
    for week in &profile {
        match (
            week.median_m[TieCategory::Mutual as usize],
            week.median_m[TieCategory::Unconnected as usize],
        ) {
            (Some(mutual), Some(unconnected)) if mutual < unconnected => {}
            (mutual, unconnected) => failures.push(format!(
                "week {}: mutual {mutual:?} not below unconnected {unconnected:?}",
                week.week + 1
            )),
        }
    }
    report(
        "tied pairs stay closer in every week",
        failures.is_empty(),
        &failures.join("; "),
    );
}

// ---------------------------------------------------------------------------
// Criterion: artifact substitutions stay bounded
// ---------------------------------------------------------------------------

#[test]
fn artifact_substitutions_stay_bounded() {
    let matrix = FeatureMatrix::load(&reference_cohort().path().join("features.csv")).expect("matrix");
    let mut infinities = 0usize;
    let mut invsq_over = 0usize;
    let mut log_below = 0usize;
    for row in &matrix.rows {
        for (column, &value) in matrix.schema.columns.iter().zip(&row.values) {
            if value.is_infinite() {
                infinities += 1;
            }
            if value.is_nan() {
                continue;
            }
            if column.contains("invsq") && value > 200.0 + 1e-9 {
                invsq_over += 1;
            }
            if column.contains("log") && value < 0.0 {
                log_below += 1;
            }
        }
    }
    let pass = infinities == 0 && invsq_over == 0 && log_below == 0;
    report(
        "artifact substitutions stay bounded",
        pass,
        &format!(
            "{infinities} infinite cells, {invsq_over} inverse-squared cells above 200, \
             {log_below} negative log cells"
        ),
    );
}

// ---------------------------------------------------------------------------
// Criterion: identical runs are byte-identical
// ---------------------------------------------------------------------------

#[test]
fn identical_runs_are_byte_identical() {
    let synth = SynthConfig {
        n_nodes: 10,
        house_residents: 3,
        days: 7,
        seed: 11,
        ..SynthConfig::default()
    };
    let spec = EvalSpec {
        target: Target::Friend,
        cv: CvSchema::Dyadic,
        folds: 3,
        model: ModelKind::Forest,
        features: FeatureMode::All,
        seed: 11,
    };
    let artifacts = [
        "features.csv",
        "fold_plan_friend_dyadic.json",
        "model_friend_dyadic_forest_all.json",
        "eval_friend_dyadic_forest_all.json",
    ];

    let mut runs: Vec<BTreeMap<&str, Vec<u8>>> = Vec::new();
    let mut dirs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().expect("tempdir");
        run_to_extract(dir.path(), &synth);
        cmd_evaluate(dir.path(), &spec).expect("evaluate");
        let bytes: BTreeMap<&str, Vec<u8>> = artifacts
            .iter()
            .map(|name| (*name, std::fs::read(dir.path().join(name)).expect("artifact")))
            .collect();
        runs.push(bytes);
        dirs.push(dir);
    }
    let differing: Vec<&str> = artifacts
        .iter()
        .filter(|name| runs[0][**name] != runs[1][**name])
        .copied()
        .collect();
    report(
        "identical runs are byte-identical",
        differing.is_empty(),
        &format!("artifacts differing between runs: {differing:?}"),
    );
}
