//! Fixed-width feature vectors per (dyad, period).
//!
//! Each dyad series is sliced seven ways by [`Timeframe`], and every slice
//! is summarised: nine statistics for the continuous distance series and
//! twenty-five for each binary series. Columns are ordered series first,
//! then timeframe, then statistic, so the WiFi block sits at the tail and a
//! WiFi-free schema is a prefix of the full one.
//!
//! Missing versus artifact-undefined: a slice with no defined bins stays
//! missing (NaN) because the sensors saw nothing. A slice that is defined
//! but has, say, no true run gets span statistics of 0, and an all-false
//! slice gets one pseudo-gap covering every defined bin; those are real
//! observations of absence, not holes.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{Period, StudyConfig};
use crate::dyads::{binary_series_names, build_dyad_series, Dyad, DyadSeries};
use crate::error::{Error, Result};
use crate::ingest::TimelineGrid;
use crate::thresholds::ThresholdSet;
use crate::timeframe::Timeframe;

/// Cap for the inverse-squared distance transform (1/d^2 saturates here,
/// including at d = 0).
pub const INVSQ_CAP: f64 = 200.0;

/// Statistic names for the continuous distance series, in column order.
/// The log transform clamps distances under one metre to zero; the
/// inverse-squared transform is capped at [`INVSQ_CAP`].
pub const CONTINUOUS_STATS: [&str; 9] = [
    "mean",
    "median",
    "sd",
    "log_mean",
    "log_median",
    "log_sd",
    "invsq_mean",
    "invsq_median",
    "invsq_sd",
];

/// Statistic names for binary series, in column order: five base counts,
/// ten over true-run (span) lengths, ten over false-run (gap) lengths.
pub const BINARY_STATS: [&str; 25] = [
    "ones",
    "ones_prop",
    "defined",
    "missing",
    "transitions",
    "span_count",
    "span_min",
    "span_max",
    "span_mean",
    "span_median",
    "span_sd",
    "span_sum",
    "span_log_mean",
    "span_log_median",
    "span_log_sd",
    "gap_count",
    "gap_min",
    "gap_max",
    "gap_mean",
    "gap_median",
    "gap_sd",
    "gap_sum",
    "gap_log_mean",
    "gap_log_median",
    "gap_log_sd",
];

/// Column layout of a feature matrix, fully determined by the threshold
/// count and whether WiFi series are included.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub threshold_count: usize,
    pub include_wifi: bool,
    pub columns: Vec<String>,
}

impl FeatureSchema {
    pub fn new(threshold_count: usize, include_wifi: bool) -> FeatureSchema {
        let mut columns = Vec::new();
        for tf in Timeframe::ALL {
            for stat in CONTINUOUS_STATS {
                columns.push(format!("distance_{}_{}", tf.label(), stat));
            }
        }
        let mut series = binary_series_names(threshold_count);
        if !include_wifi {
            series.truncate(series.len() - 2);
        }
        for name in &series {
            for tf in Timeframe::ALL {
                for stat in BINARY_STATS {
                    columns.push(format!("{name}_{}_{stat}", tf.label()));
                }
            }
        }
        FeatureSchema {
            threshold_count,
            include_wifi,
            columns,
        }
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    /// Content hash of the column layout; models record it so a model can
    /// refuse a matrix with different columns.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        for c in &self.columns {
            hasher.update(c.as_bytes());
            hasher.update(b"\n");
        }
        format!("{:x}", hasher.finalize())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("schema serializes");
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<FeatureSchema> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let schema: FeatureSchema =
            serde_json::from_str(&text).map_err(|e| Error::contract(format!("{}: {e}", path.display())))?;
        let rebuilt = FeatureSchema::new(schema.threshold_count, schema.include_wifi);
        if rebuilt != schema {
            return Err(Error::contract(format!(
                "{}: column list does not match its declared layout",
                path.display()
            )));
        }
        Ok(schema)
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite stats input"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Population standard deviation (n in the denominator), so a single
/// observation has spread zero rather than being undefined.
fn pop_sd(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64).sqrt()
}

/// Nine statistics over the defined distances of a slice; all NaN when the
/// slice has no defined distance.
pub fn continuous_stats(distances: &[f64]) -> [f64; 9] {
    if distances.is_empty() {
        return [f64::NAN; 9];
    }
    let raw = distances.to_vec();
    let log: Vec<f64> = distances
        .iter()
        .map(|&d| if d < 1.0 { 0.0 } else { d.ln() })
        .collect();
    let invsq: Vec<f64> = distances.iter().map(|&d| (1.0 / (d * d)).min(INVSQ_CAP)).collect();
    [
        mean(&raw),
        median(&raw),
        pop_sd(&raw),
        mean(&log),
        median(&log),
        pop_sd(&log),
        mean(&invsq),
        median(&invsq),
        pop_sd(&invsq),
    ]
}

struct Runs {
    spans: Vec<usize>,
    gaps: Vec<usize>,
    ones: usize,
    defined: usize,
    missing: usize,
}

/// Maximal runs of equal defined values. A run only extends across bins
/// that are time-adjacent (start difference equal to the bin width), so
/// timeline discontinuities and missing bins both end a run.
fn runs(bins: &[(i64, Option<bool>)], bin_width_ms: i64) -> Runs {
    let mut r = Runs {
        spans: Vec::new(),
        gaps: Vec::new(),
        ones: 0,
        defined: 0,
        missing: 0,
    };
    let mut current: Option<(bool, usize, i64)> = None; // (value, length, last bin start)
    let mut flush = |c: &mut Option<(bool, usize, i64)>| {
        if let Some((value, len, _)) = c.take() {
            if value {
                r.spans.push(len);
            } else {
                r.gaps.push(len);
            }
        }
    };
    for &(t, v) in bins {
        let Some(v) = v else {
            r.missing += 1;
            flush(&mut current);
            continue;
        };
        r.defined += 1;
        if v {
            r.ones += 1;
        }
        let extends = matches!(current, Some((value, _, last)) if value == v && t - last == bin_width_ms);
        if extends {
            let run = current.as_mut().expect("run in progress");
            run.1 += 1;
            run.2 = t;
        } else {
            flush(&mut current);
            current = Some((v, 1, t));
        }
    }
    flush(&mut current);
    r
}

/// Ten statistics over a set of run lengths: count, min, max, mean, median,
/// sd, sum, then mean, median, sd of the log lengths.
fn run_stats(lengths: &[usize]) -> [f64; 10] {
    if lengths.is_empty() {
        return [0.0; 10];
    }
    let v: Vec<f64> = lengths.iter().map(|&l| l as f64).collect();
    let logs: Vec<f64> = v.iter().map(|l| l.ln()).collect();
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    [
        v.len() as f64,
        min,
        max,
        mean(&v),
        median(&v),
        pop_sd(&v),
        v.iter().sum(),
        mean(&logs),
        median(&logs),
        pop_sd(&logs),
    ]
}

/// Twenty-five statistics over one binary slice: all NaN when nothing is
/// defined; otherwise spans of an all-false slice are 0, and the gaps of an
/// all-true slice are 0 while an all-false slice counts as one pseudo-gap
/// spanning every defined bin.
pub fn binary_stats(bins: &[(i64, Option<bool>)], bin_width_ms: i64) -> [f64; 25] {
    let r = runs(bins, bin_width_ms);
    if r.defined == 0 {
        return [f64::NAN; 25];
    }
    let mut out = [0.0; 25];
    out[0] = r.ones as f64;
    out[1] = r.ones as f64 / r.defined as f64;
    out[2] = r.defined as f64;
    out[3] = r.missing as f64;
    out[4] = (r.spans.len() + r.gaps.len()) as f64;
    let span_stats = run_stats(&r.spans);
    let gap_stats = if r.ones == r.defined {
        [0.0; 10]
    } else if r.ones == 0 {
        run_stats(&[r.defined])
    } else {
        run_stats(&r.gaps)
    };
    out[5..15].copy_from_slice(&span_stats);
    out[15..25].copy_from_slice(&gap_stats);
    out
}

/// Extract one feature vector for a dyad series restricted to a period.
pub fn extract(
    series: &DyadSeries,
    config: &StudyConfig,
    period: Period,
    schema: &FeatureSchema,
) -> Result<Vec<f64>> {
    if series.within.len() != schema.threshold_count {
        return Err(Error::invariant(format!(
            "series has {} proximity thresholds, schema expects {}",
            series.within.len(),
            schema.threshold_count
        )));
    }
    let tz = config.tz()?;
    let (p_start, p_end) = config.period_interval(period);
    let masks: Vec<Vec<usize>> = Timeframe::ALL
        .iter()
        .map(|tf| {
            (0..series.len())
                .filter(|&i| {
                    let t = series.bin_starts[i];
                    (p_start..p_end).contains(&t) && tf.contains(t, &tz)
                })
                .collect()
        })
        .collect();

    let mut values = Vec::with_capacity(schema.width());
    for mask in &masks {
        let distances: Vec<f64> = mask.iter().filter_map(|&i| series.distance_m[i]).collect();
        values.extend(continuous_stats(&distances));
    }
    let mut binary: Vec<&[Option<bool>]> = series.within.iter().map(|s| s.as_slice()).collect();
    binary.push(&series.both_on_campus);
    binary.push(&series.both_in_house);
    if schema.include_wifi {
        binary.push(&series.common_wifi);
        binary.push(&series.common_house_wifi);
    }
    for s in binary {
        for mask in &masks {
            let bins: Vec<(i64, Option<bool>)> = mask.iter().map(|&i| (series.bin_starts[i], s[i])).collect();
            values.extend(binary_stats(&bins, series.bin_width_ms));
        }
    }
    if values.len() != schema.width() {
        return Err(Error::invariant(format!(
            "extracted {} values for a schema of width {}",
            values.len(),
            schema.width()
        )));
    }
    Ok(values)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRow {
    pub dyad: Dyad,
    pub period: Period,
    pub values: Vec<f64>,
}

/// A feature matrix with its schema. Rows are sorted by (dyad, period) and
/// values use NaN for missing.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    pub schema: FeatureSchema,
    pub rows: Vec<FeatureRow>,
}

impl FeatureMatrix {
    /// Map from (dyad, period) to row position.
    pub fn row_index(&self) -> BTreeMap<(Dyad, Period), usize> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| ((r.dyad.clone(), r.period), i))
            .collect()
    }

    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        write!(out, "dyad_a,dyad_b,period")?;
        for c in &self.schema.columns {
            write!(out, ",{c}")?;
        }
        writeln!(out)?;
        for row in &self.rows {
            write!(out, "{},{},{}", row.dyad.a, row.dyad.b, row.period.label())?;
            for &v in &row.values {
                if v.is_nan() {
                    write!(out, ",")?;
                } else {
                    write!(out, ",{v}")?;
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(reader: impl Read) -> Result<FeatureMatrix> {
        let mut lines = BufReader::new(reader).lines();
        let header = lines
            .next()
            .transpose()
            .map_err(|e| Error::contract(format!("feature csv: {e}")))?
            .ok_or_else(|| Error::contract("feature csv: empty file"))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() < 4 || cols[0] != "dyad_a" || cols[1] != "dyad_b" || cols[2] != "period" {
            return Err(Error::contract("feature csv: unexpected header prefix"));
        }
        let names: Vec<String> = cols[3..].iter().map(|s| s.to_string()).collect();
        let include_wifi = names.iter().any(|c| c.starts_with("common_wifi_"));
        let mut threshold_count = 0;
        while names.iter().any(|c| c.starts_with(&format!("within_t{}_", threshold_count + 1))) {
            threshold_count += 1;
        }
        let schema = FeatureSchema::new(threshold_count, include_wifi);
        if schema.columns != names {
            return Err(Error::contract(
                "feature csv: column list does not match any known layout",
            ));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::contract(format!("feature csv line {}: {e}", i + 2)))?;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 + schema.width() {
                return Err(Error::contract(format!(
                    "feature csv line {}: expected {} fields, got {}",
                    i + 2,
                    3 + schema.width(),
                    fields.len()
                )));
            }
            let dyad = Dyad::new(fields[0], fields[1])?;
            if (dyad.a.as_str(), dyad.b.as_str()) != (fields[0], fields[1]) {
                return Err(Error::contract(format!(
                    "feature csv line {}: dyad not in canonical order",
                    i + 2
                )));
            }
            let period = Period::parse(fields[2])?;
            let mut values = Vec::with_capacity(schema.width());
            for f in &fields[3..] {
                if f.is_empty() {
                    values.push(f64::NAN);
                } else {
                    values.push(f.parse::<f64>().map_err(|_| {
                        Error::contract(format!("feature csv line {}: bad number {f:?}", i + 2))
                    })?);
                }
            }
            rows.push(FeatureRow { dyad, period, values });
        }
        Ok(FeatureMatrix { schema, rows })
    }

    pub fn load(path: &Path) -> Result<FeatureMatrix> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        FeatureMatrix::read_csv(BufReader::new(file))
    }
}

/// Build series and extract features for every dyad and both periods.
/// Dyads are processed in parallel; the result is sorted by (dyad, period)
/// so it does not depend on scheduling.
pub fn extract_matrix(
    grids: &[TimelineGrid],
    dyads: &[Dyad],
    thresholds: &ThresholdSet,
    config: &StudyConfig,
    include_wifi: bool,
) -> Result<FeatureMatrix> {
    let schema = FeatureSchema::new(thresholds.count(), include_wifi);
    let by_id: BTreeMap<&str, &TimelineGrid> = grids.iter().map(|g| (g.device_id.as_str(), g)).collect();
    let mut rows: Vec<FeatureRow> = dyads
        .par_iter()
        .map(|dyad| -> Result<Vec<FeatureRow>> {
            let ga = by_id
                .get(dyad.a.as_str())
                .ok_or_else(|| Error::contract(format!("no grid for device {}", dyad.a)))?;
            let gb = by_id
                .get(dyad.b.as_str())
                .ok_or_else(|| Error::contract(format!("no grid for device {}", dyad.b)))?;
            let series = build_dyad_series(ga, gb, thresholds, config)?;
            Period::ALL
                .iter()
                .map(|&period| {
                    Ok(FeatureRow {
                        dyad: dyad.clone(),
                        period,
                        values: extract(&series, config, period, &schema)?,
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<Vec<FeatureRow>>>>()?
        .into_iter()
        .flatten()
        .collect();
    rows.sort_by(|x, y| (&x.dyad, x.period).cmp(&(&y.dyad, y.period)));
    Ok(FeatureMatrix { schema, rows })
}
