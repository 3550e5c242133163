//! Pairwise co-location series on the shared timeline.
//!
//! For each unordered device pair a bin yields one continuous value (the
//! haversine distance) and a family of binary indicators. A bin where either
//! side lacks the underlying sensor reading is missing (`None`), which is
//! distinct from `false`: downstream statistics treat the two differently.

use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::StudyConfig;
use crate::error::{Error, Result};
use crate::geo::haversine;
use crate::ingest::TimelineGrid;
use crate::thresholds::{ThresholdSet, WeightedSample};

/// Unordered device pair stored in canonical (sorted) order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Dyad {
    pub a: String,
    pub b: String,
}

impl Dyad {
    pub fn new(x: &str, y: &str) -> Result<Dyad> {
        if x == y {
            return Err(Error::contract(format!("dyad of a device with itself: {x}")));
        }
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        Ok(Dyad {
            a: a.to_string(),
            b: b.to_string(),
        })
    }

    pub fn label(&self) -> String {
        format!("{}|{}", self.a, self.b)
    }
}

/// All canonical pairs over a node set, sorted.
pub fn all_dyads<S: AsRef<str>>(nodes: &[S]) -> Vec<Dyad> {
    let sorted: BTreeSet<&str> = nodes.iter().map(|s| s.as_ref()).collect();
    let ordered: Vec<&str> = sorted.into_iter().collect();
    let mut out = Vec::with_capacity(ordered.len() * (ordered.len().saturating_sub(1)) / 2);
    for i in 0..ordered.len() {
        for j in (i + 1)..ordered.len() {
            out.push(Dyad {
                a: ordered[i].to_string(),
                b: ordered[j].to_string(),
            });
        }
    }
    out
}

/// Per-dyad series over the shared timeline. `within[i]` is the series for
/// the i-th distance threshold. Location-based series are missing wherever
/// either device lacks a location fix; WiFi series are missing wherever
/// either device recorded no scan in the bin.
#[derive(Clone, Debug, PartialEq)]
pub struct DyadSeries {
    pub dyad: Dyad,
    pub bin_width_ms: i64,
    pub bin_starts: Vec<i64>,
    pub distance_m: Vec<Option<f64>>,
    pub within: Vec<Vec<Option<bool>>>,
    pub both_on_campus: Vec<Option<bool>>,
    pub both_in_house: Vec<Option<bool>>,
    pub common_wifi: Vec<Option<bool>>,
    pub common_house_wifi: Vec<Option<bool>>,
}

/// Names of the binary series in schema order for `k` thresholds:
/// the proximity indicators first, then the geofence pair, then WiFi.
pub fn binary_series_names(k: usize) -> Vec<String> {
    let mut names: Vec<String> = (1..=k).map(|i| format!("within_t{i}")).collect();
    names.push("both_on_campus".to_string());
    names.push("both_in_house".to_string());
    names.push("common_wifi".to_string());
    names.push("common_house_wifi".to_string());
    names
}

impl DyadSeries {
    pub fn len(&self) -> usize {
        self.bin_starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bin_starts.is_empty()
    }

    /// Binary series in the order of [`binary_series_names`].
    pub fn binary_series(&self) -> Vec<(&str, &[Option<bool>])> {
        let mut out: Vec<(&str, &[Option<bool>])> = Vec::with_capacity(self.within.len() + 4);
        // Leak-free static names are not possible for within_t{i}, so the
        // caller pairs indices with binary_series_names when labels matter.
        for series in &self.within {
            out.push(("within", series.as_slice()));
        }
        out.push(("both_on_campus", &self.both_on_campus));
        out.push(("both_in_house", &self.both_in_house));
        out.push(("common_wifi", &self.common_wifi));
        out.push(("common_house_wifi", &self.common_house_wifi));
        out
    }
}

/// Build the series for one pair. Both grids must share the timeline.
pub fn build_dyad_series(
    ga: &TimelineGrid,
    gb: &TimelineGrid,
    thresholds: &ThresholdSet,
    config: &StudyConfig,
) -> Result<DyadSeries> {
    if ga.bin_starts != gb.bin_starts {
        return Err(Error::invariant(format!(
            "grids {} and {} are not on the same timeline",
            ga.device_id, gb.device_id
        )));
    }
    let dyad = Dyad::new(&ga.device_id, &gb.device_id)?;
    // Canonical orientation so (a, b) and (b, a) yield identical series.
    let (ga, gb) = if ga.device_id == dyad.a { (ga, gb) } else { (gb, ga) };
    let n = ga.len();
    let k = thresholds.count();
    let house_hotspots: BTreeSet<&str> = config.house_hotspots.iter().map(|s| s.as_str()).collect();

    let mut series = DyadSeries {
        dyad,
        bin_width_ms: ga.bin_width_ms,
        bin_starts: ga.bin_starts.clone(),
        distance_m: vec![None; n],
        within: vec![vec![None; n]; k],
        both_on_campus: vec![None; n],
        both_in_house: vec![None; n],
        common_wifi: vec![None; n],
        common_house_wifi: vec![None; n],
    };

    for i in 0..n {
        if let (Some(pa), Some(pb)) = (ga.locations[i], gb.locations[i]) {
            let d = haversine(pa, pb);
            series.distance_m[i] = Some(d);
            for (t, within) in thresholds.thresholds_m.iter().zip(series.within.iter_mut()) {
                within[i] = Some(d <= *t);
            }
            series.both_on_campus[i] =
                Some(config.campus_geobox.contains(pa) && config.campus_geobox.contains(pb));
            series.both_in_house[i] =
                Some(config.house_geobox.contains(pa) && config.house_geobox.contains(pb));
        }
        let (ha, hb) = (&ga.hotspots[i], &gb.hotspots[i]);
        if !ha.is_empty() && !hb.is_empty() {
            let mut common = ha.intersection(hb);
            series.common_wifi[i] = Some(common.next().is_some());
            series.common_house_wifi[i] = Some(
                ha.intersection(hb)
                    .any(|h| house_hotspots.contains(h.as_str())),
            );
        }
    }
    Ok(series)
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct DyadEligibility {
    /// All unordered pairs over the survey roster.
    pub potential: usize,
    /// Pairs where both devices have grids and at least one bin of shared
    /// location or shared WiFi coverage.
    pub eligible: usize,
}

/// Which survey pairs have enough sensor overlap to ever produce a feature
/// row. `grids` must all share the timeline.
pub fn eligible_dyads(
    grids: &[TimelineGrid],
    survey_nodes: &BTreeSet<String>,
) -> (Vec<Dyad>, DyadEligibility) {
    let nodes: Vec<&String> = survey_nodes.iter().collect();
    let mut report = DyadEligibility::default();
    let mut eligible = Vec::new();
    let by_id: std::collections::BTreeMap<&str, &TimelineGrid> =
        grids.iter().map(|g| (g.device_id.as_str(), g)).collect();
    for i in 0..nodes.len() {
        for j in (i + 1)..nodes.len() {
            report.potential += 1;
            let (Some(ga), Some(gb)) = (by_id.get(nodes[i].as_str()), by_id.get(nodes[j].as_str()))
            else {
                continue;
            };
            let overlap = (0..ga.len()).any(|t| {
                (ga.locations[t].is_some() && gb.locations[t].is_some())
                    || (!ga.hotspots[t].is_empty() && !gb.hotspots[t].is_empty())
            });
            if overlap {
                eligible.push(Dyad {
                    a: nodes[i].to_string(),
                    b: nodes[j].to_string(),
                });
            }
        }
    }
    report.eligible = eligible.len();
    (eligible, report)
}

/// Pooled sub-cutoff distances across all grid pairs, aggregated to whole
/// metres (floor) so the clustering input stays small. The weight of each
/// value is the number of dyad-bins that produced it.
pub fn pooled_distances(grids: &[TimelineGrid], cutoff_m: f64) -> Vec<WeightedSample> {
    let mut counts: std::collections::BTreeMap<i64, f64> = std::collections::BTreeMap::new();
    for i in 0..grids.len() {
        for j in (i + 1)..grids.len() {
            let (ga, gb) = (&grids[i], &grids[j]);
            debug_assert_eq!(ga.bin_starts, gb.bin_starts);
            for t in 0..ga.len() {
                if let (Some(pa), Some(pb)) = (ga.locations[t], gb.locations[t]) {
                    let d = haversine(pa, pb);
                    if d < cutoff_m {
                        *counts.entry(d.floor() as i64).or_insert(0.0) += 1.0;
                    }
                }
            }
        }
    }
    counts
        .into_iter()
        .map(|(value, weight)| WeightedSample {
            value: value as f64,
            weight,
        })
        .collect()
}

/// Canonical per-dyad CSV dump: one row per bin, empty fields for missing.
pub fn write_dyad_csv(series: &DyadSeries, mut out: impl Write) -> std::io::Result<()> {
    let names = binary_series_names(series.within.len());
    writeln!(out, "bin_start_ms,distance_m,{}", names.join(","))?;
    let fmt_bool = |v: Option<bool>| match v {
        Some(true) => "1",
        Some(false) => "0",
        None => "",
    };
    for i in 0..series.len() {
        let distance = series.distance_m[i].map(|d| d.to_string()).unwrap_or_default();
        let mut row = format!("{},{}", series.bin_starts[i], distance);
        for (_, s) in series.binary_series() {
            row.push(',');
            row.push_str(fmt_bool(s[i]));
        }
        writeln!(out, "{row}")?;
    }
    Ok(())
}
