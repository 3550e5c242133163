//! Raw log parsing and the per-device bin grid.
//!
//! Input files are plain CSV (see the `parse_*` functions for the column
//! contracts). Malformed rows are collected into an [`IngestReport`] with
//! line numbers rather than silently dropped; only an unparseable header is
//! fatal. Observations are then snapped onto the shared 10-minute timeline
//! from [`StudyConfig::timeline`], with bins overlapping an exclusion
//! window removed. A bin with no location reading is explicitly missing and
//! is never imputed unless the LVCF option is switched on.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::StudyConfig;
use crate::error::{Error, Result};
use crate::geo::LatLon;

#[derive(Clone, Debug, PartialEq)]
pub struct LocationSample {
    pub device_id: String,
    pub timestamp_ms: i64,
    pub lat: f64,
    pub lon: f64,
    pub accuracy_m: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WifiObservation {
    pub device_id: String,
    pub timestamp_ms: i64,
    pub hotspot_id: String,
}

/// One directed survey response: did `ego` report a tie of `tie_type` to
/// `alter` at the given wave?
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurveyTie {
    pub wave: u8,
    pub ego: String,
    pub alter: String,
    pub tie_type: TieType,
    pub value: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieType {
    Interact,
    Friend,
    CloseFriend,
    AdvicePersonal,
    AdviceProfessional,
}

impl TieType {
    pub const ALL: [TieType; 5] = [
        TieType::Interact,
        TieType::Friend,
        TieType::CloseFriend,
        TieType::AdvicePersonal,
        TieType::AdviceProfessional,
    ];

    pub fn parse(s: &str) -> Option<TieType> {
        match s {
            "interact" => Some(TieType::Interact),
            "friend" => Some(TieType::Friend),
            "close_friend" => Some(TieType::CloseFriend),
            "advice_personal" => Some(TieType::AdvicePersonal),
            "advice_professional" => Some(TieType::AdviceProfessional),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            TieType::Interact => "interact",
            TieType::Friend => "friend",
            TieType::CloseFriend => "close_friend",
            TieType::AdvicePersonal => "advice_personal",
            TieType::AdviceProfessional => "advice_professional",
        }
    }
}

/// Per-device observations on the shared timeline. `bin_starts[i]` holds the
/// bin's start timestamp; `locations[i]` is the reading nearest the bin start
/// among readings inside the bin (`None` = missing); `hotspots[i]` is the
/// union of hotspot detections inside the bin (empty = no scan recorded).
#[derive(Clone, Debug, PartialEq)]
pub struct TimelineGrid {
    pub device_id: String,
    pub bin_width_ms: i64,
    pub bin_starts: Vec<i64>,
    pub locations: Vec<Option<LatLon>>,
    pub hotspots: Vec<BTreeSet<String>>,
}

impl TimelineGrid {
    pub fn len(&self) -> usize {
        self.bin_starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bin_starts.is_empty()
    }

    pub fn covered_bins(&self) -> usize {
        self.locations.iter().filter(|l| l.is_some()).count()
    }

    pub fn missing_bins(&self) -> usize {
        self.len() - self.covered_bins()
    }

    pub fn wifi_bins(&self) -> usize {
        self.hotspots.iter().filter(|h| !h.is_empty()).count()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RowIssue {
    pub file: String,
    pub line: u64,
    pub message: String,
}

/// What happened during parsing: accepted row counts, rejected rows with
/// line numbers, and rows filtered by the study window or accuracy option.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct IngestReport {
    pub location_rows: usize,
    pub wifi_rows: usize,
    pub survey_rows: usize,
    pub location_filtered: usize,
    pub wifi_filtered: usize,
    pub rejected: Vec<RowIssue>,
    pub warnings: Vec<String>,
}

impl IngestReport {
    fn reject(&mut self, file: &str, line: u64, message: impl Into<String>) {
        self.rejected.push(RowIssue {
            file: file.to_string(),
            line,
            message: message.into(),
        });
    }
}

fn open_csv(path: &Path, expected_header: &[&str]) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| Error::contract(format!("{}: unparseable header: {e}", path.display())))?;
    let got: Vec<&str> = headers.iter().collect();
    if got != expected_header {
        return Err(Error::contract(format!(
            "{}: header {:?} does not match expected {:?}",
            path.display(),
            got,
            expected_header
        )));
    }
    Ok(reader)
}

fn field<'a>(record: &'a csv::StringRecord, idx: usize) -> &'a str {
    record.get(idx).unwrap_or("").trim()
}

/// Identifier fields must survive a round trip through the CSV and grid
/// export formats, so separators are rejected up front.
fn valid_id(s: &str) -> bool {
    !s.is_empty() && !s.contains([',', ';', '\n', '\r', '"'])
}

/// Parse the three input files against their CSV contracts.
///
/// Contracts:
/// - locations: `device_id,timestamp_ms,lat,lon,accuracy_m` (accuracy may be blank)
/// - wifi: `device_id,timestamp_ms,hotspot_id`
/// - surveys: `wave,ego,alter,tie_type,value`
///
/// Row-level violations are collected into the report; samples outside the
/// study window (or failing the optional accuracy filter) are counted as
/// filtered. Survey ties are checked against the roster built from the file
/// itself: self-ties and duplicate `(wave, ego, alter, tie_type)` keys are
/// rejected.
pub fn parse_inputs(
    location_file: &Path,
    wifi_file: &Path,
    survey_file: &Path,
    config: &StudyConfig,
) -> Result<(Vec<LocationSample>, Vec<WifiObservation>, Vec<SurveyTie>, IngestReport)> {
    let mut report = IngestReport::default();
    let samples = parse_locations(location_file, config, &mut report)?;
    let wifi = parse_wifi(wifi_file, config, &mut report)?;
    let ties = parse_surveys(survey_file, &mut report)?;
    if samples.is_empty() {
        report
            .warnings
            .push(format!("{}: no usable location samples", location_file.display()));
    }
    if wifi.is_empty() {
        report
            .warnings
            .push(format!("{}: no usable wifi observations", wifi_file.display()));
    }
    Ok((samples, wifi, ties, report))
}

fn parse_locations(path: &Path, config: &StudyConfig, report: &mut IngestReport) -> Result<Vec<LocationSample>> {
    let mut reader = open_csv(path, &["device_id", "timestamp_ms", "lat", "lon", "accuracy_m"])?;
    let name = path.display().to_string();
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i as u64 + 2; // 1-based, after the header
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                report.reject(&name, line, format!("malformed row: {e}"));
                continue;
            }
        };
        let device_id = field(&record, 0).to_string();
        if !valid_id(&device_id) {
            report.reject(&name, line, "invalid device_id");
            continue;
        }
        let Ok(timestamp_ms) = field(&record, 1).parse::<i64>() else {
            report.reject(&name, line, "timestamp_ms is not an integer");
            continue;
        };
        let (Ok(lat), Ok(lon)) = (field(&record, 2).parse::<f64>(), field(&record, 3).parse::<f64>()) else {
            report.reject(&name, line, "lat/lon are not numbers");
            continue;
        };
        if !LatLon::new(lat, lon).is_valid() {
            report.reject(&name, line, format!("coordinates ({lat}, {lon}) out of range"));
            continue;
        }
        let accuracy_field = field(&record, 4);
        let accuracy_m = if accuracy_field.is_empty() {
            None
        } else {
            match accuracy_field.parse::<f64>() {
                Ok(a) if a >= 0.0 => Some(a),
                _ => {
                    report.reject(&name, line, "accuracy_m is not a non-negative number");
                    continue;
                }
            }
        };
        if timestamp_ms < config.study_start_ms || timestamp_ms >= config.study_end_ms {
            report.location_filtered += 1;
            continue;
        }
        if let (Some(min_acc), Some(acc)) = (config.min_accuracy_m, accuracy_m) {
            if acc > min_acc {
                report.location_filtered += 1;
                continue;
            }
        }
        report.location_rows += 1;
        out.push(LocationSample {
            device_id,
            timestamp_ms,
            lat,
            lon,
            accuracy_m,
        });
    }
    Ok(out)
}

fn parse_wifi(path: &Path, config: &StudyConfig, report: &mut IngestReport) -> Result<Vec<WifiObservation>> {
    let mut reader = open_csv(path, &["device_id", "timestamp_ms", "hotspot_id"])?;
    let name = path.display().to_string();
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                report.reject(&name, line, format!("malformed row: {e}"));
                continue;
            }
        };
        let device_id = field(&record, 0).to_string();
        let hotspot_id = field(&record, 2).to_string();
        if !valid_id(&device_id) {
            report.reject(&name, line, "invalid device_id");
            continue;
        }
        if !valid_id(&hotspot_id) {
            report.reject(&name, line, "invalid hotspot_id");
            continue;
        }
        let Ok(timestamp_ms) = field(&record, 1).parse::<i64>() else {
            report.reject(&name, line, "timestamp_ms is not an integer");
            continue;
        };
        if timestamp_ms < config.study_start_ms || timestamp_ms >= config.study_end_ms {
            report.wifi_filtered += 1;
            continue;
        }
        report.wifi_rows += 1;
        out.push(WifiObservation {
            device_id,
            timestamp_ms,
            hotspot_id,
        });
    }
    Ok(out)
}

fn parse_surveys(path: &Path, report: &mut IngestReport) -> Result<Vec<SurveyTie>> {
    let mut reader = open_csv(path, &["wave", "ego", "alter", "tie_type", "value"])?;
    let name = path.display().to_string();
    let mut out: Vec<SurveyTie> = Vec::new();
    let mut seen: BTreeSet<(u8, String, String, TieType)> = BTreeSet::new();
    for (i, record) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                report.reject(&name, line, format!("malformed row: {e}"));
                continue;
            }
        };
        let Ok(wave) = field(&record, 0).parse::<u8>() else {
            report.reject(&name, line, "wave is not an integer");
            continue;
        };
        if !(1..=3).contains(&wave) {
            report.reject(&name, line, format!("wave {wave} outside 1..=3"));
            continue;
        }
        let ego = field(&record, 1).to_string();
        let alter = field(&record, 2).to_string();
        if !valid_id(&ego) || !valid_id(&alter) {
            report.reject(&name, line, "invalid ego/alter id");
            continue;
        }
        if ego == alter {
            report.reject(&name, line, "self-tie: ego equals alter");
            continue;
        }
        let Some(tie_type) = TieType::parse(field(&record, 3)) else {
            report.reject(&name, line, format!("unknown tie_type {:?}", field(&record, 3)));
            continue;
        };
        let value = match field(&record, 4) {
            "0" => false,
            "1" => true,
            other => {
                report.reject(&name, line, format!("value {other:?} is not 0/1"));
                continue;
            }
        };
        if !seen.insert((wave, ego.clone(), alter.clone(), tie_type)) {
            report.reject(&name, line, "duplicate (wave, ego, alter, tie_type)");
            continue;
        }
        report.survey_rows += 1;
        out.push(SurveyTie {
            wave,
            ego,
            alter,
            tie_type,
            value,
        });
    }
    Ok(out)
}

/// Snap samples and wifi observations onto the shared timeline, one grid per
/// device. Within a bin the location reading nearest the bin start wins;
/// exact-timestamp ties are broken by (lat, lon, accuracy) so the result is
/// independent of input row order. Hotspot sets are unions over the bin.
/// A device with zero location samples still gets a grid (all bins missing).
pub fn build_grid(
    samples: &[LocationSample],
    wifi_obs: &[WifiObservation],
    config: &StudyConfig,
) -> Vec<TimelineGrid> {
    let timeline = config.timeline();
    let width = config.bin_width_ms;
    let mut bin_index: BTreeMap<i64, usize> = BTreeMap::new();
    for (i, &t) in timeline.iter().enumerate() {
        bin_index.insert(t, i);
    }
    let locate_bin = |ts: i64| -> Option<usize> {
        let start = config.study_start_ms + (ts - config.study_start_ms).div_euclid(width) * width;
        bin_index.get(&start).copied()
    };

    let mut devices: BTreeSet<&str> = BTreeSet::new();
    devices.extend(samples.iter().map(|s| s.device_id.as_str()));
    devices.extend(wifi_obs.iter().map(|w| w.device_id.as_str()));

    let mut grids: BTreeMap<&str, TimelineGrid> = devices
        .into_iter()
        .map(|d| {
            (
                d,
                TimelineGrid {
                    device_id: d.to_string(),
                    bin_width_ms: width,
                    bin_starts: timeline.clone(),
                    locations: vec![None; timeline.len()],
                    hotspots: vec![BTreeSet::new(); timeline.len()],
                },
            )
        })
        .collect();

    let mut sorted: Vec<&LocationSample> = samples.iter().collect();
    sorted.sort_by(|a, b| {
        (a.timestamp_ms, a.lat, a.lon, a.accuracy_m.unwrap_or(f64::INFINITY))
            .partial_cmp(&(b.timestamp_ms, b.lat, b.lon, b.accuracy_m.unwrap_or(f64::INFINITY)))
            .expect("finite sample fields")
    });
    for sample in sorted {
        let Some(bin) = locate_bin(sample.timestamp_ms) else {
            continue; // excluded window
        };
        let grid = grids.get_mut(sample.device_id.as_str()).expect("device present");
        // First reading to claim the bin is nearest to the bin start.
        if grid.locations[bin].is_none() {
            grid.locations[bin] = Some(LatLon::new(sample.lat, sample.lon));
        }
    }
    for obs in wifi_obs {
        let Some(bin) = locate_bin(obs.timestamp_ms) else {
            continue;
        };
        let grid = grids.get_mut(obs.device_id.as_str()).expect("device present");
        grid.hotspots[bin].insert(obs.hotspot_id.clone());
    }

    if let Some(max_carry) = config.lvcf_max_carry_ms {
        for grid in grids.values_mut() {
            carry_forward(grid, max_carry);
        }
    }

    grids.into_values().collect()
}

/// Bounded last-value-carried-forward: fill a missing bin from the most
/// recent reading no older than `max_carry_ms`.
fn carry_forward(grid: &mut TimelineGrid, max_carry_ms: i64) {
    let mut last: Option<(i64, LatLon)> = None;
    for i in 0..grid.len() {
        match grid.locations[i] {
            Some(loc) => last = Some((grid.bin_starts[i], loc)),
            None => {
                if let Some((t, loc)) = last {
                    if grid.bin_starts[i] - t <= max_carry_ms {
                        grid.locations[i] = Some(loc);
                    }
                }
            }
        }
    }
}

/// One point of the gap survival curve: the fraction of all grid time that
/// sits inside coverage gaps strictly longer than `gap_ms`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SurvivalPoint {
    pub gap_ms: i64,
    pub fraction_exceeding: f64,
}

/// Survival function of location-coverage gaps, pooled over all devices.
/// A gap is a maximal run of time-adjacent missing bins; runs do not bridge
/// timeline discontinuities (exclusion windows). The curve is evaluated at
/// every multiple of the bin width from 0 to the longest gap, so it is
/// monotone non-increasing and ends at 0. The value at 0 is the overall
/// fraction of time not covered.
pub fn coverage_survival(grids: &[TimelineGrid]) -> Result<Vec<SurvivalPoint>> {
    if grids.is_empty() {
        return Err(Error::contract("coverage_survival needs at least one grid"));
    }
    let width = grids[0].bin_width_ms;
    let mut gap_bins: Vec<usize> = Vec::new();
    let mut total_bins: usize = 0;
    for grid in grids {
        total_bins += grid.len();
        let mut run = 0usize;
        for i in 0..grid.len() {
            let adjacent = i > 0 && grid.bin_starts[i] - grid.bin_starts[i - 1] == width;
            if !adjacent && run > 0 {
                gap_bins.push(run);
                run = 0;
            }
            if grid.locations[i].is_none() {
                run += 1;
            } else if run > 0 {
                gap_bins.push(run);
                run = 0;
            }
        }
        if run > 0 {
            gap_bins.push(run);
        }
    }
    if total_bins == 0 {
        return Err(Error::contract("coverage_survival needs a non-empty timeline"));
    }
    let max_gap = gap_bins.iter().copied().max().unwrap_or(0);
    let total_time = (total_bins as f64) * (width as f64);
    let mut points = Vec::with_capacity(max_gap + 1);
    for k in 0..=max_gap {
        // `.max(0.0)` turns the -0.0 an empty `Sum` yields back into +0.0.
        let exceeding: f64 = gap_bins
            .iter()
            .filter(|&&g| g > k)
            .map(|&g| g as f64 * width as f64)
            .sum::<f64>()
            .max(0.0);
        points.push(SurvivalPoint {
            gap_ms: k as i64 * width,
            fraction_exceeding: exceeding / total_time,
        });
    }
    Ok(points)
}

const GRID_HEADER: &str = "bin_start_ms,lat,lon,hotspot_ids";

/// Canonical per-device grid export: `bin_start_ms,lat,lon,hotspot_ids`
/// with empty fields for missing values and hotspot ids semicolon-joined in
/// sorted order. Re-ingesting this file reproduces the grid bit-identically.
pub fn write_grid_csv(grid: &TimelineGrid, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{GRID_HEADER}")?;
    for i in 0..grid.len() {
        let (lat, lon) = match grid.locations[i] {
            Some(p) => (p.lat.to_string(), p.lon.to_string()),
            None => (String::new(), String::new()),
        };
        let hotspots: Vec<&str> = grid.hotspots[i].iter().map(|s| s.as_str()).collect();
        writeln!(out, "{},{},{},{}", grid.bin_starts[i], lat, lon, hotspots.join(";"))?;
    }
    Ok(())
}

/// Parse a canonical grid export back into a [`TimelineGrid`].
pub fn read_grid_csv(device_id: &str, bin_width_ms: i64, reader: impl std::io::Read) -> Result<TimelineGrid> {
    let mut lines = BufReader::new(reader).lines();
    let header = lines
        .next()
        .transpose()
        .map_err(|e| Error::contract(format!("grid csv: {e}")))?
        .ok_or_else(|| Error::contract("grid csv: empty file"))?;
    if header != GRID_HEADER {
        return Err(Error::contract(format!(
            "grid csv: header {header:?} does not match {GRID_HEADER:?}"
        )));
    }
    let mut grid = TimelineGrid {
        device_id: device_id.to_string(),
        bin_width_ms,
        bin_starts: Vec::new(),
        locations: Vec::new(),
        hotspots: Vec::new(),
    };
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::contract(format!("grid csv line {}: {e}", i + 2)))?;
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 4 {
            return Err(Error::contract(format!("grid csv line {}: expected 4 fields", i + 2)));
        }
        let t: i64 = parts[0]
            .parse()
            .map_err(|_| Error::contract(format!("grid csv line {}: bad bin_start_ms", i + 2)))?;
        let location = match (parts[1], parts[2]) {
            ("", "") => None,
            (lat, lon) => {
                let lat: f64 = lat
                    .parse()
                    .map_err(|_| Error::contract(format!("grid csv line {}: bad lat", i + 2)))?;
                let lon: f64 = lon
                    .parse()
                    .map_err(|_| Error::contract(format!("grid csv line {}: bad lon", i + 2)))?;
                Some(LatLon::new(lat, lon))
            }
        };
        let hotspots: BTreeSet<String> = if parts[3].is_empty() {
            BTreeSet::new()
        } else {
            parts[3].split(';').map(|s| s.to_string()).collect()
        };
        grid.bin_starts.push(t);
        grid.locations.push(location);
        grid.hotspots.push(hotspots);
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{StudyConfig, ThresholdMode, DEFAULT_BIN_WIDTH_MS, MS_PER_DAY};
    use crate::geo::GeoBox;
    use std::io::Cursor;

    fn config() -> StudyConfig {
        StudyConfig {
            study_start_ms: 0,
            study_end_ms: 10 * MS_PER_DAY,
            exclusion_windows: vec![],
            bin_width_ms: DEFAULT_BIN_WIDTH_MS,
            timezone: "UTC".to_string(),
            campus_geobox: GeoBox {
                lat_min: 40.44,
                lat_max: 40.45,
                lon_min: -79.95,
                lon_max: -79.94,
            },
            house_geobox: GeoBox {
                lat_min: 40.4500,
                lat_max: 40.4510,
                lon_min: -79.9600,
                lon_max: -79.9590,
            },
            distance_elbow_m: 2000.0,
            wave_times_ms: [0, 4 * MS_PER_DAY, 8 * MS_PER_DAY],
            threshold_mode: ThresholdMode::Cluster,
            static_thresholds_m: vec![],
            house_hotspots: vec![],
            min_accuracy_m: None,
            lvcf_max_carry_ms: None,
        }
    }

    fn write_file(dir: &Path, name: &str, contents: &str) -> std::path::PathBuf {
        let path = dir.join(name);
        std::fs::write(&path, contents).unwrap();
        path
    }

    #[test]
    fn parse_inputs_counts_and_rejects() {
        let dir = tempfile::tempdir().unwrap();
        let loc = write_file(
            dir.path(),
            "locations.csv",
            "device_id,timestamp_ms,lat,lon,accuracy_m\n\
             a,1000,40.0,-79.0,10\n\
             a,2000,95.0,-79.0,10\n\
             b,3000,40.1,-79.1,\n",
        );
        let wifi = write_file(dir.path(), "wifi.csv", "device_id,timestamp_ms,hotspot_id\na,1000,h1\n");
        let survey = write_file(
            dir.path(),
            "surveys.csv",
            "wave,ego,alter,tie_type,value\n1,x,y,friend,1\n1,x,x,friend,1\n",
        );
        let (samples, wifi_obs, ties, report) = parse_inputs(&loc, &wifi, &survey, &config()).unwrap();
        // 3-row fixture with one bad latitude: 2 samples + 1 rejected.
        assert_eq!(samples.len(), 2);
        assert_eq!(wifi_obs.len(), 1);
        assert_eq!(ties.len(), 1);
        let rejects: Vec<&RowIssue> = report.rejected.iter().collect();
        assert_eq!(rejects.len(), 2);
        assert_eq!(rejects[0].line, 3); // bad latitude
        assert!(rejects[1].message.contains("self-tie"));
    }

    #[test]
    fn empty_location_file_warns() {
        let dir = tempfile::tempdir().unwrap();
        let loc = write_file(dir.path(), "locations.csv", "device_id,timestamp_ms,lat,lon,accuracy_m\n");
        let wifi = write_file(dir.path(), "wifi.csv", "device_id,timestamp_ms,hotspot_id\n");
        let survey = write_file(dir.path(), "surveys.csv", "wave,ego,alter,tie_type,value\n");
        let (samples, _, _, report) = parse_inputs(&loc, &wifi, &survey, &config()).unwrap();
        assert!(samples.is_empty());
        assert!(report.warnings.iter().any(|w| w.contains("location")));
    }

    #[test]
    fn bad_header_is_fatal() {
        let dir = tempfile::tempdir().unwrap();
        let loc = write_file(dir.path(), "locations.csv", "device,when,lat,lon,acc\n");
        let wifi = write_file(dir.path(), "wifi.csv", "device_id,timestamp_ms,hotspot_id\n");
        let survey = write_file(dir.path(), "surveys.csv", "wave,ego,alter,tie_type,value\n");
        assert!(parse_inputs(&loc, &wifi, &survey, &config()).is_err());
    }

    #[test]
    fn nearest_to_bin_start_wins() {
        let c = config();
        let samples = vec![
            LocationSample {
                device_id: "a".into(),
                timestamp_ms: 9 * 60_000,
                lat: 41.0,
                lon: -79.0,
                accuracy_m: None,
            },
            LocationSample {
                device_id: "a".into(),
                timestamp_ms: 60_000,
                lat: 40.0,
                lon: -79.0,
                accuracy_m: None,
            },
        ];
        let grids = build_grid(&samples, &[], &c);
        assert_eq!(grids.len(), 1);
        assert_eq!(grids[0].locations[0], Some(LatLon::new(40.0, -79.0)));
        assert_eq!(grids[0].covered_bins(), 1);
    }

    #[test]
    fn exclusion_window_removes_bins() {
        let mut c = config();
        c.exclusion_windows = vec![(MS_PER_DAY, 2 * MS_PER_DAY)];
        let samples = vec![LocationSample {
            device_id: "a".into(),
            timestamp_ms: MS_PER_DAY + 5_000,
            lat: 40.0,
            lon: -79.0,
            accuracy_m: None,
        }];
        let grids = build_grid(&samples, &[], &c);
        assert_eq!(grids[0].len(), 9 * 144);
        assert_eq!(grids[0].covered_bins(), 0);
        assert!(grids[0]
            .bin_starts
            .iter()
            .all(|&t| !(MS_PER_DAY..2 * MS_PER_DAY).contains(&t)));
    }

    #[test]
    fn full_day_of_readings_covers_144_bins() {
        let mut c = config();
        c.study_end_ms = MS_PER_DAY;
        c.wave_times_ms = [0, MS_PER_DAY / 2, MS_PER_DAY];
        let samples: Vec<LocationSample> = (0..144)
            .map(|i| LocationSample {
                device_id: "a".into(),
                timestamp_ms: i * DEFAULT_BIN_WIDTH_MS,
                lat: 40.0,
                lon: -79.0,
                accuracy_m: None,
            })
            .collect();
        let grids = build_grid(&samples, &[], &c);
        assert_eq!(grids[0].len(), 144);
        assert_eq!(grids[0].missing_bins(), 0);
    }

    #[test]
    fn grid_independent_of_row_order() {
        let c = config();
        let mut samples = vec![
            LocationSample {
                device_id: "a".into(),
                timestamp_ms: 1000,
                lat: 40.0,
                lon: -79.0,
                accuracy_m: Some(5.0),
            },
            LocationSample {
                device_id: "a".into(),
                timestamp_ms: 1000,
                lat: 40.5,
                lon: -79.5,
                accuracy_m: Some(3.0),
            },
            LocationSample {
                device_id: "a".into(),
                timestamp_ms: 500_000,
                lat: 40.9,
                lon: -79.9,
                accuracy_m: None,
            },
        ];
        let forward = build_grid(&samples, &[], &c);
        samples.reverse();
        let reversed = build_grid(&samples, &[], &c);
        assert_eq!(forward, reversed);
    }

    #[test]
    fn wifi_only_device_gets_all_missing_grid() {
        let c = config();
        let wifi = vec![WifiObservation {
            device_id: "w".into(),
            timestamp_ms: 1000,
            hotspot_id: "h1".into(),
        }];
        let grids = build_grid(&[], &wifi, &c);
        assert_eq!(grids.len(), 1);
        assert_eq!(grids[0].covered_bins(), 0);
        assert_eq!(grids[0].wifi_bins(), 1);
    }

    #[test]
    fn lvcf_bounded_carry() {
        let mut c = config();
        c.lvcf_max_carry_ms = Some(2 * DEFAULT_BIN_WIDTH_MS);
        let samples = vec![LocationSample {
            device_id: "a".into(),
            timestamp_ms: 0,
            lat: 40.0,
            lon: -79.0,
            accuracy_m: None,
        }];
        let grids = build_grid(&samples, &[], &c);
        assert!(grids[0].locations[1].is_some());
        assert!(grids[0].locations[2].is_some());
        assert!(grids[0].locations[3].is_none());
    }

    #[test]
    fn survival_curve_counts_gap_time() {
        // 80 hours of bins, one 8-hour gap: survival at 4h is 0.1.
        let mut c = config();
        c.study_end_ms = 80 * 3_600_000;
        c.wave_times_ms = [0, 40 * 3_600_000, 80 * 3_600_000];
        let gap_start = 10 * 3_600_000i64;
        let gap_end = 18 * 3_600_000i64;
        let samples: Vec<LocationSample> = (0..(80 * 6))
            .map(|i| i as i64 * DEFAULT_BIN_WIDTH_MS)
            .filter(|&t| !(gap_start..gap_end).contains(&t))
            .map(|t| LocationSample {
                device_id: "a".into(),
                timestamp_ms: t,
                lat: 40.0,
                lon: -79.0,
                accuracy_m: None,
            })
            .collect();
        let grids = build_grid(&samples, &[], &c);
        let curve = coverage_survival(&grids).unwrap();
        let at = |ms: i64| {
            curve
                .iter()
                .find(|p| p.gap_ms == ms)
                .map(|p| p.fraction_exceeding)
                .unwrap_or(0.0)
        };
        assert!((at(4 * 3_600_000) - 0.1).abs() < 1e-12);
        assert!((at(0) - 0.1).abs() < 1e-12);
        assert_eq!(at(8 * 3_600_000), 0.0);
        assert!(curve.windows(2).all(|w| w[0].fraction_exceeding >= w[1].fraction_exceeding));
    }

    #[test]
    fn survival_curve_fully_covered_is_zero() {
        let mut c = config();
        c.study_end_ms = MS_PER_DAY;
        c.wave_times_ms = [0, MS_PER_DAY / 2, MS_PER_DAY];
        let samples: Vec<LocationSample> = (0..144)
            .map(|i| LocationSample {
                device_id: "a".into(),
                timestamp_ms: i * DEFAULT_BIN_WIDTH_MS,
                lat: 40.0,
                lon: -79.0,
                accuracy_m: None,
            })
            .collect();
        let grids = build_grid(&samples, &[], &c);
        let curve = coverage_survival(&grids).unwrap();
        assert!(curve.iter().all(|p| p.fraction_exceeding == 0.0));
    }

    #[test]
    fn grid_csv_round_trip_is_bit_identical() {
        let c = config();
        let samples = vec![
            LocationSample {
                device_id: "a".into(),
                timestamp_ms: 1000,
                lat: 40.123456789,
                lon: -79.987654321,
                accuracy_m: None,
            },
            LocationSample {
                device_id: "a".into(),
                timestamp_ms: 1_300_000,
                lat: 40.2,
                lon: -79.2,
                accuracy_m: None,
            },
        ];
        let wifi = vec![
            WifiObservation {
                device_id: "a".into(),
                timestamp_ms: 1000,
                hotspot_id: "h2".into(),
            },
            WifiObservation {
                device_id: "a".into(),
                timestamp_ms: 2000,
                hotspot_id: "h1".into(),
            },
        ];
        let grids = build_grid(&samples, &wifi, &c);
        let mut first = Vec::new();
        write_grid_csv(&grids[0], &mut first).unwrap();
        let parsed = read_grid_csv("a", c.bin_width_ms, Cursor::new(&first)).unwrap();
        assert_eq!(parsed, grids[0]);
        let mut second = Vec::new();
        write_grid_csv(&parsed, &mut second).unwrap();
        assert_eq!(first, second);
    }
}
