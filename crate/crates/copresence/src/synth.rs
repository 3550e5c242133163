//! Synthetic cohorts with known ground truth.
//!
//! Nodes move between a small set of anchors: six campus buildings, one
//! shared house, and a personal home per non-resident. Movement follows a
//! local-time schedule (home at night, campus on weekday daytime). Friends
//! co-visit: when a node heads out, it joins an already-placed friend's
//! anchor with probability `co_location_lift`, scaled up for mutual and
//! close ties. Surveys cover all five tie types at three waves; behaviour
//! inside a period blends the period's opening and closing networks, so a
//! tie change leaves a mid-period trace.
//!
//! The generator emits exactly the ingest CSV contracts plus a ground-truth
//! JSON, and is bit-reproducible from `SynthConfig::seed`.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use chrono::{Datelike, TimeZone, Timelike};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::config::{StudyConfig, ThresholdMode, MS_PER_DAY};
use crate::error::{Error, Result};
use crate::geo::{GeoBox, LatLon};
use crate::ingest::{LocationSample, SurveyTie, TieType, WifiObservation};
use crate::substream;

/// Monday 2023-01-09 00:00 in America/New_York.
const STUDY_START_MS: i64 = 1_673_240_400_000;
const TIMEZONE: &str = "America/New_York";
const METERS_PER_DEG_LAT: f64 = 111_320.0;

/// Campus center and building offsets (east_m, north_m) from it.
const CAMPUS_CENTER: (f64, f64) = (40.444, -79.944);
const CAMPUS_OFFSETS_M: [(f64, f64); 6] = [
    (-250.0, -300.0),
    (-50.0, -150.0),
    (180.0, -280.0),
    (-220.0, 150.0),
    (30.0, 220.0),
    (240.0, 120.0),
];
const HOUSE_OFFSET_M: (f64, f64) = (-700.0, 800.0);
const HOUSE_ANCHOR: usize = CAMPUS_OFFSETS_M.len();

/// Tie-strength multipliers applied to `co_location_lift`.
const MULT_ONE_SIDED: f64 = 1.0;
const MULT_MUTUAL: f64 = 1.75;
const MULT_CLOSE: f64 = 2.5;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_nodes: usize,
    /// The first `house_residents` nodes live in the shared house.
    pub house_residents: usize,
    /// Study length in days; waves fall on day 0, days/2, and days.
    pub days: i64,
    /// Per-direction probability of a wave-1 friend nomination.
    pub base_tie_prob: f64,
    /// Probability that a one-sided nomination gets reciprocated.
    pub reciprocity_boost: f64,
    /// Fraction of friend nominations that are also close friendships.
    pub close_fraction: f64,
    /// Per-wave probability that a directed tie slot toggles.
    pub change_rate: f64,
    /// Per-bin probability scale of joining an already-placed friend.
    pub co_location_lift: f64,
    /// Positional noise around an anchor, standard deviation in meters.
    pub noise_sd_m: f64,
    /// Per-device-bin probability that no location sample is emitted.
    pub missing_rate: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_nodes: 48,
            house_residents: 10,
            days: 56,
            base_tie_prob: 0.10,
            reciprocity_boost: 0.6,
            close_fraction: 0.35,
            change_rate: 0.13,
            co_location_lift: 0.55,
            noise_sd_m: 25.0,
            missing_rate: 0.25,
            seed: 7,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_nodes < 3 {
            return Err(Error::contract("n_nodes must be at least 3"));
        }
        if self.house_residents > self.n_nodes {
            return Err(Error::contract("house_residents cannot exceed n_nodes"));
        }
        if self.days < 2 {
            return Err(Error::contract("days must be at least 2"));
        }
        for (name, p) in [
            ("base_tie_prob", self.base_tie_prob),
            ("reciprocity_boost", self.reciprocity_boost),
            ("close_fraction", self.close_fraction),
            ("change_rate", self.change_rate),
            ("co_location_lift", self.co_location_lift),
            ("missing_rate", self.missing_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::contract(format!("{name} {p} outside [0, 1]")));
            }
        }
        if !(self.noise_sd_m >= 0.0) {
            return Err(Error::contract("noise_sd_m must be non-negative"));
        }
        Ok(())
    }
}

pub fn node_id(i: usize) -> String {
    format!("n{i:03}")
}

/// Planted parameters and directed edge lists, for test assertions.
/// Edge lists are keyed `wave{w}_{tie_label}` and sorted.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroundTruth {
    pub synth: SynthConfig,
    pub nodes: Vec<String>,
    pub residents: Vec<String>,
    pub edges: BTreeMap<String, Vec<(String, String)>>,
}

impl GroundTruth {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("ground truth serializes");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<GroundTruth> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::contract(format!("{}: {e}", path.display())))
    }
}

pub struct SynthDataset {
    pub study: StudyConfig,
    pub locations: Vec<LocationSample>,
    pub wifi: Vec<WifiObservation>,
    pub ties: Vec<SurveyTie>,
    pub truth: GroundTruth,
}

impl SynthDataset {
    /// Emit `locations.csv`, `wifi.csv`, `surveys.csv`, `config.json`, and
    /// `truth.json` under `dir`, matching the ingest CSV contracts.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write_file = |name: &str, body: &dyn Fn(&mut Vec<u8>) -> std::io::Result<()>| -> Result<std::path::PathBuf> {
            let path = dir.join(name);
            let mut buf = Vec::new();
            body(&mut buf).map_err(|e| Error::io(&path, e))?;
            std::fs::write(&path, buf).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        };
        write_file("locations.csv", &|out| {
            writeln!(out, "device_id,timestamp_ms,lat,lon,accuracy_m")?;
            for s in &self.locations {
                let acc = s.accuracy_m.map(|a| a.to_string()).unwrap_or_default();
                writeln!(out, "{},{},{},{},{}", s.device_id, s.timestamp_ms, s.lat, s.lon, acc)?;
            }
            Ok(())
        })?;
        write_file("wifi.csv", &|out| {
            writeln!(out, "device_id,timestamp_ms,hotspot_id")?;
            for w in &self.wifi {
                writeln!(out, "{},{},{}", w.device_id, w.timestamp_ms, w.hotspot_id)?;
            }
            Ok(())
        })?;
        write_file("surveys.csv", &|out| {
            writeln!(out, "wave,ego,alter,tie_type,value")?;
            for t in &self.ties {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    t.wave,
                    t.ego,
                    t.alter,
                    t.tie_type.label(),
                    if t.value { 1 } else { 0 }
                )?;
            }
            Ok(())
        })?;
        self.study.save(&dir.join("config.json"))?;
        self.truth.save(&dir.join("truth.json"))
    }
}

/// Directed tie sets for one wave, by node index.
#[derive(Clone, Debug, Default, PartialEq)]
struct WaveNets {
    friend: BTreeSet<(usize, usize)>,
    close: BTreeSet<(usize, usize)>,
    interact: BTreeSet<(usize, usize)>,
    advice_personal: BTreeSet<(usize, usize)>,
    advice_professional: BTreeSet<(usize, usize)>,
}

impl WaveNets {
    fn by_type(&self, tie: TieType) -> &BTreeSet<(usize, usize)> {
        match tie {
            TieType::Interact => &self.interact,
            TieType::Friend => &self.friend,
            TieType::CloseFriend => &self.close,
            TieType::AdvicePersonal => &self.advice_personal,
            TieType::AdviceProfessional => &self.advice_professional,
        }
    }
}

/// Draw the three waves of directed networks. With `symmetric` every draw
/// applies to both directions of a pair, so all ties come out mutual.
fn plant_networks(c: &SynthConfig, symmetric: bool, rng: &mut impl Rng) -> [WaveNets; 3] {
    let n = c.n_nodes;
    let mut waves: [WaveNets; 3] = Default::default();

    for i in 0..n {
        for j in (i + 1)..n {
            let mut ij = rng.random_bool(c.base_tie_prob);
            let mut ji = rng.random_bool(c.base_tie_prob);
            if symmetric {
                let any = ij || ji;
                ij = any;
                ji = any;
            } else {
                if ij && !ji && rng.random_bool(c.reciprocity_boost) {
                    ji = true;
                }
                if ji && !ij && rng.random_bool(c.reciprocity_boost) {
                    ij = true;
                }
            }
            if ij {
                waves[0].friend.insert((i, j));
            }
            if ji {
                waves[0].friend.insert((j, i));
            }
        }
    }

    for w in 1..3 {
        let mut next = waves[w - 1].friend.clone();
        let toggle = |set: &mut BTreeSet<(usize, usize)>, e: (usize, usize)| {
            if !set.remove(&e) {
                set.insert(e);
            }
        };
        for i in 0..n {
            for j in (i + 1)..n {
                if symmetric {
                    if rng.random_bool(c.change_rate) {
                        toggle(&mut next, (i, j));
                        toggle(&mut next, (j, i));
                    }
                } else {
                    if rng.random_bool(c.change_rate) {
                        toggle(&mut next, (i, j));
                    }
                    if rng.random_bool(c.change_rate) {
                        toggle(&mut next, (j, i));
                    }
                }
            }
        }
        waves[w].friend = next;
    }

    for w in 0..3 {
        let friend = waves[w].friend.clone();
        let mut close = BTreeSet::new();
        let mut interact = friend.clone();
        let mut advice_personal = BTreeSet::new();
        let mut advice_professional = BTreeSet::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let mut pair_draw = |set: &mut BTreeSet<(usize, usize)>, guard: &dyn Fn((usize, usize)) -> bool, p: f64| {
                    if symmetric {
                        if guard((i, j)) && rng.random_bool(p) {
                            set.insert((i, j));
                            set.insert((j, i));
                        }
                    } else {
                        if guard((i, j)) && rng.random_bool(p) {
                            set.insert((i, j));
                        }
                        if guard((j, i)) && rng.random_bool(p) {
                            set.insert((j, i));
                        }
                    }
                };
                pair_draw(&mut close, &|e| friend.contains(&e), c.close_fraction);
                pair_draw(&mut interact, &|_| true, c.base_tie_prob);
                pair_draw(&mut advice_professional, &|_| true, c.base_tie_prob);
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let mut pair_draw = |set: &mut BTreeSet<(usize, usize)>, guard: &dyn Fn((usize, usize)) -> bool, p: f64| {
                    if symmetric {
                        if guard((i, j)) && rng.random_bool(p) {
                            set.insert((i, j));
                            set.insert((j, i));
                        }
                    } else {
                        if guard((i, j)) && rng.random_bool(p) {
                            set.insert((i, j));
                        }
                        if guard((j, i)) && rng.random_bool(p) {
                            set.insert((j, i));
                        }
                    }
                };
                pair_draw(&mut advice_personal, &|e| close.contains(&e), 0.7);
                pair_draw(&mut advice_personal, &|e| !close.contains(&e), c.base_tie_prob / 2.0);
            }
        }
        waves[w].close = close;
        waves[w].interact = interact;
        waves[w].advice_personal = advice_personal;
        waves[w].advice_professional = advice_professional;
    }

    waves
}

/// Full survey grid: every ordered pair answered for every wave and tie
/// type, so all nodes are respondents everywhere.
fn survey_rows(n: usize, waves: &[WaveNets; 3]) -> Vec<SurveyTie> {
    let mut out = Vec::new();
    for (w, nets) in waves.iter().enumerate() {
        for tie in TieType::ALL {
            let set = nets.by_type(tie);
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    out.push(SurveyTie {
                        wave: w as u8 + 1,
                        ego: node_id(i),
                        alter: node_id(j),
                        tie_type: tie,
                        value: set.contains(&(i, j)),
                    });
                }
            }
        }
    }
    out
}

struct Anchor {
    pos: LatLon,
    aps: Vec<String>,
}

fn offset(center: LatLon, east_m: f64, north_m: f64) -> LatLon {
    let lat = center.lat + north_m / METERS_PER_DEG_LAT;
    let lon = center.lon + east_m / (METERS_PER_DEG_LAT * center.lat.to_radians().cos());
    LatLon::new(lat, lon)
}

/// Campus buildings, the shared house, then one home per non-resident.
/// Homes sit 1.3 to 4.8 km out, well clear of both geoboxes.
fn plant_anchors(c: &SynthConfig, rng: &mut impl Rng) -> (Vec<Anchor>, Vec<usize>, Vec<usize>) {
    let center = LatLon::new(CAMPUS_CENTER.0, CAMPUS_CENTER.1);
    let mut anchors: Vec<Anchor> = CAMPUS_OFFSETS_M
        .iter()
        .enumerate()
        .map(|(k, &(e, n))| Anchor {
            pos: offset(center, e, n),
            aps: (0..3).map(|a| format!("ap_c{k}_{a}")).collect(),
        })
        .collect();
    anchors.push(Anchor {
        pos: offset(center, HOUSE_OFFSET_M.0, HOUSE_OFFSET_M.1),
        aps: (0..3).map(|a| format!("ap_house_{a}")).collect(),
    });
    let mut home_anchor = vec![HOUSE_ANCHOR; c.n_nodes];
    for v in 0..c.n_nodes {
        if v < c.house_residents {
            continue;
        }
        let r = 1_300.0 + rng.random::<f64>() * 3_500.0;
        let theta = rng.random::<f64>() * std::f64::consts::TAU;
        home_anchor[v] = anchors.len();
        anchors.push(Anchor {
            pos: offset(center, r * theta.cos(), r * theta.sin()),
            aps: vec![format!("ap_home_{}", node_id(v))],
        });
    }
    let base_anchor = (0..c.n_nodes)
        .map(|_| rng.random_range(0..CAMPUS_OFFSETS_M.len()))
        .collect();
    (anchors, home_anchor, base_anchor)
}

fn study_config(c: &SynthConfig, anchors: &[Anchor]) -> StudyConfig {
    let boxed = |positions: &[LatLon], margin_m: f64| -> GeoBox {
        let mut lat_min = f64::INFINITY;
        let mut lat_max = f64::NEG_INFINITY;
        let mut lon_min = f64::INFINITY;
        let mut lon_max = f64::NEG_INFINITY;
        for p in positions {
            lat_min = lat_min.min(p.lat);
            lat_max = lat_max.max(p.lat);
            lon_min = lon_min.min(p.lon);
            lon_max = lon_max.max(p.lon);
        }
        let dlat = margin_m / METERS_PER_DEG_LAT;
        let dlon = margin_m / (METERS_PER_DEG_LAT * CAMPUS_CENTER.0.to_radians().cos());
        GeoBox {
            lat_min: lat_min - dlat,
            lat_max: lat_max + dlat,
            lon_min: lon_min - dlon,
            lon_max: lon_max + dlon,
        }
    };
    let campus: Vec<LatLon> = anchors[..HOUSE_ANCHOR].iter().map(|a| a.pos).collect();
    let start = STUDY_START_MS;
    StudyConfig {
        study_start_ms: start,
        study_end_ms: start + c.days * MS_PER_DAY,
        exclusion_windows: vec![],
        bin_width_ms: crate::config::DEFAULT_BIN_WIDTH_MS,
        timezone: TIMEZONE.to_string(),
        campus_geobox: boxed(&campus, 150.0),
        house_geobox: boxed(&[anchors[HOUSE_ANCHOR].pos], 60.0),
        distance_elbow_m: crate::config::DEFAULT_DISTANCE_ELBOW_M,
        wave_times_ms: [start, start + (c.days / 2) * MS_PER_DAY, start + c.days * MS_PER_DAY],
        threshold_mode: ThresholdMode::Cluster,
        static_thresholds_m: vec![],
        house_hotspots: anchors[HOUSE_ANCHOR].aps.clone(),
        min_accuracy_m: None,
        lvcf_max_carry_ms: None,
    }
}

/// Lift multiplier for the pair (u, v) under `nets`, `None` if unconnected.
fn tie_mult(nets: &WaveNets, u: usize, v: usize) -> Option<f64> {
    let uv = nets.friend.contains(&(u, v));
    let vu = nets.friend.contains(&(v, u));
    if !uv && !vu {
        return None;
    }
    if uv && vu {
        if nets.close.contains(&(u, v)) && nets.close.contains(&(v, u)) {
            Some(MULT_CLOSE)
        } else {
            Some(MULT_MUTUAL)
        }
    } else {
        Some(MULT_ONE_SIDED)
    }
}

fn plant_traces(
    c: &SynthConfig,
    study: &StudyConfig,
    waves: &[WaveNets; 3],
    anchors: &[Anchor],
    home_anchor: &[usize],
    base_anchor: &[usize],
    rng: &mut impl Rng,
) -> (Vec<LocationSample>, Vec<WifiObservation>) {
    let tz = study.tz().expect("generator timezone is valid");
    let n = c.n_nodes;
    let mut locations = Vec::new();
    let mut wifi = Vec::new();
    let mut placed = vec![0usize; n];

    for &t in &study.timeline() {
        // Behaviour blends the period's opening and closing networks: the
        // closing wave takes over linearly as the period advances.
        let (prev, next, span) = if t < study.wave_times_ms[1] {
            (0, 1, (study.wave_times_ms[0], study.wave_times_ms[1]))
        } else {
            (1, 2, (study.wave_times_ms[1], study.wave_times_ms[2]))
        };
        let alpha = (t - span.0) as f64 / (span.1 - span.0) as f64;
        let driving = if rng.random_bool(alpha.clamp(0.0, 1.0)) {
            &waves[next]
        } else {
            &waves[prev]
        };
        let local = tz
            .timestamp_millis_opt(t)
            .single()
            .expect("unambiguous local time");
        let hour = local.hour();
        let weekday = local.weekday().number_from_monday() <= 5;

        for v in 0..n {
            let mut a = if hour < 6 {
                home_anchor[v]
            } else {
                let p_campus = if weekday && (8..18).contains(&hour) { 0.85 } else { 0.4 };
                if rng.random_bool(p_campus) {
                    if rng.random_bool(0.5) {
                        base_anchor[v]
                    } else {
                        rng.random_range(0..CAMPUS_OFFSETS_M.len())
                    }
                } else {
                    home_anchor[v]
                }
            };
            if hour >= 6 && c.co_location_lift > 0.0 {
                let mut cands: Vec<(usize, f64)> = Vec::new();
                for u in 0..v {
                    if let Some(m) = tie_mult(driving, u, v) {
                        cands.push((u, m));
                    }
                }
                if !cands.is_empty() {
                    let max_mult = cands.iter().map(|c| c.1).fold(0.0, f64::max);
                    if rng.random_bool((c.co_location_lift * max_mult).min(1.0)) {
                        let total: f64 = cands.iter().map(|c| c.1).sum();
                        let mut x = rng.random::<f64>() * total;
                        let mut chosen = cands[0].0;
                        for &(u, m) in &cands {
                            if x < m {
                                chosen = u;
                                break;
                            }
                            x -= m;
                        }
                        a = placed[chosen];
                    }
                }
            }
            placed[v] = a;

            if rng.random_bool(c.missing_rate) {
                continue;
            }
            let ts = t + rng.random_range(0..study.bin_width_ms / 2);
            let north: f64 = rng.sample(StandardNormal);
            let east: f64 = rng.sample(StandardNormal);
            let pos = offset(anchors[a].pos, east * c.noise_sd_m, north * c.noise_sd_m);
            locations.push(LocationSample {
                device_id: node_id(v),
                timestamp_ms: ts,
                lat: pos.lat,
                lon: pos.lon,
                accuracy_m: Some(5.0 + rng.random::<f64>() * 25.0),
            });
            if rng.random_bool(0.85) {
                let aps = &anchors[a].aps;
                let k = rng.random_range(1..=aps.len());
                let mut idx: Vec<usize> = (0..aps.len()).collect();
                for i in 0..k {
                    let j = rng.random_range(i..idx.len());
                    idx.swap(i, j);
                }
                let mut picked: Vec<&String> = idx[..k].iter().map(|&i| &aps[i]).collect();
                picked.sort();
                for ap in picked {
                    wifi.push(WifiObservation {
                        device_id: node_id(v),
                        timestamp_ms: ts,
                        hotspot_id: ap.clone(),
                    });
                }
            }
        }
    }
    (locations, wifi)
}

fn truth(c: &SynthConfig, waves: &[WaveNets; 3]) -> GroundTruth {
    let mut edges = BTreeMap::new();
    for (w, nets) in waves.iter().enumerate() {
        for tie in TieType::ALL {
            let list = nets
                .by_type(tie)
                .iter()
                .map(|&(i, j)| (node_id(i), node_id(j)))
                .collect();
            edges.insert(format!("wave{}_{}", w + 1, tie.label()), list);
        }
    }
    GroundTruth {
        synth: c.clone(),
        nodes: (0..c.n_nodes).map(node_id).collect(),
        residents: (0..c.house_residents).map(node_id).collect(),
        edges,
    }
}

fn generate_inner(c: &SynthConfig, symmetric: bool) -> Result<SynthDataset> {
    c.validate()?;
    let mut net_rng = substream(c.seed, "synth/networks");
    let waves = plant_networks(c, symmetric, &mut net_rng);
    let mut site_rng = substream(c.seed, "synth/sites");
    let (anchors, home_anchor, base_anchor) = plant_anchors(c, &mut site_rng);
    let study = study_config(c, &anchors);
    let mut trace_rng = substream(c.seed, "synth/traces");
    let (locations, wifi) = plant_traces(c, &study, &waves, &anchors, &home_anchor, &base_anchor, &mut trace_rng);
    Ok(SynthDataset {
        study,
        locations,
        wifi,
        ties: survey_rows(c.n_nodes, &waves),
        truth: truth(c, &waves),
    })
}

pub fn generate(c: &SynthConfig) -> Result<SynthDataset> {
    generate_inner(c, false)
}

/// Worst-case leakage dataset: every tie mutual and stable across waves, so
/// both directed label rows of a dyad share one feature vector and one
/// label. Row-level CV then trains on a test row's twin.
pub fn leakage_fixture(c: &SynthConfig) -> Result<SynthDataset> {
    let mut fixed = c.clone();
    fixed.reciprocity_boost = 1.0;
    fixed.change_rate = 0.0;
    generate_inner(&fixed, true)
}
