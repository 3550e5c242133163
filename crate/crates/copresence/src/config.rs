//! Study configuration: observation window, binning, exclusion windows,
//! geoboxes, and threshold settings. Loaded from a flat JSON file.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::GeoBox;

pub const MS_PER_DAY: i64 = 86_400_000;
pub const DEFAULT_BIN_WIDTH_MS: i64 = 600_000; // 10 minutes
pub const DEFAULT_DISTANCE_ELBOW_M: f64 = 2000.0;

/// How the ten distance thresholds are obtained: fitted by weighted 1-D
/// clustering of the observed sub-elbow distances, or taken verbatim from
/// `static_thresholds_m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    #[default]
    Cluster,
    Static,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StudyConfig {
    pub study_start_ms: i64,
    pub study_end_ms: i64,
    /// Half-open [start, end) intervals removed from the timeline (e.g. spring break).
    #[serde(default)]
    pub exclusion_windows: Vec<(i64, i64)>,
    #[serde(default = "default_bin_width")]
    pub bin_width_ms: i64,
    /// IANA zone name; local-time timeframes (night, weekday, ...) are
    /// evaluated in this zone.
    pub timezone: String,
    pub campus_geobox: GeoBox,
    pub house_geobox: GeoBox,
    #[serde(default = "default_elbow")]
    pub distance_elbow_m: f64,
    /// Survey wave timestamps; periods are [w1, w2) and [w2, w3).
    pub wave_times_ms: [i64; 3],
    #[serde(default)]
    pub threshold_mode: ThresholdMode,
    #[serde(default)]
    pub static_thresholds_m: Vec<f64>,
    /// Hotspots visible from the fraternity house, by id.
    #[serde(default)]
    pub house_hotspots: Vec<String>,
    /// Optional accuracy filter: drop location readings whose reported
    /// accuracy is worse (larger) than this many meters.
    #[serde(default)]
    pub min_accuracy_m: Option<f64>,
    /// Optional last-value-carried-forward fill, bounded by this carry
    /// duration. Off by default: missing bins stay missing.
    #[serde(default)]
    pub lvcf_max_carry_ms: Option<i64>,
}

fn default_bin_width() -> i64 {
    DEFAULT_BIN_WIDTH_MS
}

fn default_elbow() -> f64 {
    DEFAULT_DISTANCE_ELBOW_M
}

impl StudyConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: StudyConfig = serde_json::from_str(&text)
            .map_err(|e| Error::contract(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("config serializes");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        if self.study_start_ms >= self.study_end_ms {
            return Err(Error::contract("study_start_ms must precede study_end_ms"));
        }
        if self.bin_width_ms <= 0 || MS_PER_DAY % self.bin_width_ms != 0 {
            return Err(Error::contract(format!(
                "bin_width_ms {} must be positive and divide 24h",
                self.bin_width_ms
            )));
        }
        if !(self.wave_times_ms[0] < self.wave_times_ms[1] && self.wave_times_ms[1] < self.wave_times_ms[2]) {
            return Err(Error::contract("wave_times_ms must be strictly increasing"));
        }
        if self.wave_times_ms[0] < self.study_start_ms || self.wave_times_ms[2] > self.study_end_ms {
            return Err(Error::contract("wave_times_ms must lie within the study window"));
        }
        for &(s, e) in &self.exclusion_windows {
            if s >= e {
                return Err(Error::contract(format!("exclusion window [{s}, {e}) is empty")));
            }
            if s < self.study_start_ms || e > self.study_end_ms {
                return Err(Error::contract(format!(
                    "exclusion window [{s}, {e}) extends outside the study window"
                )));
            }
        }
        if !self.campus_geobox.is_valid() || !self.house_geobox.is_valid() {
            return Err(Error::contract("geoboxes must be valid lat/lon rectangles"));
        }
        if !(self.distance_elbow_m > 0.0) {
            return Err(Error::contract("distance_elbow_m must be positive"));
        }
        if self.threshold_mode == ThresholdMode::Static {
            if self.static_thresholds_m.is_empty() {
                return Err(Error::contract("static threshold mode requires static_thresholds_m"));
            }
            if !self.static_thresholds_m.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::contract("static_thresholds_m must be strictly increasing"));
            }
        }
        self.tz()?;
        Ok(())
    }

    pub fn tz(&self) -> Result<chrono_tz::Tz> {
        chrono_tz::Tz::from_str(&self.timezone)
            .map_err(|_| Error::contract(format!("unknown IANA timezone {:?}", self.timezone)))
    }

    /// The shared bin timeline: every complete bin of the study window whose
    /// span does not overlap an exclusion window. All device grids and dyad
    /// series index into this timeline.
    pub fn timeline(&self) -> Vec<i64> {
        let w = self.bin_width_ms;
        let mut starts = Vec::new();
        let mut t = self.study_start_ms;
        while t + w <= self.study_end_ms {
            let excluded = self
                .exclusion_windows
                .iter()
                .any(|&(s, e)| t < e && t + w > s);
            if !excluded {
                starts.push(t);
            }
            t += w;
        }
        starts
    }

    /// Period intervals: [wave1, wave2) and [wave2, wave3).
    pub fn period_interval(&self, period: Period) -> (i64, i64) {
        match period {
            Period::P1 => (self.wave_times_ms[0], self.wave_times_ms[1]),
            Period::P2 => (self.wave_times_ms[1], self.wave_times_ms[2]),
        }
    }
}

/// Observation period between consecutive survey waves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Period {
    P1,
    P2,
}

impl Period {
    pub const ALL: [Period; 2] = [Period::P1, Period::P2];

    pub fn label(&self) -> &'static str {
        match self {
            Period::P1 => "P1",
            Period::P2 => "P2",
        }
    }

    pub fn parse(s: &str) -> Result<Period> {
        match s {
            "P1" => Ok(Period::P1),
            "P2" => Ok(Period::P2),
            other => Err(Error::contract(format!("unknown period {other:?}"))),
        }
    }

    /// The survey wave (1-based) closing this period.
    pub fn closing_wave(&self) -> u8 {
        match self {
            Period::P1 => 2,
            Period::P2 => 3,
        }
    }
}
