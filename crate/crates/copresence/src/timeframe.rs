//! Local-time slices of the shared timeline.
//!
//! Every bin belongs to `All`, to exactly one of `Weekday`/`Weekend`, and to
//! exactly one of the four six-hour day parts. Classification uses the bin
//! start converted to the study's IANA timezone, so day-part boundaries
//! follow local clock time across DST changes.

use chrono::{Datelike, TimeZone, Timelike, Weekday};
use chrono_tz::Tz;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Timeframe {
    All,
    Weekday,
    Weekend,
    Night,
    Morning,
    Afternoon,
    Evening,
}

impl Timeframe {
    pub const ALL: [Timeframe; 7] = [
        Timeframe::All,
        Timeframe::Weekday,
        Timeframe::Weekend,
        Timeframe::Night,
        Timeframe::Morning,
        Timeframe::Afternoon,
        Timeframe::Evening,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Timeframe::All => "all",
            Timeframe::Weekday => "weekday",
            Timeframe::Weekend => "weekend",
            Timeframe::Night => "night",
            Timeframe::Morning => "morning",
            Timeframe::Afternoon => "afternoon",
            Timeframe::Evening => "evening",
        }
    }

    /// Does the bin starting at `ts_ms` (Unix epoch milliseconds) fall in
    /// this timeframe under timezone `tz`?
    pub fn contains(&self, ts_ms: i64, tz: &Tz) -> bool {
        let dt = tz
            .timestamp_millis_opt(ts_ms)
            .single()
            .expect("epoch to local conversion is unique");
        match self {
            Timeframe::All => true,
            Timeframe::Weekday => !is_weekend(dt.weekday()),
            Timeframe::Weekend => is_weekend(dt.weekday()),
            Timeframe::Night => dt.hour() < 6,
            Timeframe::Morning => (6..12).contains(&dt.hour()),
            Timeframe::Afternoon => (12..18).contains(&dt.hour()),
            Timeframe::Evening => dt.hour() >= 18,
        }
    }
}

fn is_weekend(day: Weekday) -> bool {
    matches!(day, Weekday::Sat | Weekday::Sun)
}
