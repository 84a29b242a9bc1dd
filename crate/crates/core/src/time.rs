// SPDX-License-Identifier: Apache-2.0

//! Timestamp parsing and minute arithmetic.
//!
//! Everything is stored as UTC. Naive timestamps in input files are read in the
//! file's declared zone (`#tz=...` header, US/Eastern when absent), which keeps
//! the 14:00/14:30 anchors correct across DST changes.

use chrono::{DateTime, Duration, NaiveDate, NaiveDateTime, NaiveTime, SecondsFormat, TimeZone, Timelike, Utc};
use chrono_tz::Tz;

pub type Timestamp = DateTime<Utc>;

pub const DEFAULT_TZ: Tz = chrono_tz::US::Eastern;

/// Extracts the zone from a `#tz=<name>` header line, if the line is one.
pub fn parse_tz_header(line: &str) -> Option<Result<Tz, String>> {
    let rest = line.trim().strip_prefix('#')?.trim_start();
    let name = rest.strip_prefix("tz=")?.trim();
    Some(name.parse::<Tz>().map_err(|e| format!("unknown timezone {name:?}: {e}")))
}

const NAIVE_FORMATS: &[&str] = &["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"];

/// Parses an RFC 3339 timestamp (offset honored) or a naive one read in `tz`.
pub fn parse_timestamp(s: &str, tz: Tz) -> Result<Timestamp, String> {
    let s = s.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Ok(dt.with_timezone(&Utc));
    }
    for fmt in NAIVE_FORMATS {
        if let Ok(naive) = NaiveDateTime::parse_from_str(s, fmt) {
            return localize(naive, tz);
        }
    }
    Err(format!("unrecognized timestamp {s:?}"))
}

pub fn localize(naive: NaiveDateTime, tz: Tz) -> Result<Timestamp, String> {
    tz.from_local_datetime(&naive)
        .earliest()
        .map(|dt| dt.with_timezone(&Utc))
        .ok_or_else(|| format!("{naive} does not exist in {tz}"))
}

/// Local wall-clock time on `date` in `tz`, as UTC.
pub fn at_local(date: NaiveDate, time: NaiveTime, tz: Tz) -> Result<Timestamp, String> {
    localize(date.and_time(time), tz)
}

pub fn parse_clock(s: &str) -> Result<NaiveTime, String> {
    let s = s.trim();
    NaiveTime::parse_from_str(s, "%H:%M:%S")
        .or_else(|_| NaiveTime::parse_from_str(s, "%H:%M"))
        .map_err(|_| format!("unrecognized clock time {s:?}"))
}

pub fn format_timestamp(t: &Timestamp) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

pub fn local_date(t: &Timestamp, tz: Tz) -> NaiveDate {
    t.with_timezone(&tz).date_naive()
}

pub fn is_minute_aligned(t: &Timestamp) -> bool {
    t.second() == 0 && t.nanosecond() == 0
}

pub fn minute_floor(t: &Timestamp) -> Timestamp {
    *t - Duration::seconds(i64::from(t.second())) - Duration::nanoseconds(i64::from(t.nanosecond()))
}

/// The minute label whose right-closed interval `(m - 1min, m]` contains `t`.
pub fn minute_label(t: &Timestamp) -> Timestamp {
    if is_minute_aligned(t) {
        *t
    } else {
        minute_floor(t) + Duration::minutes(1)
    }
}
