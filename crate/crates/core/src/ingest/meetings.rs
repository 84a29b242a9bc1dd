// SPDX-License-Identifier: Apache-2.0

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::{NaiveDate, NaiveTime};
use chrono_tz::Tz;
use serde::{Deserialize, Serialize};

use super::{csv_reader, csv_tz, fmt_opt_f64, opt_field, parse_err, read_to_string, validation_err};
use crate::error::Result;
use crate::time::{at_local, format_timestamp, parse_clock, parse_timestamp, Timestamp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Chair {
    Bernanke,
    Yellen,
    Powell,
}

impl Chair {
    pub const ALL: [Chair; 3] = [Chair::Bernanke, Chair::Yellen, Chair::Powell];

    pub fn name(self) -> &'static str {
        match self {
            Chair::Bernanke => "Bernanke",
            Chair::Yellen => "Yellen",
            Chair::Powell => "Powell",
        }
    }
}

impl fmt::Display for Chair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Chair {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Chair::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown chair {s:?}"))
    }
}

pub const DEFAULT_STATEMENT_RELEASE: (u32, u32) = (14, 0);
pub const DEFAULT_PRESS_CONF_START: (u32, u32) = (14, 30);

/// Per-conference metadata and daily controls.
#[derive(Debug, Clone, PartialEq)]
pub struct MeetingMeta {
    pub meeting_id: String,
    pub date: NaiveDate,
    pub chair: Chair,
    /// 1-based ordinal within the chair's tenure.
    pub conference_count: u32,
    pub press_conf_start: Timestamp,
    pub statement_release: Timestamp,
    pub has_intro_statement: bool,
    pub testimony_dates: Vec<NaiveDate>,
    pub ffr_change: Option<f64>,
    pub mpu: Option<f64>,
    pub public_interest: Option<f64>,
}

const HEADER: [&str; 11] = [
    "meeting_id",
    "date",
    "chair",
    "conference_count",
    "press_conf_start",
    "statement_release",
    "has_intro_statement",
    "testimony_dates",
    "ffr_change",
    "mpu",
    "public_interest",
];

pub fn parse_meeting_meta(path: impl AsRef<Path>) -> Result<Vec<MeetingMeta>> {
    let path = path.as_ref();
    parse_meeting_meta_str(&read_to_string(path)?, path)
}

fn parse_anchor(s: &str, date: NaiveDate, default: (u32, u32), tz: Tz) -> Result<Timestamp, String> {
    match opt_field(s) {
        None => at_local(date, NaiveTime::from_hms_opt(default.0, default.1, 0).expect("valid clock"), tz),
        Some(v) if v.contains('T') || (v.contains(' ') && v.len() > 8) => parse_timestamp(v, tz),
        Some(v) => at_local(date, parse_clock(v)?, tz),
    }
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" | "" => Ok(false),
        other => Err(format!("expected boolean, got {other:?}")),
    }
}

fn parse_opt_f64(s: &str, name: &str) -> Result<Option<f64>, String> {
    opt_field(s)
        .map(|v| v.parse::<f64>().map_err(|e| format!("{name}: {e}")))
        .transpose()
}

pub fn parse_meeting_meta_str(text: &str, origin: &Path) -> Result<Vec<MeetingMeta>> {
    let tz = csv_tz(origin, text)?;
    let mut rdr = csv_reader(text);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(parse_err(origin, 1, format!("expected header {}", HEADER.join(","))));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let f = |i: usize| rec.get(i).unwrap_or("");
        let perr = |m: String| parse_err(origin, line, m);
        let date = NaiveDate::parse_from_str(f(1), "%Y-%m-%d").map_err(|e| perr(format!("date: {e}")))?;
        let chair = f(2).parse::<Chair>().map_err(perr)?;
        let conference_count = f(3)
            .parse::<u32>()
            .map_err(|e| parse_err(origin, line, format!("conference_count: {e}")))?;
        let press_conf_start = parse_anchor(f(4), date, DEFAULT_PRESS_CONF_START, tz).map_err(|m| parse_err(origin, line, m))?;
        let statement_release = parse_anchor(f(5), date, DEFAULT_STATEMENT_RELEASE, tz).map_err(|m| parse_err(origin, line, m))?;
        let has_intro_statement = parse_bool(f(6)).map_err(|m| parse_err(origin, line, m))?;
        let mut testimony_dates = f(7)
            .split(';')
            .filter_map(opt_field)
            .map(|d| NaiveDate::parse_from_str(d, "%Y-%m-%d").map_err(|e| parse_err(origin, line, format!("testimony date {d:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        testimony_dates.sort();
        testimony_dates.dedup();
        let meta = MeetingMeta {
            meeting_id: f(0).to_string(),
            date,
            chair,
            conference_count,
            press_conf_start,
            statement_release,
            has_intro_statement,
            testimony_dates,
            ffr_change: parse_opt_f64(f(8), "ffr_change").map_err(|m| parse_err(origin, line, m))?,
            mpu: parse_opt_f64(f(9), "mpu").map_err(|m| parse_err(origin, line, m))?,
            public_interest: parse_opt_f64(f(10), "public_interest").map_err(|m| parse_err(origin, line, m))?,
        };
        let record = || rec.iter().collect::<Vec<_>>().join(",");
        if meta.meeting_id.is_empty() {
            return Err(validation_err(origin, format!("line {line}: empty meeting_id"), record()));
        }
        if meta.conference_count == 0 {
            return Err(validation_err(origin, format!("line {line}: conference_count must be positive"), record()));
        }
        if meta.statement_release >= meta.press_conf_start {
            return Err(validation_err(origin, format!("line {line}: statement_release must precede press_conf_start"), record()));
        }
        out.push(meta);
    }
    out.sort_by(|a, b| a.date.cmp(&b.date).then(a.meeting_id.cmp(&b.meeting_id)));

    let mut ids = HashSet::new();
    let mut counts: HashMap<(Chair, u32), &str> = HashMap::new();
    for m in &out {
        if !ids.insert(m.meeting_id.as_str()) {
            return Err(validation_err(origin, "duplicate meeting_id", m.meeting_id.clone()));
        }
        if let Some(prev) = counts.insert((m.chair, m.conference_count), &m.meeting_id) {
            return Err(validation_err(
                origin,
                format!("conference_count {} repeated for {}", m.conference_count, m.chair),
                format!("{prev} and {}", m.meeting_id),
            ));
        }
    }
    Ok(out)
}

pub fn write_meeting_meta(meetings: &[MeetingMeta]) -> String {
    let mut sorted: Vec<&MeetingMeta> = meetings.iter().collect();
    sorted.sort_by(|a, b| a.date.cmp(&b.date).then(a.meeting_id.cmp(&b.meeting_id)));
    let mut out = String::from("#tz=UTC\n");
    out.push_str(&HEADER.join(","));
    out.push('\n');
    for m in sorted {
        let testimony: Vec<String> = m.testimony_dates.iter().map(|d| d.format("%Y-%m-%d").to_string()).collect();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            m.meeting_id,
            m.date.format("%Y-%m-%d"),
            m.chair,
            m.conference_count,
            format_timestamp(&m.press_conf_start),
            format_timestamp(&m.statement_release),
            m.has_intro_statement,
            testimony.join(";"),
            fmt_opt_f64(m.ffr_change),
            fmt_opt_f64(m.mpu),
            fmt_opt_f64(m.public_interest),
        ));
    }
    out
}
