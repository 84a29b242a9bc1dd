// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{parse_err, read_to_string, source_lines, validation_err};
use crate::error::Result;
use crate::time::{format_timestamp, parse_timestamp, Timestamp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    Chair,
    Journalist,
    Other,
}

/// A timestamped transcript sentence with externally computed scores.
#[derive(Debug, Clone, PartialEq)]
pub struct TranscriptSegment {
    pub meeting_id: String,
    pub t_start: Timestamp,
    pub t_end: Timestamp,
    pub text: String,
    pub speaker: Speaker,
    pub sentiment_negative: f64,
    pub sentiment_positive: f64,
    pub sentiment_neutral: f64,
    pub fls_flag: bool,
}

impl TranscriptSegment {
    pub fn validate(&self) -> Result<(), String> {
        if self.meeting_id.trim().is_empty() {
            return Err("empty meeting_id".into());
        }
        if self.t_start >= self.t_end {
            return Err(format!(
                "segment must have t_start < t_end ({} >= {})",
                format_timestamp(&self.t_start),
                format_timestamp(&self.t_end)
            ));
        }
        for (name, v) in [
            ("sentiment_negative", self.sentiment_negative),
            ("sentiment_positive", self.sentiment_positive),
            ("sentiment_neutral", self.sentiment_neutral),
        ] {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(format!("{name}={v} outside [0,1]"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentRecord {
    meeting_id: String,
    t_start: String,
    t_end: String,
    text: String,
    speaker: Speaker,
    #[serde(default)]
    sentiment_negative: f64,
    #[serde(default)]
    sentiment_positive: f64,
    #[serde(default)]
    sentiment_neutral: f64,
    #[serde(default)]
    fls_flag: bool,
}

pub fn parse_transcript(path: impl AsRef<Path>) -> Result<Vec<TranscriptSegment>> {
    let path = path.as_ref();
    parse_transcript_str(&read_to_string(path)?, path)
}

pub fn parse_transcript_str(text: &str, origin: &Path) -> Result<Vec<TranscriptSegment>> {
    let src = source_lines(origin, text)?;
    let mut out = Vec::with_capacity(src.lines.len());
    for (line, raw) in src.lines {
        let rec: SegmentRecord = serde_json::from_str(raw).map_err(|e| parse_err(origin, line, e.to_string()))?;
        let t_start = parse_timestamp(&rec.t_start, src.tz).map_err(|m| parse_err(origin, line, m))?;
        let t_end = parse_timestamp(&rec.t_end, src.tz).map_err(|m| parse_err(origin, line, m))?;
        let seg = TranscriptSegment {
            meeting_id: rec.meeting_id,
            t_start,
            t_end,
            text: rec.text,
            speaker: rec.speaker,
            sentiment_negative: rec.sentiment_negative,
            sentiment_positive: rec.sentiment_positive,
            sentiment_neutral: rec.sentiment_neutral,
            fls_flag: rec.fls_flag,
        };
        seg.validate()
            .map_err(|m| validation_err(origin, format!("line {line}: {m}"), raw.trim()))?;
        out.push(seg);
    }
    out.sort_by(|a, b| {
        a.meeting_id
            .cmp(&b.meeting_id)
            .then(a.t_start.cmp(&b.t_start))
            .then(a.t_end.cmp(&b.t_end))
    });
    for w in out.windows(2) {
        if w[0].meeting_id == w[1].meeting_id && w[1].t_start < w[0].t_end {
            return Err(validation_err(
                origin,
                "overlapping segments",
                format!(
                    "{} [{}, {}) overlaps [{}, {})",
                    w[1].meeting_id,
                    format_timestamp(&w[0].t_start),
                    format_timestamp(&w[0].t_end),
                    format_timestamp(&w[1].t_start),
                    format_timestamp(&w[1].t_end)
                ),
            ));
        }
    }
    Ok(out)
}

pub fn write_transcript(segments: &[TranscriptSegment]) -> String {
    let mut sorted: Vec<&TranscriptSegment> = segments.iter().collect();
    sorted.sort_by(|a, b| a.meeting_id.cmp(&b.meeting_id).then(a.t_start.cmp(&b.t_start)));
    let mut out = String::from("#tz=UTC\n");
    for s in sorted {
        let rec = SegmentRecord {
            meeting_id: s.meeting_id.clone(),
            t_start: format_timestamp(&s.t_start),
            t_end: format_timestamp(&s.t_end),
            text: s.text.clone(),
            speaker: s.speaker,
            sentiment_negative: s.sentiment_negative,
            sentiment_positive: s.sentiment_positive,
            sentiment_neutral: s.sentiment_neutral,
            fls_flag: s.fls_flag,
        };
        let _ = writeln!(out, "{}", serde_json::to_string(&rec).expect("segment serializes"));
    }
    out
}
