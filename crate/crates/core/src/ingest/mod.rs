// SPDX-License-Identifier: Apache-2.0

//! Readers and canonical writers for the input files.
//!
//! Every reader validates records against their type invariants and returns
//! them in a stable sort order, so the output never depends on the order of
//! lines in the file. Every writer emits the canonical normal form: UTC
//! timestamps, sorted records, fixed key/column order.

mod bars;
mod frames;
mod lexicon;
mod meetings;
mod transcript;

use std::fs;
use std::path::Path;

use chrono_tz::Tz;

pub use bars::{parse_minute_bars, parse_minute_bars_str, write_minute_bars, Instrument, MinuteBar};
pub use frames::{parse_frame_scores, parse_frame_scores_str, write_frame_scores, FrameScore, SCORE_SUM_BAND};
pub use lexicon::{parse_lexicon, parse_lexicon_str, write_lexicon, Lexicon, LexiconKind, LexiconSet};
pub use meetings::{parse_meeting_meta, parse_meeting_meta_str, write_meeting_meta, Chair, MeetingMeta};
pub use transcript::{parse_transcript, parse_transcript_str, write_transcript, Speaker, TranscriptSegment};

use crate::error::{Error, Result};
use crate::time::{parse_tz_header, DEFAULT_TZ};

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Data lines of a line-oriented file, with 1-based line numbers and the
/// declared source timezone. `#` lines other than the tz header are comments.
pub(crate) struct SourceLines<'a> {
    pub tz: Tz,
    pub lines: Vec<(usize, &'a str)>,
}

pub(crate) fn source_lines<'a>(path: &Path, text: &'a str) -> Result<SourceLines<'a>> {
    let mut tz = DEFAULT_TZ;
    let mut lines = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') {
            if let Some(parsed) = parse_tz_header(trimmed) {
                tz = parsed.map_err(|message| Error::Parse { path: path.to_path_buf(), line: line_no, message })?;
            }
            continue;
        }
        lines.push((line_no, raw));
    }
    Ok(SourceLines { tz, lines })
}

/// Header tz for CSV files, scanned before handing the text to the csv reader.
pub(crate) fn csv_tz(path: &Path, text: &str) -> Result<Tz> {
    for (idx, raw) in text.lines().enumerate() {
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(parsed) = parse_tz_header(trimmed) {
            return parsed.map_err(|message| Error::Parse { path: path.to_path_buf(), line: idx + 1, message });
        }
        if !trimmed.starts_with('#') {
            break;
        }
    }
    Ok(DEFAULT_TZ)
}

pub(crate) fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(text.as_bytes())
}

pub(crate) fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), line, message: message.into() }
}

pub(crate) fn validation_err(path: &Path, message: impl Into<String>, record: impl Into<String>) -> Error {
    Error::Validation { path: path.to_path_buf(), message: message.into(), record: record.into() }
}

pub(crate) fn opt_field(s: &str) -> Option<&str> {
    let s = s.trim();
    (!s.is_empty() && !s.eq_ignore_ascii_case("na") && !s.eq_ignore_ascii_case("n.a")).then_some(s)
}

pub(crate) fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
