// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{parse_err, read_to_string, source_lines, validation_err};
use crate::emotion::{Emotion, EmotionVector};
use crate::error::Result;
use crate::time::{format_timestamp, parse_timestamp, Timestamp};

/// Allowed band for the sum of the seven scores of a detected face. The model
/// emits a softmax in percent, printed at finite precision.
pub const SCORE_SUM_BAND: (f64, f64) = (99.0, 101.0);

/// One sampled video frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameScore {
    pub meeting_id: String,
    pub t: Timestamp,
    pub face_detected: bool,
    pub chair_similarity: Option<f64>,
    /// Present iff `face_detected`.
    pub emotions: Option<EmotionVector<f64>>,
    pub embedding_id: Option<String>,
}

impl FrameScore {
    pub fn validate(&self) -> Result<(), String> {
        if self.meeting_id.trim().is_empty() {
            return Err("empty meeting_id".into());
        }
        if let Some(s) = self.chair_similarity {
            if !(0.0..=1.0).contains(&s) {
                return Err(format!("chair_similarity {s} outside [0,1]"));
            }
        }
        match (&self.emotions, self.face_detected) {
            (None, true) => Err("face_detected is true but emotion scores are missing".into()),
            (Some(_), false) => Err("face_detected is false but emotion scores are present".into()),
            (None, false) => Ok(()),
            (Some(v), true) => {
                for e in Emotion::ALL {
                    let x = v.get(e);
                    if !x.is_finite() || !(0.0..=100.0).contains(&x) {
                        return Err(format!("score out of range: {e}={x}"));
                    }
                }
                let sum = v.sum();
                if sum < SCORE_SUM_BAND.0 || sum > SCORE_SUM_BAND.1 {
                    return Err(format!("scores sum to {sum}, expected within [{}, {}]", SCORE_SUM_BAND.0, SCORE_SUM_BAND.1));
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameRecord {
    meeting_id: String,
    t: String,
    face_detected: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    chair_similarity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angry: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    disgust: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fear: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    happy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sad: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    surprise: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    neutral: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    embedding_id: Option<String>,
}

impl FrameRecord {
    fn scores(&self) -> [Option<f64>; 7] {
        [self.angry, self.disgust, self.fear, self.happy, self.sad, self.surprise, self.neutral]
    }
}

pub fn parse_frame_scores(path: impl AsRef<Path>) -> Result<Vec<FrameScore>> {
    let path = path.as_ref();
    parse_frame_scores_str(&read_to_string(path)?, path)
}

/// Parses frame-score JSONL text; `origin` is used in error messages.
pub fn parse_frame_scores_str(text: &str, origin: &Path) -> Result<Vec<FrameScore>> {
    let src = source_lines(origin, text)?;
    let mut out = Vec::with_capacity(src.lines.len());
    for (line, raw) in src.lines {
        let rec: FrameRecord = serde_json::from_str(raw).map_err(|e| parse_err(origin, line, e.to_string()))?;
        let t = parse_timestamp(&rec.t, src.tz).map_err(|m| parse_err(origin, line, m))?;
        let scores = rec.scores();
        let emotions = if scores.iter().all(Option::is_none) {
            None
        } else if scores.iter().all(Option::is_some) {
            Some(EmotionVector::new(scores.map(|s| s.unwrap_or_default())))
        } else {
            return Err(validation_err(origin, format!("line {line}: partial emotion scores"), raw.trim()));
        };
        let frame = FrameScore {
            meeting_id: rec.meeting_id,
            t,
            face_detected: rec.face_detected,
            chair_similarity: rec.chair_similarity,
            emotions,
            embedding_id: rec.embedding_id,
        };
        frame
            .validate()
            .map_err(|m| validation_err(origin, format!("line {line}: {m}"), raw.trim()))?;
        out.push(frame);
    }
    out.sort_by(|a, b| a.meeting_id.cmp(&b.meeting_id).then(a.t.cmp(&b.t)));
    for w in out.windows(2) {
        if w[0].meeting_id == w[1].meeting_id && w[0].t == w[1].t {
            return Err(validation_err(
                origin,
                "timestamps within a meeting must be strictly increasing",
                format!("{} {}", w[1].meeting_id, format_timestamp(&w[1].t)),
            ));
        }
    }
    Ok(out)
}

/// Canonical JSONL: UTC timestamps, records sorted by (meeting_id, t).
pub fn write_frame_scores(frames: &[FrameScore]) -> String {
    let mut sorted: Vec<&FrameScore> = frames.iter().collect();
    sorted.sort_by(|a, b| a.meeting_id.cmp(&b.meeting_id).then(a.t.cmp(&b.t)));
    let mut out = String::from("#tz=UTC\n");
    for f in sorted {
        let s = f.emotions.map(|v| v.values.map(Some)).unwrap_or([None; 7]);
        let rec = FrameRecord {
            meeting_id: f.meeting_id.clone(),
            t: format_timestamp(&f.t),
            face_detected: f.face_detected,
            chair_similarity: f.chair_similarity,
            angry: s[0],
            disgust: s[1],
            fear: s[2],
            happy: s[3],
            sad: s[4],
            surprise: s[5],
            neutral: s[6],
            embedding_id: f.embedding_id.clone(),
        };
        let _ = writeln!(out, "{}", serde_json::to_string(&rec).expect("frame record serializes"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn parse(text: &str) -> Result<Vec<FrameScore>> {
        parse_frame_scores_str(text, Path::new("frames.jsonl"))
    }

    #[test]
    fn accepts_published_yellen_frame() {
        let text = r#"{"meeting_id":"2016-09-21","t":"2016-09-21T14:40:00","face_detected":true,"chair_similarity":0.91,"angry":0.722,"disgust":0.036,"fear":21.992,"happy":0.057,"sad":58.435,"surprise":0.021,"neutral":18.737}"#;
        let frames = parse(text).unwrap();
        assert_eq!(frames.len(), 1);
        let v = frames[0].emotions.unwrap();
        assert!((v.sum() - 100.0).abs() < 1e-9);
        assert_eq!(format_timestamp(&frames[0].t), "2016-09-21T18:40:00Z");
    }

    #[test]
    fn accepts_no_face_frame() {
        let frames = parse(r#"{"meeting_id":"m","t":"2020-11-05T14:58:16","face_detected":false}"#).unwrap();
        assert!(frames[0].emotions.is_none());
    }

    #[test]
    fn rejects_out_of_range_score() {
        let text = r#"{"meeting_id":"m","t":"2020-11-05T14:58:16","face_detected":true,"angry":150,"disgust":0,"fear":0,"happy":0,"sad":0,"surprise":0,"neutral":0}"#;
        let err = parse(text).unwrap_err();
        assert!(matches!(err, Error::Validation { .. }));
        assert!(err.to_string().contains("score out of range"), "{err}");
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = "#tz=US/Eastern\n{\"meeting_id\":\"m\",\"t\":\"2020-11-05T14:58:16\",\"face_detected\":false}\n{not json\n";
        match parse(text).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn rejects_duplicate_timestamp() {
        let line = r#"{"meeting_id":"m","t":"2020-11-05T14:58:16","face_detected":false}"#;
        assert!(parse(&format!("{line}\n{line}\n")).is_err());
    }

    #[test]
    fn rejects_bad_sum() {
        let text = r#"{"meeting_id":"m","t":"2020-11-05T14:58:16","face_detected":true,"angry":10,"disgust":0,"fear":0,"happy":0,"sad":0,"surprise":0,"neutral":0}"#;
        assert!(parse(text).unwrap_err().to_string().contains("sum"));
    }

    #[test]
    fn output_is_sorted() {
        let a = r#"{"meeting_id":"b","t":"2020-11-05T14:58:16","face_detected":false}"#;
        let b = r#"{"meeting_id":"a","t":"2020-11-05T14:58:18","face_detected":false}"#;
        let c = r#"{"meeting_id":"a","t":"2020-11-05T14:58:16","face_detected":false}"#;
        let frames = parse(&format!("{a}\n{b}\n{c}\n")).unwrap();
        let keys: Vec<_> = frames.iter().map(|f| (f.meeting_id.as_str(), f.t.timestamp())).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }
}
