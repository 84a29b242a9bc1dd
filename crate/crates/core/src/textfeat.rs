// SPDX-License-Identifier: Apache-2.0

//! Minute-level text measures from the chair's transcript segments.
//!
//! Each measure is first aggregated per minute (phrase counts, flag counts, or
//! mean sentiment over the chair's segments in `(t - 1min, t]`) and then
//! divided by the mean of that per-minute quantity over the meeting.

use chrono::Duration;
use serde::{Deserialize, Serialize};

use crate::ingest::{Lexicon, LexiconSet, Speaker, TranscriptSegment};
use crate::time::Timestamp;

/// Lowercase, ASCII-folded word tokens. Apostrophes and other punctuation are
/// deleted; dashes and slashes separate words.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut cleaned = String::with_capacity(text.len());
    for ch in text.chars() {
        let c = fold(ch);
        match c {
            Some(c) if c.is_ascii_alphanumeric() => cleaned.push(c.to_ascii_lowercase()),
            Some(c) if c.is_whitespace() || matches!(c, '-' | '/') => cleaned.push(' '),
            _ => {}
        }
    }
    cleaned.split_whitespace().map(str::to_owned).collect()
}

fn fold(ch: char) -> Option<char> {
    if ch.is_ascii() {
        return Some(ch);
    }
    if ch.is_whitespace() {
        return Some(' ');
    }
    let c = match ch {
        'à' | 'á' | 'â' | 'ã' | 'ä' | 'å' | 'À' | 'Á' | 'Â' | 'Ã' | 'Ä' | 'Å' => 'a',
        'ç' | 'Ç' => 'c',
        'è' | 'é' | 'ê' | 'ë' | 'È' | 'É' | 'Ê' | 'Ë' => 'e',
        'ì' | 'í' | 'î' | 'ï' | 'Ì' | 'Í' | 'Î' | 'Ï' => 'i',
        'ñ' | 'Ñ' => 'n',
        'ò' | 'ó' | 'ô' | 'õ' | 'ö' | 'ø' | 'Ò' | 'Ó' | 'Ô' | 'Õ' | 'Ö' | 'Ø' => 'o',
        'ù' | 'ú' | 'û' | 'ü' | 'Ù' | 'Ú' | 'Û' | 'Ü' => 'u',
        'ý' | 'ÿ' | 'Ý' => 'y',
        '\u{2010}'..='\u{2015}' | '\u{2212}' => '-',
        _ => return None,
    };
    Some(c)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedSentence {
    /// Index of the source segment in the slice it came from.
    pub segment: usize,
    pub tokens: Vec<String>,
}

impl TokenizedSentence {
    pub fn new(segment: usize, text: &str) -> Self {
        Self { segment, tokens: tokenize(text) }
    }
}

/// Occurrences of lexicon phrases as contiguous token runs. Distinct phrases
/// that overlap all count, and a phrase counts once per position.
pub fn phrase_count(tokens: &[String], lexicon: &Lexicon) -> usize {
    let mut n = 0;
    for phrase in lexicon.token_phrases() {
        if phrase.len() > tokens.len() {
            continue;
        }
        n += tokens.windows(phrase.len()).filter(|w| *w == phrase.as_slice()).count();
    }
    n
}

/// Hawkish minus dovish phrase count.
pub fn hawkish_raw(tokens: &[String], lexicons: &LexiconSet) -> i64 {
    phrase_count(tokens, &lexicons.hawkish) as i64 - phrase_count(tokens, &lexicons.dovish) as i64
}

/// Net hawkish count floored at zero, the quantity fed to the minute ratio.
pub fn hawkish_net(tokens: &[String], lexicons: &LexiconSet) -> usize {
    hawkish_raw(tokens, lexicons).max(0) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NlpMeasure {
    NegativeSentiment,
    StatementRelated,
    Hawkish,
    FlsRatio,
}

impl NlpMeasure {
    pub const ALL: [NlpMeasure; 4] =
        [NlpMeasure::NegativeSentiment, NlpMeasure::StatementRelated, NlpMeasure::Hawkish, NlpMeasure::FlsRatio];

    pub fn column(self) -> &'static str {
        match self {
            NlpMeasure::NegativeSentiment => "negative_sentiment",
            NlpMeasure::StatementRelated => "statement_related",
            NlpMeasure::Hawkish => "hawkish",
            NlpMeasure::FlsRatio => "fls_ratio",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlsSource {
    /// Per-segment flags from the transcript.
    #[default]
    Flags,
    /// Phrase counts against an `fls` lexicon.
    Keywords,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NlpConfig {
    pub window_secs: i64,
    pub fls_source: FlsSource,
}

impl Default for NlpConfig {
    fn default() -> Self {
        Self { window_secs: 60, fls_source: FlsSource::Flags }
    }
}

/// Per-minute quantity of one measure for one segment.
fn segment_quantity(measure: NlpMeasure, seg: &TranscriptSegment, tokens: &[String], lex: &LexiconSet, cfg: &NlpConfig) -> f64 {
    match measure {
        NlpMeasure::NegativeSentiment => seg.sentiment_negative,
        NlpMeasure::StatementRelated => phrase_count(tokens, &lex.statement_related) as f64,
        NlpMeasure::Hawkish => hawkish_net(tokens, lex) as f64,
        NlpMeasure::FlsRatio => match (cfg.fls_source, &lex.fls) {
            (FlsSource::Keywords, Some(fls)) => phrase_count(tokens, fls) as f64,
            _ => f64::from(u8::from(seg.fls_flag)),
        },
    }
}

/// Raw per-minute values before normalization: sums for counts, means for
/// sentiment. `None` where the chair did not speak in the window.
pub fn minute_quantities(
    measure: NlpMeasure,
    chair_segments: &[(&TranscriptSegment, Vec<String>)],
    minutes: &[Timestamp],
    lex: &LexiconSet,
    cfg: &NlpConfig,
) -> Vec<Option<f64>> {
    let window = Duration::seconds(cfg.window_secs);
    minutes
        .iter()
        .map(|&t| {
            let lo = chair_segments.partition_point(|(s, _)| s.t_start <= t - window);
            let hi = chair_segments.partition_point(|(s, _)| s.t_start <= t);
            let in_window = &chair_segments[lo..hi.max(lo)];
            if in_window.is_empty() {
                return None;
            }
            let total: f64 = in_window.iter().map(|(s, toks)| segment_quantity(measure, s, toks, lex, cfg)).sum();
            Some(match measure {
                NlpMeasure::NegativeSentiment => total / in_window.len() as f64,
                _ => total,
            })
        })
        .collect()
}

/// Outcome of dividing per-minute values by their meeting mean.
#[derive(Debug, Clone, PartialEq)]
pub struct MinuteRatios {
    pub values: Vec<Option<f64>>,
    pub meeting_mean: Option<f64>,
    /// The meeting mean was zero.
    pub zero_mean: bool,
}

/// Divides each defined value by the mean of the defined values. With a zero
/// mean the whole meeting is absent, unless `zero_mean_as_zero` is set, in
/// which case every defined minute is 0.
pub fn normalize_by_meeting_mean(raw: &[Option<f64>], zero_mean_as_zero: bool) -> MinuteRatios {
    let defined: Vec<f64> = raw.iter().flatten().copied().collect();
    if defined.is_empty() {
        return MinuteRatios { values: vec![None; raw.len()], meeting_mean: None, zero_mean: false };
    }
    let mean = defined.iter().sum::<f64>() / defined.len() as f64;
    if mean == 0.0 {
        let values = if zero_mean_as_zero { raw.iter().map(|v| v.map(|_| 0.0)).collect() } else { vec![None; raw.len()] };
        return MinuteRatios { values, meeting_mean: Some(0.0), zero_mean: true };
    }
    MinuteRatios { values: raw.iter().map(|v| v.map(|x| x / mean)).collect(), meeting_mean: Some(mean), zero_mean: false }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NlpFeatureRow {
    pub meeting_id: String,
    pub t: Timestamp,
    pub negative_sentiment: Option<f64>,
    pub statement_related: Option<f64>,
    pub hawkish: Option<f64>,
    pub fls_ratio: Option<f64>,
}

impl NlpFeatureRow {
    pub fn get(&self, m: NlpMeasure) -> Option<f64> {
        match m {
            NlpMeasure::NegativeSentiment => self.negative_sentiment,
            NlpMeasure::StatementRelated => self.statement_related,
            NlpMeasure::Hawkish => self.hawkish,
            NlpMeasure::FlsRatio => self.fls_ratio,
        }
    }

    fn set(&mut self, m: NlpMeasure, v: Option<f64>) {
        match m {
            NlpMeasure::NegativeSentiment => self.negative_sentiment = v,
            NlpMeasure::StatementRelated => self.statement_related = v,
            NlpMeasure::Hawkish => self.hawkish = v,
            NlpMeasure::FlsRatio => self.fls_ratio = v,
        }
    }
}

pub const NLP_CSV_HEADER: [&str; 6] = ["meeting_id", "t", "negative_sentiment", "statement_related", "hawkish", "fls_ratio"];

/// Feature rows for one meeting. `segments` are the meeting's segments in
/// time order; only chair segments contribute. Returns the rows and one
/// warning per measure whose meeting mean was zero.
pub fn nlp_features_for_meeting(
    meeting_id: &str,
    segments: &[TranscriptSegment],
    minutes: &[Timestamp],
    lex: &LexiconSet,
    cfg: &NlpConfig,
) -> (Vec<NlpFeatureRow>, Vec<String>) {
    let chair: Vec<(&TranscriptSegment, Vec<String>)> = segments
        .iter()
        .filter(|s| s.speaker == Speaker::Chair)
        .map(|s| (s, tokenize(&s.text)))
        .collect();
    let mut rows: Vec<NlpFeatureRow> = minutes
        .iter()
        .map(|&t| NlpFeatureRow {
            meeting_id: meeting_id.to_string(),
            t,
            negative_sentiment: None,
            statement_related: None,
            hawkish: None,
            fls_ratio: None,
        })
        .collect();
    let mut warnings = Vec::new();
    for m in NlpMeasure::ALL {
        let raw = minute_quantities(m, &chair, minutes, lex, cfg);
        let ratios = normalize_by_meeting_mean(&raw, m == NlpMeasure::NegativeSentiment);
        if ratios.zero_mean {
            let msg = format!("{meeting_id}: {} has zero meeting mean", m.column());
            log::warn!("{msg}");
            warnings.push(msg);
        }
        for (row, v) in rows.iter_mut().zip(ratios.values) {
            row.set(m, v);
        }
    }
    (rows, warnings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::LexiconKind;
    use crate::time::{parse_timestamp, DEFAULT_TZ};

    fn toks(s: &str) -> Vec<String> {
        tokenize(s)
    }

    #[test]
    fn tokenizer_normalizes() {
        assert_eq!(toks("Today's FOMC statement, as released."), vec!["todays", "fomc", "statement", "as", "released"]);
        assert_eq!(toks("long-term  inflation"), vec!["long", "term", "inflation"]);
        assert_eq!(toks("Café — naïve"), vec!["cafe", "naive"]);
        assert!(toks("").is_empty());
        assert!(toks("?!").is_empty());
    }

    #[test]
    fn phrase_count_examples() {
        let lex = LexiconSet::bundled();
        assert_eq!(phrase_count(&toks("we will raise interest rates today"), &lex.hawkish), 1);
        assert_eq!(phrase_count(&toks(""), &lex.hawkish), 0);
        assert_eq!(phrase_count(&toks("cut interest rates and cut interest rates"), &lex.dovish), 2);
    }

    #[test]
    fn overlapping_distinct_phrases_all_count() {
        let lex = Lexicon::new(LexiconKind::Hawkish, ["rise interest rates", "interest rates rise", "interest rates"]).unwrap();
        // "interest rates rise interest rates": 2 + 1 + 1
        assert_eq!(phrase_count(&toks("interest rates rise interest rates"), &lex), 4);
    }

    #[test]
    fn hawkish_floor() {
        let lex = LexiconSet::bundled();
        assert!(hawkish_net(&toks("we expect to raise interest rates"), &lex) > 0);
        assert_eq!(hawkish_net(&toks("nothing to see here"), &lex), 0);
        let both = toks("we may raise interest rates or cut interest rates");
        assert_eq!(hawkish_raw(&both, &lex), 0);
        assert_eq!(hawkish_net(&toks("cut interest rates"), &lex), 0);
        assert_eq!(hawkish_raw(&toks("cut interest rates"), &lex), -1);
    }

    #[test]
    fn ratio_examples() {
        let uniform = vec![Some(3.0); 10];
        assert!(normalize_by_meeting_mean(&uniform, false).values.iter().all(|v| *v == Some(1.0)));

        let mut one_spike = vec![Some(0.0); 10];
        one_spike[4] = Some(7.0);
        let r = normalize_by_meeting_mean(&one_spike, false);
        assert_eq!(r.values[4], Some(10.0));
        assert!(r.values.iter().enumerate().all(|(i, v)| i == 4 || *v == Some(0.0)));

        let zeros = vec![Some(0.0); 5];
        assert!(normalize_by_meeting_mean(&zeros, false).values.iter().all(Option::is_none));
        assert!(normalize_by_meeting_mean(&zeros, true).values.iter().all(|v| *v == Some(0.0)));
    }

    fn segment(start: &str, speaker: Speaker, text: &str, neg: f64) -> TranscriptSegment {
        let t_start = parse_timestamp(start, DEFAULT_TZ).unwrap();
        TranscriptSegment {
            meeting_id: "m".into(),
            t_start,
            t_end: t_start + Duration::seconds(5),
            text: text.into(),
            speaker,
            sentiment_negative: neg,
            sentiment_positive: 0.0,
            sentiment_neutral: 1.0 - neg,
            fls_flag: false,
        }
    }

    #[test]
    fn journalists_do_not_count() {
        let lex = LexiconSet::bundled();
        let segs = vec![
            segment("2015-12-16T14:31:10", Speaker::Chair, "our statement today", 0.2),
            segment("2015-12-16T14:31:20", Speaker::Journalist, "will you raise interest rates", 0.9),
            segment("2015-12-16T14:32:10", Speaker::Chair, "we will raise interest rates", 0.4),
        ];
        let minutes = [parse_timestamp("2015-12-16T14:32:00", DEFAULT_TZ).unwrap(), parse_timestamp("2015-12-16T14:33:00", DEFAULT_TZ).unwrap()];
        let (rows, _) = nlp_features_for_meeting("m", &segs, &minutes, &lex, &NlpConfig::default());
        // sentiment: minute means 0.2 and 0.4, meeting mean 0.3
        assert!((rows[0].negative_sentiment.unwrap() - 0.2 / 0.3).abs() < 1e-12);
        assert!((rows[1].negative_sentiment.unwrap() - 0.4 / 0.3).abs() < 1e-12);
        assert_eq!(rows[0].hawkish, Some(0.0));
        assert_eq!(rows[1].hawkish, Some(2.0));
        assert_eq!(rows[0].statement_related, Some(2.0));
        // no FLS flags at all: zero mean, absent
        assert!(rows.iter().all(|r| r.fls_ratio.is_none()));
    }

    #[test]
    fn silent_minute_is_absent() {
        let lex = LexiconSet::bundled();
        let segs = vec![segment("2015-12-16T14:31:10", Speaker::Chair, "our statement", 0.5)];
        let minutes = [parse_timestamp("2015-12-16T14:32:00", DEFAULT_TZ).unwrap(), parse_timestamp("2015-12-16T14:40:00", DEFAULT_TZ).unwrap()];
        let (rows, _) = nlp_features_for_meeting("m", &segs, &minutes, &lex, &NlpConfig::default());
        assert_eq!(rows[0].negative_sentiment, Some(1.0));
        assert!(rows[1].negative_sentiment.is_none() && rows[1].statement_related.is_none());
    }
}
