// SPDX-License-Identifier: Apache-2.0

//! Facial-expression features.
//!
//! Each feature is a trailing-window mean of one or more emotion scores divided
//! by the same quantity averaged over every kept frame of the chair's tenure,
//! so a value of 1 means "typical for this chair".

use std::collections::{BTreeMap, HashMap};

use chrono::Duration;
use serde::{Deserialize, Serialize};

pub use crate::emotion::{Emotion, EmotionVector};
use crate::error::{Error, Result};
use crate::ingest::{Chair, FrameScore};
use crate::scalar::Scalar;
use crate::time::Timestamp;

pub const NEGATIVE_EMOTIONS: [Emotion; 3] = [Emotion::Angry, Emotion::Fear, Emotion::Disgust];
pub const TRANSPARENT_EMOTIONS: [Emotion; 2] = [Emotion::Happy, Emotion::Neutral];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FacialConfig {
    pub window_secs: i64,
    /// Rows with fewer frames than this in the window are flagged.
    pub min_frames: usize,
}

impl Default for FacialConfig {
    fn default() -> Self {
        Self { window_secs: 180, min_frames: 5 }
    }
}

impl FacialConfig {
    pub fn window(&self) -> Duration {
        Duration::seconds(self.window_secs)
    }
}

/// Frames of `sorted` whose timestamp lies in `(t - window, t]`.
pub fn window_slice(sorted: &[FrameScore], t: Timestamp, window: Duration) -> &[FrameScore] {
    let lo = sorted.partition_point(|f| f.t <= t - window);
    let hi = sorted.partition_point(|f| f.t <= t);
    &sorted[lo..hi.max(lo)]
}

/// Mean emotion vector over scored frames in the trailing right-closed window
/// `(t - window, t]`, or `None` when the window holds no scored frame.
pub fn rolling_emotion_average<T: Scalar>(sorted: &[FrameScore], t: Timestamp, window: Duration) -> Option<EmotionVector<T>> {
    let scored: Vec<EmotionVector<T>> = window_slice(sorted, t, window)
        .iter()
        .filter_map(|f| f.emotions.map(|e| e.cast()))
        .collect();
    EmotionVector::mean(&scored)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChairBaseline<T> {
    pub chair: Chair,
    pub lifetime: EmotionVector<T>,
    pub n_frames: usize,
}

/// Per-emotion mean over all kept frames of one chair.
pub fn chair_lifetime_baseline<'a, T: Scalar>(
    chair: Chair,
    frames: impl IntoIterator<Item = &'a FrameScore>,
) -> Result<ChairBaseline<T>> {
    let scored: Vec<EmotionVector<T>> = frames.into_iter().filter_map(|f| f.emotions.map(|e| e.cast())).collect();
    let lifetime = EmotionVector::mean(&scored)
        .ok_or_else(|| Error::domain(format!("no kept frames for chair {chair}; baseline undefined")))?;
    Ok(ChairBaseline { chair, lifetime, n_frames: scored.len() })
}

/// Baselines for every chair that has kept frames. `chair_of` maps meeting id
/// to chair; frames of unknown meetings are ignored.
pub fn chair_baselines(kept: &[FrameScore], chair_of: &HashMap<String, Chair>) -> BTreeMap<Chair, ChairBaseline<f64>> {
    let mut by_chair: BTreeMap<Chair, Vec<&FrameScore>> = BTreeMap::new();
    for f in kept {
        if let Some(&c) = chair_of.get(&f.meeting_id) {
            by_chair.entry(c).or_default().push(f);
        }
    }
    by_chair
        .into_iter()
        .filter_map(|(c, frames)| chair_lifetime_baseline(c, frames).ok().map(|b| (c, b)))
        .collect()
}

fn ratio_of_sums<T: Scalar>(emotions: &[Emotion], window: &EmotionVector<T>, base: &ChairBaseline<T>, label: &str) -> Result<T> {
    let denom = base.lifetime.sum_of(emotions);
    if denom <= T::zero() {
        return Err(Error::domain(format!("{label}: chair {} baseline is zero", base.chair)));
    }
    Ok(window.sum_of(emotions) / denom)
}

/// (angry + fear + disgust) in the window over the same sum in the baseline.
pub fn negative_facial<T: Scalar>(window: &EmotionVector<T>, base: &ChairBaseline<T>) -> Result<T> {
    ratio_of_sums(&NEGATIVE_EMOTIONS, window, base, "negative_facial")
}

/// (happy + neutral) in the window over the same sum in the baseline.
pub fn transparent_facial<T: Scalar>(window: &EmotionVector<T>, base: &ChairBaseline<T>) -> Result<T> {
    ratio_of_sums(&TRANSPARENT_EMOTIONS, window, base, "transparent_facial")
}

/// One emotion's window mean over its baseline mean.
pub fn single_emotion_ratio<T: Scalar>(emotion: Emotion, window: &EmotionVector<T>, base: &ChairBaseline<T>) -> Result<T> {
    ratio_of_sums(&[emotion], window, base, emotion.name())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FacialFeatureRow {
    pub meeting_id: String,
    pub t: Timestamp,
    pub negative_facial: Option<f64>,
    pub transparent_facial: Option<f64>,
    pub neutral_facial: Option<f64>,
    pub happy_facial: Option<f64>,
    pub sad_facial: Option<f64>,
    pub frames_in_window: usize,
    /// Fewer than the configured minimum frames in the window.
    pub low_coverage: bool,
}

pub const FACIAL_CSV_HEADER: [&str; 8] = [
    "meeting_id",
    "t",
    "negative_facial",
    "transparent_facial",
    "neutral_facial",
    "happy_facial",
    "sad_facial",
    "frames_in_window",
];

/// Feature rows for each requested minute of one meeting. `kept` must be the
/// meeting's kept frames in time order.
pub fn facial_features_for_meeting(
    meeting_id: &str,
    kept: &[FrameScore],
    minutes: &[Timestamp],
    base: &ChairBaseline<f64>,
    cfg: &FacialConfig,
) -> Vec<FacialFeatureRow> {
    let window = cfg.window();
    minutes
        .iter()
        .map(|&t| {
            let slice = window_slice(kept, t, window);
            let n = slice.iter().filter(|f| f.emotions.is_some()).count();
            let avg: Option<EmotionVector<f64>> = rolling_emotion_average(kept, t, window);
            let feature = |r: Result<f64>| match r {
                Ok(v) => Some(v),
                Err(e) => {
                    log::warn!("{meeting_id}: {e}");
                    None
                }
            };
            let (neg, tr, neu, hap, sad) = match &avg {
                None => (None, None, None, None, None),
                Some(w) => (
                    feature(negative_facial(w, base)),
                    feature(transparent_facial(w, base)),
                    feature(single_emotion_ratio(Emotion::Neutral, w, base)),
                    feature(single_emotion_ratio(Emotion::Happy, w, base)),
                    feature(single_emotion_ratio(Emotion::Sad, w, base)),
                ),
            };
            FacialFeatureRow {
                meeting_id: meeting_id.to_string(),
                t,
                negative_facial: neg,
                transparent_facial: tr,
                neutral_facial: neu,
                happy_facial: hap,
                sad_facial: sad,
                frames_in_window: n,
                low_coverage: n < cfg.min_frames,
            }
        })
        .collect()
}

/// Per-emotion changes between an original clip and its face-swapped version,
/// min-max normalized within the clip pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DeepfakeDeltas<T> {
    pub raw: EmotionVector<T>,
    pub normalized: EmotionVector<T>,
    /// All seven raw deltas were equal; `normalized` is all zeros.
    pub degenerate: bool,
}

pub fn minmax_normalize<T: Scalar>(raw: &EmotionVector<T>) -> (EmotionVector<T>, bool) {
    let lo = raw.values.iter().copied().fold(T::infinity(), T::min);
    let hi = raw.values.iter().copied().fold(T::neg_infinity(), T::max);
    let span = hi - lo;
    if span <= T::zero() {
        return (EmotionVector::zero(), true);
    }
    let mut out = raw.values.map(|d| (d - lo) / span);
    // Pin the extremes so the output hits 0 and 1 exactly.
    for (o, &d) in out.iter_mut().zip(&raw.values) {
        if d == lo {
            *o = T::zero();
        } else if d == hi {
            *o = T::one();
        }
    }
    (EmotionVector::new(out), false)
}

pub fn minmax_deepfake_deltas<T: Scalar>(original: &EmotionVector<T>, swapped: &EmotionVector<T>) -> DeepfakeDeltas<T> {
    let mut raw = EmotionVector::zero();
    for e in Emotion::ALL {
        raw.set(e, (original.get(e) - swapped.get(e)).abs());
    }
    let (normalized, degenerate) = minmax_normalize(&raw);
    DeepfakeDeltas { raw, normalized, degenerate }
}

/// Mean emotion vector of a clip (frames with scores only).
pub fn clip_mean<T: Scalar>(frames: &[FrameScore]) -> Option<EmotionVector<T>> {
    let scored: Vec<EmotionVector<T>> = frames.iter().filter_map(|f| f.emotions.map(|e| e.cast())).collect();
    EmotionVector::mean(&scored)
}
