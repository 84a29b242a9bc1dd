// SPDX-License-Identifier: Apache-2.0

//! Keeps only frames that show the chair: a face must be detected and the
//! frame's embedding must be close enough to the chair reference.
//!
//! A frame is dropped when *either* check fails.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::FrameScore;
use crate::linalg::{dot, norm};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrameFilterConfig {
    pub similarity_threshold: f64,
    pub require_face: bool,
}

impl Default for FrameFilterConfig {
    fn default() -> Self {
        Self { similarity_threshold: 0.5, require_face: true }
    }
}

impl FrameFilterConfig {
    pub fn new(similarity_threshold: f64, require_face: bool) -> Result<Self> {
        let cfg = Self { similarity_threshold, require_face };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.similarity_threshold) {
            return Err(Error::domain(format!(
                "similarity threshold {} outside [0,1]",
                self.similarity_threshold
            )));
        }
        Ok(())
    }
}

/// Accounting of every frame seen by [`filter_chair_frames`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub total_frames: usize,
    pub kept: usize,
    pub dropped_no_face: usize,
    pub dropped_low_similarity: usize,
    pub dropped_missing_similarity: usize,
}

impl FilterReport {
    pub fn dropped(&self) -> usize {
        self.dropped_no_face + self.dropped_low_similarity + self.dropped_missing_similarity
    }

    pub fn is_balanced(&self) -> bool {
        self.kept + self.dropped() == self.total_frames
    }

    pub fn merge(&mut self, other: &FilterReport) {
        self.total_frames += other.total_frames;
        self.kept += other.kept;
        self.dropped_no_face += other.dropped_no_face;
        self.dropped_low_similarity += other.dropped_low_similarity;
        self.dropped_missing_similarity += other.dropped_missing_similarity;
    }

    pub fn to_text(&self) -> String {
        format!(
            "frames total: {}\nkept: {}\ndropped (no face): {}\ndropped (similarity below threshold): {}\ndropped (similarity missing): {}\n",
            self.total_frames, self.kept, self.dropped_no_face, self.dropped_low_similarity, self.dropped_missing_similarity
        )
    }
}

/// Cosine of the angle between two equal-length, nonzero vectors.
pub fn cosine_similarity<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::domain(format!("dimension mismatch: {} vs {}", a.len(), b.len())));
    }
    let (na, nb) = (norm(a), norm(b));
    if na == T::zero() || nb == T::zero() {
        return Err(Error::domain("cosine similarity of a zero vector"));
    }
    let c = dot(a, b) / (na * nb);
    Ok(c.max(-T::one()).min(T::one()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameVerdict {
    Kept,
    NoFace,
    LowSimilarity,
    MissingSimilarity,
}

pub fn classify_frame(frame: &FrameScore, cfg: &FrameFilterConfig) -> FrameVerdict {
    if cfg.require_face && (!frame.face_detected || frame.emotions.is_none()) {
        return FrameVerdict::NoFace;
    }
    match frame.chair_similarity {
        None => FrameVerdict::MissingSimilarity,
        Some(s) if s < cfg.similarity_threshold => FrameVerdict::LowSimilarity,
        Some(_) if frame.emotions.is_none() => FrameVerdict::NoFace,
        Some(_) => FrameVerdict::Kept,
    }
}

/// Splits frames into kept chair frames and an accounting of the drops.
/// Input order is preserved among kept frames.
pub fn filter_chair_frames(frames: &[FrameScore], cfg: &FrameFilterConfig) -> (Vec<FrameScore>, FilterReport) {
    let mut report = FilterReport { total_frames: frames.len(), ..FilterReport::default() };
    let mut kept = Vec::new();
    for f in frames {
        match classify_frame(f, cfg) {
            FrameVerdict::Kept => {
                report.kept += 1;
                kept.push(f.clone());
            }
            FrameVerdict::NoFace => report.dropped_no_face += 1,
            FrameVerdict::LowSimilarity => report.dropped_low_similarity += 1,
            FrameVerdict::MissingSimilarity => report.dropped_missing_similarity += 1,
        }
    }
    (kept, report)
}
