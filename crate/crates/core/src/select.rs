// SPDX-License-Identifier: Apache-2.0

//! Emotion-representative conference per chair: PCA over meeting-level mean
//! emotion profiles, then the meeting closest to the centroid of the scores.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use chrono::NaiveDate;
use serde::Serialize;

use crate::emotion::{Emotion, EmotionVector};
use crate::error::{Error, Result};
use crate::ingest::{Chair, FrameScore, MeetingMeta};
use crate::linalg::{symmetric_eigen, Matrix};
use crate::scalar::Scalar;

pub const DEFAULT_VARIANCE_TARGET: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeetingEmotionProfile {
    pub meeting_id: String,
    pub chair: Chair,
    pub date: NaiveDate,
    pub mean: EmotionVector<f64>,
}

/// Mean emotion vector of each meeting's kept frames, in meeting-date order.
/// Meetings without kept frames are skipped.
pub fn meeting_profiles(kept: &[FrameScore], meta: &[MeetingMeta]) -> Vec<MeetingEmotionProfile> {
    let mut by_meeting: BTreeMap<&str, Vec<EmotionVector<f64>>> = BTreeMap::new();
    for f in kept {
        if let Some(e) = f.emotions {
            by_meeting.entry(f.meeting_id.as_str()).or_default().push(e);
        }
    }
    let mut out: Vec<MeetingEmotionProfile> = meta
        .iter()
        .filter_map(|m| {
            let mean = EmotionVector::mean(by_meeting.get(m.meeting_id.as_str())?)?;
            Some(MeetingEmotionProfile { meeting_id: m.meeting_id.clone(), chair: m.chair, date: m.date, mean })
        })
        .collect();
    out.sort_by(|a, b| (a.date, &a.meeting_id).cmp(&(b.date, &b.meeting_id)));
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pca<T> {
    pub mean: Vec<T>,
    /// All eigenvalues of the sample covariance, descending.
    pub eigenvalues: Vec<T>,
    /// Unit eigenvectors as columns, one per retained component.
    pub components: Matrix<T>,
    /// Observations projected on the retained components (n x m).
    pub scores: Matrix<T>,
    pub explained_ratio: Vec<T>,
    /// Total variance was zero.
    pub degenerate: bool,
}

/// Smallest number of leading components whose cumulative share reaches
/// `target`. Zero when there is no variance.
pub fn components_for_variance<T: Scalar>(eigenvalues: &[T], target: f64) -> usize {
    let total: T = eigenvalues.iter().map(|&e| e.max(T::zero())).sum();
    if total <= T::zero() {
        return 0;
    }
    let mut acc = T::zero();
    for (i, &e) in eigenvalues.iter().enumerate() {
        acc += e.max(T::zero());
        if acc / total >= T::lit(target) - T::lit(1e-12) {
            return i + 1;
        }
    }
    eigenvalues.len()
}

/// Principal components of the rows of `data` from the sample covariance.
/// Each component's largest-magnitude loading is positive.
pub fn pca<T: Scalar>(data: &Matrix<T>, n_components: usize) -> Result<Pca<T>> {
    let (n, p) = (data.nrows(), data.ncols());
    if n < 2 {
        return Err(Error::domain(format!("PCA needs at least 2 observations, got {n}")));
    }
    if n_components > p {
        return Err(Error::domain(format!("{n_components} components requested from {p} dimensions")));
    }
    let mean: Vec<T> = (0..p).map(|j| data.column(j).into_iter().sum::<T>() / T::from_count(n)).collect();
    let centered = Matrix::from_fn(n, p, |i, j| data[(i, j)] - mean[j]);
    let cov = centered.gram().scale(T::one() / T::from_count(n - 1));
    let (eigenvalues, mut vectors) = symmetric_eigen(&cov)?;
    for j in 0..p {
        let mut best = 0;
        for i in 1..p {
            if vectors[(i, j)].abs() > vectors[(best, j)].abs() {
                best = i;
            }
        }
        if vectors[(best, j)] < T::zero() {
            for i in 0..p {
                vectors[(i, j)] = -vectors[(i, j)];
            }
        }
    }
    let total: T = eigenvalues.iter().map(|&e| e.max(T::zero())).sum();
    let degenerate = total <= T::zero();
    let explained_ratio = eigenvalues.iter().map(|&e| if degenerate { T::zero() } else { e.max(T::zero()) / total }).collect();
    let keep: Vec<usize> = (0..n_components).collect();
    let components = vectors.select_columns(&keep);
    let scores = centered.matmul(&components)?;
    let eigenvalues = eigenvalues.into_iter().map(|e| e.max(T::zero())).collect();
    Ok(Pca { mean, eigenvalues, components, scores, explained_ratio, degenerate })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectConfig {
    pub variance_target: f64,
    /// Overrides `variance_target` when set.
    pub n_components: Option<usize>,
}

impl Default for SelectConfig {
    fn default() -> Self {
        Self { variance_target: DEFAULT_VARIANCE_TARGET, n_components: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub chair: Chair,
    pub meeting_id: String,
    pub n_components: usize,
    pub eigenvalues: Vec<f64>,
    pub explained_ratio: Vec<f64>,
    /// Distance of every meeting to the centroid, in profile order.
    pub distances: Vec<(String, f64)>,
    pub degenerate: bool,
}

impl Selection {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "chair: {}", self.chair.name());
        let _ = writeln!(s, "representative: {}", self.meeting_id);
        let _ = writeln!(s, "components retained: {}", self.n_components);
        if self.degenerate {
            let _ = writeln!(s, "warning: profiles have zero variance");
        }
        let _ = writeln!(s, "\ncomponent,eigenvalue,explained,cumulative");
        let mut cum = 0.0;
        for (i, (e, r)) in self.eigenvalues.iter().zip(&self.explained_ratio).enumerate() {
            cum += r;
            let _ = writeln!(s, "{},{e:.6},{r:.6},{cum:.6}", i + 1);
        }
        let _ = writeln!(s, "\nmeeting_id,distance");
        for (id, d) in &self.distances {
            let _ = writeln!(s, "{id},{d:.6}");
        }
        s
    }
}

/// Index of the smallest distance; near-ties go to the earlier position.
fn argmin_with_ties(d: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..d.len() {
        let tol = 1e-12 * d[best].abs().max(d[i].abs());
        if d[i] < d[best] - tol {
            best = i;
        }
    }
    best
}

/// The profile nearest the centroid of its PCA scores. Profiles must belong
/// to one chair; ties go to the earliest date.
pub fn representative_meeting(profiles: &[MeetingEmotionProfile], cfg: &SelectConfig) -> Result<Selection> {
    let first = profiles.first().ok_or_else(|| Error::domain("no meeting profiles to choose from"))?;
    if let Some(other) = profiles.iter().find(|p| p.chair != first.chair) {
        return Err(Error::domain(format!("profiles mix chairs {} and {}", first.chair.name(), other.chair.name())));
    }
    let mut ordered: Vec<&MeetingEmotionProfile> = profiles.iter().collect();
    ordered.sort_by(|a, b| (a.date, &a.meeting_id).cmp(&(b.date, &b.meeting_id)));

    if ordered.len() == 1 {
        return Ok(Selection {
            chair: first.chair,
            meeting_id: first.meeting_id.clone(),
            n_components: 0,
            eigenvalues: vec![],
            explained_ratio: vec![],
            distances: vec![(first.meeting_id.clone(), 0.0)],
            degenerate: true,
        });
    }
    let rows: Vec<Vec<f64>> = ordered.iter().map(|p| Emotion::ALL.iter().map(|&e| p.mean.get(e)).collect()).collect();
    let data = Matrix::from_rows(&rows)?;
    let full = pca(&data, 7)?;
    let m = cfg.n_components.unwrap_or_else(|| components_for_variance(&full.eigenvalues, cfg.variance_target)).min(7);
    let keep: Vec<usize> = (0..m).collect();
    let scores = full.scores.select_columns(&keep);
    let distances = centroid_distances(&scores);
    let best = argmin_with_ties(&distances);
    Ok(Selection {
        chair: first.chair,
        meeting_id: ordered[best].meeting_id.clone(),
        n_components: m,
        eigenvalues: full.eigenvalues.clone(),
        explained_ratio: full.explained_ratio.clone(),
        distances: ordered.iter().zip(&distances).map(|(p, &d)| (p.meeting_id.clone(), d)).collect(),
        degenerate: full.degenerate,
    })
}

/// Euclidean distance of each row to the mean row.
pub fn centroid_distances<T: Scalar>(scores: &Matrix<T>) -> Vec<T> {
    let (n, m) = (scores.nrows(), scores.ncols());
    let centroid: Vec<T> = (0..m).map(|j| scores.column(j).into_iter().sum::<T>() / T::from_count(n.max(1))).collect();
    (0..n)
        .map(|i| scores.row(i).iter().zip(&centroid).map(|(&a, &c)| (a - c) * (a - c)).sum::<T>().sqrt())
        .collect()
}

/// Representatives for every chair present in `profiles`.
pub fn representatives_by_chair(profiles: &[MeetingEmotionProfile], cfg: &SelectConfig) -> Result<Vec<Selection>> {
    let mut by_chair: BTreeMap<Chair, Vec<MeetingEmotionProfile>> = BTreeMap::new();
    for p in profiles {
        by_chair.entry(p.chair).or_default().push(p.clone());
    }
    by_chair.values().map(|ps| representative_meeting(ps, cfg)).collect()
}
