// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// The seven basic emotions scored by the facial-expression model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Angry,
    Disgust,
    Fear,
    Happy,
    Sad,
    Surprise,
    Neutral,
}

impl Emotion {
    /// Canonical column order.
    pub const ALL: [Emotion; 7] = [
        Emotion::Angry,
        Emotion::Disgust,
        Emotion::Fear,
        Emotion::Happy,
        Emotion::Sad,
        Emotion::Surprise,
        Emotion::Neutral,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Emotion::Angry => "angry",
            Emotion::Disgust => "disgust",
            Emotion::Fear => "fear",
            Emotion::Happy => "happy",
            Emotion::Sad => "sad",
            Emotion::Surprise => "surprise",
            Emotion::Neutral => "neutral",
        }
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Emotion {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Emotion::ALL
            .into_iter()
            .find(|e| e.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown emotion {s:?}"))
    }
}

/// Seven emotion intensities in [`Emotion::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct EmotionVector<T> {
    pub values: [T; 7],
}

impl<T: Scalar> EmotionVector<T> {
    pub fn new(values: [T; 7]) -> Self {
        Self { values }
    }

    pub fn zero() -> Self {
        Self { values: [T::zero(); 7] }
    }

    #[inline]
    pub fn get(&self, e: Emotion) -> T {
        self.values[e.index()]
    }

    pub fn set(&mut self, e: Emotion, v: T) {
        self.values[e.index()] = v;
    }

    pub fn sum(&self) -> T {
        self.values.iter().copied().sum()
    }

    pub fn sum_of(&self, emotions: &[Emotion]) -> T {
        emotions.iter().map(|&e| self.get(e)).sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= T::zero())
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { values: self.values.map(|v| v * c) }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (a, &b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
    }

    /// Arithmetic mean of a non-empty set of vectors.
    pub fn mean<'a>(vectors: impl IntoIterator<Item = &'a Self>) -> Option<Self>
    where
        T: 'a,
    {
        let mut acc = Self::zero();
        let mut n = 0usize;
        for v in vectors {
            acc.add_assign(v);
            n += 1;
        }
        (n > 0).then(|| acc.scaled(T::one() / T::from_count(n)))
    }

    pub fn cast<U: Scalar>(&self) -> EmotionVector<U> {
        EmotionVector { values: self.values.map(|v| U::lit(v.to_f64_lossy())) }
    }
}
