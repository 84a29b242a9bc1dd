// SPDX-License-Identifier: Apache-2.0

//! Facial-cue and text features from press-conference video, joined with
//! minute-level market data and fed to panel regressions.

pub mod config;
pub mod econ;
pub mod emotion;
pub mod error;
pub mod facefeat;
pub mod frames;
pub mod ingest;
pub mod linalg;
pub mod market;
pub mod panel;
pub mod pipeline;
pub mod scalar;
pub mod select;
pub mod synth;
pub mod textfeat;
pub mod time;

pub use error::{Error, Result};

pub type EmotionVector64 = emotion::EmotionVector<f64>;
pub type EmotionVector32 = emotion::EmotionVector<f32>;
pub type Matrix64 = linalg::Matrix<f64>;
