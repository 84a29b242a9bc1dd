// SPDX-License-Identifier: Apache-2.0

//! Run configuration, read from TOML. Relative paths resolve against the
//! directory holding the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::econ::SeType;
use crate::error::{Error, Result};
use crate::facefeat::FacialConfig;
use crate::frames::FrameFilterConfig;
use crate::market::MarketConfig;
use crate::select::SelectConfig;
use crate::textfeat::{FlsSource, NlpConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputPaths {
    pub frames: PathBuf,
    pub transcript: PathBuf,
    pub bars: PathBuf,
    pub meetings: PathBuf,
    /// Directory with hawkish.txt, dovish.txt, statement_related.txt and an
    /// optional fls.txt. The bundled lists are used when absent.
    #[serde(default)]
    pub lexicon_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureWindows {
    pub facial_window_secs: i64,
    pub nlp_window_secs: i64,
    pub min_frames: usize,
    pub fls_source: FlsSource,
}

impl Default for FeatureWindows {
    fn default() -> Self {
        Self { facial_window_secs: 180, nlp_window_secs: 60, min_frames: 5, fls_source: FlsSource::Flags }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegressConfig {
    pub specs: Vec<PathBuf>,
    /// SE type per spec file stem, overriding the file.
    pub se: BTreeMap<String, SeType>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub inputs: InputPaths,
    pub output: OutputConfig,
    #[serde(default)]
    pub frames: FrameFilterConfig,
    #[serde(default)]
    pub features: FeatureWindows,
    #[serde(default)]
    pub market: MarketConfig,
    #[serde(default)]
    pub regress: RegressConfig,
    #[serde(default)]
    pub select: SelectConfigToml,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectConfigToml {
    pub variance_target: f64,
    pub n_components: Option<usize>,
}

impl Default for SelectConfigToml {
    fn default() -> Self {
        let d = SelectConfig::default();
        Self { variance_target: d.variance_target, n_components: d.n_components }
    }
}

impl RunConfig {
    pub fn parse_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate_values()?;
        Ok(cfg)
    }

    /// Reads and validates a config file, checking that every input exists.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let cfg = Self::parse_str(&text, &base)?;
        cfg.check_paths()?;
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn frames_path(&self) -> PathBuf {
        self.resolve(&self.inputs.frames)
    }

    pub fn transcript_path(&self) -> PathBuf {
        self.resolve(&self.inputs.transcript)
    }

    pub fn bars_path(&self) -> PathBuf {
        self.resolve(&self.inputs.bars)
    }

    pub fn meetings_path(&self) -> PathBuf {
        self.resolve(&self.inputs.meetings)
    }

    pub fn lexicon_dir(&self) -> Option<PathBuf> {
        self.inputs.lexicon_dir.as_deref().map(|p| self.resolve(p))
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output.dir)
    }

    pub fn spec_paths(&self) -> Vec<PathBuf> {
        self.regress.specs.iter().map(|p| self.resolve(p)).collect()
    }

    pub fn facial(&self) -> FacialConfig {
        FacialConfig { window_secs: self.features.facial_window_secs, min_frames: self.features.min_frames }
    }

    pub fn nlp(&self) -> NlpConfig {
        NlpConfig { window_secs: self.features.nlp_window_secs, fls_source: self.features.fls_source }
    }

    pub fn selection(&self) -> SelectConfig {
        SelectConfig { variance_target: self.select.variance_target, n_components: self.select.n_components }
    }

    fn validate_values(&self) -> Result<()> {
        self.frames.validate()?;
        if self.features.facial_window_secs <= 0 || self.features.nlp_window_secs <= 0 {
            return Err(Error::Config("window durations must be positive".into()));
        }
        if self.market.anchor_slack_mins < 0 {
            return Err(Error::Config("anchor slack must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.select.variance_target) || self.select.variance_target == 0.0 {
            return Err(Error::Config("variance target must lie in (0, 1]".into()));
        }
        Ok(())
    }

    /// Every referenced input path must exist.
    pub fn check_paths(&self) -> Result<()> {
        let mut paths = vec![self.frames_path(), self.transcript_path(), self.bars_path(), self.meetings_path()];
        paths.extend(self.lexicon_dir());
        paths.extend(self.spec_paths());
        for p in paths {
            if !p.exists() {
                return Err(Error::Config(format!("{}: no such file or directory", p.display())));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[inputs]
frames = "frames.jsonl"
transcript = "transcript.jsonl"
bars = "bars.csv"
meetings = "meetings.csv"

[output]
dir = "out"
"#;

    #[test]
    fn defaults_fill_in() {
        let cfg = RunConfig::parse_str(MINIMAL, Path::new("/data")).unwrap();
        assert_eq!(cfg.frames.similarity_threshold, 0.5);
        assert_eq!(cfg.features.facial_window_secs, 180);
        assert_eq!(cfg.features.nlp_window_secs, 60);
        assert_eq!(cfg.frames_path(), PathBuf::from("/data/frames.jsonl"));
        assert_eq!(cfg.output_dir(), PathBuf::from("/data/out"));
    }

    #[test]
    fn rejects_bad_values() {
        let bad = format!("{MINIMAL}\n[features]\nfacial_window_secs = 0\n");
        assert!(RunConfig::parse_str(&bad, Path::new(".")).is_err());
        let typo = format!("{MINIMAL}\n[frames]\nsimilarity = 0.5\n");
        assert!(RunConfig::parse_str(&typo, Path::new(".")).is_err());
    }

    #[test]
    fn missing_inputs_fail_path_check() {
        let cfg = RunConfig::parse_str(MINIMAL, Path::new("/nonexistent-dir")).unwrap();
        let err = cfg.check_paths().unwrap_err();
        assert!(err.to_string().contains("frames.jsonl"));
    }
}
