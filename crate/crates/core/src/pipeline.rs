// SPDX-License-Identifier: Apache-2.0

//! End-to-end orchestration: load inputs, compute per-meeting features,
//! build the panel, run regressions, and render every output file.
//!
//! Each command returns its outputs as a map from fixed file name to
//! contents; nothing here depends on wall-clock time.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::econ::{render_csv, render_json, render_table, run_regression, Layout, RegressionResult, SeType, TableSpec};
use crate::emotion::Emotion;
use crate::error::{Error, Result};
use crate::facefeat::{chair_baselines, clip_mean, facial_features_for_meeting, minmax_deepfake_deltas, ChairBaseline, FacialConfig, FacialFeatureRow, FACIAL_CSV_HEADER};
use crate::frames::{filter_chair_frames, FilterReport, FrameFilterConfig};
use crate::ingest::{
    parse_frame_scores, parse_meeting_meta, parse_minute_bars, parse_transcript, Chair, FrameScore, LexiconSet, MeetingMeta, MinuteBar,
    TranscriptSegment,
};
use crate::market::{market_csv_header, market_features_for_meeting, GapEntry, MarketConfig, MarketData, MarketFeatureRow, GAP_CSV_HEADER};
use crate::panel::{build_panel, minute_grid, Panel, PanelInputs};
use crate::select::{meeting_profiles, representative_meeting, SelectConfig, Selection};
use crate::textfeat::{nlp_features_for_meeting, NlpConfig, NlpFeatureRow, NLP_CSV_HEADER};
use crate::time::format_timestamp;

/// File name to contents.
pub type Outputs = BTreeMap<String, String>;

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Checksums identifying a run: the config file and every input file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Provenance {
    pub entries: Vec<(String, String)>,
}

impl Provenance {
    pub fn push_bytes(&mut self, name: &str, bytes: &[u8]) {
        self.entries.push((name.to_string(), sha256_hex(bytes)));
    }

    pub fn push_file(&mut self, name: &str, path: &Path) -> Result<()> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        self.push_bytes(name, &bytes);
        Ok(())
    }

    pub fn summary(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
    }

    /// Comment line placed first in every text/CSV output.
    pub fn header(&self) -> String {
        format!("# provenance: {}\n", self.summary())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Settings {
    pub frames: FrameFilterConfig,
    pub facial: FacialConfig,
    pub nlp: NlpConfig,
    pub market: MarketConfig,
}

impl Settings {
    pub fn from_config(cfg: &RunConfig) -> Self {
        Self { frames: cfg.frames, facial: cfg.facial(), nlp: cfg.nlp(), market: cfg.market }
    }
}

#[derive(Debug, Clone)]
pub struct Inputs {
    pub frames: Vec<FrameScore>,
    pub transcript: Vec<TranscriptSegment>,
    pub bars: Vec<MinuteBar>,
    pub meetings: Vec<MeetingMeta>,
    pub lexicons: LexiconSet,
}

pub fn load_lexicons(cfg: &RunConfig) -> Result<LexiconSet> {
    match cfg.lexicon_dir() {
        Some(dir) => LexiconSet::from_dir(dir),
        None => Ok(LexiconSet::bundled()),
    }
}

pub fn load_inputs(cfg: &RunConfig) -> Result<Inputs> {
    Ok(Inputs {
        frames: parse_frame_scores(cfg.frames_path())?,
        transcript: parse_transcript(cfg.transcript_path())?,
        bars: parse_minute_bars(cfg.bars_path())?,
        meetings: parse_meeting_meta(cfg.meetings_path())?,
        lexicons: load_lexicons(cfg)?,
    })
}

#[derive(Debug, Clone)]
pub struct Features {
    pub kept: Vec<FrameScore>,
    pub filter: FilterReport,
    pub baselines: BTreeMap<Chair, ChairBaseline<f64>>,
    pub facial: Vec<FacialFeatureRow>,
    pub nlp: Vec<NlpFeatureRow>,
    pub market: Vec<MarketFeatureRow>,
    pub gaps: Vec<GapEntry>,
    pub warnings: Vec<String>,
}

struct MeetingFeatures {
    facial: Vec<FacialFeatureRow>,
    nlp: Vec<NlpFeatureRow>,
    market: Vec<MarketFeatureRow>,
    gaps: Vec<GapEntry>,
    warnings: Vec<String>,
}

fn require_meta(ids: impl Iterator<Item = String>, known: &HashMap<&str, &MeetingMeta>, table: &str) -> Result<()> {
    for id in ids {
        if !known.contains_key(id.as_str()) {
            return Err(Error::domain(format!("meeting {id:?} appears in {table} but not in the meeting metadata")));
        }
    }
    Ok(())
}

/// Frame filtering, baselines and the three feature tables, each over every
/// meeting's full minute grid. Meetings are processed in parallel and
/// concatenated in metadata order.
pub fn compute_features(inp: &Inputs, s: &Settings) -> Result<Features> {
    let meta: HashMap<&str, &MeetingMeta> = inp.meetings.iter().map(|m| (m.meeting_id.as_str(), m)).collect();
    require_meta(inp.frames.iter().map(|f| f.meeting_id.clone()), &meta, "frame scores")?;
    require_meta(inp.transcript.iter().map(|t| t.meeting_id.clone()), &meta, "the transcript")?;

    let (kept, filter) = filter_chair_frames(&inp.frames, &s.frames);
    let chair_of: HashMap<String, Chair> = inp.meetings.iter().map(|m| (m.meeting_id.clone(), m.chair)).collect();
    let baselines = chair_baselines(&kept, &chair_of);

    let mut all_by: HashMap<&str, Vec<FrameScore>> = HashMap::new();
    for f in &inp.frames {
        all_by.entry(f.meeting_id.as_str()).or_default().push(f.clone());
    }
    let mut kept_by: HashMap<&str, Vec<FrameScore>> = HashMap::new();
    for f in &kept {
        kept_by.entry(f.meeting_id.as_str()).or_default().push(f.clone());
    }
    let mut seg_by: HashMap<&str, Vec<TranscriptSegment>> = HashMap::new();
    for seg in &inp.transcript {
        seg_by.entry(seg.meeting_id.as_str()).or_default().push(seg.clone());
    }
    for v in all_by.values_mut().chain(kept_by.values_mut()) {
        v.sort_by_key(|f| f.t);
    }
    for v in seg_by.values_mut() {
        v.sort_by_key(|x| x.t_start);
    }
    let market = MarketData::new(&inp.bars);
    let empty_frames: Vec<FrameScore> = Vec::new();
    let empty_segs: Vec<TranscriptSegment> = Vec::new();

    let per_meeting: Vec<MeetingFeatures> = inp
        .meetings
        .par_iter()
        .map(|m| {
            let id = m.meeting_id.as_str();
            let all = all_by.get(id).unwrap_or(&empty_frames);
            let mut warnings = Vec::new();
            if all.is_empty() {
                warnings.push(format!("{id}: no frame scores"));
            }
            let grid = minute_grid(all);
            let kept = kept_by.get(id).unwrap_or(&empty_frames);
            let facial = match baselines.get(&m.chair) {
                Some(base) => facial_features_for_meeting(id, kept, &grid, base, &s.facial),
                None => {
                    if !grid.is_empty() {
                        warnings.push(format!("{id}: chair {} has no kept frames, facial features absent", m.chair));
                    }
                    facial_features_for_meeting(id, &[], &grid, &ChairBaseline { chair: m.chair, lifetime: Default::default(), n_frames: 0 }, &s.facial)
                }
            };
            let low = facial.iter().filter(|r| r.low_coverage).count();
            if low > 0 {
                warnings.push(format!("{id}: {low} minute(s) with fewer than {} frames in the facial window", s.facial.min_frames));
            }
            let segs = seg_by.get(id).unwrap_or(&empty_segs);
            let (nlp, w) = nlp_features_for_meeting(id, segs, &grid, &inp.lexicons, &s.nlp);
            warnings.extend(w);
            let (market, gaps) = market_features_for_meeting(m, &grid, &market, &s.market);
            MeetingFeatures { facial, nlp, market, gaps, warnings }
        })
        .collect();

    let mut out = Features { kept, filter, baselines, facial: vec![], nlp: vec![], market: vec![], gaps: vec![], warnings: vec![] };
    for mf in per_meeting {
        out.facial.extend(mf.facial);
        out.nlp.extend(mf.nlp);
        out.market.extend(mf.market);
        out.gaps.extend(mf.gaps);
        out.warnings.extend(mf.warnings);
    }
    Ok(out)
}

pub fn panel_from(inp: &Inputs, feats: &Features, s: &Settings) -> Result<Panel> {
    let panel = build_panel(&PanelInputs {
        facial: &feats.facial,
        nlp: &feats.nlp,
        market: &feats.market,
        kept_frames: &feats.kept,
        meta: &inp.meetings,
        units: s.market.units,
    })?;
    if panel.is_empty() {
        log::warn!("panel is empty");
    }
    Ok(panel)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn facial_csv(rows: &[FacialFeatureRow]) -> String {
    let mut s = FACIAL_CSV_HEADER.join(",");
    s.push_str(",low_coverage\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.meeting_id,
            format_timestamp(&r.t),
            fmt_opt(r.negative_facial),
            fmt_opt(r.transparent_facial),
            fmt_opt(r.neutral_facial),
            fmt_opt(r.happy_facial),
            fmt_opt(r.sad_facial),
            r.frames_in_window,
            r.low_coverage
        );
    }
    s
}

pub fn nlp_csv(rows: &[NlpFeatureRow]) -> String {
    let mut s = NLP_CSV_HEADER.join(",");
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.meeting_id,
            format_timestamp(&r.t),
            fmt_opt(r.negative_sentiment),
            fmt_opt(r.statement_related),
            fmt_opt(r.hawkish),
            fmt_opt(r.fls_ratio)
        );
    }
    s
}

pub fn market_csv(rows: &[MarketFeatureRow]) -> String {
    let mut s = market_csv_header().join(",");
    s.push('\n');
    for r in rows {
        let mut cells = vec![r.meeting_id.clone(), format_timestamp(&r.t)];
        cells.extend(r.abs_pct_change.iter().map(|v| fmt_opt(*v)));
        cells.extend(r.abs_pct_change_3min.iter().map(|v| fmt_opt(*v)));
        cells.extend([r.volume_spy, r.volume_spy_raw, r.tick_vix, r.tick_eur, r.tick_jpy].map(fmt_opt));
        cells.extend(r.predrift.iter().map(|v| fmt_opt(*v)));
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn gaps_csv(gaps: &[GapEntry]) -> String {
    let mut s = String::from(GAP_CSV_HEADER);
    s.push('\n');
    for g in gaps {
        s.push_str(&g.to_csv_line());
        s.push('\n');
    }
    s
}

fn with_header(p: &Provenance, body: &str) -> String {
    format!("{}{body}", p.header())
}

/// A loaded configuration plus the checksums of everything it references.
#[derive(Debug, Clone)]
pub struct Run {
    pub cfg: RunConfig,
    pub provenance: Provenance,
}

impl Run {
    pub fn load(config_path: impl AsRef<Path>) -> Result<Self> {
        let path = config_path.as_ref();
        let cfg = RunConfig::load(path)?;
        let mut provenance = Provenance::default();
        provenance.push_file("config", path)?;
        Self::finish(cfg, provenance)
    }

    pub fn from_config(cfg: RunConfig, config_bytes: &[u8]) -> Result<Self> {
        let mut provenance = Provenance::default();
        provenance.push_bytes("config", config_bytes);
        Self::finish(cfg, provenance)
    }

    fn finish(cfg: RunConfig, mut provenance: Provenance) -> Result<Self> {
        provenance.push_file("frames", &cfg.frames_path())?;
        provenance.push_file("transcript", &cfg.transcript_path())?;
        provenance.push_file("bars", &cfg.bars_path())?;
        provenance.push_file("meetings", &cfg.meetings_path())?;
        if let Some(dir) = cfg.lexicon_dir() {
            for name in ["hawkish.txt", "dovish.txt", "statement_related.txt", "fls.txt"] {
                let p = dir.join(name);
                if p.exists() {
                    provenance.push_file(name.trim_end_matches(".txt"), &p)?;
                }
            }
        }
        Ok(Self { cfg, provenance })
    }

    pub fn settings(&self) -> Settings {
        Settings::from_config(&self.cfg)
    }

    /// Runs every reader and reports each failure; the count of errors is
    /// returned alongside the report text.
    pub fn validate(&self) -> (usize, String) {
        let mut errors = 0;
        let mut report = String::new();
        let mut check = |name: &str, r: Result<usize>| match r {
            Ok(n) => {
                let _ = writeln!(report, "{name}: ok ({n} records)");
            }
            Err(e) => {
                errors += 1;
                let _ = writeln!(report, "{name}: error: {e}");
            }
        };
        let frames = parse_frame_scores(self.cfg.frames_path());
        check("frames", frames.as_ref().map(Vec::len).map_err(clone_err));
        let transcript = parse_transcript(self.cfg.transcript_path());
        check("transcript", transcript.as_ref().map(Vec::len).map_err(clone_err));
        check("bars", parse_minute_bars(self.cfg.bars_path()).map(|v| v.len()));
        let meetings = parse_meeting_meta(self.cfg.meetings_path());
        check("meetings", meetings.as_ref().map(Vec::len).map_err(clone_err));
        check("lexicons", load_lexicons(&self.cfg).map(|l| l.hawkish.len() + l.dovish.len() + l.statement_related.len()));
        if let (Ok(frames), Ok(transcript), Ok(meetings)) = (&frames, &transcript, &meetings) {
            let known: HashMap<&str, &MeetingMeta> = meetings.iter().map(|m| (m.meeting_id.as_str(), m)).collect();
            let cross = require_meta(frames.iter().map(|f| f.meeting_id.clone()), &known, "frame scores")
                .and_then(|_| require_meta(transcript.iter().map(|t| t.meeting_id.clone()), &known, "the transcript"))
                .map(|_| meetings.len());
            check("cross-file meeting ids", cross);
        }
        for p in self.cfg.spec_paths() {
            check(&format!("spec {}", p.display()), TableSpec::load(&p).map(|t| t.columns.len()));
        }
        let _ = writeln!(report, "{errors} errors");
        (errors, with_header(&self.provenance, &report))
    }

    pub fn features(&self) -> Result<(Inputs, Features, Outputs)> {
        let inp = load_inputs(&self.cfg)?;
        let s = self.settings();
        let feats = compute_features(&inp, &s)?;
        let p = &self.provenance;
        let mut out = Outputs::new();
        out.insert("facial_features.csv".into(), with_header(p, &facial_csv(&feats.facial)));
        out.insert("nlp_features.csv".into(), with_header(p, &nlp_csv(&feats.nlp)));
        out.insert("market_features.csv".into(), with_header(p, &market_csv(&feats.market)));
        out.insert("market_gaps.csv".into(), with_header(p, &gaps_csv(&feats.gaps)));
        out.insert("frame_filter_report.txt".into(), with_header(p, &feats.filter.to_text()));
        let mut w = feats.warnings.join("\n");
        if !w.is_empty() {
            w.push('\n');
        }
        out.insert("warnings.txt".into(), with_header(p, &w));
        Ok((inp, feats, out))
    }

    pub fn build_panel(&self) -> Result<(Panel, Outputs)> {
        let (inp, feats, mut out) = self.features()?;
        let panel = panel_from(&inp, &feats, &self.settings())?;
        let p = &self.provenance;
        out.insert("panel.csv".into(), with_header(p, &panel.to_csv()));
        out.insert("panel_columns.csv".into(), with_header(p, &panel.catalog_csv()));
        let mut audit = panel.audit.to_text();
        if panel.is_empty() {
            audit.push_str("warning: panel is empty\n");
        }
        out.insert("stage_audit.txt".into(), with_header(p, &audit));
        Ok((panel, out))
    }

    /// Fits every spec, either those given or those listed in the config.
    /// `se_override` replaces the SE type of every column.
    pub fn regress(&self, specs: &[PathBuf], se_override: Option<SeType>) -> Result<Outputs> {
        let (panel, _) = self.build_panel()?;
        let paths = if specs.is_empty() { self.cfg.spec_paths() } else { specs.to_vec() };
        if paths.is_empty() {
            return Err(Error::Config("no regression spec files given".into()));
        }
        let mut out = Outputs::new();
        for path in paths {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("table").to_string();
            let mut spec = TableSpec::load(&path)?;
            if let Some(se) = se_override.or_else(|| self.cfg.regress.se.get(&stem).copied()) {
                spec = spec.with_se(se);
            }
            let results = fit_table(&panel, &spec)?;
            out.extend(render_outputs(&stem, &spec, &results, &self.provenance)?);
        }
        Ok(out)
    }

    pub fn select_representative(&self, chair: Option<Chair>) -> Result<(Vec<Selection>, Outputs)> {
        let inp = load_inputs(&self.cfg)?;
        let (kept, _) = filter_chair_frames(&inp.frames, &self.cfg.frames);
        let profiles = meeting_profiles(&kept, &inp.meetings);
        let chairs: Vec<Chair> = match chair {
            Some(c) => vec![c],
            None => Chair::ALL.into_iter().filter(|c| profiles.iter().any(|p| p.chair == *c)).collect(),
        };
        let cfg: SelectConfig = self.cfg.selection();
        let mut sels = Vec::new();
        let mut out = Outputs::new();
        for c in chairs {
            let mine: Vec<_> = profiles.iter().filter(|p| p.chair == c).cloned().collect();
            let sel = representative_meeting(&mine, &cfg)?;
            let key = c.name().to_ascii_lowercase();
            out.insert(format!("representative_{key}.txt"), with_header(&self.provenance, &sel.to_text()));
            let json = serde_json::json!({ "provenance": self.provenance.summary(), "selection": sel });
            out.insert(format!("representative_{key}.json"), serde_json::to_string_pretty(&json)? + "\n");
            sels.push(sel);
        }
        Ok((sels, out))
    }
}

fn clone_err(e: &Error) -> Error {
    Error::Domain(e.to_string())
}

/// Fits each column of a table spec; columns run in parallel.
pub fn fit_table(panel: &Panel, spec: &TableSpec) -> Result<Vec<RegressionResult>> {
    spec.columns.par_iter().map(|c| run_regression(panel, c)).collect()
}

pub fn render_outputs(stem: &str, spec: &TableSpec, results: &[RegressionResult], p: &Provenance) -> Result<Outputs> {
    let mut out = Outputs::new();
    let mut text = String::new();
    if !spec.title.is_empty() {
        text.push_str(&spec.title);
        text.push_str("\n\n");
    }
    text.push_str(&render_table(results, &spec.labels, Layout::Stacked)?);
    text.push_str("\n*, **, *** denote significance at the 10%, 5% and 1% levels.\n");
    for (i, r) in results.iter().enumerate() {
        let _ = writeln!(text, "({}) se: {}; {}; overall r^2 {:.3}", i + 1, r.se_type, r.dof_note, r.r_squared_overall);
    }
    out.insert(format!("{stem}.txt"), with_header(p, &text));
    out.insert(format!("{stem}.csv"), with_header(p, &render_csv(results, &spec.labels)?));
    out.insert(format!("{stem}.json"), render_json(&spec.title, results, &p.summary())?);
    Ok(out)
}

/// Table-3-style report: one column per (original, swapped) clip pair.
pub fn compare_deepfake(pairs: &[(PathBuf, PathBuf)]) -> Result<Outputs> {
    if pairs.is_empty() {
        return Err(Error::Config("no clip pairs given".into()));
    }
    let mut prov = Provenance::default();
    let mut columns = Vec::new();
    for (i, (orig, swap)) in pairs.iter().enumerate() {
        prov.push_file(&format!("original{}", i + 1), orig)?;
        prov.push_file(&format!("swapped{}", i + 1), swap)?;
        let mean = |p: &Path| -> Result<_> {
            let frames = parse_frame_scores(p)?;
            clip_mean::<f64>(&frames).ok_or_else(|| Error::domain(format!("{}: no scored frames", p.display())))
        };
        columns.push(minmax_deepfake_deltas(&mean(orig)?, &mean(swap)?));
    }
    let mut csv = String::from("emotion");
    for i in 0..columns.len() {
        let _ = write!(csv, ",normalized_{0},raw_{0}", i + 1);
    }
    csv.push('\n');
    let mut text = String::from("Min-max normalized emotion changes\n\n");
    let _ = write!(text, "{:<10}", "");
    for i in 0..columns.len() {
        let _ = write!(text, "{:>10}", format!("({})", i + 1));
    }
    text.push('\n');
    for e in Emotion::ALL {
        let _ = write!(csv, "{}", e.name());
        let _ = write!(text, "{:<10}", e.name());
        for c in &columns {
            let _ = write!(csv, ",{},{}", c.normalized.get(e), c.raw.get(e));
            let _ = write!(text, "{:>10}", format!("{:.3}", c.normalized.get(e)));
        }
        csv.push('\n');
        text.push('\n');
    }
    let _ = write!(csv, "degenerate");
    let _ = write!(text, "{:<10}", "degenerate");
    for c in &columns {
        let _ = write!(csv, ",{},", c.degenerate);
        let _ = write!(text, "{:>10}", if c.degenerate { "yes" } else { "no" });
    }
    csv.push('\n');
    text.push('\n');
    let mut out = Outputs::new();
    out.insert("deepfake_deltas.csv".into(), with_header(&prov, &csv));
    out.insert("deepfake_deltas.txt".into(), with_header(&prov, &text));
    Ok(out)
}

pub fn write_outputs(dir: &Path, outputs: &Outputs) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, body) in outputs {
        let p = dir.join(name);
        fs::write(&p, body).map_err(|e| Error::io(&p, e))?;
    }
    Ok(())
}
