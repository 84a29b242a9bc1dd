// SPDX-License-Identifier: Apache-2.0

//! The minute-level regression panel: facial, text, market and meeting
//! features joined on (meeting, minute), plus derived regressors.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use chrono::{Duration, NaiveDate};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::facefeat::FacialFeatureRow;
use crate::ingest::{Chair, FrameScore, Instrument, MeetingMeta};
use crate::market::{MarketFeatureRow, Units};
use crate::textfeat::NlpFeatureRow;
use crate::time::{format_timestamp, minute_label, Timestamp};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PanelRow {
    pub meeting_id: String,
    pub chair: Chair,
    pub t: Timestamp,
    pub abs_pct: [Option<f64>; 4],
    pub abs_pct3: [Option<f64>; 4],
    pub volume_spy: Option<f64>,
    pub volume_spy_raw: Option<f64>,
    pub tick_vix: Option<f64>,
    pub tick_eur: Option<f64>,
    pub tick_jpy: Option<f64>,
    pub negative_facial: Option<f64>,
    pub negative_facial_lag: Option<f64>,
    pub transparent_facial: Option<f64>,
    pub neutral_facial: Option<f64>,
    pub happy_facial: Option<f64>,
    pub sad_facial: Option<f64>,
    pub negative_sentiment: Option<f64>,
    pub statement_related: Option<f64>,
    pub hawkish: Option<f64>,
    pub fls_ratio: Option<f64>,
    pub predrift: [Option<f64>; 4],
    pub ffr_change: Option<f64>,
    pub mpu: Option<f64>,
    pub public_interest: Option<f64>,
    pub conference_count: u32,
    pub cfquart: u8,
    pub congre30: u8,
    pub congre10: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColumnInfo {
    pub name: String,
    pub source: &'static str,
    pub units: String,
    pub variable: &'static str,
}

/// Every numeric panel column in output order.
pub fn column_catalog(units: Units) -> Vec<ColumnInfo> {
    let u = match units {
        Units::Pct => "percent",
        Units::Bps => "basis points",
    };
    let mut out = Vec::new();
    let mut push = |name: String, source: &'static str, units: &str, variable: &'static str| {
        out.push(ColumnInfo { name, source, units: units.to_string(), variable });
    };
    let label = |i: Instrument| match i {
        Instrument::Spy => ["% Δ SPY", "% Δ SPY (3 min)", "Predrift SPY"],
        Instrument::Vix => ["% Δ VIX", "% Δ VIX (3 min)", "Predrift VIX"],
        Instrument::Eur => ["% Δ EUR", "% Δ EUR (3 min)", "Predrift EUR"],
        Instrument::Jpy => ["% Δ JPY", "% Δ JPY (3 min)", "Predrift JPY"],
    };
    for i in Instrument::ALL {
        push(format!("abs_pct_{}", i.key()), "market", u, label(i)[0]);
    }
    for i in Instrument::ALL {
        push(format!("abs_pct3_{}", i.key()), "market", u, label(i)[1]);
    }
    push("volume_spy".into(), "market", "ratio to meeting-day mean", "SPY Vol");
    push("volume_spy_raw".into(), "market", "shares", "SPY Vol");
    push("tick_vix".into(), "market", "ticks", "VIX Tick");
    push("tick_eur".into(), "market", "ticks", "EUR Tick");
    push("tick_jpy".into(), "market", "ticks", "JPY Tick");
    push("negative_facial".into(), "facefeat", "ratio", "Negative Facial");
    push("negative_facial_lag".into(), "panel", "ratio", "Negative Facial (t-1)");
    push("transparent_facial".into(), "facefeat", "ratio", "Transparent Facial");
    push("neutral_facial".into(), "facefeat", "ratio", "Neutral Facial");
    push("happy_facial".into(), "facefeat", "ratio", "Happy Facial");
    push("sad_facial".into(), "facefeat", "ratio", "Sad Facial");
    push("negative_sentiment".into(), "textfeat", "ratio", "Negative Sentiment");
    push("statement_related".into(), "textfeat", "ratio", "Statement Related");
    push("hawkish".into(), "textfeat", "ratio", "Hawkish");
    push("fls_ratio".into(), "textfeat", "ratio", "FLS_Ratio");
    for i in Instrument::ALL {
        push(format!("predrift_{}", i.key()), "market", u, label(i)[2]);
    }
    push("ffr_change".into(), "meta", "percentage points", "Δ FDFD");
    push("mpu".into(), "meta", "index", "MPU");
    push("public_interest".into(), "meta", "index", "Public_Interest");
    push("conference_count".into(), "meta", "count", "Conference Count");
    push("cfquart".into(), "panel", "quartile", "cfquart");
    push("congre30".into(), "panel", "indicator", "congre30");
    push("congre10".into(), "panel", "indicator", "congre10");
    out
}

fn instrument_of(key: &str) -> Option<usize> {
    Instrument::ALL.iter().position(|i| i.key() == key)
}

impl PanelRow {
    /// Value of a base (non-interaction) column; `None` if the name is unknown.
    pub fn value(&self, name: &str) -> Option<Option<f64>> {
        let v = match name {
            "volume_spy" => self.volume_spy,
            "volume_spy_raw" => self.volume_spy_raw,
            "tick_vix" => self.tick_vix,
            "tick_eur" => self.tick_eur,
            "tick_jpy" => self.tick_jpy,
            "negative_facial" => self.negative_facial,
            "negative_facial_lag" => self.negative_facial_lag,
            "transparent_facial" => self.transparent_facial,
            "neutral_facial" => self.neutral_facial,
            "happy_facial" => self.happy_facial,
            "sad_facial" => self.sad_facial,
            "negative_sentiment" => self.negative_sentiment,
            "statement_related" => self.statement_related,
            "hawkish" => self.hawkish,
            "fls_ratio" => self.fls_ratio,
            "ffr_change" => self.ffr_change,
            "mpu" => self.mpu,
            "public_interest" => self.public_interest,
            "conference_count" => Some(f64::from(self.conference_count)),
            "cfquart" => Some(f64::from(self.cfquart)),
            "congre30" => Some(f64::from(self.congre30)),
            "congre10" => Some(f64::from(self.congre10)),
            _ => {
                if let Some(k) = name.strip_prefix("abs_pct3_") {
                    self.abs_pct3[instrument_of(k)?]
                } else if let Some(k) = name.strip_prefix("abs_pct_") {
                    self.abs_pct[instrument_of(k)?]
                } else {
                    self.predrift[instrument_of(name.strip_prefix("predrift_")?)?]
                }
            }
        };
        Some(v)
    }
}

/// Product of two optional values; absent if either factor is.
pub fn interaction(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some(a? * b?)
}

/// Row counts after each join/filter stage, in order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct StageAudit {
    pub stages: Vec<(String, usize)>,
}

impl StageAudit {
    fn record(&mut self, stage: &str, rows: usize) {
        self.stages.push((stage.to_string(), rows));
    }

    pub fn is_non_increasing(&self) -> bool {
        self.stages.windows(2).all(|w| w[1].1 <= w[0].1)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (name, n) in &self.stages {
            let _ = writeln!(s, "{name}: {n}");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Panel {
    pub rows: Vec<PanelRow>,
    pub catalog: Vec<ColumnInfo>,
    pub audit: StageAudit,
}

impl Panel {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// A column by name. `a*b` yields the row-wise product of two columns.
    pub fn column(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let name = name.trim();
        if let Some((a, b)) = name.split_once('*') {
            let (ca, cb) = (self.column(a)?, self.column(b)?);
            return Ok(ca.into_iter().zip(cb).map(|(x, y)| interaction(x, y)).collect());
        }
        if !self.catalog.iter().any(|c| c.name == name) {
            return Err(Error::spec(format!("unknown column {name:?}")));
        }
        Ok(self.rows.iter().map(|r| r.value(name).flatten()).collect())
    }

    pub fn has_column(&self, name: &str) -> bool {
        name.split('*').all(|n| self.catalog.iter().any(|c| c.name == n.trim()))
    }

    pub fn meeting_labels(&self) -> Vec<String> {
        self.rows.iter().map(|r| r.meeting_id.clone()).collect()
    }

    pub fn chair_labels(&self) -> Vec<String> {
        self.rows.iter().map(|r| r.chair.name().to_string()).collect()
    }

    pub fn csv_header(&self) -> String {
        let mut h = vec!["meeting_id", "chair", "t"];
        h.extend(self.catalog.iter().map(|c| c.name.as_str()));
        h.join(",")
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.csv_header();
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.meeting_id);
            s.push(',');
            s.push_str(r.chair.name());
            s.push(',');
            s.push_str(&format_timestamp(&r.t));
            for c in &self.catalog {
                s.push(',');
                if let Some(Some(v)) = r.value(&c.name) {
                    let _ = write!(s, "{v}");
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn catalog_csv(&self) -> String {
        let mut s = String::from("name,source,units,variable\n");
        for c in &self.catalog {
            let _ = writeln!(s, "{},{},{},{}", c.name, c.source, c.units, c.variable);
        }
        s
    }
}

/// Quartile of a chair's tenure that a conference falls in.
pub fn cfquart(conference_count: u32, chair_total: u32) -> Result<u8> {
    if conference_count == 0 || conference_count > chair_total {
        return Err(Error::domain(format!("conference count {conference_count} outside 1..={chair_total}")));
    }
    let q = (4 * u64::from(conference_count)).div_ceil(u64::from(chair_total));
    Ok(q.clamp(1, 4) as u8)
}

/// (congre30, congre10): a testimony in `[date - N days, date)`.
pub fn congre_flags(date: NaiveDate, testimony_dates: &[NaiveDate]) -> (u8, u8) {
    let within = |days: i64| testimony_dates.iter().any(|&d| d < date && d >= date - Duration::days(days));
    (u8::from(within(30)), u8::from(within(10)))
}

/// Every minute label from the first to the last frame of a meeting.
pub fn minute_grid(frames: &[FrameScore]) -> Vec<Timestamp> {
    let (Some(lo), Some(hi)) = (frames.iter().map(|f| f.t).min(), frames.iter().map(|f| f.t).max()) else {
        return Vec::new();
    };
    let (mut t, end) = (minute_label(&lo), minute_label(&hi));
    let mut out = Vec::new();
    while t <= end {
        out.push(t);
        t += Duration::minutes(1);
    }
    out
}

/// Minutes that contain at least one kept chair frame.
pub fn kept_minutes(kept: &[FrameScore]) -> BTreeSet<(String, Timestamp)> {
    kept.iter().map(|f| (f.meeting_id.clone(), minute_label(&f.t))).collect()
}

/// Highest conference count per chair in the metadata.
pub fn chair_totals(meta: &[MeetingMeta]) -> BTreeMap<Chair, u32> {
    let mut out = BTreeMap::new();
    for m in meta {
        let e = out.entry(m.chair).or_insert(0);
        *e = (*e).max(m.conference_count);
    }
    out
}

pub struct PanelInputs<'a> {
    /// Facial features over each meeting's full minute grid.
    pub facial: &'a [FacialFeatureRow],
    pub nlp: &'a [NlpFeatureRow],
    pub market: &'a [MarketFeatureRow],
    pub kept_frames: &'a [FrameScore],
    pub meta: &'a [MeetingMeta],
    pub units: Units,
}

type Key = (String, Timestamp);

/// Inner join of the feature tables, keeping only minutes with kept chair
/// frames. Rows come out sorted by (meeting_id, t).
pub fn build_panel(inp: &PanelInputs<'_>) -> Result<Panel> {
    let meta: HashMap<&str, &MeetingMeta> = inp.meta.iter().map(|m| (m.meeting_id.as_str(), m)).collect();
    let unknown = |id: &str, table: &str| -> Result<()> {
        if meta.contains_key(id) {
            Ok(())
        } else {
            Err(Error::domain(format!("meeting {id:?} appears in {table} but not in the meeting metadata")))
        }
    };
    for r in inp.facial {
        unknown(&r.meeting_id, "facial features")?;
    }
    for r in inp.nlp {
        unknown(&r.meeting_id, "text features")?;
    }
    for r in inp.market {
        unknown(&r.meeting_id, "market features")?;
    }
    for f in inp.kept_frames {
        unknown(&f.meeting_id, "frame scores")?;
    }

    let facial: BTreeMap<Key, &FacialFeatureRow> = inp.facial.iter().map(|r| ((r.meeting_id.clone(), r.t), r)).collect();
    let nlp: HashMap<Key, &NlpFeatureRow> = inp.nlp.iter().map(|r| ((r.meeting_id.clone(), r.t), r)).collect();
    let market: HashMap<Key, &MarketFeatureRow> = inp.market.iter().map(|r| ((r.meeting_id.clone(), r.t), r)).collect();
    let kept = kept_minutes(inp.kept_frames);
    let totals = chair_totals(inp.meta);

    let mut audit = StageAudit::default();
    audit.record("minute grid", facial.len());
    let with_frames: Vec<&Key> = facial.keys().filter(|k| kept.contains(*k)).collect();
    audit.record("minutes with chair frames", with_frames.len());
    let with_text: Vec<&Key> = with_frames.into_iter().filter(|k| nlp.contains_key(*k)).collect();
    audit.record("joined text features", with_text.len());
    let joined: Vec<&Key> = with_text.into_iter().filter(|k| market.contains_key(*k)).collect();
    audit.record("joined market features", joined.len());

    let mut rows = Vec::with_capacity(joined.len());
    for key in joined {
        let (f, n, mk) = (facial[key], nlp[key], market[key]);
        let m = meta[key.0.as_str()];
        let lag_key = (key.0.clone(), key.1 - Duration::minutes(1));
        let total = totals.get(&m.chair).copied().unwrap_or(0);
        let (congre30, congre10) = congre_flags(m.date, &m.testimony_dates);
        rows.push(PanelRow {
            meeting_id: key.0.clone(),
            chair: m.chair,
            t: key.1,
            abs_pct: mk.abs_pct_change,
            abs_pct3: mk.abs_pct_change_3min,
            volume_spy: mk.volume_spy,
            volume_spy_raw: mk.volume_spy_raw,
            tick_vix: mk.tick_vix,
            tick_eur: mk.tick_eur,
            tick_jpy: mk.tick_jpy,
            negative_facial: f.negative_facial,
            negative_facial_lag: facial.get(&lag_key).and_then(|r| r.negative_facial),
            transparent_facial: f.transparent_facial,
            neutral_facial: f.neutral_facial,
            happy_facial: f.happy_facial,
            sad_facial: f.sad_facial,
            negative_sentiment: n.negative_sentiment,
            statement_related: n.statement_related,
            hawkish: n.hawkish,
            fls_ratio: n.fls_ratio,
            predrift: mk.predrift,
            ffr_change: m.ffr_change,
            mpu: m.mpu,
            public_interest: m.public_interest,
            conference_count: m.conference_count,
            cfquart: cfquart(m.conference_count, total)?,
            congre30,
            congre10,
        });
    }
    Ok(Panel { rows, catalog: column_catalog(inp.units), audit })
}
