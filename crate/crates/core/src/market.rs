// SPDX-License-Identifier: Apache-2.0

//! Market reaction variables from minute bars: absolute 1- and 3-minute
//! percent changes, the statement-to-conference pre-drift, and volume/tick
//! aggregates. Missing bars produce absent values and a gap entry; nothing is
//! interpolated.

use std::collections::{BTreeMap, HashMap};

use chrono::Duration;
use serde::{Deserialize, Serialize};

use crate::ingest::{Instrument, MeetingMeta, MinuteBar};
use crate::scalar::Scalar;
use crate::time::{format_timestamp, local_date, Timestamp, DEFAULT_TZ};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Pct,
    Bps,
}

impl Units {
    pub fn factor(self) -> f64 {
        match self {
            Units::Pct => 1.0,
            Units::Bps => 100.0,
        }
    }
}

impl std::str::FromStr for Units {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "pct" => Ok(Units::Pct),
            "bps" => Ok(Units::Bps),
            other => Err(format!("unknown units {other:?} (expected pct or bps)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarketConfig {
    pub units: Units,
    /// Divide SPY volume by the meeting-day mean minute volume.
    pub normalize_volume: bool,
    /// Divide tick counts by their meeting-day mean.
    pub normalize_ticks: bool,
    /// How far back the pre-drift anchors may fall back to an earlier bar.
    pub anchor_slack_mins: i64,
}

impl Default for MarketConfig {
    fn default() -> Self {
        Self { units: Units::Pct, normalize_volume: true, normalize_ticks: false, anchor_slack_mins: 2 }
    }
}

/// `100 * (cur - prev) / prev`.
#[inline]
pub fn pct_change<T: Scalar>(prev: T, cur: T) -> T {
    T::lit(100.0) * (cur - prev) / prev
}

/// Minute bars of one instrument keyed by timestamp.
#[derive(Debug, Clone, Default)]
pub struct PriceSeries {
    bars: BTreeMap<Timestamp, MinuteBar>,
}

impl PriceSeries {
    pub fn new(bars: impl IntoIterator<Item = MinuteBar>) -> Self {
        Self { bars: bars.into_iter().map(|b| (b.t, b)).collect() }
    }

    pub fn get(&self, t: &Timestamp) -> Option<&MinuteBar> {
        self.bars.get(t)
    }

    pub fn price(&self, t: &Timestamp) -> Option<f64> {
        self.bars.get(t).map(|b| b.price)
    }

    /// Latest bar at or before `t`, no earlier than `t - slack`.
    pub fn at_or_before(&self, t: Timestamp, slack: Duration) -> Option<&MinuteBar> {
        self.bars.range(t - slack..=t).next_back().map(|(_, b)| b)
    }

    pub fn bars_between(&self, from: Timestamp, to: Timestamp) -> impl Iterator<Item = &MinuteBar> {
        self.bars.range(from..to).map(|(_, b)| b)
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }
}

/// Percent change from `t - horizon` to `t`, absent if either bar is missing.
pub fn pct_change_at(series: &PriceSeries, t: Timestamp, horizon_mins: i64) -> Option<f64> {
    let prev = series.price(&(t - Duration::minutes(horizon_mins)))?;
    let cur = series.price(&t)?;
    Some(pct_change(prev, cur))
}

pub fn abs_pct_change_1min(series: &PriceSeries, t: Timestamp) -> Option<f64> {
    pct_change_at(series, t, 1).map(f64::abs)
}

/// Signed percent change between the statement release and the start of the
/// press conference, each anchor resolved to the nearest bar at or before it.
pub fn predrift(series: &PriceSeries, statement_release: Timestamp, conf_start: Timestamp, slack: Duration) -> Option<f64> {
    let a = series.at_or_before(statement_release, slack)?;
    let b = series.at_or_before(conf_start, slack)?;
    Some(pct_change(a.price, b.price))
}

#[derive(Debug, Clone, Default)]
pub struct MarketData {
    series: HashMap<Instrument, PriceSeries>,
}

impl MarketData {
    pub fn new(bars: &[MinuteBar]) -> Self {
        let mut grouped: HashMap<Instrument, Vec<MinuteBar>> = HashMap::new();
        for b in bars {
            grouped.entry(b.instrument).or_default().push(b.clone());
        }
        Self { series: grouped.into_iter().map(|(k, v)| (k, PriceSeries::new(v))).collect() }
    }

    pub fn series(&self, inst: Instrument) -> Option<&PriceSeries> {
        self.series.get(&inst)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapEntry {
    pub meeting_id: String,
    pub t: Option<Timestamp>,
    pub instrument: Instrument,
    pub variable: String,
    pub cause: String,
}

impl GapEntry {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.meeting_id,
            self.t.as_ref().map(format_timestamp).unwrap_or_default(),
            self.instrument,
            self.variable,
            self.cause
        )
    }
}

pub const GAP_CSV_HEADER: &str = "meeting_id,t,instrument,variable,cause";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarketFeatureRow {
    pub meeting_id: String,
    pub t: Timestamp,
    /// Absolute 1-minute change, indexed like [`Instrument::ALL`].
    pub abs_pct_change: [Option<f64>; 4],
    /// Absolute 3-minute change.
    pub abs_pct_change_3min: [Option<f64>; 4],
    pub volume_spy: Option<f64>,
    pub volume_spy_raw: Option<f64>,
    pub tick_vix: Option<f64>,
    pub tick_eur: Option<f64>,
    pub tick_jpy: Option<f64>,
    /// Constant within a meeting.
    pub predrift: [Option<f64>; 4],
}

pub fn market_csv_header() -> Vec<String> {
    let mut h = vec!["meeting_id".to_string(), "t".to_string()];
    for i in Instrument::ALL {
        h.push(format!("abs_pct_{}", i.key()));
    }
    for i in Instrument::ALL {
        h.push(format!("abs_pct3_{}", i.key()));
    }
    h.extend(["volume_spy", "volume_spy_raw", "tick_vix", "tick_eur", "tick_jpy"].map(String::from));
    for i in Instrument::ALL {
        h.push(format!("predrift_{}", i.key()));
    }
    h
}

fn day_mean(series: &PriceSeries, meta: &MeetingMeta, f: impl Fn(&MinuteBar) -> Option<f64>) -> Option<f64> {
    let start = crate::time::at_local(meta.date, chrono::NaiveTime::MIN, DEFAULT_TZ).ok()?;
    let end = start + Duration::days(1);
    let vals: Vec<f64> = series
        .bars_between(start, end)
        .filter(|b| local_date(&b.t, DEFAULT_TZ) == meta.date)
        .filter_map(f)
        .collect();
    if vals.is_empty() {
        return None;
    }
    let m = vals.iter().sum::<f64>() / vals.len() as f64;
    (m > 0.0).then_some(m)
}

/// Rows for each requested minute of one meeting, plus every gap encountered.
pub fn market_features_for_meeting(
    meta: &MeetingMeta,
    minutes: &[Timestamp],
    data: &MarketData,
    cfg: &MarketConfig,
) -> (Vec<MarketFeatureRow>, Vec<GapEntry>) {
    let mut gaps = Vec::new();
    let k = cfg.units.factor();
    let slack = Duration::minutes(cfg.anchor_slack_mins);
    let empty = PriceSeries::default();
    let series_of = |i: Instrument| data.series(i).unwrap_or(&empty);

    let mut drift = [None; 4];
    for (idx, inst) in Instrument::ALL.into_iter().enumerate() {
        drift[idx] = predrift(series_of(inst), meta.statement_release, meta.press_conf_start, slack).map(|v| v * k);
        if drift[idx].is_none() {
            gaps.push(GapEntry {
                meeting_id: meta.meeting_id.clone(),
                t: None,
                instrument: inst,
                variable: format!("predrift_{}", inst.key()),
                cause: format!("no bar within {} min before an anchor", cfg.anchor_slack_mins),
            });
        }
    }

    let spy = series_of(Instrument::Spy);
    let vol_mean = if cfg.normalize_volume { day_mean(spy, meta, |b| b.volume) } else { None };
    let tick_means: [Option<f64>; 4] = Instrument::ALL.map(|i| {
        if cfg.normalize_ticks {
            day_mean(series_of(i), meta, |b| b.tick_count.map(|c| c as f64))
        } else {
            None
        }
    });

    let mut rows = Vec::with_capacity(minutes.len());
    for &t in minutes {
        let mut abs1 = [None; 4];
        let mut abs3 = [None; 4];
        for (idx, inst) in Instrument::ALL.into_iter().enumerate() {
            let s = series_of(inst);
            abs1[idx] = abs_pct_change_1min(s, t).map(|v| v * k);
            abs3[idx] = pct_change_at(s, t, 3).map(|v| v.abs() * k);
            if abs1[idx].is_none() {
                let cause = if s.get(&t).is_none() { "missing bar at t" } else { "missing bar at t-1" };
                gaps.push(GapEntry {
                    meeting_id: meta.meeting_id.clone(),
                    t: Some(t),
                    instrument: inst,
                    variable: format!("abs_pct_{}", inst.key()),
                    cause: cause.into(),
                });
            }
        }
        let (volume_raw, _) = minute_volume_and_ticks(spy, t);
        let volume_spy = match (volume_raw, cfg.normalize_volume) {
            (Some(v), true) => vol_mean.map(|m| v / m),
            (v, false) => v,
            (None, true) => None,
        };
        let tick = |inst: Instrument| {
            let idx = inst as usize;
            let (_, ticks) = minute_volume_and_ticks(series_of(inst), t);
            match (ticks, cfg.normalize_ticks) {
                (Some(c), true) => tick_means[idx].map(|m| c / m),
                (c, _) => c,
            }
        };
        rows.push(MarketFeatureRow {
            meeting_id: meta.meeting_id.clone(),
            t,
            abs_pct_change: abs1,
            abs_pct_change_3min: abs3,
            volume_spy,
            volume_spy_raw: volume_raw,
            tick_vix: tick(Instrument::Vix),
            tick_eur: tick(Instrument::Eur),
            tick_jpy: tick(Instrument::Jpy),
            predrift: drift,
        });
    }
    (rows, gaps)
}

/// Raw volume and tick count of the bar at `t`.
pub fn minute_volume_and_ticks(series: &PriceSeries, t: Timestamp) -> (Option<f64>, Option<f64>) {
    match series.get(&t) {
        Some(b) => (b.volume, b.tick_count.map(|c| c as f64)),
        None => (None, None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::parse_timestamp;
    use proptest::prelude::*;

    fn ts(s: &str) -> Timestamp {
        parse_timestamp(s, DEFAULT_TZ).unwrap()
    }

    fn bar(inst: Instrument, t: &str, price: f64, volume: Option<f64>) -> MinuteBar {
        MinuteBar { instrument: inst, t: ts(t), price, volume, tick_count: None }
    }

    #[test]
    fn pct_change_examples() {
        assert_eq!(pct_change(100.0, 101.0), 1.0);
        assert_eq!(pct_change(412.10, 412.10), 0.0);
        let expected = 100.0 * (411.90 - 412.10) / 412.10;
        assert!((pct_change(412.10f64, 411.90) - expected).abs() < 1e-15);
        assert!((pct_change(412.10f64, 411.90) - (-0.048531)).abs() < 1e-6);
    }

    #[test]
    fn abs_change_is_sign_insensitive() {
        let up = PriceSeries::new([bar(Instrument::Spy, "2015-12-16T14:31", 100.0, None), bar(Instrument::Spy, "2015-12-16T14:32", 101.0, None)]);
        let down = PriceSeries::new([bar(Instrument::Spy, "2015-12-16T14:31", 100.0, None), bar(Instrument::Spy, "2015-12-16T14:32", 99.0, None)]);
        assert_eq!(abs_pct_change_1min(&up, ts("2015-12-16T14:32")), Some(1.0));
        assert_eq!(abs_pct_change_1min(&down, ts("2015-12-16T14:32")), Some(1.0));
        assert_eq!(abs_pct_change_1min(&up, ts("2015-12-16T14:33")), None);
    }

    #[test]
    fn predrift_examples() {
        let s = PriceSeries::new([bar(Instrument::Spy, "2015-12-16T13:59", 100.0, None), bar(Instrument::Spy, "2015-12-16T14:30", 101.0, None)]);
        let v = predrift(&s, ts("2015-12-16T14:00"), ts("2015-12-16T14:30"), Duration::minutes(2));
        assert_eq!(v, Some(1.0));
        let flat = PriceSeries::new([bar(Instrument::Spy, "2015-12-16T14:00", 50.0, None), bar(Instrument::Spy, "2015-12-16T14:30", 50.0, None)]);
        assert_eq!(predrift(&flat, ts("2015-12-16T14:00"), ts("2015-12-16T14:30"), Duration::minutes(2)), Some(0.0));
        let far = PriceSeries::new([bar(Instrument::Spy, "2015-12-16T13:55", 100.0, None), bar(Instrument::Spy, "2015-12-16T14:30", 101.0, None)]);
        assert_eq!(predrift(&far, ts("2015-12-16T14:00"), ts("2015-12-16T14:30"), Duration::minutes(2)), None);
    }

    proptest! {
        #[test]
        fn scale_invariance(p0 in 1.0f64..1000.0, p1 in 1.0f64..1000.0, c in 0.01f64..100.0) {
            let a = pct_change(p0, p1);
            let b = pct_change(p0 * c, p1 * c);
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }

        #[test]
        fn compounding_identity(p in prop::collection::vec(1.0f64..1000.0, 4)) {
            let r3 = pct_change(p[0], p[3]) / 100.0;
            let prod: f64 = (0..3).map(|i| 1.0 + pct_change(p[i], p[i + 1]) / 100.0).product();
            prop_assert!(((1.0 + r3) - prod).abs() <= 1e-12 * prod);
            let log3 = (p[3] / p[0]).ln();
            let sum: f64 = (0..3).map(|i| (p[i + 1] / p[i]).ln()).sum();
            prop_assert!((log3 - sum).abs() < 1e-12);
        }

        #[test]
        fn reversal_relation(a in 1.0f64..1000.0, b in 1.0f64..1000.0) {
            let fwd = pct_change(a, b).abs();
            let back = pct_change(b, a).abs();
            prop_assert!((fwd - back * (b / a)).abs() <= 1e-9 * (1.0 + fwd));
        }
    }
}
