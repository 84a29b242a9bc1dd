// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{csv_reader, csv_tz, fmt_opt_f64, opt_field, parse_err, read_to_string, validation_err};
use crate::error::Result;
use crate::time::{format_timestamp, is_minute_aligned, parse_timestamp, Timestamp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Instrument {
    #[serde(rename = "SPY")]
    Spy,
    #[serde(rename = "VIX")]
    Vix,
    #[serde(rename = "EUR")]
    Eur,
    #[serde(rename = "JPY")]
    Jpy,
}

impl Instrument {
    pub const ALL: [Instrument; 4] = [Instrument::Spy, Instrument::Vix, Instrument::Eur, Instrument::Jpy];

    pub fn code(self) -> &'static str {
        match self {
            Instrument::Spy => "SPY",
            Instrument::Vix => "VIX",
            Instrument::Eur => "EUR",
            Instrument::Jpy => "JPY",
        }
    }

    /// Lowercase suffix used in panel column names.
    pub fn key(self) -> &'static str {
        match self {
            Instrument::Spy => "spy",
            Instrument::Vix => "vix",
            Instrument::Eur => "eur",
            Instrument::Jpy => "jpy",
        }
    }
}

impl fmt::Display for Instrument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Instrument {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "SPY" => Ok(Instrument::Spy),
            "VIX" => Ok(Instrument::Vix),
            "EUR" | "EURUSD" => Ok(Instrument::Eur),
            "JPY" | "JPYUSD" | "USDJPY" => Ok(Instrument::Jpy),
            other => Err(format!("unknown instrument {other:?}")),
        }
    }
}

/// One instrument-minute.
#[derive(Debug, Clone, PartialEq)]
pub struct MinuteBar {
    pub instrument: Instrument,
    pub t: Timestamp,
    pub price: f64,
    pub volume: Option<f64>,
    pub tick_count: Option<u64>,
}

impl MinuteBar {
    pub fn validate(&self) -> Result<(), String> {
        if !self.price.is_finite() || self.price <= 0.0 {
            return Err(format!("price must be positive, got {}", self.price));
        }
        if let Some(v) = self.volume {
            if !v.is_finite() || v < 0.0 {
                return Err(format!("volume must be non-negative, got {v}"));
            }
        }
        if !is_minute_aligned(&self.t) {
            return Err(format!("bar timestamp {} is not on a minute boundary", format_timestamp(&self.t)));
        }
        Ok(())
    }
}

pub fn parse_minute_bars(path: impl AsRef<Path>) -> Result<Vec<MinuteBar>> {
    let path = path.as_ref();
    parse_minute_bars_str(&read_to_string(path)?, path)
}

pub fn parse_minute_bars_str(text: &str, origin: &Path) -> Result<Vec<MinuteBar>> {
    let tz = csv_tz(origin, text)?;
    let mut rdr = csv_reader(text);
    let headers = rdr.headers()?.clone();
    let expected = ["instrument", "t", "price", "volume", "tick_count"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(parse_err(origin, 1, format!("expected header {}", expected.join(","))));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| rec.get(i).unwrap_or("");
        let instrument = field(0).parse::<Instrument>().map_err(|m| parse_err(origin, line, m))?;
        let t = parse_timestamp(field(1), tz).map_err(|m| parse_err(origin, line, m))?;
        let price = field(2)
            .parse::<f64>()
            .map_err(|e| parse_err(origin, line, format!("price: {e}")))?;
        let volume = opt_field(field(3))
            .map(|s| s.parse::<f64>().map_err(|e| parse_err(origin, line, format!("volume: {e}"))))
            .transpose()?;
        let tick_count = opt_field(field(4))
            .map(|s| s.parse::<u64>().map_err(|e| parse_err(origin, line, format!("tick_count: {e}"))))
            .transpose()?;
        let bar = MinuteBar { instrument, t, price, volume, tick_count };
        bar.validate()
            .map_err(|m| validation_err(origin, format!("line {line}: {m}"), rec.iter().collect::<Vec<_>>().join(",")))?;
        out.push(bar);
    }
    out.sort_by(|a, b| a.instrument.cmp(&b.instrument).then(a.t.cmp(&b.t)));
    for w in out.windows(2) {
        if w[0].instrument == w[1].instrument && w[0].t == w[1].t {
            return Err(validation_err(
                origin,
                "duplicate (instrument, minute)",
                format!("{} {}", w[1].instrument, format_timestamp(&w[1].t)),
            ));
        }
    }
    Ok(out)
}

pub fn write_minute_bars(bars: &[MinuteBar]) -> String {
    let mut sorted: Vec<&MinuteBar> = bars.iter().collect();
    sorted.sort_by(|a, b| a.instrument.cmp(&b.instrument).then(a.t.cmp(&b.t)));
    let mut out = String::from("#tz=UTC\ninstrument,t,price,volume,tick_count\n");
    for b in sorted {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            b.instrument,
            format_timestamp(&b.t),
            b.price,
            fmt_opt_f64(b.volume),
            b.tick_count.map(|c| c.to_string()).unwrap_or_default()
        ));
    }
    out
}
