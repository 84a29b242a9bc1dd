// SPDX-License-Identifier: Apache-2.0

//! Seeded synthetic corpus with a planted effect of the lagged negative
//! facial ratio on absolute SPY minute returns.
//!
//! The planted process is
//! `|%ΔSPY|_t = a + β·NF_{t-1} + v_g + e_t`
//! with `v_g` an exponential per-meeting draw and `e_t` gamma per-minute noise.
//! `NF` is computed from the generated frames by the same feature code the
//! pipeline runs, so the regressor seen by the estimator is exactly the one
//! used to build prices.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate, NaiveTime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gamma, Normal};

use crate::emotion::EmotionVector;
use crate::error::{Error, Result};
use crate::facefeat::{chair_baselines, facial_features_for_meeting, FacialConfig};
use crate::frames::{filter_chair_frames, FrameFilterConfig};
use crate::ingest::{
    write_frame_scores, write_meeting_meta, write_minute_bars, write_transcript, Chair, FrameScore, Instrument, LexiconSet,
    MeetingMeta, MinuteBar, Speaker, TranscriptSegment,
};
use crate::panel::minute_grid;
use crate::time::{at_local, Timestamp, DEFAULT_TZ};

/// Press-conference dates with a public recording, in order.
pub const CONFERENCE_DATES: [(&str, Chair); 46] = [
    ("2011-04-27", Chair::Bernanke),
    ("2011-06-22", Chair::Bernanke),
    ("2011-11-02", Chair::Bernanke),
    ("2012-01-25", Chair::Bernanke),
    ("2012-04-25", Chair::Bernanke),
    ("2012-06-20", Chair::Bernanke),
    ("2012-09-13", Chair::Bernanke),
    ("2012-12-12", Chair::Bernanke),
    ("2013-03-20", Chair::Bernanke),
    ("2013-06-19", Chair::Bernanke),
    ("2013-09-18", Chair::Bernanke),
    ("2013-12-18", Chair::Bernanke),
    ("2014-03-19", Chair::Yellen),
    ("2014-06-18", Chair::Yellen),
    ("2014-09-17", Chair::Yellen),
    ("2014-12-17", Chair::Yellen),
    ("2015-03-18", Chair::Yellen),
    ("2015-06-17", Chair::Yellen),
    ("2015-09-17", Chair::Yellen),
    ("2015-12-16", Chair::Yellen),
    ("2016-03-16", Chair::Yellen),
    ("2016-06-15", Chair::Yellen),
    ("2016-09-21", Chair::Yellen),
    ("2016-12-14", Chair::Yellen),
    ("2017-03-15", Chair::Yellen),
    ("2017-06-14", Chair::Yellen),
    ("2017-09-20", Chair::Yellen),
    ("2017-12-13", Chair::Yellen),
    ("2018-03-21", Chair::Powell),
    ("2018-06-13", Chair::Powell),
    ("2018-09-26", Chair::Powell),
    ("2018-12-19", Chair::Powell),
    ("2019-01-30", Chair::Powell),
    ("2019-03-20", Chair::Powell),
    ("2019-05-01", Chair::Powell),
    ("2019-06-19", Chair::Powell),
    ("2019-07-31", Chair::Powell),
    ("2019-09-18", Chair::Powell),
    ("2019-10-30", Chair::Powell),
    ("2019-12-11", Chair::Powell),
    ("2020-01-29", Chair::Powell),
    ("2020-04-29", Chair::Powell),
    ("2020-06-10", Chair::Powell),
    ("2020-07-29", Chair::Powell),
    ("2020-09-16", Chair::Powell),
    ("2020-11-05", Chair::Powell),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    /// Keep only the first `n` meetings of each chair.
    pub per_chair: Option<usize>,
    pub min_minutes: u32,
    pub max_minutes: u32,
    pub intercept: f64,
    pub beta: f64,
    /// Mean of the exponential per-meeting shift.
    pub meeting_noise_mean: f64,
    /// Mean and sd of the gamma per-minute noise.
    pub minute_noise_mean: f64,
    pub minute_noise_sd: f64,
    /// Log-sd and AR(1) coefficient of the latent minute negativity.
    pub latent_sigma: f64,
    pub latent_phi: f64,
    /// Log-sd of the per-meeting negativity level.
    pub meeting_mood_sigma: f64,
    /// Per-frame probability of a camera cut away from the chair.
    pub cutaway_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            per_chair: None,
            min_minutes: 30,
            max_minutes: 35,
            intercept: 0.028,
            beta: -0.007,
            meeting_noise_mean: 0.003,
            minute_noise_mean: 0.015,
            minute_noise_sd: 0.042,
            latent_sigma: 0.48,
            latent_phi: 0.85,
            meeting_mood_sigma: 0.2,
            cutaway_rate: 0.008,
        }
    }
}

impl SynthConfig {
    /// Two meetings per chair, twelve minutes each.
    pub fn small(seed: u64) -> Self {
        Self { seed, per_chair: Some(2), min_minutes: 12, max_minutes: 12, ..Self::default() }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub config: SynthConfig,
    pub meetings: Vec<MeetingMeta>,
    pub frames: Vec<FrameScore>,
    pub transcript: Vec<TranscriptSegment>,
    pub bars: Vec<MinuteBar>,
}

struct ChairStyle {
    negative: f64,
    neg_split: [f64; 3],
    rest_split: [f64; 4],
}

fn style(chair: Chair) -> ChairStyle {
    match chair {
        Chair::Bernanke => ChairStyle { negative: 12.0, neg_split: [0.45, 0.25, 0.30], rest_split: [0.12, 0.18, 0.05, 0.65] },
        Chair::Yellen => ChairStyle { negative: 9.0, neg_split: [0.35, 0.30, 0.35], rest_split: [0.20, 0.12, 0.06, 0.62] },
        Chair::Powell => ChairStyle { negative: 10.0, neg_split: [0.40, 0.20, 0.40], rest_split: [0.15, 0.15, 0.04, 0.66] },
    }
}

fn round_to(x: f64, places: i32) -> f64 {
    let s = 10f64.powi(places);
    (x * s).round() / s
}

fn date(s: &str) -> NaiveDate {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").expect("static date")
}

fn local(d: NaiveDate, h: u32, m: u32) -> Result<Timestamp> {
    at_local(d, NaiveTime::from_hms_opt(h, m, 0).expect("valid clock"), DEFAULT_TZ).map_err(Error::domain)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    Normal::new(0.0, 1.0).expect("unit normal").sample(rng)
}

fn exponential(rng: &mut ChaCha8Rng, mean: f64) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    Exp::new(1.0 / mean).expect("positive rate").sample(rng)
}

fn gamma(rng: &mut ChaCha8Rng, mean: f64, sd: f64) -> f64 {
    if mean <= 0.0 || sd <= 0.0 {
        return mean.max(0.0);
    }
    let shape = (mean / sd).powi(2);
    Gamma::new(shape, sd * sd / mean).expect("positive gamma parameters").sample(rng)
}

fn jitter<const N: usize>(rng: &mut ChaCha8Rng, base: [f64; N]) -> [f64; N] {
    let mut w = base.map(|b| b * rng.random_range(0.6..1.4));
    let total: f64 = w.iter().sum();
    for v in &mut w {
        *v /= total;
    }
    w
}

/// Emotion scores in percent, rounded to three decimals.
fn chair_emotions(rng: &mut ChaCha8Rng, st: &ChairStyle, level: f64) -> EmotionVector<f64> {
    let noise = (0.25 * normal(rng)).exp();
    let neg = (st.negative * level * noise).min(85.0);
    let ns = jitter(rng, st.neg_split);
    let rs = jitter(rng, st.rest_split);
    let rest = 100.0 - neg;
    // angry, disgust, fear, happy, sad, surprise, neutral
    let v = [neg * ns[0], neg * ns[2], neg * ns[1], rest * rs[0], rest * rs[1], rest * rs[2], rest * rs[3]];
    EmotionVector::new(v.map(|x| round_to(x, 3)))
}

fn other_emotions(rng: &mut ChaCha8Rng) -> EmotionVector<f64> {
    let w = jitter(rng, [0.08, 0.03, 0.04, 0.25, 0.10, 0.05, 0.45]);
    EmotionVector::new(w.map(|x| round_to(100.0 * x, 3)))
}

fn build_meetings(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Result<Vec<MeetingMeta>> {
    let mut counts: HashMap<Chair, u32> = HashMap::new();
    let mut out = Vec::new();
    for (d, chair) in CONFERENCE_DATES {
        let n = counts.entry(chair).or_insert(0);
        *n += 1;
        if cfg.per_chair.is_some_and(|k| *n as usize > k) {
            continue;
        }
        let day = date(d);
        let testimony_dates = (0..rng.random_range(0..3))
            .map(|_| day - Duration::days(rng.random_range(3..60)))
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let ffr = if rng.random_bool(0.15) { 0.25 * if rng.random_bool(0.5) { 1.0 } else { -1.0 } } else { 0.0 };
        out.push(MeetingMeta {
            meeting_id: d.to_string(),
            date: day,
            chair,
            conference_count: *n,
            press_conf_start: local(day, 14, 30)?,
            statement_release: local(day, 14, 0)?,
            has_intro_statement: chair == Chair::Powell,
            testimony_dates,
            ffr_change: Some(round_to(ffr + 0.02 * normal(rng), 3)),
            mpu: Some(round_to(rng.random_range(40.0..260.0), 1)),
            public_interest: Some(round_to(rng.random_range(20.0..100.0), 1)),
        });
    }
    Ok(out)
}

/// Frames every two seconds from the conference start, with occasional cuts
/// to journalists and frames without a detected face.
fn meeting_frames(cfg: &SynthConfig, rng: &mut ChaCha8Rng, m: &MeetingMeta, minutes: u32) -> Vec<FrameScore> {
    let st = style(m.chair);
    let mood = cfg.meeting_mood_sigma * normal(rng);
    let innov = (1.0 - cfg.latent_phi * cfg.latent_phi).sqrt();
    let mut z = normal(rng);
    let mut level = Vec::with_capacity(minutes as usize + 1);
    for _ in 0..=minutes {
        let l = (cfg.latent_sigma * z + mood - 0.5 * cfg.latent_sigma * cfg.latent_sigma).exp();
        level.push(l.clamp(0.05, 3.5));
        z = cfg.latent_phi * z + innov * normal(rng);
    }
    let n_frames = minutes * 30 + 1;
    let mut cut_left = 0u32;
    let mut out = Vec::with_capacity(n_frames as usize);
    for k in 0..n_frames {
        let t = m.press_conf_start + Duration::seconds(2 * i64::from(k));
        let minute = (2 * k).div_ceil(60) as usize;
        if cut_left == 0 && rng.random_bool(cfg.cutaway_rate) {
            cut_left = rng.random_range(5..45);
        }
        let frame = if cut_left > 0 {
            cut_left -= 1;
            if rng.random_bool(0.3) {
                FrameScore { meeting_id: m.meeting_id.clone(), t, face_detected: false, chair_similarity: None, emotions: None, embedding_id: None }
            } else {
                FrameScore {
                    meeting_id: m.meeting_id.clone(),
                    t,
                    face_detected: true,
                    chair_similarity: Some(round_to(rng.random_range(0.05..0.45), 3)),
                    emotions: Some(other_emotions(rng)),
                    embedding_id: None,
                }
            }
        } else {
            FrameScore {
                meeting_id: m.meeting_id.clone(),
                t,
                face_detected: true,
                chair_similarity: Some(round_to(rng.random_range(0.6..0.98), 3)),
                emotions: Some(chair_emotions(rng, &st, level[minute])),
                embedding_id: None,
            }
        };
        out.push(frame);
    }
    out
}

const FILLER: [&str; 20] = [
    "thank", "you", "for", "that", "question", "i", "would", "say", "we", "think", "is", "right", "so", "well", "look", "again",
    "broadly", "yes", "really", "very",
];

fn sentence(rng: &mut ChaCha8Rng, lex: &LexiconSet) -> String {
    let mut words: Vec<String> = (0..rng.random_range(6..14)).map(|_| FILLER[rng.random_range(0..FILLER.len())].to_string()).collect();
    let mut insert = |rng: &mut ChaCha8Rng, phrases: &[String]| {
        let p = &phrases[rng.random_range(0..phrases.len())];
        let at = rng.random_range(0..=words.len());
        words.insert(at, p.clone());
    };
    if rng.random_bool(0.35) {
        insert(rng, &lex.hawkish.phrases);
    }
    if rng.random_bool(0.2) {
        insert(rng, &lex.dovish.phrases);
    }
    if rng.random_bool(0.12) {
        insert(rng, &lex.statement_related.phrases);
    }
    let mut s = words.join(" ");
    s.push('.');
    s
}

fn meeting_transcript(rng: &mut ChaCha8Rng, lex: &LexiconSet, m: &MeetingMeta, minutes: u32) -> Vec<TranscriptSegment> {
    let end = m.press_conf_start + Duration::minutes(i64::from(minutes));
    let mut t = m.press_conf_start;
    let mut out = Vec::new();
    while t < end {
        let len = Duration::milliseconds(rng.random_range(6_000..20_000));
        let speaker = if rng.random_bool(0.15) { Speaker::Journalist } else { Speaker::Chair };
        let neg = round_to(rng.random::<f64>().powi(2) * 0.8, 4);
        let pos = round_to((1.0 - neg) * rng.random::<f64>() * 0.5, 4);
        out.push(TranscriptSegment {
            meeting_id: m.meeting_id.clone(),
            t_start: t,
            t_end: t + len,
            text: sentence(rng, lex),
            speaker,
            sentiment_negative: neg,
            sentiment_positive: pos,
            sentiment_neutral: round_to(1.0 - neg - pos, 4),
            fls_flag: rng.random_bool(0.3),
        });
        t += len;
    }
    out
}

/// Negative facial ratio at every grid minute, keyed by (meeting, minute).
pub fn negative_facial_by_minute(frames: &[FrameScore], meetings: &[MeetingMeta]) -> BTreeMap<(String, Timestamp), f64> {
    let (kept, _) = filter_chair_frames(frames, &FrameFilterConfig::default());
    let chair_of: HashMap<String, Chair> = meetings.iter().map(|m| (m.meeting_id.clone(), m.chair)).collect();
    let baselines = chair_baselines(&kept, &chair_of);
    let mut out = BTreeMap::new();
    for m in meetings {
        let Some(base) = baselines.get(&m.chair) else { continue };
        let mut all: Vec<FrameScore> = frames.iter().filter(|f| f.meeting_id == m.meeting_id).cloned().collect();
        all.sort_by_key(|f| f.t);
        let mine: Vec<FrameScore> = kept.iter().filter(|f| f.meeting_id == m.meeting_id).cloned().collect();
        let grid = minute_grid(&all);
        for row in facial_features_for_meeting(&m.meeting_id, &mine, &grid, base, &FacialConfig::default()) {
            if let Some(v) = row.negative_facial {
                out.insert((m.meeting_id.clone(), row.t), v);
            }
        }
    }
    out
}

struct Walk {
    instrument: Instrument,
    price: f64,
    pre_scale: f64,
    scale: f64,
}

fn meeting_bars(
    cfg: &SynthConfig,
    rng: &mut ChaCha8Rng,
    m: &MeetingMeta,
    minutes: u32,
    nf: &BTreeMap<(String, Timestamp), f64>,
) -> Vec<MinuteBar> {
    let years = f64::from(m.date.year() - 2011);
    let mut walks = [
        Walk { instrument: Instrument::Spy, price: round_to(130.0 + 18.0 * years, 2), pre_scale: 0.02, scale: 0.0 },
        Walk { instrument: Instrument::Vix, price: round_to(rng.random_range(12.0..25.0), 2), pre_scale: 0.3, scale: 0.25 },
        Walk { instrument: Instrument::Eur, price: round_to(rng.random_range(1.05..1.4), 4), pre_scale: 0.008, scale: 0.01 },
        Walk { instrument: Instrument::Jpy, price: round_to(rng.random_range(80.0..120.0), 2), pre_scale: 0.008, scale: 0.01 },
    ];
    let v_g = exponential(rng, cfg.meeting_noise_mean);
    let first = m.statement_release - Duration::minutes(5);
    let last = m.press_conf_start + Duration::minutes(i64::from(minutes) + 1);
    let mut out = Vec::new();
    let mut t = first;
    while t <= last {
        for w in &mut walks {
            if t > first {
                let size = if t <= m.press_conf_start {
                    exponential(rng, w.pre_scale)
                } else if w.instrument == Instrument::Spy {
                    let lag = nf.get(&(m.meeting_id.clone(), t - Duration::minutes(1))).copied().unwrap_or(1.0);
                    cfg.intercept + cfg.beta * lag + v_g + gamma(rng, cfg.minute_noise_mean, cfg.minute_noise_sd)
                } else {
                    exponential(rng, w.scale)
                };
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                w.price *= 1.0 + sign * size / 100.0;
            }
            let (volume, ticks) = match w.instrument {
                Instrument::Spy => (Some(round_to(50_000.0 * (0.3 * normal(rng)).exp(), 0)), None),
                _ => (None, Some((20.0 * (0.4 * normal(rng)).exp()).round() as u64)),
            };
            out.push(MinuteBar { instrument: w.instrument, t, price: w.price, volume, tick_count: ticks });
        }
        t += Duration::minutes(1);
    }
    out
}

pub fn generate(cfg: &SynthConfig) -> Result<SyntheticCorpus> {
    if cfg.min_minutes == 0 || cfg.min_minutes > cfg.max_minutes {
        return Err(Error::Config(format!("invalid conference length range {}..={}", cfg.min_minutes, cfg.max_minutes)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let lex = LexiconSet::bundled();
    let meetings = build_meetings(cfg, &mut rng)?;
    let lengths: Vec<u32> = meetings.iter().map(|_| rng.random_range(cfg.min_minutes..=cfg.max_minutes)).collect();
    let mut frames = Vec::new();
    let mut transcript = Vec::new();
    for (m, &len) in meetings.iter().zip(&lengths) {
        frames.extend(meeting_frames(cfg, &mut rng, m, len));
        transcript.extend(meeting_transcript(&mut rng, &lex, m, len));
    }
    let nf = negative_facial_by_minute(&frames, &meetings);
    let mut bars = Vec::new();
    for (m, &len) in meetings.iter().zip(&lengths) {
        bars.extend(meeting_bars(cfg, &mut rng, m, len, &nf));
    }
    Ok(SyntheticCorpus { config: *cfg, meetings, frames, transcript, bars })
}

pub const CORPUS_FILES: [&str; 4] = ["frames.jsonl", "transcript.jsonl", "bars.csv", "meetings.csv"];

impl SyntheticCorpus {
    /// Input files plus a `config.toml` listing `specs` verbatim.
    pub fn write_to(&self, dir: &Path, specs: &[String]) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let bodies = [
            write_frame_scores(&self.frames),
            write_transcript(&self.transcript),
            write_minute_bars(&self.bars),
            write_meeting_meta(&self.meetings),
        ];
        for (name, body) in CORPUS_FILES.iter().zip(bodies) {
            let p = dir.join(name);
            fs::write(&p, body).map_err(|e| Error::io(&p, e))?;
        }
        let mut cfg = String::new();
        let _ = writeln!(cfg, "# synthetic corpus, seed {}\n", self.config.seed);
        cfg.push_str("[inputs]\nframes = \"frames.jsonl\"\ntranscript = \"transcript.jsonl\"\nbars = \"bars.csv\"\nmeetings = \"meetings.csv\"\n\n");
        cfg.push_str("[output]\ndir = \"out\"\n");
        if !specs.is_empty() {
            let list: Vec<String> = specs.iter().map(|s| format!("{s:?}")).collect();
            let _ = write!(cfg, "\n[regress]\nspecs = [{}]\n", list.join(", "));
        }
        let p = dir.join("config.toml");
        fs::write(&p, cfg).map_err(|e| Error::io(&p, e))
    }
}
