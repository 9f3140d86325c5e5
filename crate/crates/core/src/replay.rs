//! Input traces, deterministic replay and telemetry logs.
//!
//! Trace file:
//!
//! ```text
//! trace L1 v1
//! 120 010000
//! 1 011000
//! ```
//!
//! Each body line is a repeat count and six bits in the order
//! `a_left a_right a_jump b_left b_right b_jump`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::hash::Hasher;

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::level::LevelDef;
use crate::runtime::LevelRuntime;
use crate::sim::{EventKind, InputFrame, TickEvent};

/// Longest trace `replay` accepts, in ticks.
pub const MAX_TICKS: u64 = 1_000_000;
pub const CHECKPOINT_EVERY: u64 = 60;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputTrace {
    pub level_id: String,
    /// `(frame, repeat_count)` with every count at least 1 and no two
    /// neighbouring runs holding the same frame.
    runs: Vec<(InputFrame, u64)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("line 1: expected header `trace <levelId> v1`")]
    BadHeader,
    #[error("line {line}: expected `<repeatCount> <6-bit mask>`")]
    BadLine { line: usize },
    #[error("line {line}: repeat count must be a positive integer")]
    BadCount { line: usize },
    #[error("line {line}: mask must be six characters of 0 or 1")]
    BadMask { line: usize },
}

impl InputTrace {
    pub fn new(level_id: impl Into<String>) -> Self {
        Self {
            level_id: level_id.into(),
            runs: Vec::new(),
        }
    }

    pub fn from_frames(
        level_id: impl Into<String>,
        frames: impl IntoIterator<Item = InputFrame>,
    ) -> Self {
        let mut t = Self::new(level_id);
        for f in frames {
            t.push(f);
        }
        t
    }

    pub fn push(&mut self, frame: InputFrame) {
        self.push_run(frame, 1);
    }

    pub fn push_run(&mut self, frame: InputFrame, count: u64) {
        if count == 0 {
            return;
        }
        match self.runs.last_mut() {
            Some((f, n)) if *f == frame => *n += count,
            _ => self.runs.push((frame, count)),
        }
    }

    pub fn runs(&self) -> &[(InputFrame, u64)] {
        &self.runs
    }

    pub fn len(&self) -> u64 {
        self.runs.iter().map(|(_, n)| n).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn frames(&self) -> impl Iterator<Item = InputFrame> + '_ {
        self.runs
            .iter()
            .flat_map(|&(f, n)| std::iter::repeat_n(f, n as usize))
    }

    /// Keep only the first `ticks` frames.
    pub fn truncated(&self, ticks: u64) -> Self {
        let mut out = Self::new(self.level_id.clone());
        let mut left = ticks;
        for &(f, n) in &self.runs {
            if left == 0 {
                break;
            }
            out.push_run(f, n.min(left));
            left -= n.min(left);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, TraceError> {
        let mut lines = text.lines().enumerate();
        let header = lines.next().map(|(_, l)| l).unwrap_or("");
        let mut words = header.split_whitespace();
        let level_id = match (words.next(), words.next(), words.next(), words.next()) {
            (Some("trace"), Some(id), Some("v1"), None) => id,
            _ => return Err(TraceError::BadHeader),
        };
        let mut trace = Self::new(level_id);
        for (i, line) in lines {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(count), Some(mask), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(TraceError::BadLine { line: line_no });
            };
            let count: u64 = match count.parse() {
                Ok(n) if n > 0 && count.bytes().all(|b| b.is_ascii_digit()) => n,
                _ => return Err(TraceError::BadCount { line: line_no }),
            };
            if mask.len() != 6 || !mask.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(TraceError::BadMask { line: line_no });
            }
            let bits =
                u8::from_str_radix(mask, 2).map_err(|_| TraceError::BadMask { line: line_no })?;
            trace.push_run(InputFrame::from_bits(bits), count);
        }
        Ok(trace)
    }

    /// File text; runs are already maximal so this is canonical.
    pub fn to_text(&self) -> String {
        let mut out = format!("trace {} v1\n", self.level_id);
        for (f, n) in &self.runs {
            let _ = writeln!(out, "{n} {:06b}", f.bits());
        }
        out
    }

    /// FNV-1a over the canonical file text.
    pub fn digest(&self) -> u64 {
        let mut h = FnvHasher::default();
        h.write(self.to_text().as_bytes());
        h.finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("trace is for level {trace} but the level is {level}")]
    LevelMismatch { trace: String, level: String },
    #[error("trace has {ticks} ticks, more than the limit of {MAX_TICKS}")]
    TooLong { ticks: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub tick: u64,
    #[serde(with = "hex64")]
    pub hash: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Summary {
    pub completed: bool,
    pub ticks: u64,
    pub attempts: u32,
    pub stars_collected: u32,
    pub hesitation_count: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TelemetryLog {
    pub level_id: String,
    #[serde(with = "hex64")]
    pub trace_digest: u64,
    pub events: Vec<TickEvent>,
    pub checkpoints: Vec<Checkpoint>,
    pub summary: Summary,
}

impl TelemetryLog {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("telemetry is always serializable")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

mod hex64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{v:016x}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let s = String::deserialize(d)?;
        u64::from_str_radix(&s, 16).map_err(serde::de::Error::custom)
    }
}

/// Run `trace` on a fresh runtime for `def`, stopping early on completion.
pub fn replay(def: &LevelDef, trace: &InputTrace) -> Result<TelemetryLog, ReplayError> {
    if trace.level_id != def.meta.level_id {
        return Err(ReplayError::LevelMismatch {
            trace: trace.level_id.clone(),
            level: def.meta.level_id.clone(),
        });
    }
    let ticks = trace.len();
    if ticks > MAX_TICKS {
        return Err(ReplayError::TooLong { ticks });
    }
    let mut rt = LevelRuntime::new(def);
    let mut events = Vec::new();
    let mut checkpoints = vec![Checkpoint {
        tick: 0,
        hash: rt.state_hash(),
    }];
    for frame in trace.frames() {
        events.extend(rt.step(&frame));
        if rt.tick.is_multiple_of(CHECKPOINT_EVERY) {
            checkpoints.push(Checkpoint {
                tick: rt.tick,
                hash: rt.state_hash(),
            });
        }
        if rt.completed {
            break;
        }
    }
    let stars_collected = events
        .iter()
        .filter(|e| matches!(e.kind, EventKind::StarCollect | EventKind::FlagStarCollect))
        .count() as u32;
    Ok(TelemetryLog {
        level_id: def.meta.level_id.clone(),
        trace_digest: trace.digest(),
        summary: Summary {
            completed: rt.completed,
            ticks: rt.tick,
            attempts: rt.attempts,
            stars_collected,
            hesitation_count: rt.counters.hesitation_count,
        },
        events,
        checkpoints,
    })
}

/// Both sides at the earliest tick where two logs disagree.
#[derive(Debug, Clone, PartialEq)]
pub struct Divergence {
    pub tick: u64,
    pub events_a: Vec<TickEvent>,
    pub events_b: Vec<TickEvent>,
    pub hash_a: Option<u64>,
    pub hash_b: Option<u64>,
}

/// Earliest tick whose events or checkpoint hash differ, or `None` when the
/// logs agree everywhere. Symmetric in its arguments.
pub fn diff_logs(a: &TelemetryLog, b: &TelemetryLog) -> Option<Divergence> {
    fn by_tick(log: &TelemetryLog) -> BTreeMap<u64, (Vec<TickEvent>, Option<u64>)> {
        let mut m: BTreeMap<u64, (Vec<TickEvent>, Option<u64>)> = BTreeMap::new();
        for e in &log.events {
            m.entry(e.tick).or_default().0.push(e.clone());
        }
        for c in &log.checkpoints {
            m.entry(c.tick).or_default().1 = Some(c.hash);
        }
        m
    }
    let ma = by_tick(a);
    let mb = by_tick(b);
    let empty = (Vec::new(), None);
    let ticks: std::collections::BTreeSet<u64> = ma.keys().chain(mb.keys()).copied().collect();
    for t in ticks {
        let sa = ma.get(&t).unwrap_or(&empty);
        let sb = mb.get(&t).unwrap_or(&empty);
        if sa != sb {
            return Some(Divergence {
                tick: t,
                events_a: sa.0.clone(),
                events_b: sb.0.clone(),
                hash_a: sa.1,
                hash_b: sb.1,
            });
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shipped;

    fn frame(bits: u8) -> InputFrame {
        InputFrame::from_bits(bits)
    }

    #[test]
    fn run_length_encoding_merges() {
        let t =
            InputTrace::from_frames("L1", [frame(0b010000), frame(0b010000), frame(0), frame(0)]);
        assert_eq!(t.runs().len(), 2);
        assert_eq!(t.len(), 4);
        assert_eq!(t.to_text(), "trace L1 v1\n2 010000\n2 000000\n");
    }

    #[test]
    fn trace_text_round_trip() {
        let text = "trace L4 v1\n30 010000\n1 011000\n5 000000\n2 000101\n";
        let t = InputTrace::parse(text).unwrap();
        assert_eq!(t.to_text(), text);
        assert_eq!(t.len(), 38);
        assert!(t.frames().nth(30).unwrap().a_jump);
    }

    #[test]
    fn trace_parse_errors() {
        assert_eq!(InputTrace::parse("trace L1\n"), Err(TraceError::BadHeader));
        assert_eq!(InputTrace::parse(""), Err(TraceError::BadHeader));
        assert_eq!(
            InputTrace::parse("trace L1 v1\n0 000000\n"),
            Err(TraceError::BadCount { line: 2 })
        );
        assert_eq!(
            InputTrace::parse("trace L1 v1\n+3 000000\n"),
            Err(TraceError::BadCount { line: 2 })
        );
        assert_eq!(
            InputTrace::parse("trace L1 v1\n1 00000\n"),
            Err(TraceError::BadMask { line: 2 })
        );
        assert_eq!(
            InputTrace::parse("trace L1 v1\n1 000002\n"),
            Err(TraceError::BadMask { line: 2 })
        );
        assert_eq!(
            InputTrace::parse("trace L1 v1\n1\n"),
            Err(TraceError::BadLine { line: 2 })
        );
    }

    #[test]
    fn empty_trace_gives_empty_log() {
        let def = shipped::level("L1").unwrap();
        let log = replay(&def, &InputTrace::new("L1")).unwrap();
        assert!(log.events.is_empty());
        assert!(!log.summary.completed);
        assert_eq!(log.summary.ticks, 0);
        assert_eq!(log.checkpoints.len(), 1);
    }

    #[test]
    fn level_mismatch_is_rejected() {
        let def = shipped::level("L1").unwrap();
        let err = replay(&def, &InputTrace::new("L2")).unwrap_err();
        assert!(matches!(err, ReplayError::LevelMismatch { .. }));
    }

    #[test]
    fn over_long_trace_is_rejected() {
        let def = shipped::level("L1").unwrap();
        let mut t = InputTrace::new("L1");
        t.push_run(InputFrame::IDLE, MAX_TICKS + 1);
        assert_eq!(
            replay(&def, &t).unwrap_err(),
            ReplayError::TooLong {
                ticks: MAX_TICKS + 1
            }
        );
    }

    #[test]
    fn checkpoints_every_second() {
        let def = shipped::level("L1").unwrap();
        let mut t = InputTrace::new("L1");
        t.push_run(InputFrame::IDLE, 185);
        let log = replay(&def, &t).unwrap();
        let ticks: Vec<u64> = log.checkpoints.iter().map(|c| c.tick).collect();
        assert_eq!(ticks, vec![0, 60, 120, 180]);
    }

    #[test]
    fn json_round_trip_and_field_order() {
        let def = shipped::level("L1").unwrap();
        let mut t = InputTrace::new("L1");
        t.push_run(frame(0b010000), 70);
        let log = replay(&def, &t).unwrap();
        let json = log.to_json();
        let keys = [
            "\"levelId\"",
            "\"traceDigest\"",
            "\"events\"",
            "\"checkpoints\"",
            "\"summary\"",
        ];
        let pos: Vec<usize> = keys.iter().map(|k| json.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(TelemetryLog::from_json(&json).unwrap(), log);
    }

    #[test]
    fn diff_finds_first_divergence_symmetrically() {
        let def = shipped::level("L1").unwrap();
        let mut a = InputTrace::new("L1");
        a.push_run(frame(0b010000), 200);
        let mut b = a.truncated(100);
        b.push_run(frame(0b100000), 100);
        let la = replay(&def, &a).unwrap();
        let lb = replay(&def, &b).unwrap();
        assert_eq!(diff_logs(&la, &la), None);
        let d1 = diff_logs(&la, &lb).unwrap();
        let d2 = diff_logs(&lb, &la).unwrap();
        assert_eq!(d1.tick, d2.tick);
        assert!(d1.tick >= 100);
    }
}
