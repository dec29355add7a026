//! Trace data model and line format.
//!
//! ```text
//! # pesao-sim/1
//! # trial 4 easy-0 easy-2 different 90 short easy 1234
//! # engine 0.1.0
//! # seed 99
//! move 0 head_turn 0
//! fix 2 300 1.2 0.4 1.65 90 -5 0 2.1 1.7 1.5 env - - - ThreeDLayout
//! fix 2.3 210 1.2 0.4 1.65 90 -5 0 1.65 1.7 1.52 A b2/+z - 6 LocateTargets
//! answer different correct
//! end
//! ```
//!
//! Fixation fields: start (s), duration (ms), head x y z yaw pitch roll,
//! gaze point x y z, target, element (`b<block>/<face>`), part, sector,
//! annotation. `-` marks an absent optional field. Fixation and motion
//! lines are merged by start time (motions first on ties). Floats carry six
//! significant digits; values are stored pre-rounded so that reading a
//! written trace reproduces it exactly.

use std::fmt::Write as _;
use std::io::{self, Read, Write};

use thiserror::Error;

use crate::engine::program::OperationKind;
use crate::percept::{Face, Target, Vec3};
use crate::scenario::{GroundTruth, TrialConfig};
use crate::FORMAT_VERSION;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: {msg}")]
    Validation { line: usize, msg: String },
    #[error("trace is truncated (no `end` line)")]
    Truncated,
    #[error("trace has no answer")]
    Incomplete,
    #[error("trace has no fixation on a target object")]
    NoTargetFixation,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Rounds to six significant digits, the precision of the text format.
pub fn quantize(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    let v: f64 = format!("{x:.5e}").parse().expect("formatted float parses");
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeadSample {
    pub position: Vec3,
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Element {
    pub block: usize,
    pub face: Face,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixationRecord {
    pub t_start: f64,
    pub duration_ms: u32,
    pub head: HeadSample,
    pub gaze: Vec3,
    pub target: Target,
    pub element: Option<Element>,
    /// Region id shared by both objects' part decompositions.
    pub part: Option<u8>,
    pub sector: Option<u8>,
    pub annotation: Option<OperationKind>,
}

impl FixationRecord {
    pub fn t_end(&self) -> f64 {
        self.t_start + f64::from(self.duration_ms) / 1000.0
    }

    /// Rounds every float field to the stored precision.
    pub fn quantized(mut self) -> Self {
        self.t_start = quantize(self.t_start);
        for p in self.head.position.iter_mut().chain(self.gaze.iter_mut()) {
            *p = quantize(*p);
        }
        self.head.yaw = quantize(self.head.yaw);
        self.head.pitch = quantize(self.head.pitch);
        self.head.roll = quantize(self.head.roll);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MotionKind {
    Walk,
    HeadTurn,
}

impl MotionKind {
    pub fn token(self) -> &'static str {
        match self {
            MotionKind::Walk => "walk",
            MotionKind::HeadTurn => "head_turn",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MotionRecord {
    pub t_start: f64,
    pub kind: MotionKind,
    /// Head path length, meters.
    pub length: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnswerRecord {
    pub answer: GroundTruth,
    pub correct: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceMeta {
    pub config: TrialConfig,
    pub engine_version: String,
    pub seed: u64,
    /// Set when the step budget forced the answer.
    pub forced: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub meta: TraceMeta,
    pub records: Vec<FixationRecord>,
    pub motions: Vec<MotionRecord>,
    pub answer: Option<AnswerRecord>,
}

/// One line of the body in file order.
#[derive(Clone, Copy, Debug)]
pub enum Event<'a> {
    Fixation(usize, &'a FixationRecord),
    Motion(usize, &'a MotionRecord),
}

impl Event<'_> {
    pub fn t_start(&self) -> f64 {
        match self {
            Event::Fixation(_, r) => r.t_start,
            Event::Motion(_, m) => m.t_start,
        }
    }
}

impl Trace {
    /// Fixations and motions merged by start time, motions first on ties.
    pub fn events(&self) -> Vec<Event<'_>> {
        let mut out = Vec::with_capacity(self.records.len() + self.motions.len());
        let (mut i, mut j) = (0, 0);
        while i < self.records.len() || j < self.motions.len() {
            let take_motion = match (self.records.get(i), self.motions.get(j)) {
                (Some(r), Some(m)) => m.t_start <= r.t_start,
                (None, Some(_)) => true,
                _ => false,
            };
            if take_motion {
                out.push(Event::Motion(j, &self.motions[j]));
                j += 1;
            } else {
                out.push(Event::Fixation(i, &self.records[i]));
                i += 1;
            }
        }
        out
    }

    /// Index of the first fixation on a target object; its start is the
    /// response-clock zero.
    pub fn clock_zero_index(&self) -> Option<usize> {
        self.records.iter().position(|r| r.target.is_object())
    }

    pub fn validate(&self) -> Result<(), TraceError> {
        let invalid = |line: usize, msg: String| TraceError::Validation { line, msg };
        let mut last = f64::NEG_INFINITY;
        for (k, e) in self.events().iter().enumerate() {
            let t = e.t_start();
            if !t.is_finite() || t < 0.0 {
                return Err(invalid(k + 1, format!("bad start time {t}")));
            }
            if t < last {
                return Err(invalid(k + 1, format!("start time {t} precedes {last}")));
            }
            last = t;
            match e {
                Event::Fixation(_, r) => {
                    if r.duration_ms == 0 {
                        return Err(invalid(k + 1, "zero duration".into()));
                    }
                    if r.sector.is_some() != r.target.is_object() {
                        return Err(invalid(k + 1, "sector must be present iff target is an object".into()));
                    }
                    if r.sector.is_some_and(|s| s > 7) || r.part.is_some_and(|p| p > 7) {
                        return Err(invalid(k + 1, "sector/part outside 0..7".into()));
                    }
                }
                Event::Motion(_, m) => {
                    if !(m.length.is_finite() && m.length >= 0.0) {
                        return Err(invalid(k + 1, format!("bad path length {}", m.length)));
                    }
                }
            }
        }
        Ok(())
    }
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}

fn num(x: f64) -> String {
    quantize(x).to_string()
}

pub fn write_trace<W: Write>(trace: &Trace, mut sink: W) -> io::Result<()> {
    sink.write_all(trace_to_string(trace).as_bytes())
}

pub fn trace_to_string(trace: &Trace) -> String {
    let mut s = String::new();
    let m = &trace.meta;
    let _ = writeln!(s, "# {FORMAT_VERSION}");
    let _ = writeln!(s, "# {}", m.config.to_record());
    let _ = writeln!(s, "# engine {}", m.engine_version);
    let _ = writeln!(s, "# seed {}", m.seed);
    if m.forced {
        s.push_str("# forced\n");
    }
    for e in trace.events() {
        match e {
            Event::Motion(_, mo) => {
                let _ = writeln!(s, "move {} {} {}", num(mo.t_start), mo.kind.token(), num(mo.length));
            }
            Event::Fixation(_, r) => {
                let h = &r.head;
                let element = r
                    .element
                    .map(|el| format!("b{}/{}", el.block, el.face.token()));
                let _ = writeln!(
                    s,
                    "fix {} {} {} {} {} {} {} {} {} {} {} {} {} {} {} {}",
                    num(r.t_start),
                    r.duration_ms,
                    num(h.position[0]),
                    num(h.position[1]),
                    num(h.position[2]),
                    num(h.yaw),
                    num(h.pitch),
                    num(h.roll),
                    num(r.gaze[0]),
                    num(r.gaze[1]),
                    num(r.gaze[2]),
                    r.target.token(),
                    opt(element),
                    opt(r.part),
                    opt(r.sector),
                    opt(r.annotation),
                );
            }
        }
    }
    if let Some(a) = trace.answer {
        let verdict = if a.correct { "correct" } else { "incorrect" };
        let _ = writeln!(s, "answer {} {}", a.answer, verdict);
    }
    s.push_str("end\n");
    s
}

pub fn read_trace<R: Read>(mut source: R) -> Result<Trace, TraceError> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    parse_trace(&text)
}

fn field<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T, TraceError> {
    tok.parse().map_err(|_| TraceError::Parse {
        line,
        msg: format!("bad {what} {tok:?}"),
    })
}

fn opt_field<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<Option<T>, TraceError> {
    if tok == "-" {
        Ok(None)
    } else {
        field(tok, line, what).map(Some)
    }
}

fn float(tok: &str, line: usize, what: &str) -> Result<f64, TraceError> {
    let v: f64 = field(tok, line, what)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(TraceError::Parse {
            line,
            msg: format!("non-finite {what}"),
        })
    }
}

fn parse_element(tok: &str, line: usize) -> Result<Option<Element>, TraceError> {
    if tok == "-" {
        return Ok(None);
    }
    let bad = || TraceError::Parse {
        line,
        msg: format!("bad element {tok:?}"),
    };
    let rest = tok.strip_prefix('b').ok_or_else(bad)?;
    let (block, face) = rest.split_once('/').ok_or_else(bad)?;
    Ok(Some(Element {
        block: block.parse().map_err(|_| bad())?,
        face: face.parse().map_err(|_| bad())?,
    }))
}

fn parse_fixation(f: &[&str], n: usize) -> Result<FixationRecord, TraceError> {
    if f.len() != 17 {
        return Err(TraceError::Parse {
            line: n,
            msg: format!("fixation needs 17 fields, got {}", f.len()),
        });
    }
    let annotation = if f[16] == "-" {
        None
    } else {
        Some(f[16].parse::<OperationKind>().map_err(|msg| TraceError::Parse { line: n, msg })?)
    };
    Ok(FixationRecord {
        t_start: float(f[1], n, "start time")?,
        duration_ms: field(f[2], n, "duration")?,
        head: HeadSample {
            position: [
                float(f[3], n, "head x")?,
                float(f[4], n, "head y")?,
                float(f[5], n, "head z")?,
            ],
            yaw: float(f[6], n, "yaw")?,
            pitch: float(f[7], n, "pitch")?,
            roll: float(f[8], n, "roll")?,
        },
        gaze: [
            float(f[9], n, "gaze x")?,
            float(f[10], n, "gaze y")?,
            float(f[11], n, "gaze z")?,
        ],
        target: f[12].parse().map_err(|msg| TraceError::Parse { line: n, msg })?,
        element: parse_element(f[13], n)?,
        part: opt_field(f[14], n, "part")?,
        sector: opt_field(f[15], n, "sector")?,
        annotation,
    })
}

/// Parses and validates a complete trace; partial input is an error.
pub fn parse_trace(text: &str) -> Result<Trace, TraceError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut header = |expect: &str| -> Result<(usize, String), TraceError> {
        match lines.next() {
            Some((n, l)) => match l.strip_prefix("# ") {
                Some(rest) if rest.starts_with(expect) => Ok((n, rest.to_string())),
                _ => Err(TraceError::Parse {
                    line: n,
                    msg: format!("expected `# {expect}` header"),
                }),
            },
            None => Err(TraceError::Truncated),
        }
    };
    let (n, version) = header(FORMAT_VERSION)?;
    if version != FORMAT_VERSION {
        return Err(TraceError::Parse {
            line: n,
            msg: format!("unsupported version {version:?}"),
        });
    }
    let (n, record) = header("trial ")?;
    let config = TrialConfig::parse_record(&record).map_err(|e| TraceError::Parse {
        line: n,
        msg: e.to_string(),
    })?;
    let (_, engine) = header("engine ")?;
    let (n, seed) = header("seed ")?;
    let seed = field(&seed["seed ".len()..], n, "seed")?;
    let mut trace = Trace {
        meta: TraceMeta {
            config,
            engine_version: engine["engine ".len()..].to_string(),
            seed,
            forced: false,
        },
        records: Vec::new(),
        motions: Vec::new(),
        answer: None,
    };
    let mut last_t = f64::NEG_INFINITY;
    let mut ended = false;
    let mut body_started = false;
    for (n, line) in lines {
        if ended {
            return Err(TraceError::Parse {
                line: n,
                msg: "content after `end`".into(),
            });
        }
        if line == "# forced" && !body_started {
            trace.meta.forced = true;
            continue;
        }
        body_started = true;
        let f: Vec<&str> = line.split(' ').collect();
        if trace.answer.is_some() && f[0] != "end" {
            return Err(TraceError::Parse {
                line: n,
                msg: "only `end` may follow the answer".into(),
            });
        }
        let t = match f[0] {
            "fix" => {
                let r = parse_fixation(&f, n)?;
                let t = r.t_start;
                trace.records.push(r);
                t
            }
            "move" => {
                if f.len() != 4 {
                    return Err(TraceError::Parse {
                        line: n,
                        msg: "motion needs 4 fields".into(),
                    });
                }
                let kind = match f[2] {
                    "walk" => MotionKind::Walk,
                    "head_turn" => MotionKind::HeadTurn,
                    o => {
                        return Err(TraceError::Parse {
                            line: n,
                            msg: format!("unknown motion kind {o:?}"),
                        })
                    }
                };
                let m = MotionRecord {
                    t_start: float(f[1], n, "start time")?,
                    kind,
                    length: float(f[3], n, "path length")?,
                };
                let t = m.t_start;
                trace.motions.push(m);
                t
            }
            "answer" => {
                if f.len() != 3 {
                    return Err(TraceError::Parse {
                        line: n,
                        msg: "answer needs 3 fields".into(),
                    });
                }
                let answer = f[1].parse().map_err(|msg| TraceError::Parse { line: n, msg })?;
                let correct = match f[2] {
                    "correct" => true,
                    "incorrect" => false,
                    o => {
                        return Err(TraceError::Parse {
                            line: n,
                            msg: format!("expected correct|incorrect, got {o:?}"),
                        })
                    }
                };
                trace.answer = Some(AnswerRecord { answer, correct });
                continue;
            }
            "end" if f.len() == 1 => {
                ended = true;
                continue;
            }
            _ => {
                return Err(TraceError::Parse {
                    line: n,
                    msg: format!("unrecognised line {line:?}"),
                })
            }
        };
        if t < last_t {
            return Err(TraceError::Validation {
                line: n,
                msg: format!("start time {t} precedes {last_t}"),
            });
        }
        last_t = t;
    }
    if !ended {
        return Err(TraceError::Truncated);
    }
    trace.validate()?;
    Ok(trace)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceMetrics {
    /// Fixations on either target object.
    pub fixations: usize,
    pub head_path_m: f64,
    pub response_time_s: f64,
}

pub fn trace_metrics(trace: &Trace) -> Result<TraceMetrics, TraceError> {
    if trace.answer.is_none() {
        return Err(TraceError::Incomplete);
    }
    let zero = trace
        .clock_zero_index()
        .map(|i| trace.records[i].t_start)
        .ok_or(TraceError::NoTargetFixation)?;
    let end = trace
        .records
        .iter()
        .map(FixationRecord::t_end)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(TraceMetrics {
        fixations: trace.records.iter().filter(|r| r.target.is_object()).count(),
        head_path_m: trace.motions.iter().map(|m| m.length).sum(),
        response_time_s: end - zero,
    })
}
