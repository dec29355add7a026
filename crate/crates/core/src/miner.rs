//! Rule-based recovery of the operation taxonomy from traces, per-trial
//! action graphs, and frequent method-graph mining.
//!
//! Traces are first cut into segments at deliberation pauses: a gap of at
//! least [`MinerConfig::pause_s`] between the end of a fixation and the next
//! event. Everything before the first pause is initialization; every later
//! segment is tested against one rule per strategy kind.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::engine::library::StrategyLibrary;
use crate::engine::program::{Arc, CognitiveProgram, Node, OperationKind};
use crate::percept::{norm, sub, wrap180, Target};
use crate::tracefmt::{Event, FixationRecord, Trace};

#[derive(Debug, Error, PartialEq)]
pub enum MinerError {
    #[error("trace has no answer")]
    NoAnswer,
    #[error("trace has no fixations")]
    Empty,
}

/// Detection thresholds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinerConfig {
    /// Minimum gap that separates deployments, seconds.
    pub pause_s: f64,
    /// Pauses shorter than this precede immediate repetitions, seconds.
    pub repeat_pause_s: f64,
    /// Upper bound of a target-locating glance, ms (exclusive).
    pub locate_max_ms: u32,
    /// Minimum head-yaw span of an environment pan, degrees.
    pub pan_min_deg: f64,
    pub gist_min_ms: u32,
    pub scrutiny_min_ms: u32,
    pub stationary_m: f64,
    pub stationary_deg: f64,
    pub min_alternations: usize,
    pub coarse_min_levels: usize,
    /// Object bounding-sphere diameter used by the closeness threshold.
    pub object_diameter_m: f64,
    pub closeness_factor: f64,
    pub body_displacement_m: f64,
}

impl Default for MinerConfig {
    fn default() -> Self {
        MinerConfig {
            pause_s: 0.2,
            repeat_pause_s: 0.375,
            locate_max_ms: 300,
            pan_min_deg: 10.0,
            gist_min_ms: 300,
            scrutiny_min_ms: 700,
            stationary_m: 0.10,
            stationary_deg: 10.0,
            min_alternations: 4,
            coarse_min_levels: 3,
            object_diameter_m: 0.6,
            closeness_factor: 0.25,
            body_displacement_m: 0.4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperationInterval {
    pub t0: f64,
    pub t1: f64,
    pub kind: OperationKind,
    /// Fixation record indices supporting the detection.
    pub evidence: Vec<usize>,
    pub rule: &'static str,
    pub confidence: f64,
}

impl OperationInterval {
    fn from_records(trace: &Trace, kind: OperationKind, evidence: Vec<usize>, rule: &'static str) -> Self {
        let recs = &trace.records;
        let t0 = evidence.iter().map(|&i| recs[i].t_start).fold(f64::INFINITY, f64::min);
        let t1 = evidence.iter().map(|&i| recs[i].t_end()).fold(f64::NEG_INFINITY, f64::max);
        OperationInterval {
            t0,
            t1,
            kind,
            evidence,
            rule,
            confidence: 1.0,
        }
    }

    /// Part ids touched by the evidence records.
    pub fn parts(&self, trace: &Trace) -> BTreeSet<u8> {
        self.evidence.iter().filter_map(|&i| trace.records[i].part).collect()
    }
}

/// Pause-delimited stretch of fixations.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub records: std::ops::Range<usize>,
    /// Gap preceding the segment, seconds (0 for the first).
    pub pause_before: f64,
}

/// Gap between the end of each fixation and the next event.
fn gaps(trace: &Trace) -> Vec<Option<f64>> {
    let events = trace.events();
    let mut out = vec![None; trace.records.len()];
    for w in events.windows(2) {
        if let Event::Fixation(i, r) = w[0] {
            out[i] = Some(w[1].t_start() - r.t_end());
        }
    }
    out
}

/// Initialization range plus the pause-delimited segments after it.
pub fn segment_trace(trace: &Trace, cfg: &MinerConfig) -> (std::ops::Range<usize>, Vec<Segment>) {
    let g = gaps(trace);
    let mut cuts: Vec<(usize, f64)> = Vec::new();
    for (i, gap) in g.iter().enumerate() {
        if let Some(gap) = gap {
            if *gap >= cfg.pause_s - 1e-9 && i + 1 < trace.records.len() {
                cuts.push((i + 1, *gap));
            }
        }
    }
    let n = trace.records.len();
    let init_end = cuts.first().map_or(n, |c| c.0);
    let mut segments = Vec::new();
    for (k, &(start, pause)) in cuts.iter().enumerate() {
        let end = cuts.get(k + 1).map_or(n, |c| c.0);
        segments.push(Segment {
            records: start..end,
            pause_before: pause,
        });
    }
    (0..init_end, segments)
}

/// ThreeDLayout and LocateTargets within the opening segment.
pub fn detect_initialization(trace: &Trace) -> Vec<OperationInterval> {
    detect_initialization_with(trace, &MinerConfig::default())
}

pub fn detect_initialization_with(trace: &Trace, cfg: &MinerConfig) -> Vec<OperationInterval> {
    let (init, _) = segment_trace(trace, cfg);
    let recs = &trace.records;
    let mut out = Vec::new();
    let env: Vec<usize> = init.clone().filter(|&i| recs[i].target == Target::Environment).collect();
    if env.len() >= 2 {
        let yaws: Vec<f64> = env.iter().map(|&i| recs[i].head.yaw).collect();
        let span = yaws
            .iter()
            .flat_map(|a| yaws.iter().map(move |b| wrap180(a - b).abs()))
            .fold(0.0, f64::max);
        if span >= cfg.pan_min_deg {
            out.push(OperationInterval::from_records(trace, OperationKind::ThreeDLayout, env, "env-pan"));
        }
    }
    let glances: Vec<usize> = init
        .filter(|&i| recs[i].target.is_object() && recs[i].duration_ms < cfg.locate_max_ms)
        .collect();
    let hits = |t: Target| glances.iter().any(|&i| recs[i].target == t);
    if hits(Target::A) && hits(Target::B) {
        out.push(OperationInterval::from_records(
            trace,
            OperationKind::LocateTargets,
            glances,
            "short-glances-both",
        ));
    }
    out
}

fn single_part(recs: &[&FixationRecord]) -> Option<u8> {
    let p = recs.first()?.part?;
    recs.iter().all(|r| r.part == Some(p) && r.target.is_object()).then_some(p)
}

fn head_stationary(recs: &[&FixationRecord], cfg: &MinerConfig) -> bool {
    recs.iter().all(|a| {
        recs.iter().all(|b| {
            norm(sub(a.head.position, b.head.position)) < cfg.stationary_m
                && wrap180(a.head.yaw - b.head.yaw).abs() < cfg.stationary_deg
                && (a.head.pitch - b.head.pitch).abs() < cfg.stationary_deg
        })
    })
}

/// Applies the per-kind rules to one segment, first match wins.
fn classify_segment(trace: &Trace, seg: &Segment, cfg: &MinerConfig) -> Option<(OperationKind, &'static str)> {
    let all = &trace.records;
    let idx: Vec<usize> = seg.records.clone().collect();
    let recs: Vec<&FixationRecord> = idx.iter().map(|&i| &all[i]).collect();
    if recs.is_empty() || recs.iter().any(|r| !r.target.is_object()) {
        return None;
    }

    // GlobalGist: every fixation is a first visit of an (object, sector)
    if recs.iter().all(|r| r.part.is_none() && r.duration_ms >= cfg.gist_min_ms) {
        let mut seen: BTreeSet<(Target, u8)> = all[..seg.records.start]
            .iter()
            .filter_map(|r| r.sector.map(|s| (r.target, s)))
            .collect();
        let fresh = recs.iter().all(|r| r.sector.is_some_and(|s| seen.insert((r.target, s))));
        return fresh.then_some((OperationKind::GlobalGist, "gist-new-sectors"));
    }

    let part = single_part(&recs);

    // OutlierDetection: scrutiny of a part already seen on the other object
    if let Some(p) = part {
        if recs.iter().all(|r| r.duration_ms >= cfg.scrutiny_min_ms) {
            let counterpart_seen = idx.iter().all(|&i| {
                let other = all[i].target.other();
                all[..i].iter().any(|q| q.target == other && q.part == Some(p))
            });
            if counterpart_seen {
                return Some((OperationKind::OutlierDetection, "scrutiny-after-counterpart"));
            }
        }
    }

    // CoarseToFine: duration levels strictly increase, counts never shrink
    if part.is_some() {
        let mut levels: Vec<(u32, usize)> = Vec::new();
        let mut ordered = true;
        for r in &recs {
            match levels.last_mut() {
                Some(l) if l.0 == r.duration_ms => l.1 += 1,
                Some(l) if l.0 > r.duration_ms => ordered = false,
                _ => levels.push((r.duration_ms, 1)),
            }
        }
        if ordered && levels.len() >= cfg.coarse_min_levels && levels.windows(2).all(|w| w[0].1 <= w[1].1) {
            return Some((OperationKind::CoarseToFine, "coarse-levels"));
        }
    }

    // Alternation on one part
    if part.is_some()
        && recs.len() >= cfg.min_alternations
        && recs.windows(2).all(|w| w[0].target != w[1].target)
    {
        return Some(if head_stationary(&recs, cfg) {
            (OperationKind::AlternatingFixation, "alternate-stationary")
        } else {
            (OperationKind::AlternatingView, "alternate-moving")
        });
    }

    // DivideAndConquer: distinct parts, each fixated on one object then the other
    if recs.iter().all(|r| r.part.is_some()) {
        let mut groups: Vec<(u8, Vec<Target>)> = Vec::new();
        for r in &recs {
            let p = r.part.expect("checked");
            match groups.last_mut() {
                Some(g) if g.0 == p => g.1.push(r.target),
                _ => groups.push((p, vec![r.target])),
            }
        }
        let distinct = groups.iter().map(|g| g.0).collect::<BTreeSet<_>>().len() == groups.len();
        let one_switch = groups
            .iter()
            .all(|g| g.1.windows(2).filter(|w| w[0] != w[1]).count() == 1);
        if distinct && one_switch {
            return Some((OperationKind::DivideAndConquer, "partwise-single-switch"));
        }
    }
    None
}

/// Strategy intervals, one per segment satisfying a rule.
pub fn detect_strategy_operations(trace: &Trace) -> Vec<OperationInterval> {
    detect_strategy_operations_with(trace, &MinerConfig::default())
}

pub fn detect_strategy_operations_with(trace: &Trace, cfg: &MinerConfig) -> Vec<OperationInterval> {
    let (_, segments) = segment_trace(trace, cfg);
    segments
        .iter()
        .filter_map(|seg| {
            classify_segment(trace, seg, cfg).map(|(kind, rule)| {
                OperationInterval::from_records(trace, kind, seg.records.clone().collect(), rule)
            })
        })
        .collect()
}

fn pause_before(trace: &Trace, first: usize) -> f64 {
    if first == 0 {
        return 0.0;
    }
    gaps(trace)[first - 1].unwrap_or(0.0)
}

/// StrategyRepetition intervals: a strategy interval that immediately
/// repeats the kind and final part of the one before it.
pub fn detect_confirmation(trace: &Trace, prior: &[OperationInterval]) -> Vec<OperationInterval> {
    detect_confirmation_with(trace, prior, &MinerConfig::default())
}

pub fn detect_confirmation_with(
    trace: &Trace,
    prior: &[OperationInterval],
    cfg: &MinerConfig,
) -> Vec<OperationInterval> {
    let mut out = Vec::new();
    let mut last: Option<(OperationKind, Option<u8>)> = None;
    for iv in prior.iter().filter(|iv| iv.kind.is_strategy()) {
        let Some(&first) = iv.evidence.iter().min() else {
            continue;
        };
        let last_idx = *iv.evidence.iter().max().expect("nonempty");
        let sig = (iv.kind, trace.records[last_idx].part);
        let repeat = last == Some(sig) && pause_before(trace, first) < cfg.repeat_pause_s;
        if repeat {
            out.push(OperationInterval {
                kind: OperationKind::StrategyRepetition,
                rule: "repeat-signature",
                ..iv.clone()
            });
        }
        last = Some(sig);
    }
    out
}

/// Initialization, strategies and repetitions; repeated strategy intervals
/// are reported as StrategyRepetition only.
pub fn detect_all(trace: &Trace) -> Vec<OperationInterval> {
    detect_all_with(trace, &MinerConfig::default())
}

pub fn detect_all_with(trace: &Trace, cfg: &MinerConfig) -> Vec<OperationInterval> {
    let mut out = detect_initialization_with(trace, cfg);
    let strategies = detect_strategy_operations_with(trace, cfg);
    let repeats = detect_confirmation_with(trace, &strategies, cfg);
    let repeated: BTreeSet<Vec<usize>> = repeats.iter().map(|r| r.evidence.clone()).collect();
    out.extend(strategies.into_iter().filter(|s| !repeated.contains(&s.evidence)));
    out.extend(repeats);
    out.sort_by(|a, b| a.t0.total_cmp(&b.t0).then(a.t1.total_cmp(&b.t1)));
    out
}

/// Input to [`classify_elemental`].
#[derive(Clone, Copy, Debug)]
pub enum ElementalSegment<'a> {
    Fixations(&'a [FixationRecord]),
    Motion { body_displacement_m: f64 },
}

/// Visual (trace vs compare) or spatial (viewpoint vs viewing angle)
/// elemental operation; None for a single fixation.
pub fn classify_elemental(seg: ElementalSegment<'_>, cfg: &MinerConfig) -> Option<OperationKind> {
    match seg {
        ElementalSegment::Fixations(recs) => {
            if recs.len() < 2 {
                return None;
            }
            let mut d: Vec<f64> = recs.windows(2).map(|w| norm(sub(w[1].gaze, w[0].gaze))).collect();
            d.sort_by(f64::total_cmp);
            let m = d.len();
            let median = if m % 2 == 1 { d[m / 2] } else { (d[m / 2 - 1] + d[m / 2]) / 2.0 };
            Some(if median < cfg.closeness_factor * cfg.object_diameter_m {
                OperationKind::TraceConnectedComponents
            } else {
                OperationKind::CompareArbitraryComponents
            })
        }
        ElementalSegment::Motion { body_displacement_m } => Some(if body_displacement_m > cfg.body_displacement_m {
            OperationKind::PointOfViewChange
        } else {
            OperationKind::ViewingAngleChange
        }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArcKind {
    Succession,
    /// From an abandoned strategy back to where formulation resumed.
    Reformulation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphNode {
    pub interval: OperationInterval,
    pub dead_end: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialGraph {
    pub nodes: Vec<GraphNode>,
    pub arcs: Vec<(usize, usize, ArcKind)>,
}

impl TrialGraph {
    pub fn labels(&self) -> Vec<OperationKind> {
        self.nodes.iter().map(|n| n.interval.kind).collect()
    }

    pub fn dead_ends(&self) -> usize {
        self.nodes.iter().filter(|n| n.dead_end).count()
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph trial {\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let style = if n.dead_end { ", style=dashed" } else { "" };
            let _ = writeln!(s, "  n{i} [label=\"{}\"{style}];", n.interval.kind);
        }
        for (a, b, k) in &self.arcs {
            let style = if *k == ArcKind::Reformulation { " [style=dotted]" } else { "" };
            let _ = writeln!(s, "  n{a} -> n{b}{style};");
        }
        s.push_str("}\n");
        s
    }

    /// The graph as a program in the strategy-library grammar. Branches
    /// into dead ends become choice points with equal weights.
    pub fn to_program(&self, name: &str) -> CognitiveProgram {
        let mut p = CognitiveProgram::new(name);
        for (i, n) in self.nodes.iter().enumerate() {
            p.nodes.push(Node::op(format!("n{i}"), n.interval.kind));
        }
        for (i, _) in self.nodes.iter().enumerate() {
            let succ: Vec<usize> = self.arcs.iter().filter(|a| a.0 == i).map(|a| a.1).collect();
            match succ.len() {
                0 => p.exits.push(format!("n{i}")),
                1 => p.arcs.push(Arc {
                    from: format!("n{i}"),
                    to: format!("n{}", succ[0]),
                    weight: 1.0,
                }),
                k => {
                    let c = format!("c{i}");
                    p.nodes.push(Node::choice(c.clone()));
                    p.arcs.push(Arc {
                        from: format!("n{i}"),
                        to: c.clone(),
                        weight: 1.0,
                    });
                    for (j, s) in succ.iter().enumerate() {
                        // last arc absorbs rounding so the weights sum to one
                        let w = if j + 1 == k { 1.0 - (k - 1) as f64 / k as f64 } else { 1.0 / k as f64 };
                        p.arcs.push(Arc {
                            from: c.clone(),
                            to: format!("n{s}"),
                            weight: w,
                        });
                    }
                }
            }
        }
        p.entry = "n0".into();
        p
    }
}

/// Chains intervals in time, hangs abandoned strategies off the main line
/// and closes with the Answer node.
pub fn build_trial_graph(trace: &Trace, intervals: &[OperationInterval]) -> Result<TrialGraph, MinerError> {
    if trace.answer.is_none() {
        return Err(MinerError::NoAnswer);
    }
    let last = trace.records.len().checked_sub(1).ok_or(MinerError::Empty)?;
    let mut ivs: Vec<OperationInterval> = intervals.to_vec();
    ivs.sort_by(|a, b| a.t0.total_cmp(&b.t0).then(a.t1.total_cmp(&b.t1)));
    let parts: Vec<BTreeSet<u8>> = ivs.iter().map(|iv| iv.parts(trace)).collect();
    let mut nodes: Vec<GraphNode> = ivs
        .iter()
        .enumerate()
        .map(|(i, iv)| {
            let abandonable = iv.kind.is_comparison()
                || matches!(iv.kind, OperationKind::OutlierDetection | OperationKind::StrategyRepetition);
            let dead_end = abandonable
                && (i + 1..ivs.len()).any(|j| ivs[j].kind.is_comparison() && !parts[j].is_disjoint(&parts[i]));
            GraphNode {
                interval: iv.clone(),
                dead_end,
            }
        })
        .collect();
    nodes.push(GraphNode {
        interval: OperationInterval::from_records(trace, OperationKind::Answer, vec![last], "answer"),
        dead_end: false,
    });
    let mut arcs = Vec::new();
    let mut main: Option<usize> = None;
    for (i, n) in nodes.iter().enumerate() {
        if n.dead_end {
            if let Some(m) = main {
                arcs.push((m, i, ArcKind::Succession));
                arcs.push((i, m, ArcKind::Reformulation));
            }
        } else {
            if let Some(m) = main {
                arcs.push((m, i, ArcKind::Succession));
            }
            main = Some(i);
        }
    }
    Ok(TrialGraph { nodes, arcs })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodGraph {
    pub nodes: Vec<OperationKind>,
    /// (from, to, frequency).
    pub arcs: Vec<(usize, usize, f64)>,
    /// Trials containing any of the graph's sequences.
    pub support: usize,
    /// The maximal frequent sequences merged into this graph.
    pub sequences: Vec<Vec<OperationKind>>,
}

impl MethodGraph {
    /// Outgoing arcs of node `i`.
    pub fn successors(&self, i: usize) -> impl Iterator<Item = &(usize, usize, f64)> {
        self.arcs.iter().filter(move |a| a.0 == i)
    }

    /// Whether `path` occurs as a chain of arcs starting anywhere.
    pub fn contains_path(&self, path: &[OperationKind]) -> bool {
        fn walk(g: &MethodGraph, at: usize, rest: &[OperationKind]) -> bool {
            match rest.split_first() {
                None => true,
                Some((k, tail)) => g.successors(at).any(|a| g.nodes[a.1] == *k && walk(g, a.1, tail)),
            }
        }
        match path.split_first() {
            None => true,
            Some((k, tail)) => (0..self.nodes.len()).any(|i| self.nodes[i] == *k && walk(self, i, tail)),
        }
    }

    /// Frequency of the arc reached by following `path` from the root.
    pub fn frequency(&self, path: &[OperationKind]) -> Option<f64> {
        let (first, rest) = path.split_first()?;
        if self.nodes.first() != Some(first) {
            return None;
        }
        let mut at = 0;
        let mut f = None;
        for k in rest {
            let a = self.successors(at).find(|a| self.nodes[a.1] == *k)?;
            f = Some(a.2);
            at = a.1;
        }
        f
    }

    pub fn to_program(&self, name: &str) -> CognitiveProgram {
        let mut p = CognitiveProgram::new(name);
        p.attributes.insert("support".into(), self.support.to_string());
        for (i, k) in self.nodes.iter().enumerate() {
            p.nodes.push(Node::op(format!("n{i}"), *k));
        }
        for i in 0..self.nodes.len() {
            let succ: Vec<&(usize, usize, f64)> = self.successors(i).collect();
            match succ.len() {
                0 => p.exits.push(format!("n{i}")),
                1 => p.arcs.push(Arc {
                    from: format!("n{i}"),
                    to: format!("n{}", succ[0].1),
                    weight: 1.0,
                }),
                _ => {
                    let c = format!("c{i}");
                    p.nodes.push(Node::choice(c.clone()));
                    p.arcs.push(Arc {
                        from: format!("n{i}"),
                        to: c.clone(),
                        weight: 1.0,
                    });
                    for a in succ {
                        p.arcs.push(Arc {
                            from: c.clone(),
                            to: format!("n{}", a.1),
                            weight: a.2,
                        });
                    }
                }
            }
        }
        p.entry = "n0".into();
        p
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut s = format!("digraph \"{name}\" {{\n  label=\"support {}\";\n", self.support);
        for (i, k) in self.nodes.iter().enumerate() {
            let _ = writeln!(s, "  n{i} [label=\"{k}\"];");
        }
        for (a, b, f) in &self.arcs {
            let _ = writeln!(s, "  n{a} -> n{b} [label=\"{f:.3}\"];");
        }
        s.push_str("}\n");
        s
    }
}

/// Frequent contiguous label sequences (length >= 2) merged at shared
/// prefixes. Arc frequencies are empirical branching proportions.
pub fn mine_method_graphs(graphs: &[TrialGraph], min_support: f64) -> Vec<MethodGraph> {
    let seqs: Vec<Vec<OperationKind>> = graphs.iter().map(TrialGraph::labels).collect();
    mine_sequences(&seqs, min_support)
}

pub fn mine_sequences(seqs: &[Vec<OperationKind>], min_support: f64) -> Vec<MethodGraph> {
    let n = seqs.len();
    if n < 2 {
        return Vec::new();
    }
    let threshold = min_support * n as f64 - 1e-9;
    let mut support: HashMap<Vec<OperationKind>, usize> = HashMap::new();
    for s in seqs {
        let mut here: BTreeSet<&[OperationKind]> = BTreeSet::new();
        for i in 0..s.len() {
            for j in i + 2..=s.len() {
                here.insert(&s[i..j]);
            }
        }
        for sub in here {
            *support.entry(sub.to_vec()).or_default() += 1;
        }
    }
    let frequent = |s: &[OperationKind]| support.get(s).is_some_and(|&c| c as f64 >= threshold);
    let labels: BTreeSet<OperationKind> = seqs.iter().flatten().copied().collect();
    let mut maximal: Vec<Vec<OperationKind>> = support
        .keys()
        .filter(|s| frequent(s))
        .filter(|s| {
            labels.iter().all(|&x| {
                let mut left = vec![x];
                left.extend_from_slice(s);
                let mut right = (*s).clone();
                right.push(x);
                !frequent(&left) && !frequent(&right)
            })
        })
        .cloned()
        .collect();
    maximal.sort();
    let mut groups: BTreeMap<OperationKind, Vec<Vec<OperationKind>>> = BTreeMap::new();
    for s in maximal {
        groups.entry(s[0]).or_default().push(s);
    }
    let mut out = Vec::new();
    for (root, group) in groups {
        let mut g = MethodGraph {
            nodes: vec![root],
            arcs: Vec::new(),
            support: 0,
            sequences: group.clone(),
        };
        // trie keyed by prefix
        let mut ids: BTreeMap<Vec<OperationKind>, usize> = BTreeMap::new();
        ids.insert(vec![root], 0);
        let mut prefixes: BTreeSet<Vec<OperationKind>> = BTreeSet::new();
        for s in &group {
            for j in 2..=s.len() {
                prefixes.insert(s[..j].to_vec());
            }
        }
        // BTreeSet order visits each parent before its children
        for p in &prefixes {
            let id = g.nodes.len();
            g.nodes.push(*p.last().expect("nonempty"));
            ids.insert(p.clone(), id);
        }
        let mut children: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for p in &prefixes {
            let parent = ids[&p[..p.len() - 1]];
            children.entry(parent).or_default().push((ids[p], support[p]));
        }
        for (parent, kids) in children {
            let total: usize = kids.iter().map(|k| k.1).sum();
            for (child, c) in kids {
                g.arcs.push((parent, child, c as f64 / total as f64));
            }
        }
        g.support = seqs
            .iter()
            .filter(|s| group.iter().any(|m| s.windows(m.len()).any(|w| w == m.as_slice())))
            .count();
        out.push(g);
    }
    out
}

/// Mined graphs as a loadable library; methods are selected in proportion
/// to their support.
pub fn export_library(graphs: &[MethodGraph], name: &str) -> StrategyLibrary {
    let total: usize = graphs.iter().map(|g| g.support).sum();
    let mut lib = StrategyLibrary {
        name: name.to_string(),
        select: Vec::new(),
        confirm: 0.5,
        methods: Vec::new(),
    };
    for (i, g) in graphs.iter().enumerate() {
        let m = format!("mined-{i}");
        lib.select.push((m.clone(), g.support as f64 / total.max(1) as f64));
        lib.methods.push(g.to_program(&m));
    }
    lib
}

/// Detection quality for one operation kind.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct F1Counts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl F1Counts {
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            1.0
        } else {
            2.0 * self.tp as f64 / denom as f64
        }
    }

    pub fn add(&mut self, o: F1Counts) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }
}

pub fn temporal_iou(a: (f64, f64), b: (f64, f64)) -> f64 {
    let inter = (a.1.min(b.1) - a.0.max(b.0)).max(0.0);
    let union = (a.1 - a.0) + (b.1 - b.0) - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Greedy per-kind matching of detections to ground truth at IoU >= `min_iou`.
pub fn match_intervals(
    truth: &[(OperationKind, f64, f64)],
    detected: &[OperationInterval],
    min_iou: f64,
) -> BTreeMap<OperationKind, F1Counts> {
    let kinds: BTreeSet<OperationKind> = truth
        .iter()
        .map(|t| t.0)
        .chain(detected.iter().map(|d| d.kind))
        .collect();
    let mut out = BTreeMap::new();
    for k in kinds {
        let t: Vec<(f64, f64)> = truth.iter().filter(|x| x.0 == k).map(|x| (x.1, x.2)).collect();
        let d: Vec<(f64, f64)> = detected.iter().filter(|x| x.kind == k).map(|x| (x.t0, x.t1)).collect();
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (i, a) in t.iter().enumerate() {
            for (j, b) in d.iter().enumerate() {
                let iou = temporal_iou(*a, *b);
                if iou >= min_iou {
                    pairs.push((iou, i, j));
                }
            }
        }
        pairs.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        let (mut ut, mut ud) = (vec![false; t.len()], vec![false; d.len()]);
        let mut tp = 0;
        for (_, i, j) in pairs {
            if !ut[i] && !ud[j] {
                ut[i] = true;
                ud[j] = true;
                tp += 1;
            }
        }
        out.insert(
            k,
            F1Counts {
                tp,
                fp: d.len() - tp,
                fn_: t.len() - tp,
            },
        );
    }
    out
}
