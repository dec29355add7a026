//! Cognitive Programs as directed graphs of operations and choice points.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProgramError {
    #[error("unbound parameter `{param}` on node `{node}`")]
    UnboundParameter { node: String, param: String },
    #[error("instantiate called on a script")]
    AlreadyScript,
    #[error("choice point `{node}` has weights summing to {sum}")]
    WeightSum { node: String, sum: f64 },
    #[error("choice point `{0}` has only zero weights")]
    DegenerateWeights(String),
    #[error("operation node `{0}` has more than one successor")]
    Branching(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("no path from entry to an exit")]
    NoExitPath,
    #[error("program has no entry node")]
    NoEntry,
    #[error("weight {0} outside [0, 1]")]
    WeightRange(f64),
}

/// The closed vocabulary of operations used in trial annotations and
/// method graphs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OperationKind {
    ThreeDLayout,
    LocateTargets,
    GlobalGist,
    OutlierDetection,
    DivideAndConquer,
    CoarseToFine,
    AlternatingFixation,
    AlternatingView,
    StrategyRepetition,
    TraceConnectedComponents,
    CompareArbitraryComponents,
    PointOfViewChange,
    ViewingAngleChange,
    Answer,
}

impl OperationKind {
    pub const ALL: [OperationKind; 14] = [
        Self::ThreeDLayout,
        Self::LocateTargets,
        Self::GlobalGist,
        Self::OutlierDetection,
        Self::DivideAndConquer,
        Self::CoarseToFine,
        Self::AlternatingFixation,
        Self::AlternatingView,
        Self::StrategyRepetition,
        Self::TraceConnectedComponents,
        Self::CompareArbitraryComponents,
        Self::PointOfViewChange,
        Self::ViewingAngleChange,
        Self::Answer,
    ];

    /// Strategy-formulation kinds the executive can deploy.
    pub const STRATEGIES: [OperationKind; 6] = [
        Self::GlobalGist,
        Self::OutlierDetection,
        Self::DivideAndConquer,
        Self::CoarseToFine,
        Self::AlternatingFixation,
        Self::AlternatingView,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::ThreeDLayout => "ThreeDLayout",
            Self::LocateTargets => "LocateTargets",
            Self::GlobalGist => "GlobalGist",
            Self::OutlierDetection => "OutlierDetection",
            Self::DivideAndConquer => "DivideAndConquer",
            Self::CoarseToFine => "CoarseToFine",
            Self::AlternatingFixation => "AlternatingFixation",
            Self::AlternatingView => "AlternatingView",
            Self::StrategyRepetition => "StrategyRepetition",
            Self::TraceConnectedComponents => "TraceConnectedComponents",
            Self::CompareArbitraryComponents => "CompareArbitraryComponents",
            Self::PointOfViewChange => "PointOfViewChange",
            Self::ViewingAngleChange => "ViewingAngleChange",
            Self::Answer => "Answer",
        }
    }

    pub fn is_strategy(self) -> bool {
        Self::STRATEGIES.contains(&self)
    }

    /// Strategies that compare parts across the two objects.
    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            Self::DivideAndConquer
                | Self::CoarseToFine
                | Self::AlternatingFixation
                | Self::AlternatingView
        )
    }
}

impl fmt::Display for OperationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperationKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown operation kind {s:?}"))
    }
}

/// A named parameter slot; `None` means unbound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub value: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum NodeKind {
    Op {
        kind: OperationKind,
        params: Vec<Param>,
    },
    Choice,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
}

impl Node {
    pub fn op(id: impl Into<String>, kind: OperationKind) -> Self {
        Node {
            id: id.into(),
            kind: NodeKind::Op {
                kind,
                params: Vec::new(),
            },
        }
    }

    pub fn choice(id: impl Into<String>) -> Self {
        Node {
            id: id.into(),
            kind: NodeKind::Choice,
        }
    }

    pub fn with_param(mut self, name: &str, value: Option<&str>) -> Self {
        if let NodeKind::Op { params, .. } = &mut self.kind {
            params.push(Param {
                name: name.to_string(),
                value: value.map(str::to_string),
            });
        }
        self
    }

    pub fn operation(&self) -> Option<OperationKind> {
        match &self.kind {
            NodeKind::Op { kind, .. } => Some(*kind),
            NodeKind::Choice => None,
        }
    }

    pub fn param(&self, name: &str) -> Option<&str> {
        match &self.kind {
            NodeKind::Op { params, .. } => params
                .iter()
                .find(|p| p.name == name)
                .and_then(|p| p.value.as_deref()),
            NodeKind::Choice => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Arc {
    pub from: String,
    pub to: String,
    pub weight: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Binding {
    Method,
    Script,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CognitiveProgram {
    pub name: String,
    pub nodes: Vec<Node>,
    pub arcs: Vec<Arc>,
    pub entry: String,
    pub exits: Vec<String>,
    pub binding: Binding,
    /// Free-form attributes carried through the text format.
    pub attributes: BTreeMap<String, String>,
}

pub const WEIGHT_TOLERANCE: f64 = 1e-9;

impl CognitiveProgram {
    pub fn new(name: impl Into<String>) -> Self {
        CognitiveProgram {
            name: name.into(),
            nodes: Vec::new(),
            arcs: Vec::new(),
            entry: String::new(),
            exits: Vec::new(),
            binding: Binding::Method,
            attributes: BTreeMap::new(),
        }
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn outgoing<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a Arc> + 'a {
        self.arcs.iter().filter(move |a| a.from == id)
    }

    /// Parameter slots still unbound, as (node id, parameter name).
    pub fn unbound(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for n in &self.nodes {
            if let NodeKind::Op { params, .. } = &n.kind {
                for p in params.iter().filter(|p| p.value.is_none()) {
                    out.push((n.id.clone(), p.name.clone()));
                }
            }
        }
        out
    }

    /// Checks structure: known endpoints, weights in range and summing to
    /// one at every choice point, op nodes with at most one successor, and
    /// a path from entry to some exit.
    pub fn validate(&self) -> Result<(), ProgramError> {
        let mut ids = BTreeSet::new();
        for n in &self.nodes {
            if !ids.insert(n.id.as_str()) {
                return Err(ProgramError::DuplicateNode(n.id.clone()));
            }
        }
        if self.entry.is_empty() {
            return Err(ProgramError::NoEntry);
        }
        for id in std::iter::once(&self.entry).chain(&self.exits) {
            if !ids.contains(id.as_str()) {
                return Err(ProgramError::UnknownNode(id.clone()));
            }
        }
        for a in &self.arcs {
            for end in [&a.from, &a.to] {
                if !ids.contains(end.as_str()) {
                    return Err(ProgramError::UnknownNode(end.clone()));
                }
            }
            if !(0.0..=1.0).contains(&a.weight) {
                return Err(ProgramError::WeightRange(a.weight));
            }
        }
        for n in &self.nodes {
            let out: Vec<&Arc> = self.outgoing(&n.id).collect();
            match n.kind {
                NodeKind::Choice => {
                    let sum: f64 = out.iter().map(|a| a.weight).sum();
                    if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
                        return Err(ProgramError::WeightSum {
                            node: n.id.clone(),
                            sum,
                        });
                    }
                }
                NodeKind::Op { .. } => {
                    if out.len() > 1 {
                        return Err(ProgramError::Branching(n.id.clone()));
                    }
                }
            }
        }
        // reachability of an exit (a node without successors counts too)
        let mut seen = BTreeSet::from([self.entry.as_str()]);
        let mut queue = VecDeque::from([self.entry.as_str()]);
        while let Some(id) = queue.pop_front() {
            let is_exit = self.exits.iter().any(|e| e == id);
            if is_exit || self.outgoing(id).next().is_none() {
                return Ok(());
            }
            for a in self.outgoing(id) {
                if seen.insert(a.to.as_str()) {
                    queue.push_back(a.to.as_str());
                }
            }
        }
        Err(ProgramError::NoExitPath)
    }
}

/// Binds every unbound parameter slot from `bindings` (keyed by parameter
/// name) and returns the resulting Script.
pub fn instantiate(
    method: &CognitiveProgram,
    bindings: &BTreeMap<String, String>,
) -> Result<CognitiveProgram, ProgramError> {
    if method.binding == Binding::Script {
        return Err(ProgramError::AlreadyScript);
    }
    let mut script = method.clone();
    for node in &mut script.nodes {
        if let NodeKind::Op { params, .. } = &mut node.kind {
            for p in params.iter_mut().filter(|p| p.value.is_none()) {
                match bindings.get(&p.name) {
                    Some(v) => p.value = Some(v.clone()),
                    None => {
                        return Err(ProgramError::UnboundParameter {
                            node: node.id.clone(),
                            param: p.name.clone(),
                        })
                    }
                }
            }
        }
    }
    script.binding = Binding::Script;
    Ok(script)
}

/// Samples one outgoing arc proportionally to `weights`. A single arc is
/// taken without consuming randomness.
pub fn sample_choice<R: Rng>(weights: &[f64], rng: &mut R) -> Result<usize, ProgramError> {
    let total: f64 = weights.iter().sum();
    if weights.is_empty() || total <= 0.0 {
        return Err(ProgramError::DegenerateWeights(String::new()));
    }
    if weights.len() == 1 {
        return Ok(0);
    }
    let mut x = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if x < *w {
            return Ok(i);
        }
        x -= w;
    }
    // rounding: last arc with positive weight
    Ok(weights.iter().rposition(|w| *w > 0.0).unwrap_or(0))
}
