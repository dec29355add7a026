//! Strategy library files.
//!
//! ```text
//! library <name>
//! select <method> <weight>         top-level choice among methods
//! confirm <p>                      probability of each confirmation repeat
//! method <name> [key=value ...]
//! node <id> <OperationKind> [param=value | param=?] ...
//! choice <id>
//! arc <from> <to> <weight>
//! entry <id>
//! exit <id>
//! end
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. `param=?` declares
//! an unbound slot filled when the method is instantiated. Operation nodes
//! have at most one successor (arc weight 1); arcs leaving a choice point
//! must sum to 1.

use std::fmt::Write as _;

use thiserror::Error;

use super::program::{Arc, CognitiveProgram, Node, NodeKind, ProgramError, WEIGHT_TOLERANCE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LibraryError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("method `{method}`: {source}")]
    Program {
        method: String,
        #[source]
        source: ProgramError,
    },
    #[error("select references unknown method `{0}`")]
    UnknownMethod(String),
    #[error("select weights sum to {0}")]
    SelectSum(f64),
    #[error("confirm probability {0} outside [0, 1]")]
    Confirm(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrategyLibrary {
    pub name: String,
    /// Top-level method choice: (method name, weight).
    pub select: Vec<(String, f64)>,
    pub confirm: f64,
    pub methods: Vec<CognitiveProgram>,
}

/// Shipped library. Weights are uniform placeholders.
pub const DEFAULT_LIBRARY: &str = "\
library default
select divide 0.2
select gist-divide 0.2
select alternate 0.2
select coarse 0.2
select gist-alternate 0.2
confirm 0.5

method divide
node d DivideAndConquer part=?
entry d
exit d
end

method gist-divide
node g GlobalGist coverage=4
node d DivideAndConquer part=?
arc g d 1
entry g
exit d
end

method alternate
choice c
node af AlternatingFixation part=? reps=2
node av AlternatingView part=? reps=2
arc c af 0.5
arc c av 0.5
entry c
exit af
exit av
end

method coarse
node c2f CoarseToFine part=? passes=3
entry c2f
exit c2f
end

method gist-alternate
node g GlobalGist coverage=4
choice c
node af AlternatingFixation part=? reps=2
node av AlternatingView part=? reps=2
arc g c 1
arc c af 0.5
arc c av 0.5
entry g
exit af
exit av
end
";

impl Default for StrategyLibrary {
    fn default() -> Self {
        parse_library(DEFAULT_LIBRARY).expect("shipped library is valid")
    }
}

impl StrategyLibrary {
    pub fn method(&self, name: &str) -> Option<&CognitiveProgram> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn validate(&self) -> Result<(), LibraryError> {
        for m in &self.methods {
            m.validate().map_err(|source| LibraryError::Program {
                method: m.name.clone(),
                source,
            })?;
        }
        for (name, w) in &self.select {
            if self.method(name).is_none() {
                return Err(LibraryError::UnknownMethod(name.clone()));
            }
            if !(0.0..=1.0).contains(w) {
                return Err(LibraryError::Program {
                    method: name.clone(),
                    source: ProgramError::WeightRange(*w),
                });
            }
        }
        let sum: f64 = self.select.iter().map(|(_, w)| w).sum();
        if !self.select.is_empty() && (sum - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(LibraryError::SelectSum(sum));
        }
        if !(0.0..=1.0).contains(&self.confirm) {
            return Err(LibraryError::Confirm(self.confirm));
        }
        Ok(())
    }
}

pub fn write_program(out: &mut String, p: &CognitiveProgram) {
    let _ = write!(out, "method {}", p.name);
    for (k, v) in &p.attributes {
        let _ = write!(out, " {k}={v}");
    }
    out.push('\n');
    for n in &p.nodes {
        match &n.kind {
            NodeKind::Choice => {
                let _ = writeln!(out, "choice {}", n.id);
            }
            NodeKind::Op { kind, params } => {
                let _ = write!(out, "node {} {}", n.id, kind);
                for prm in params {
                    let _ = write!(out, " {}={}", prm.name, prm.value.as_deref().unwrap_or("?"));
                }
                out.push('\n');
            }
        }
    }
    for a in &p.arcs {
        let _ = writeln!(out, "arc {} {} {}", a.from, a.to, a.weight);
    }
    let _ = writeln!(out, "entry {}", p.entry);
    for e in &p.exits {
        let _ = writeln!(out, "exit {e}");
    }
    out.push_str("end\n");
}

pub fn write_library(lib: &StrategyLibrary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "library {}", lib.name);
    for (m, w) in &lib.select {
        let _ = writeln!(out, "select {m} {w}");
    }
    let _ = writeln!(out, "confirm {}", lib.confirm);
    for m in &lib.methods {
        out.push('\n');
        write_program(&mut out, m);
    }
    out
}

fn bad(line: usize, msg: impl Into<String>) -> LibraryError {
    LibraryError::Parse {
        line,
        msg: msg.into(),
    }
}

fn weight(tok: &str, line: usize) -> Result<f64, LibraryError> {
    match tok.parse::<f64>() {
        Ok(w) if w.is_finite() => Ok(w),
        _ => Err(bad(line, format!("bad weight {tok:?}"))),
    }
}

fn key_value(tok: &str, line: usize) -> Result<(String, String), LibraryError> {
    match tok.split_once('=') {
        Some((k, v)) if !k.is_empty() && !v.is_empty() => Ok((k.to_string(), v.to_string())),
        _ => Err(bad(line, format!("expected key=value, got {tok:?}"))),
    }
}

/// Parses and validates a library file. Files holding only methods are
/// accepted; their select list is empty.
pub fn parse_library(text: &str) -> Result<StrategyLibrary, LibraryError> {
    let mut lib = StrategyLibrary {
        name: String::new(),
        select: Vec::new(),
        confirm: 0.0,
        methods: Vec::new(),
    };
    let mut current: Option<CognitiveProgram> = None;
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let arity = |k: usize| {
            if f.len() == k {
                Ok(())
            } else {
                Err(bad(n, format!("`{}` takes {} fields", f[0], k - 1)))
            }
        };
        match (f[0], current.as_mut()) {
            ("library", None) => {
                arity(2)?;
                lib.name = f[1].to_string();
            }
            ("select", None) => {
                arity(3)?;
                lib.select.push((f[1].to_string(), weight(f[2], n)?));
            }
            ("confirm", None) => {
                arity(2)?;
                lib.confirm = weight(f[1], n)?;
            }
            ("method", None) => {
                if f.len() < 2 {
                    return Err(bad(n, "method needs a name"));
                }
                let mut p = CognitiveProgram::new(f[1]);
                for tok in &f[2..] {
                    let (k, v) = key_value(tok, n)?;
                    p.attributes.insert(k, v);
                }
                current = Some(p);
            }
            ("node", Some(p)) => {
                if f.len() < 3 {
                    return Err(bad(n, "node needs an id and an operation"));
                }
                let kind = f[2].parse().map_err(|e: String| bad(n, e))?;
                let mut node = Node::op(f[1], kind);
                for tok in &f[3..] {
                    let (k, v) = key_value(tok, n)?;
                    node = node.with_param(&k, (v != "?").then_some(v.as_str()));
                }
                p.nodes.push(node);
            }
            ("choice", Some(p)) => {
                arity(2)?;
                p.nodes.push(Node::choice(f[1]));
            }
            ("arc", Some(p)) => {
                arity(4)?;
                p.arcs.push(Arc {
                    from: f[1].to_string(),
                    to: f[2].to_string(),
                    weight: weight(f[3], n)?,
                });
            }
            ("entry", Some(p)) => {
                arity(2)?;
                p.entry = f[1].to_string();
            }
            ("exit", Some(p)) => {
                arity(2)?;
                p.exits.push(f[1].to_string());
            }
            ("end", Some(_)) => {
                arity(1)?;
                let p = current.take().expect("inside method");
                if lib.method(&p.name).is_some() {
                    return Err(bad(n, format!("duplicate method {:?}", p.name)));
                }
                lib.methods.push(p);
            }
            (kw, Some(_)) => return Err(bad(n, format!("`{kw}` not allowed inside a method"))),
            (kw, None) => return Err(bad(n, format!("`{kw}` not allowed outside a method"))),
        }
    }
    if current.is_some() {
        return Err(bad(text.lines().count(), "missing `end`"));
    }
    lib.validate()?;
    Ok(lib)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::program::OperationKind;

    #[test]
    fn default_library_loads_and_round_trips() {
        let lib = StrategyLibrary::default();
        assert_eq!(lib.methods.len(), 5);
        assert_eq!(lib.confirm, 0.5);
        let alt = lib.method("alternate").unwrap();
        assert_eq!(alt.unbound().len(), 2);
        let text = write_library(&lib);
        assert_eq!(parse_library(&text).unwrap(), lib);
        assert_eq!(write_library(&parse_library(&text).unwrap()), text);
    }

    #[test]
    fn grammar_errors_carry_lines() {
        let bad_kind = "method m\nnode a Juggle\nentry a\nend\n";
        assert_eq!(
            parse_library(bad_kind).unwrap_err(),
            LibraryError::Parse {
                line: 2,
                msg: "unknown operation kind \"Juggle\"".into()
            }
        );
        let bad_sum = "method m\nchoice c\nnode a GlobalGist\nnode b GlobalGist\narc c a 0.5\narc c b 0.6\nentry c\nend\n";
        assert!(matches!(
            parse_library(bad_sum),
            Err(LibraryError::Program {
                source: ProgramError::WeightSum { .. },
                ..
            })
        ));
        let unknown = "library x\nselect nothing 1\n";
        assert_eq!(
            parse_library(unknown).unwrap_err(),
            LibraryError::UnknownMethod("nothing".into())
        );
        assert!(parse_library("method m\nnode a GlobalGist\nentry a\n").is_err());
    }

    #[test]
    fn params_parse() {
        let lib = parse_library("method m k=v\nnode a AlternatingFixation part=? reps=2\nentry a\nexit a\nend\n").unwrap();
        let m = &lib.methods[0];
        assert_eq!(m.attributes.get("k").map(String::as_str), Some("v"));
        let a = m.node("a").unwrap();
        assert_eq!(a.operation(), Some(OperationKind::AlternatingFixation));
        assert_eq!(a.param("reps"), Some("2"));
        assert_eq!(m.unbound(), vec![("a".to_string(), "part".to_string())]);
    }
}
