//! The replayable text trace format: one op per line over named heaps,
//! with `#` comments and a versioned header.
//!
//! ```text
//! heapbench-trace v1 kind=rp2
//! make h
//! insert h 1 5.25
//! deletemin h
//! ```

use std::fmt;
use std::str::FromStr;

use crate::arena::StructureKind;

#[derive(Debug, Clone, PartialEq)]
pub enum TraceOp {
    Make { heap: String },
    Insert { heap: String, id: u64, value: f64 },
    FindMin { heap: String },
    DeleteMin { heap: String },
    DecreaseKey { heap: String, id: u64, delta: f64 },
    Delete { heap: String, id: u64 },
    Meld { heap: String, other: String },
}

impl TraceOp {
    pub fn heap(&self) -> &str {
        match self {
            TraceOp::Make { heap }
            | TraceOp::Insert { heap, .. }
            | TraceOp::FindMin { heap }
            | TraceOp::DeleteMin { heap }
            | TraceOp::DecreaseKey { heap, .. }
            | TraceOp::Delete { heap, .. }
            | TraceOp::Meld { heap, .. } => heap,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TraceOp::Make { .. } => "make",
            TraceOp::Insert { .. } => "insert",
            TraceOp::FindMin { .. } => "findmin",
            TraceOp::DeleteMin { .. } => "deletemin",
            TraceOp::DecreaseKey { .. } => "decreasekey",
            TraceOp::Delete { .. } => "delete",
            TraceOp::Meld { .. } => "meld",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    /// Structure kind the trace was generated for, if any; a replay may
    /// override it.
    pub kind_hint: Option<StructureKind>,
    pub ops: Vec<TraceOp>,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
#[error("trace parse error at line {line}: {msg}")]
pub struct TraceParseError {
    pub line: usize,
    pub msg: String,
}

impl Trace {
    pub fn new(kind_hint: Option<StructureKind>) -> Self {
        Trace { kind_hint, ops: Vec::new() }
    }

    pub fn parse(text: &str) -> Result<Trace, TraceParseError> {
        let err = |line: usize, msg: &str| TraceParseError { line, msg: msg.to_string() };
        let mut trace = None;
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let trace = match &mut trace {
                Some(t) => t,
                None => {
                    // First significant line must be the header.
                    let mut tok = line.split_whitespace();
                    if tok.next() != Some("heapbench-trace") || tok.next() != Some("v1") {
                        return Err(err(lineno, "expected header `heapbench-trace v1`"));
                    }
                    let kind_hint = match tok.next() {
                        None => None,
                        Some(k) => {
                            let k = k.strip_prefix("kind=").ok_or_else(|| {
                                err(lineno, "expected `kind=<structure>` after version")
                            })?;
                            Some(StructureKind::from_str(k).map_err(|e| err(lineno, &e.to_string()))?)
                        }
                    };
                    trace = Some(Trace::new(kind_hint));
                    continue;
                }
            };
            let mut tok = line.split_whitespace();
            let op = tok.next().expect("nonempty line has a token");
            let mut heap = || {
                tok.next().map(str::to_string).ok_or_else(|| err(lineno, "missing heap name"))
            };
            let op = match op {
                "make" => TraceOp::Make { heap: heap()? },
                "findmin" => TraceOp::FindMin { heap: heap()? },
                "deletemin" => TraceOp::DeleteMin { heap: heap()? },
                "meld" => TraceOp::Meld { heap: heap()?, other: heap()? },
                "insert" | "decreasekey" | "delete" => {
                    let heap = heap()?;
                    let id: u64 = tok
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| err(lineno, "expected decimal u64 id"))?;
                    match op {
                        "delete" => TraceOp::Delete { heap, id },
                        _ => {
                            let x: f64 = tok
                                .next()
                                .and_then(|s| s.parse().ok())
                                .filter(|x: &f64| x.is_finite())
                                .ok_or_else(|| err(lineno, "expected finite decimal real"))?;
                            if op == "insert" {
                                TraceOp::Insert { heap, id, value: x }
                            } else {
                                TraceOp::DecreaseKey { heap, id, delta: x }
                            }
                        }
                    }
                }
                other => return Err(err(lineno, &format!("unknown op `{other}`"))),
            };
            if tok.next().is_some() {
                return Err(err(lineno, "trailing tokens"));
            }
            trace.ops.push(op);
        }
        trace.ok_or_else(|| err(1, "empty trace (missing header)"))
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind_hint {
            Some(k) => writeln!(f, "heapbench-trace v1 kind={k}")?,
            None => writeln!(f, "heapbench-trace v1")?,
        }
        for op in &self.ops {
            match op {
                TraceOp::Make { heap } => writeln!(f, "make {heap}")?,
                TraceOp::Insert { heap, id, value } => writeln!(f, "insert {heap} {id} {value}")?,
                TraceOp::FindMin { heap } => writeln!(f, "findmin {heap}")?,
                TraceOp::DeleteMin { heap } => writeln!(f, "deletemin {heap}")?,
                TraceOp::DecreaseKey { heap, id, delta } => {
                    writeln!(f, "decreasekey {heap} {id} {delta}")?
                }
                TraceOp::Delete { heap, id } => writeln!(f, "delete {heap} {id}")?,
                TraceOp::Meld { heap, other } => writeln!(f, "meld {heap} {other}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = "heapbench-trace v1 kind=rp2\n\
                    make h\n\
                    insert h 1 5.25\n\
                    insert h 2 0.30000000000000004\n\
                    findmin h\n\
                    decreasekey h 1 0.5\n\
                    make g\n\
                    insert g 3 -7\n\
                    meld h g\n\
                    delete h 3\n\
                    deletemin h\n";
        let t = Trace::parse(text).unwrap();
        assert_eq!(t.ops.len(), 10);
        assert_eq!(Trace::parse(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn comments_and_blanks_ignored() {
        let t = Trace::parse("# c\n\nheapbench-trace v1\nmake h # trailing\n").unwrap();
        assert_eq!(t.kind_hint, None);
        assert_eq!(t.ops, vec![TraceOp::Make { heap: "h".into() }]);
    }

    #[test]
    fn errors_name_the_line() {
        let e = Trace::parse("heapbench-trace v1\nmake h\nbogus h\n").unwrap_err();
        assert_eq!(e.line, 3);
        let e = Trace::parse("heapbench-trace v1\ninsert h nope 1\n").unwrap_err();
        assert_eq!(e.line, 2);
        let e = Trace::parse("make h\n").unwrap_err();
        assert_eq!(e.line, 1);
    }
}
