//! Trace execution with per-op metrics, optional invariant checking, and
//! CSV output.

use std::str::FromStr;

use crate::analysis::{snapshot, OpMetrics, Scheme};
use crate::arena::{HeapError, HeapId, MatchPolicy, StructureKind};
use crate::oracle::{Executor, OpOutcome};
use crate::rp::{audit_rank_rule, audit_structure, RankRule};
use crate::trace::{Trace, TraceOp, TraceParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CheckMode {
    #[default]
    Off,
    /// Root-list sanity only (O(#roots) per op).
    Cheap,
    /// Full structural + rank audits and from-scratch potential
    /// recomputation after every op.
    Full,
}

impl FromStr for CheckMode {
    type Err = HeapError;

    fn from_str(s: &str) -> Result<Self, HeapError> {
        match s {
            "off" => Ok(CheckMode::Off),
            "cheap" => Ok(CheckMode::Cheap),
            "full" => Ok(CheckMode::Full),
            _ => Err(HeapError::BadParameter(format!("unknown check mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub kind: StructureKind,
    pub policy: MatchPolicy,
    pub check: CheckMode,
    pub scheme: Option<Scheme>,
}

impl RunOptions {
    pub fn new(kind: StructureKind) -> Self {
        RunOptions { kind, policy: kind.default_policy(), check: CheckMode::Off, scheme: None }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Parse(#[from] TraceParseError),
    #[error("op {op_index} ({op}): audit failed: {detail}")]
    Audit { op_index: usize, op: String, detail: String },
    #[error("op {op_index} ({op}): {kind} error")]
    Op { op_index: usize, op: String, kind: &'static str },
    #[error(transparent)]
    Heap(#[from] HeapError),
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub rows: Vec<OpMetrics>,
}

fn phi(ex: &Executor, h: Option<HeapId>, scheme: Option<Scheme>) -> Option<i64> {
    let (h, scheme) = (h?, scheme?);
    snapshot(&ex.arena, h, scheme, None).ok().map(|s| s.value)
}

fn cheap_audit(ex: &Executor, h: HeapId) -> Result<(), String> {
    let arena = &ex.arena;
    let head = arena.find_min(h).map_err(|e| e.to_string())?;
    let Some(head) = head else { return Ok(()) };
    let head_key = arena.key(head).map_err(|e| e.to_string())?;
    let state_roots = arena.num_roots(h).map_err(|e| e.to_string())?;
    let mut seen = 0usize;
    let mut cur = head;
    loop {
        let k = arena.key(cur).map_err(|e| e.to_string())?;
        if k < head_key {
            return Err(format!("root id {} below head", k.id));
        }
        seen += 1;
        if seen > state_roots {
            return Err("root list longer than num_roots".into());
        }
        let next = ex.arena.next_root(cur);
        if next == head {
            break;
        }
        cur = next;
    }
    if seen != state_roots {
        return Err(format!("root list has {seen} entries, num_roots says {state_roots}"));
    }
    Ok(())
}

/// Execute a trace, producing one metrics row per op. Op errors abort
/// the run; delete-min on an empty heap is not an error.
pub fn run_trace(trace: &Trace, opts: RunOptions) -> Result<RunReport, RunError> {
    let mut ex = Executor::new(opts.kind, opts.policy);
    let mut rows = Vec::with_capacity(trace.ops.len());
    for (op_index, op) in trace.ops.iter().enumerate() {
        let h_before = ex.heap_id(op.heap());
        let other = match op {
            TraceOp::Meld { other, .. } => ex.heap_id(other),
            _ => None,
        };
        let n_before = h_before.map_or(0, |h| ex.arena.len(h).unwrap_or(0))
            + other.map_or(0, |h| ex.arena.len(h).unwrap_or(0));
        let phi_before = match (phi(&ex, h_before, opts.scheme), phi(&ex, other, opts.scheme)) {
            (Some(a), Some(b)) => Some(a + b),
            (a, b) => a.or(b),
        };
        let before = ex.arena.counters;
        let outcome = ex.apply(op);
        if let OpOutcome::Error(kind) = outcome {
            return Err(RunError::Op { op_index, op: op.name().into(), kind });
        }
        let after = ex.arena.counters;
        let h = ex.heap_id(op.heap());
        let phi_after = phi(&ex, h, opts.scheme);
        rows.push(OpMetrics {
            op_index,
            op: op.name().into(),
            heap: op.heap().into(),
            n_before,
            comparisons: after.comparisons - before.comparisons,
            links: after.links - before.links,
            rank_steps: after.rank_steps - before.rank_steps,
            halftrees_after: h.map_or(0, |h| ex.arena.num_roots(h).unwrap_or(0)),
            max_rank: h.map_or(-1, |h| ex.arena.max_root_rank(h).unwrap_or(-1)),
            phi_before,
            phi_after,
        });
        if let Some(h) = h {
            match opts.check {
                CheckMode::Off => {}
                CheckMode::Cheap => {
                    if let Err(detail) = cheap_audit(&ex, h) {
                        return Err(RunError::Audit { op_index, op: op.name().into(), detail });
                    }
                }
                CheckMode::Full => {
                    let fail = |detail: String| RunError::Audit {
                        op_index,
                        op: op.name().into(),
                        detail,
                    };
                    if let Some(v) = audit_structure(&ex.arena, h)?.first() {
                        return Err(fail(format!("{v:?}")));
                    }
                    let rule = RankRule::for_kind(opts.kind);
                    if let Some(v) = audit_rank_rule(&ex.arena, h, rule)?.first() {
                        return Err(fail(format!("{v:?}")));
                    }
                    if opts.scheme == Some(Scheme::TournamentUnfair) {
                        let scratch = phi_after.unwrap_or(0);
                        let incr = ex.arena.phi_unfair(h)? as i64;
                        if scratch != incr {
                            return Err(fail(format!(
                                "incremental potential {incr} != recomputed {scratch}"
                            )));
                        }
                    }
                }
            }
        }
    }
    Ok(RunReport { rows })
}

/// Serialize metrics rows as CSV; the potential columns appear only when
/// an analysis scheme was selected.
pub fn write_csv(rows: &[OpMetrics], with_phi: bool, out: &mut impl std::io::Write) -> std::io::Result<()> {
    write!(out, "op_index,op,heap,n_before,comparisons,links,rank_steps,halftrees_after,max_rank")?;
    writeln!(out, "{}", if with_phi { ",phi_before,phi_after" } else { "" })?;
    for r in rows {
        write!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.op_index,
            r.op,
            r.heap,
            r.n_before,
            r.comparisons,
            r.links,
            r.rank_steps,
            r.halftrees_after,
            r.max_rank
        )?;
        if with_phi {
            let cell = |v: Option<i64>| v.map_or(String::new(), |v| v.to_string());
            writeln!(out, ",{},{}", cell(r.phi_before), cell(r.phi_after))?;
        } else {
            writeln!(out)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::Scheme;
    use crate::workload::gen_sort;

    #[test]
    fn sort_runs_clean_under_full_checks() {
        let trace = gen_sort(1000, 7);
        for kind in [
            StructureKind::Tournament,
            StructureKind::BqOnePass,
            StructureKind::BqEager,
            StructureKind::Rp1,
            StructureKind::Rp2,
        ] {
            let mut opts = RunOptions::new(kind);
            opts.check = CheckMode::Full;
            opts.scheme = Scheme::default_for(kind);
            let report = run_trace(&trace, opts).unwrap_or_else(|e| panic!("{kind}: {e}"));
            assert_eq!(report.rows.len(), trace.ops.len());
        }
    }

    #[test]
    fn empty_deletemin_is_a_row_not_an_error() {
        let trace = Trace::parse("heapbench-trace v1 kind=rp2\nmake a\ndeletemin a\n").unwrap();
        let report = run_trace(&trace, RunOptions::new(StructureKind::Rp2)).unwrap();
        assert_eq!(report.rows.len(), 2);
        assert_eq!(report.rows[1].op, "deletemin");
        assert_eq!(report.rows[1].n_before, 0);
    }

    #[test]
    fn csv_is_deterministic() {
        let trace = gen_sort(500, 3);
        let render = || {
            let mut opts = RunOptions::new(StructureKind::Rp1);
            opts.scheme = Some(Scheme::Type1Color);
            let report = run_trace(&trace, opts).unwrap();
            let mut buf = Vec::new();
            write_csv(&report.rows, true, &mut buf).unwrap();
            buf
        };
        assert_eq!(render(), render());
    }

    #[test]
    fn check_mode_parses() {
        assert_eq!("off".parse::<CheckMode>(), Ok(CheckMode::Off));
        assert_eq!("cheap".parse::<CheckMode>(), Ok(CheckMode::Cheap));
        assert_eq!("full".parse::<CheckMode>(), Ok(CheckMode::Full));
        assert!("sometimes".parse::<CheckMode>().is_err());
    }
}
