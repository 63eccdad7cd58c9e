//! Differential testing: a sorted-multiset reference heap with identical
//! operation contracts, a trace-level comparator with greedy shrinking,
//! and a brute-force enumerator for small instances.

use std::collections::{BTreeSet, HashMap};

use crate::arena::{Arena, Handle, HeapConfig, HeapError, HeapId, MatchPolicy, StructureKind};
use crate::key::Key;
use crate::rp::{audit_rank_rule, audit_structure, RankRule};
use crate::trace::{Trace, TraceOp};

/// Reference implementation: a sorted set of keys. O(log n) per op via
/// `BTreeSet`, semantics identical to the heap-core contracts.
#[derive(Debug, Clone, Default)]
pub struct OracleHeap {
    set: BTreeSet<Key>,
    by_id: HashMap<u64, Key>,
    supports_decrease: bool,
}

impl OracleHeap {
    pub fn new(kind: StructureKind) -> Self {
        OracleHeap {
            set: BTreeSet::new(),
            by_id: HashMap::new(),
            supports_decrease: kind.supports_decrease_key(),
        }
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    pub fn insert(&mut self, value: f64, id: u64) -> Result<(), HeapError> {
        if !value.is_finite() {
            return Err(HeapError::NonFiniteKey);
        }
        if self.by_id.contains_key(&id) {
            return Err(HeapError::DuplicateId(id));
        }
        let k = Key::new(value, id);
        self.by_id.insert(id, k);
        self.set.insert(k);
        Ok(())
    }

    pub fn find_min(&self) -> Option<(u64, f64)> {
        self.set.first().map(|k| (k.id, k.value))
    }

    pub fn delete_min(&mut self) -> Option<(u64, f64)> {
        let k = self.set.pop_first()?;
        self.by_id.remove(&k.id);
        Some((k.id, k.value))
    }

    pub fn meld(&mut self, mut other: OracleHeap) -> Result<(), HeapError> {
        // Move the smaller side so melds cost O(min(|a|, |b|) log n).
        if other.by_id.len() > self.by_id.len() {
            std::mem::swap(&mut self.set, &mut other.set);
            std::mem::swap(&mut self.by_id, &mut other.by_id);
        }
        for (id, k) in other.by_id {
            if self.by_id.insert(id, k).is_some() {
                return Err(HeapError::DuplicateId(id));
            }
            self.set.insert(k);
        }
        Ok(())
    }

    fn take(&mut self, id: u64) -> Result<Key, HeapError> {
        if !self.supports_decrease {
            return Err(HeapError::Unsupported { op: "decrease_key/delete", kind: "oracle".into() });
        }
        let k = self.by_id.remove(&id).ok_or(HeapError::DeadHandle)?;
        self.set.remove(&k);
        Ok(k)
    }

    pub fn decrease_key(&mut self, id: u64, delta: f64) -> Result<(), HeapError> {
        if delta <= 0.0 || !delta.is_finite() {
            return Err(HeapError::BadDelta);
        }
        let mut k = self.take(id)?;
        k.value -= delta;
        self.by_id.insert(id, k);
        self.set.insert(k);
        Ok(())
    }

    pub fn delete(&mut self, id: u64) -> Result<(), HeapError> {
        self.take(id)?;
        Ok(())
    }
}

/// Comparable result of one trace op: only observable outputs count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OpOutcome {
    Unit,
    /// find-min / delete-min result (id; `None` on empty heap).
    Min(Option<u64>),
    /// Error kind, compared by name.
    Error(&'static str),
}

pub fn error_kind(e: &HeapError) -> &'static str {
    match e {
        HeapError::UnknownStructure(_) => "unknown-structure",
        HeapError::DuplicateId(_) => "duplicate-id",
        HeapError::NonFiniteKey => "non-finite-key",
        HeapError::BadDelta => "bad-delta",
        HeapError::DeadHandle => "dead-handle",
        HeapError::DeadHeap => "dead-heap",
        HeapError::Unsupported { .. } => "unsupported",
        HeapError::KindMismatch => "kind-mismatch",
        HeapError::NodeBudget { .. } => "node-budget",
        HeapError::BadParameter(_) => "bad-parameter",
    }
}

/// Trace executor over the real structures: named heaps in one arena,
/// with id → handle maps for decrease-key and delete.
#[derive(Debug, Clone)]
pub struct Executor {
    pub arena: Arena,
    config: HeapConfig,
    heaps: HashMap<String, HeapId>,
    handles: HashMap<String, HashMap<u64, Handle>>,
}

impl Executor {
    pub fn new(kind: StructureKind, policy: MatchPolicy) -> Self {
        Executor {
            arena: Arena::new(),
            config: HeapConfig::new(kind).with_policy(policy),
            heaps: HashMap::new(),
            handles: HashMap::new(),
        }
    }

    /// Names of heaps that are currently live.
    pub fn live_heaps(&self) -> Vec<(String, HeapId)> {
        let mut v: Vec<(String, HeapId)> = self
            .heaps
            .iter()
            .filter(|&(_, &h)| self.arena.len(h).is_ok())
            .map(|(n, &h)| (n.clone(), h))
            .collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn heap_id(&self, name: &str) -> Option<HeapId> {
        self.heaps.get(name).copied()
    }

    fn heap(&self, name: &str) -> Result<HeapId, HeapError> {
        self.heaps.get(name).copied().ok_or(HeapError::DeadHeap)
    }

    pub fn apply(&mut self, op: &TraceOp) -> OpOutcome {
        match self.try_apply(op) {
            Ok(o) => o,
            Err(e) => OpOutcome::Error(error_kind(&e)),
        }
    }

    fn try_apply(&mut self, op: &TraceOp) -> Result<OpOutcome, HeapError> {
        match op {
            TraceOp::Make { heap } => {
                let id = self.arena.make_heap(self.config);
                self.heaps.insert(heap.clone(), id);
                self.handles.insert(heap.clone(), HashMap::new());
                Ok(OpOutcome::Unit)
            }
            TraceOp::Insert { heap, id, value } => {
                let h = self.heap(heap)?;
                if self.handles[heap].contains_key(id) {
                    return Err(HeapError::DuplicateId(*id));
                }
                let handle = self.arena.insert(h, *value, *id)?;
                self.handles.get_mut(heap).expect("made heap").insert(*id, handle);
                Ok(OpOutcome::Unit)
            }
            TraceOp::FindMin { heap } => {
                let h = self.heap(heap)?;
                let min = self.arena.find_min(h)?;
                Ok(OpOutcome::Min(match min {
                    None => None,
                    Some(m) => Some(self.arena.key(m)?.id),
                }))
            }
            TraceOp::DeleteMin { heap } => {
                let h = self.heap(heap)?;
                let item = self.arena.delete_min(h)?;
                if let Some(item) = item {
                    self.handles.get_mut(heap).expect("made heap").remove(&item.id);
                }
                Ok(OpOutcome::Min(item.map(|i| i.id)))
            }
            TraceOp::DecreaseKey { heap, id, delta } => {
                let h = self.heap(heap)?;
                let x = *self.handles[heap].get(id).ok_or(HeapError::DeadHandle)?;
                self.arena.decrease_key(h, x, *delta)?;
                Ok(OpOutcome::Unit)
            }
            TraceOp::Delete { heap, id } => {
                let h = self.heap(heap)?;
                let x = *self.handles[heap].get(id).ok_or(HeapError::DeadHandle)?;
                self.arena.delete(h, x)?;
                self.handles.get_mut(heap).expect("made heap").remove(id);
                Ok(OpOutcome::Unit)
            }
            TraceOp::Meld { heap, other } => {
                let h1 = self.heap(heap)?;
                let h2 = self.heap(other)?;
                self.arena.meld(h1, h2)?;
                self.heaps.remove(other);
                let mut moved = self.handles.remove(other).unwrap_or_default();
                let kept = self.handles.get_mut(heap).expect("made heap");
                if moved.len() > kept.len() {
                    std::mem::swap(kept, &mut moved);
                }
                kept.extend(moved);
                Ok(OpOutcome::Unit)
            }
        }
    }
}

/// Oracle-side trace executor with the same outcome surface.
#[derive(Debug, Clone)]
pub struct OracleExecutor {
    kind: StructureKind,
    heaps: HashMap<String, OracleHeap>,
}

impl OracleExecutor {
    pub fn new(kind: StructureKind) -> Self {
        OracleExecutor { kind, heaps: HashMap::new() }
    }

    pub fn heap(&self, name: &str) -> Option<&OracleHeap> {
        self.heaps.get(name)
    }

    pub fn apply(&mut self, op: &TraceOp) -> OpOutcome {
        match self.try_apply(op) {
            Ok(o) => o,
            Err(e) => OpOutcome::Error(error_kind(&e)),
        }
    }

    fn get(&mut self, name: &str) -> Result<&mut OracleHeap, HeapError> {
        self.heaps.get_mut(name).ok_or(HeapError::DeadHeap)
    }

    fn try_apply(&mut self, op: &TraceOp) -> Result<OpOutcome, HeapError> {
        match op {
            TraceOp::Make { heap } => {
                self.heaps.insert(heap.clone(), OracleHeap::new(self.kind));
                Ok(OpOutcome::Unit)
            }
            TraceOp::Insert { heap, id, value } => {
                self.get(heap)?.insert(*value, *id)?;
                Ok(OpOutcome::Unit)
            }
            TraceOp::FindMin { heap } => {
                Ok(OpOutcome::Min(self.get(heap)?.find_min().map(|(id, _)| id)))
            }
            TraceOp::DeleteMin { heap } => {
                Ok(OpOutcome::Min(self.get(heap)?.delete_min().map(|(id, _)| id)))
            }
            TraceOp::DecreaseKey { heap, id, delta } => {
                self.get(heap)?.decrease_key(*id, *delta)?;
                Ok(OpOutcome::Unit)
            }
            TraceOp::Delete { heap, id } => {
                self.get(heap)?.delete(*id)?;
                Ok(OpOutcome::Unit)
            }
            TraceOp::Meld { heap, other } => {
                let o = self.heaps.remove(other).ok_or(HeapError::DeadHeap)?;
                self.get(heap)?.meld(o)?;
                Ok(OpOutcome::Unit)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Mismatch {
    pub op_index: usize,
    pub expected: OpOutcome,
    pub got: OpOutcome,
    /// Minimal failing trace found by greedy shrinking.
    pub shrunk: Trace,
}

fn first_mismatch(
    trace: &Trace,
    kind: StructureKind,
    policy: MatchPolicy,
    plant_bug: bool,
) -> Option<(usize, OpOutcome, OpOutcome)> {
    let mut real = Executor::new(kind, policy);
    real.arena.plant_skip_min_update_bug = plant_bug;
    let mut oracle = OracleExecutor::new(kind);
    for (i, op) in trace.ops.iter().enumerate() {
        let got = real.apply(op);
        let expected = oracle.apply(op);
        if got != expected {
            return Some((i, expected, got));
        }
    }
    None
}

/// Run a trace against a structure and the oracle, comparing every
/// observable result. On mismatch, shrink to a minimal failing trace by
/// truncating at the mismatch and then greedily dropping ops.
pub fn differential_run(
    trace: &Trace,
    kind: StructureKind,
    policy: MatchPolicy,
) -> Result<(), Mismatch> {
    differential_run_with(trace, kind, policy, false)
}

#[doc(hidden)]
pub fn differential_run_with(
    trace: &Trace,
    kind: StructureKind,
    policy: MatchPolicy,
    plant_bug: bool,
) -> Result<(), Mismatch> {
    let Some((i, expected, got)) = first_mismatch(trace, kind, policy, plant_bug) else {
        return Ok(());
    };
    let mut shrunk = Trace {
        kind_hint: trace.kind_hint,
        ops: trace.ops[..=i].to_vec(),
    };
    // Greedy pass, newest ops first: drop any op whose removal keeps the
    // trace mismatching.
    let mut j = shrunk.ops.len();
    while j > 0 {
        j -= 1;
        let mut candidate = shrunk.clone();
        candidate.ops.remove(j);
        if first_mismatch(&candidate, kind, policy, plant_bug).is_some() {
            shrunk = candidate;
        }
    }
    let (op_index, expected, got) = match first_mismatch(&shrunk, kind, policy, plant_bug) {
        Some(m) => m,
        None => (i, expected, got),
    };
    Err(Mismatch { op_index, expected, got, shrunk })
}

#[derive(Debug, Clone, Default)]
pub struct ExhaustiveReport {
    pub sequences: u64,
    pub failures: Vec<String>,
}

/// Enumerate every op sequence of length ≤ `max_len` over at most 3
/// items (fixed values, half-integer decrease deltas) and check oracle
/// agreement plus the structural and rank audits after every op.
pub fn exhaustive_small(kind: StructureKind, max_len: usize) -> ExhaustiveReport {
    const ITEMS: [(u64, f64); 3] = [(1, 10.0), (2, 20.0), (3, 30.0)];
    const DELTAS: [f64; 2] = [4.5, 25.5];
    let rule = RankRule::for_kind(kind);
    let mut report = ExhaustiveReport::default();

    struct Frame {
        real: Executor,
        oracle: OracleExecutor,
        inserted: [bool; 3],
        path: Vec<TraceOp>,
    }

    fn candidate_ops(f: &Frame, kind: StructureKind) -> Vec<TraceOp> {
        let h = "h".to_string();
        let mut ops = Vec::new();
        for (slot, &(id, value)) in ITEMS.iter().enumerate() {
            if !f.inserted[slot] {
                ops.push(TraceOp::Insert { heap: h.clone(), id, value });
                break; // items are interchangeable; insert them in order
            }
        }
        ops.push(TraceOp::DeleteMin { heap: h.clone() });
        if kind.supports_decrease_key() {
            for &(id, _) in &ITEMS {
                if f.oracle.heap("h").is_some_and(|o| o.by_id.contains_key(&id)) {
                    for d in DELTAS {
                        ops.push(TraceOp::DecreaseKey { heap: h.clone(), id, delta: d });
                    }
                }
            }
        }
        ops
    }

    fn describe(path: &[TraceOp], op: &TraceOp, why: &str) -> String {
        let ops: Vec<String> = path.iter().chain([op]).map(|o| format!("{o:?}")).collect();
        format!("{why} after [{}]", ops.join(", "))
    }

    let mut root = Frame {
        real: Executor::new(kind, kind.default_policy()),
        oracle: OracleExecutor::new(kind),
        inserted: [false; 3],
        path: Vec::new(),
    };
    let make = TraceOp::Make { heap: "h".into() };
    root.real.apply(&make);
    root.oracle.apply(&make);

    let mut stack = vec![root];
    while let Some(f) = stack.pop() {
        report.sequences += 1;
        if f.path.len() >= max_len {
            continue;
        }
        for op in candidate_ops(&f, kind) {
            let mut real = f.real.clone();
            let mut oracle = f.oracle.clone();
            let got = real.apply(&op);
            let expected = oracle.apply(&op);
            if got != expected {
                report.failures.push(describe(
                    &f.path,
                    &op,
                    &format!("outcome {got:?} != oracle {expected:?}"),
                ));
                continue;
            }
            let h = real.heap_id("h").expect("made heap");
            for v in audit_structure(&real.arena, h).expect("live heap") {
                report.failures.push(describe(&f.path, &op, &format!("structure: {v:?}")));
            }
            for v in audit_rank_rule(&real.arena, h, rule).expect("live heap") {
                report.failures.push(describe(&f.path, &op, &format!("rank rule: {v:?}")));
            }
            let mut inserted = f.inserted;
            if let TraceOp::Insert { id, .. } = op {
                inserted[(id - 1) as usize] = true;
            }
            let mut path = f.path.clone();
            path.push(op);
            stack.push(Frame { real, oracle, inserted, path });
        }
    }
    report
}
