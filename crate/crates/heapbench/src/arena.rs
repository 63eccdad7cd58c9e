//! Node storage and the common heap machinery shared by every structure.
//!
//! Nodes live in a slab owned by an [`Arena`]; heaps inside one arena are
//! lightweight root-list structures, which is what makes meld O(1) while
//! keeping [`Handle`]s (slot index + generation) valid across melds.
//! Distinct arenas are fully independent and can be used from distinct
//! threads; a single arena and its heaps require exclusive access.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::analysis::{classify_index_type1, Color};
use crate::key::Key;

/// Hard cap on live nodes per arena, enforced by the adversary builders.
pub const NODE_BUDGET: usize = 1 << 26;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum HeapError {
    #[error("unknown structure kind `{0}`")]
    UnknownStructure(String),
    #[error("duplicate item id {0}")]
    DuplicateId(u64),
    #[error("key value must be finite")]
    NonFiniteKey,
    #[error("delta must be positive and finite")]
    BadDelta,
    #[error("dead or foreign handle")]
    DeadHandle,
    #[error("heap no longer exists (melded or invalid id)")]
    DeadHeap,
    #[error("operation `{op}` not supported by structure `{kind}`")]
    Unsupported { op: &'static str, kind: String },
    #[error("cannot meld heaps of different kind or policy")]
    KindMismatch,
    #[error("instance would need {needed} nodes, over the {budget} budget")]
    NodeBudget { needed: u128, budget: usize },
    #[error("bad parameter: {0}")]
    BadParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StructureKind {
    /// One-tree binomial queue: a balanced single-elimination tournament.
    Tournament,
    /// One-pass binomial queue: single maximum pairing at delete-min.
    BqOnePass,
    /// Classical eager binomial queue: at most one half tree per rank.
    BqEager,
    /// Type-1 rank-pairing heap.
    Rp1,
    /// Type-2 rank-pairing heap.
    Rp2,
    /// Weakened rule: bounded positive rank differences, ancestor-only
    /// rank decreases. For counterexample experiments.
    VariantA(u32),
    /// Weakened type-1 rule: at most `d` rank-decrease steps per key
    /// decrease. For counterexample experiments.
    Capped(u32),
    /// Two-pass pairing heap, benchmark baseline.
    Pairing,
}

impl StructureKind {
    pub fn supports_decrease_key(self) -> bool {
        matches!(
            self,
            StructureKind::Rp1
                | StructureKind::Rp2
                | StructureKind::VariantA(_)
                | StructureKind::Capped(_)
        )
    }

    pub fn default_policy(self) -> MatchPolicy {
        match self {
            StructureKind::Rp1 | StructureKind::Capped(_) => MatchPolicy::DisassemblyFirst,
            _ => MatchPolicy::Unrestricted,
        }
    }
}

impl fmt::Display for StructureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructureKind::Tournament => write!(f, "tournament"),
            StructureKind::BqOnePass => write!(f, "bq-onepass"),
            StructureKind::BqEager => write!(f, "bq-eager"),
            StructureKind::Rp1 => write!(f, "rp1"),
            StructureKind::Rp2 => write!(f, "rp2"),
            StructureKind::VariantA(b) => write!(f, "varianta:{b}"),
            StructureKind::Capped(d) => write!(f, "capped:{d}"),
            StructureKind::Pairing => write!(f, "pairing"),
        }
    }
}

impl FromStr for StructureKind {
    type Err = HeapError;

    fn from_str(s: &str) -> Result<Self, HeapError> {
        let bad = || HeapError::UnknownStructure(s.to_string());
        if let Some(b) = s.strip_prefix("varianta:") {
            let b: u32 = b.parse().map_err(|_| bad())?;
            if b < 1 {
                return Err(HeapError::BadParameter("varianta needs b >= 1".into()));
            }
            return Ok(StructureKind::VariantA(b));
        }
        if let Some(d) = s.strip_prefix("capped:") {
            return Ok(StructureKind::Capped(d.parse().map_err(|_| bad())?));
        }
        match s {
            "tournament" => Ok(StructureKind::Tournament),
            "bq-onepass" => Ok(StructureKind::BqOnePass),
            "bq-eager" => Ok(StructureKind::BqEager),
            "rp1" => Ok(StructureKind::Rp1),
            "rp2" => Ok(StructureKind::Rp2),
            "pairing" => Ok(StructureKind::Pairing),
            _ => Err(bad()),
        }
    }
}

/// Restriction on which half trees the delete-min bucket pass prefers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MatchPolicy {
    /// Root-list order; the disassembly outputs are processed last.
    #[default]
    Unrestricted,
    /// Process red-rooted half trees first.
    RedFirst,
    /// Process the disassembly outputs first, in production order.
    DisassemblyFirst,
}

impl fmt::Display for MatchPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatchPolicy::Unrestricted => write!(f, "unrestricted"),
            MatchPolicy::RedFirst => write!(f, "red-first"),
            MatchPolicy::DisassemblyFirst => write!(f, "disassembly-first"),
        }
    }
}

impl FromStr for MatchPolicy {
    type Err = HeapError;

    fn from_str(s: &str) -> Result<Self, HeapError> {
        match s {
            "unrestricted" => Ok(MatchPolicy::Unrestricted),
            "red-first" => Ok(MatchPolicy::RedFirst),
            "disassembly-first" => Ok(MatchPolicy::DisassemblyFirst),
            _ => Err(HeapError::BadParameter(format!("unknown policy `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HeapConfig {
    pub kind: StructureKind,
    pub policy: MatchPolicy,
    /// Track ids and reject duplicates; costs a hash map per heap.
    pub check_ids: bool,
}

impl HeapConfig {
    pub fn new(kind: StructureKind) -> Self {
        HeapConfig { kind, policy: kind.default_policy(), check_ids: false }
    }

    pub fn with_policy(mut self, policy: MatchPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_id_checks(mut self) -> Self {
        self.check_ids = true;
        self
    }
}

/// Stable external reference to a live item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Handle {
    pub(crate) index: u32,
    pub(crate) generation: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CostCounters {
    pub comparisons: u64,
    pub links: u64,
    pub rank_steps: u64,
}

impl CostCounters {
    fn add(&mut self, other: &CostCounters) {
        self.comparisons += other.comparisons;
        self.links += other.links;
        self.rank_steps += other.rank_steps;
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Node {
    pub key: Key,
    pub rank: i32,
    pub ord: Option<u32>,
    pub unord: Option<u32>,
    pub parent: Option<u32>,
    /// Next root in the circular root list; meaningful only for roots.
    pub next: u32,
    /// Set on a child joined to its parent by an unfair match (tournament).
    pub unfair: bool,
    pub live: bool,
    pub generation: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HeapId(pub(crate) u32);

#[derive(Debug, Clone)]
pub(crate) struct HeapState {
    pub kind: StructureKind,
    pub policy: MatchPolicy,
    pub head: Option<u32>,
    pub count: usize,
    pub num_roots: usize,
    pub max_root_rank: i32,
    pub counters: CostCounters,
    /// Eager mode: at most one tree per rank, indexed by rank.
    pub rank_table: Vec<Option<u32>>,
    pub ids: Option<HashMap<u64, u32>>,
    /// Number of unfair-flagged nodes (tournament potential).
    pub phi_unfair: u64,
    pub alive: bool,
}

/// A root match recorded for the analysis instrumentation.
#[derive(Debug, Clone, Copy)]
pub struct MatchEvent {
    pub rank: i32,
    pub fair: bool,
    /// Type-1 root colors of the two participants at match time.
    pub colors: Option<(Color, Color)>,
}

/// One iteration of the rank-decrease loop.
#[derive(Debug, Clone, Copy)]
pub struct CascadeStep {
    pub id: u64,
    pub was_yellow: bool,
    pub old_rank: i32,
    pub new_rank: i32,
}

/// Trace of the last mutating operation, for audits and tests.
#[derive(Debug, Clone, Default)]
pub struct OpReport {
    pub fair_matches: u64,
    pub unfair_matches: u64,
    pub matches: Vec<MatchEvent>,
    pub cascade: Vec<CascadeStep>,
    /// Rank of the root removed by the last delete-min.
    pub deleted_rank: Option<i32>,
    /// Half trees handed to the matching phase of the last delete-min.
    pub trees_processed: usize,
}

impl OpReport {
    fn clear(&mut self) {
        self.fair_matches = 0;
        self.unfair_matches = 0;
        self.matches.clear();
        self.cascade.clear();
        self.deleted_rank = None;
        self.trees_processed = 0;
    }
}

/// Result of a minimum deletion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Item {
    pub id: u64,
    pub value: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Arena {
    pub(crate) slots: Vec<Node>,
    free: Vec<u32>,
    pub(crate) heaps: Vec<HeapState>,
    /// Arena-wide counters; the per-heap counters sum to these.
    pub counters: CostCounters,
    pub(crate) report: OpReport,
    total_inserts: u64,
    total_deleted: u64,
    /// Test hook: plant a bug that skips the min-pointer update on
    /// decrease-key, for differential-shrinking mutation tests.
    #[doc(hidden)]
    pub plant_skip_min_update_bug: bool,
}

impl Arena {
    pub fn new() -> Self {
        Arena::default()
    }

    pub fn make_heap(&mut self, config: HeapConfig) -> HeapId {
        self.heaps.push(HeapState {
            kind: config.kind,
            policy: config.policy,
            head: None,
            count: 0,
            num_roots: 0,
            max_root_rank: -1,
            counters: CostCounters::default(),
            rank_table: Vec::new(),
            ids: if config.check_ids { Some(HashMap::new()) } else { None },
            phi_unfair: 0,
            alive: true,
        });
        HeapId(self.heaps.len() as u32 - 1)
    }

    pub fn live_nodes(&self) -> usize {
        self.slots.len() - self.free.len()
    }

    pub fn conservation_holds(&self) -> bool {
        self.total_inserts - self.total_deleted == self.live_nodes() as u64
    }

    pub fn last_op(&self) -> &OpReport {
        &self.report
    }

    pub(crate) fn heap(&self, h: HeapId) -> Result<&HeapState, HeapError> {
        self.heaps
            .get(h.0 as usize)
            .filter(|s| s.alive)
            .ok_or(HeapError::DeadHeap)
    }

    pub(crate) fn heap_mut(&mut self, h: HeapId) -> Result<&mut HeapState, HeapError> {
        self.heaps
            .get_mut(h.0 as usize)
            .filter(|s| s.alive)
            .ok_or(HeapError::DeadHeap)
    }

    pub fn kind(&self, h: HeapId) -> Result<StructureKind, HeapError> {
        Ok(self.heap(h)?.kind)
    }

    pub fn policy(&self, h: HeapId) -> Result<MatchPolicy, HeapError> {
        Ok(self.heap(h)?.policy)
    }

    pub fn len(&self, h: HeapId) -> Result<usize, HeapError> {
        Ok(self.heap(h)?.count)
    }

    pub fn is_empty(&self, h: HeapId) -> Result<bool, HeapError> {
        Ok(self.heap(h)?.count == 0)
    }

    pub fn counters(&self, h: HeapId) -> Result<CostCounters, HeapError> {
        Ok(self.heap(h)?.counters)
    }

    pub fn num_roots(&self, h: HeapId) -> Result<usize, HeapError> {
        Ok(self.heap(h)?.num_roots)
    }

    pub fn max_root_rank(&self, h: HeapId) -> Result<i32, HeapError> {
        Ok(self.heap(h)?.max_root_rank)
    }

    /// Current tournament potential: unfair-match edges in the structure.
    pub fn phi_unfair(&self, h: HeapId) -> Result<u64, HeapError> {
        Ok(self.heap(h)?.phi_unfair)
    }

    // ---- node plumbing ----------------------------------------------------

    pub(crate) fn resolve(&self, x: Handle) -> Result<u32, HeapError> {
        match self.slots.get(x.index as usize) {
            Some(n) if n.live && n.generation == x.generation => Ok(x.index),
            _ => Err(HeapError::DeadHandle),
        }
    }

    pub fn handle_of(&self, index: u32) -> Handle {
        Handle { index, generation: self.slots[index as usize].generation }
    }

    /// Handle of the live item with this id, by full traversal.
    pub fn handle_by_id(&self, h: HeapId, id: u64) -> Option<Handle> {
        let mut stack: Vec<u32> = self
            .roots(h)
            .ok()?
            .into_iter()
            .map(|r| self.resolve(r).expect("root handle"))
            .collect();
        while let Some(x) = stack.pop() {
            let n = self.node(x);
            if n.key.id == id && !n.key.tombstone {
                return Some(self.handle_of(x));
            }
            stack.extend([n.ord, n.unord].into_iter().flatten());
        }
        None
    }

    /// Key of a live handle.
    pub fn key(&self, x: Handle) -> Result<Key, HeapError> {
        Ok(self.slots[self.resolve(x)? as usize].key)
    }

    pub fn is_live(&self, x: Handle) -> bool {
        self.resolve(x).is_ok()
    }

    /// Next root after `x` in the circular root list; `x` must be a root.
    pub fn next_root(&self, x: Handle) -> Handle {
        self.handle_of(self.slots[x.index as usize].next)
    }

    /// Handles of all roots, minimum first in circular order.
    pub fn roots(&self, h: HeapId) -> Result<Vec<Handle>, HeapError> {
        let head = self.heap(h)?.head;
        Ok(self.collect_roots(head).into_iter().map(|i| self.handle_of(i)).collect())
    }

    pub(crate) fn node(&self, i: u32) -> &Node {
        &self.slots[i as usize]
    }

    pub(crate) fn node_mut(&mut self, i: u32) -> &mut Node {
        &mut self.slots[i as usize]
    }

    pub(crate) fn rank_of(&self, i: Option<u32>) -> i32 {
        i.map_or(-1, |i| self.slots[i as usize].rank)
    }

    pub(crate) fn is_root(&self, i: u32) -> bool {
        self.slots[i as usize].parent.is_none()
    }

    pub(crate) fn alloc(&mut self, key: Key) -> u32 {
        if let Some(i) = self.free.pop() {
            let n = &mut self.slots[i as usize];
            n.key = key;
            n.rank = 0;
            n.ord = None;
            n.unord = None;
            n.parent = None;
            n.next = i;
            n.unfair = false;
            n.live = true;
            i
        } else {
            let i = self.slots.len() as u32;
            self.slots.push(Node {
                key,
                rank: 0,
                ord: None,
                unord: None,
                parent: None,
                next: i,
                unfair: false,
                live: true,
                generation: 0,
            });
            i
        }
    }

    pub(crate) fn free_node(&mut self, i: u32) {
        let n = &mut self.slots[i as usize];
        debug_assert!(n.live);
        n.live = false;
        n.generation = n.generation.wrapping_add(1);
        n.ord = None;
        n.unord = None;
        n.parent = None;
        self.free.push(i);
    }

    pub(crate) fn cmp_nodes(&mut self, h: HeapId, a: u32, b: u32) -> Ordering {
        self.counters.comparisons += 1;
        self.heaps[h.0 as usize].counters.comparisons += 1;
        self.slots[a as usize].key.cmp(&self.slots[b as usize].key)
    }

    pub(crate) fn bump_rank_step(&mut self, h: HeapId) {
        self.counters.rank_steps += 1;
        self.heaps[h.0 as usize].counters.rank_steps += 1;
    }

    // ---- root list --------------------------------------------------------

    /// Add a parentless tree to the root list, keeping the minimum first.
    /// One comparison unless the list was empty.
    pub(crate) fn push_root(&mut self, h: HeapId, x: u32) {
        let state = &mut self.heaps[h.0 as usize];
        state.num_roots += 1;
        let rank = self.slots[x as usize].rank;
        if rank > state.max_root_rank {
            state.max_root_rank = rank;
        }
        match state.head {
            None => {
                state.head = Some(x);
                self.slots[x as usize].next = x;
            }
            Some(head) => {
                let after = self.slots[head as usize].next;
                self.slots[x as usize].next = after;
                self.slots[head as usize].next = x;
                if self.cmp_nodes(h, x, head) == Ordering::Less {
                    self.heaps[h.0 as usize].head = Some(x);
                }
            }
        }
    }

    /// All roots in circular order starting at the head.
    pub(crate) fn collect_roots(&self, head: Option<u32>) -> Vec<u32> {
        let mut out = Vec::new();
        let Some(head) = head else { return out };
        let mut cur = head;
        loop {
            out.push(cur);
            cur = self.slots[cur as usize].next;
            if cur == head {
                break;
            }
        }
        out
    }

    /// Rebuild the circular root list from `trees`, scanning for the
    /// minimum (`trees.len() - 1` comparisons).
    pub(crate) fn rebuild_roots(&mut self, h: HeapId, trees: &[u32]) {
        let state = &mut self.heaps[h.0 as usize];
        state.num_roots = trees.len();
        state.max_root_rank = -1;
        if trees.is_empty() {
            state.head = None;
            return;
        }
        let mut max_rank = -1;
        for (i, &t) in trees.iter().enumerate() {
            let next = trees[(i + 1) % trees.len()];
            let n = &mut self.slots[t as usize];
            n.next = next;
            if n.rank > max_rank {
                max_rank = n.rank;
            }
        }
        self.heaps[h.0 as usize].max_root_rank = max_rank;
        let mut min = trees[0];
        for &t in &trees[1..] {
            if self.cmp_nodes(h, t, min) == Ordering::Less {
                min = t;
            }
        }
        self.heaps[h.0 as usize].head = Some(min);
    }

    // ---- linking ----------------------------------------------------------

    /// Match the roots of two half trees (one comparison, one link): the
    /// ordered subtree of the winner becomes the unordered subtree of the
    /// loser, and the loser becomes the ordered child of the winner. The
    /// new child's rank is the winner's post-match rank minus one; an
    /// unfair match raises the winner to the larger of the two ranks.
    pub(crate) fn match_roots(&mut self, h: HeapId, a: u32, b: u32) -> u32 {
        debug_assert_ne!(a, b);
        let kind = self.heaps[h.0 as usize].kind;
        let ra = self.slots[a as usize].rank;
        let rb = self.slots[b as usize].rank;
        let fair = ra == rb;
        if kind == StructureKind::Rp1 || matches!(kind, StructureKind::Capped(_)) {
            let colors = (classify_index_type1(self, a), classify_index_type1(self, b));
            self.report.matches.push(MatchEvent { rank: ra.max(rb), fair, colors: Some(colors) });
        } else {
            self.report.matches.push(MatchEvent { rank: ra.max(rb), fair, colors: None });
        }
        let (w, l) = if self.cmp_nodes(h, a, b) == Ordering::Less { (a, b) } else { (b, a) };
        self.counters.links += 1;
        let state = &mut self.heaps[h.0 as usize];
        state.counters.links += 1;
        if fair {
            self.report.fair_matches += 1;
        } else {
            self.report.unfair_matches += 1;
        }
        let old_ord = self.slots[w as usize].ord;
        self.slots[l as usize].unord = old_ord;
        if let Some(c) = old_ord {
            self.slots[c as usize].parent = Some(l);
        }
        self.slots[w as usize].ord = Some(l);
        self.slots[l as usize].parent = Some(w);
        if kind != StructureKind::Pairing {
            let w_rank = if fair { ra + 1 } else { ra.max(rb) };
            self.slots[w as usize].rank = w_rank;
            self.slots[l as usize].rank = w_rank - 1;
            if !fair && kind == StructureKind::Tournament {
                self.slots[l as usize].unfair = true;
                self.heaps[h.0 as usize].phi_unfair += 1;
            }
        }
        w
    }

    /// Clear root-only state when a node becomes a root: refresh its rank
    /// from its ordered child and drop any unfair flag.
    pub(crate) fn make_root(&mut self, h: HeapId, x: u32) {
        self.slots[x as usize].parent = None;
        if self.heaps[h.0 as usize].kind != StructureKind::Pairing {
            let r = self.rank_of(self.slots[x as usize].ord) + 1;
            self.slots[x as usize].rank = r;
        }
        if self.slots[x as usize].unfair {
            self.slots[x as usize].unfair = false;
            self.heaps[h.0 as usize].phi_unfair -= 1;
        }
    }

    // ---- heap operations --------------------------------------------------

    pub fn insert(&mut self, h: HeapId, value: f64, id: u64) -> Result<Handle, HeapError> {
        if !value.is_finite() {
            return Err(HeapError::NonFiniteKey);
        }
        let state = self.heap(h)?;
        let kind = state.kind;
        if let Some(ids) = &state.ids {
            if ids.contains_key(&id) {
                return Err(HeapError::DuplicateId(id));
            }
        }
        self.report.clear();
        let x = self.alloc(Key::new(value, id));
        if let Some(ids) = &mut self.heaps[h.0 as usize].ids {
            ids.insert(id, x);
        }
        match kind {
            StructureKind::Tournament | StructureKind::Pairing => {
                let state = &mut self.heaps[h.0 as usize];
                match state.head {
                    None => {
                        state.head = Some(x);
                        state.num_roots = 1;
                        state.max_root_rank = 0;
                    }
                    Some(head) => {
                        let w = self.match_roots(h, head, x);
                        self.slots[w as usize].next = w;
                        let state = &mut self.heaps[h.0 as usize];
                        state.head = Some(w);
                        state.max_root_rank = self.slots[w as usize].rank;
                    }
                }
            }
            StructureKind::BqEager => crate::binomial::eager_insert(self, h, x),
            _ => self.push_root(h, x),
        }
        let state = &mut self.heaps[h.0 as usize];
        state.count += 1;
        self.total_inserts += 1;
        Ok(self.handle_of(x))
    }

    /// Minimum item, without comparing keys or mutating anything.
    pub fn find_min(&self, h: HeapId) -> Result<Option<Handle>, HeapError> {
        Ok(self.heap(h)?.head.map(|i| self.handle_of(i)))
    }

    pub fn delete_min(&mut self, h: HeapId) -> Result<Option<Item>, HeapError> {
        let state = self.heap(h)?;
        let kind = state.kind;
        let Some(head) = state.head else { return Ok(None) };
        self.report.clear();
        self.report.deleted_rank = Some(self.slots[head as usize].rank);
        let key = self.slots[head as usize].key;
        if let Some(ids) = &mut self.heaps[h.0 as usize].ids {
            ids.remove(&key.id);
        }
        match kind {
            StructureKind::Tournament => crate::tournament::delete_min(self, h, head),
            StructureKind::BqEager => crate::binomial::eager_delete_min(self, h, head),
            StructureKind::Pairing => crate::pairing::delete_min(self, h, head),
            _ => crate::binomial::one_pass_delete_min(self, h, head),
        }
        let state = &mut self.heaps[h.0 as usize];
        state.count -= 1;
        self.total_deleted += 1;
        Ok(Some(Item { id: key.id, value: key.value }))
    }

    /// Meld two heaps of the same kind and policy; both inputs are
    /// consumed and the combined heap is returned.
    pub fn meld(&mut self, h1: HeapId, h2: HeapId) -> Result<HeapId, HeapError> {
        if h1 == h2 {
            return Err(HeapError::KindMismatch);
        }
        let s1 = self.heap(h1)?;
        let s2 = self.heap(h2)?;
        if s1.kind != s2.kind || s1.policy != s2.policy {
            return Err(HeapError::KindMismatch);
        }
        let kind = s1.kind;
        self.report.clear();
        // Retire h2 into h1.
        let mut s2 = std::mem::replace(
            &mut self.heaps[h2.0 as usize],
            HeapState {
                kind,
                policy: MatchPolicy::Unrestricted,
                head: None,
                count: 0,
                num_roots: 0,
                max_root_rank: -1,
                counters: CostCounters::default(),
                rank_table: Vec::new(),
                ids: None,
                phi_unfair: 0,
                alive: false,
            },
        );
        {
            let s1 = &mut self.heaps[h1.0 as usize];
            s1.count += s2.count;
            s1.counters.add(&s2.counters);
            s1.phi_unfair += s2.phi_unfair;
            if s2.max_root_rank > s1.max_root_rank {
                s1.max_root_rank = s2.max_root_rank;
            }
        }
        if let Some(ids2) = s2.ids.take() {
            if let Some(ids1) = &mut self.heaps[h1.0 as usize].ids {
                for (id, idx) in ids2 {
                    if ids1.insert(id, idx).is_some() {
                        return Err(HeapError::DuplicateId(id));
                    }
                }
            }
        }
        match kind {
            StructureKind::Tournament | StructureKind::Pairing => {
                match (self.heaps[h1.0 as usize].head, s2.head) {
                    (_, None) => {}
                    (None, Some(b)) => {
                        self.heaps[h1.0 as usize].head = Some(b);
                        self.heaps[h1.0 as usize].num_roots = 1;
                    }
                    (Some(a), Some(b)) => {
                        let w = self.match_roots(h1, a, b);
                        self.slots[w as usize].next = w;
                        let s1 = &mut self.heaps[h1.0 as usize];
                        s1.head = Some(w);
                        s1.num_roots = 1;
                        s1.max_root_rank = self.slots[w as usize].rank;
                    }
                }
            }
            StructureKind::BqEager => crate::binomial::eager_meld(self, h1, &mut s2),
            _ => {
                // O(1) splice of the circular lists plus one comparison.
                match (self.heaps[h1.0 as usize].head, s2.head) {
                    (_, None) => {}
                    (None, Some(b)) => {
                        let s1 = &mut self.heaps[h1.0 as usize];
                        s1.head = Some(b);
                        s1.num_roots = s2.num_roots;
                    }
                    (Some(a), Some(b)) => {
                        let an = self.slots[a as usize].next;
                        let bn = self.slots[b as usize].next;
                        self.slots[a as usize].next = bn;
                        self.slots[b as usize].next = an;
                        self.heaps[h1.0 as usize].num_roots += s2.num_roots;
                        if self.cmp_nodes(h1, b, a) == Ordering::Less {
                            self.heaps[h1.0 as usize].head = Some(b);
                        }
                    }
                }
            }
        }
        Ok(h1)
    }

    pub fn decrease_key(&mut self, h: HeapId, x: Handle, delta: f64) -> Result<(), HeapError> {
        if delta <= 0.0 || !delta.is_finite() {
            return Err(HeapError::BadDelta);
        }
        let i = self.resolve(x)?;
        self.report.clear();
        crate::rp::rewrite_key(self, h, i, |k| k.value -= delta)
    }

    /// Delete an arbitrary item: tombstone its key (which orders below
    /// everything), restore order with the key-decrease machinery, then
    /// delete the minimum.
    pub fn delete(&mut self, h: HeapId, x: Handle) -> Result<(), HeapError> {
        let i = self.resolve(x)?;
        self.report.clear();
        crate::rp::rewrite_key(self, h, i, |k| k.tombstone = true)?;
        self.delete_min(h)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALL_KINDS: [StructureKind; 8] = [
        StructureKind::Tournament,
        StructureKind::BqOnePass,
        StructureKind::BqEager,
        StructureKind::Rp1,
        StructureKind::Rp2,
        StructureKind::VariantA(1),
        StructureKind::Capped(2),
        StructureKind::Pairing,
    ];

    fn heap(kind: StructureKind) -> (Arena, HeapId) {
        let mut arena = Arena::new();
        let h = arena.make_heap(HeapConfig::new(kind));
        (arena, h)
    }

    #[test]
    fn empty_heap_has_nothing() {
        let (arena, h) = heap(StructureKind::Rp2);
        assert_eq!(arena.len(h), Ok(0));
        assert_eq!(arena.find_min(h), Ok(None));
        let (arena, h) = heap(StructureKind::BqOnePass);
        assert_eq!(arena.num_roots(h), Ok(0));
    }

    #[test]
    fn unknown_structure_is_a_parse_error() {
        assert!("badkind".parse::<StructureKind>().is_err());
        assert!("varianta:0".parse::<StructureKind>().is_err());
        assert_eq!("capped:3".parse::<StructureKind>(), Ok(StructureKind::Capped(3)));
    }

    #[test]
    fn insert_and_find_min() {
        for kind in ALL_KINDS {
            let (mut arena, h) = heap(kind);
            let x = arena.insert(h, 5.0, 1).unwrap();
            assert_eq!(arena.find_min(h), Ok(Some(x)));

            let (mut arena, h) = heap(kind);
            for (id, v) in [3.0, 1.0, 2.0].iter().enumerate() {
                arena.insert(h, *v, id as u64).unwrap();
            }
            let min = arena.find_min(h).unwrap().unwrap();
            assert_eq!(arena.key(min).unwrap().value, 1.0);
        }
    }

    #[test]
    fn duplicate_id_is_rejected() {
        let mut arena = Arena::new();
        let h = arena.make_heap(HeapConfig::new(StructureKind::Rp2).with_id_checks());
        arena.insert(h, 5.0, 1).unwrap();
        assert!(matches!(arena.insert(h, 6.0, 1), Err(HeapError::DuplicateId(1))));
    }

    #[test]
    fn find_min_is_free_and_idempotent() {
        for kind in ALL_KINDS {
            let (mut arena, h) = heap(kind);
            for id in 0..20 {
                arena.insert(h, (id as f64 * 37.0) % 11.0, id).unwrap();
            }
            let before = arena.counters;
            let a = arena.find_min(h).unwrap();
            let b = arena.find_min(h).unwrap();
            assert_eq!(a, b);
            assert_eq!(arena.counters, before, "find_min must not compare");
        }
    }

    #[test]
    fn delete_min_empty_and_singleton() {
        for kind in ALL_KINDS {
            let (mut arena, h) = heap(kind);
            assert_eq!(arena.delete_min(h), Ok(None));
            arena.insert(h, 1.5, 9).unwrap();
            let item = arena.delete_min(h).unwrap().unwrap();
            assert_eq!((item.id, item.value), (9, 1.5));
            assert_eq!(arena.len(h), Ok(0));
            assert_eq!(arena.delete_min(h), Ok(None));
        }
    }

    #[test]
    fn drain_is_sorted_for_every_kind() {
        for kind in ALL_KINDS {
            let (mut arena, h) = heap(kind);
            // A fixed pseudo-random permutation of 1..=100.
            let mut vals: Vec<u64> = (1..=100).collect();
            let mut s = 0x9e3779b97f4a7c15u64;
            for i in (1..vals.len()).rev() {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                vals.swap(i, (s % (i as u64 + 1)) as usize);
            }
            for (id, v) in vals.iter().enumerate() {
                arena.insert(h, *v as f64, id as u64).unwrap();
            }
            let mut out = Vec::new();
            while let Some(item) = arena.delete_min(h).unwrap() {
                out.push(item.value as u64);
            }
            assert_eq!(out, (1..=100).collect::<Vec<_>>(), "kind {kind}");
        }
    }

    #[test]
    fn meld_identity_and_merge() {
        for kind in ALL_KINDS {
            let mut arena = Arena::new();
            let h1 = arena.make_heap(HeapConfig::new(kind));
            let h2 = arena.make_heap(HeapConfig::new(kind));
            arena.insert(h2, 1.0, 1).unwrap();
            arena.insert(h2, 3.0, 3).unwrap();
            let m = arena.meld(h1, h2).unwrap();
            assert_eq!(arena.len(m), Ok(2));

            let h3 = arena.make_heap(HeapConfig::new(kind));
            arena.insert(h3, 2.0, 2).unwrap();
            arena.insert(h3, 4.0, 4).unwrap();
            let m = arena.meld(m, h3).unwrap();
            let mut out = Vec::new();
            while let Some(item) = arena.delete_min(m).unwrap() {
                out.push(item.id);
            }
            assert_eq!(out, vec![1, 2, 3, 4], "kind {kind}");
            assert!(matches!(arena.len(h3), Err(HeapError::DeadHeap)));
        }
    }

    #[test]
    fn meld_requires_matching_kinds() {
        let mut arena = Arena::new();
        let h1 = arena.make_heap(HeapConfig::new(StructureKind::Rp2));
        let h2 = arena.make_heap(HeapConfig::new(StructureKind::BqOnePass));
        assert!(matches!(arena.meld(h1, h2), Err(HeapError::KindMismatch)));
    }

    #[test]
    fn decrease_key_on_root_touches_no_links() {
        for kind in [StructureKind::Rp1, StructureKind::Rp2, StructureKind::VariantA(2)] {
            let (mut arena, h) = heap(kind);
            let x = arena.insert(h, 5.0, 1).unwrap();
            arena.insert(h, 7.0, 2).unwrap();
            let links = arena.counters.links;
            arena.decrease_key(h, x, 1.0).unwrap();
            assert_eq!(arena.counters.links, links);
            assert_eq!(arena.key(x).unwrap().value, 4.0);
        }
    }

    #[test]
    fn decrease_key_can_take_over_the_min() {
        let (mut arena, h) = heap(StructureKind::Rp2);
        for id in 0..32 {
            arena.insert(h, 100.0 + id as f64, id).unwrap();
        }
        arena.delete_min(h).unwrap();
        let target = arena.handle_by_id(h, 20).expect("live");
        arena.decrease_key(h, target, 1000.0).unwrap();
        assert_eq!(arena.find_min(h), Ok(Some(target)));
    }

    #[test]
    fn decrease_key_rejects_bad_args() {
        let (mut arena, h) = heap(StructureKind::Rp1);
        let x = arena.insert(h, 5.0, 1).unwrap();
        assert!(matches!(arena.decrease_key(h, x, 0.0), Err(HeapError::BadDelta)));
        let (mut arena2, h2) = heap(StructureKind::Tournament);
        let y = arena2.insert(h2, 5.0, 1).unwrap();
        assert!(matches!(arena2.decrease_key(h2, y, 1.0), Err(HeapError::Unsupported { .. })));
    }

    #[test]
    fn delete_matches_delete_min_for_the_min() {
        let (mut arena, h) = heap(StructureKind::Rp2);
        let mut handles = Vec::new();
        for id in 0..10 {
            handles.push(arena.insert(h, (id as f64 * 7.0) % 10.0, id).unwrap());
        }
        let min = arena.find_min(h).unwrap().unwrap();
        arena.delete(h, min).unwrap();
        assert_eq!(arena.len(h), Ok(9));
        assert!(!arena.is_live(min));
        assert!(matches!(arena.delete(h, min), Err(HeapError::DeadHandle)));
    }

    #[test]
    fn delete_internal_node_keeps_order() {
        let (mut arena, h) = heap(StructureKind::Rp2);
        for id in 0..10u64 {
            arena.insert(h, ((id * 37) % 10) as f64, id).unwrap();
        }
        arena.delete_min(h).unwrap(); // force structure
        let victim = arena.handle_by_id(h, 4).expect("live");
        let victim_val = arena.key(victim).unwrap().value;
        arena.delete(h, victim).unwrap();
        let mut out = Vec::new();
        while let Some(item) = arena.delete_min(h).unwrap() {
            out.push(item.value);
        }
        let mut sorted = out.clone();
        sorted.sort_by(f64::total_cmp);
        assert_eq!(out, sorted);
        assert!(!out.contains(&victim_val) || out.iter().filter(|&&v| v == victim_val).count() < 2);
    }

    #[test]
    fn conservation_across_ops() {
        let mut arena = Arena::new();
        let h1 = arena.make_heap(HeapConfig::new(StructureKind::Rp1));
        let h2 = arena.make_heap(HeapConfig::new(StructureKind::Rp1));
        for id in 0..50 {
            arena.insert(h1, id as f64, id).unwrap();
            arena.insert(h2, 1000.0 + id as f64, 100 + id).unwrap();
        }
        let m = arena.meld(h1, h2).unwrap();
        for _ in 0..30 {
            arena.delete_min(m).unwrap();
        }
        assert!(arena.conservation_holds());
        assert_eq!(arena.len(m), Ok(70));
    }

    #[test]
    fn fair_match_ranks() {
        // Two rank-2 perfect trees; match makes the smaller root rank 3.
        let (mut arena, h) = heap(StructureKind::BqEager);
        for id in 0..8 {
            arena.insert(h, if id == 0 { 3.0 } else { 7.0 + id as f64 }, id).unwrap();
        }
        // Eager mode has carried 8 singletons into one rank-3 tree
        // through matches of ranks 0, 1 and 2.
        let root = arena.resolve(arena.find_min(h).unwrap().unwrap()).unwrap();
        assert_eq!(arena.node(root).rank, 3);
        assert_eq!(arena.node(root).key.value, 3.0);
        let ord = arena.node(root).ord.unwrap();
        assert_eq!(arena.node(ord).rank, 2);
    }

    #[test]
    fn fair_match_of_singletons() {
        let (mut arena, h) = heap(StructureKind::BqEager);
        arena.insert(h, 1.0, 1).unwrap();
        arena.insert(h, 2.0, 2).unwrap();
        let root = arena.resolve(arena.find_min(h).unwrap().unwrap()).unwrap();
        assert_eq!(arena.node(root).rank, 1);
        assert_eq!(subtree_count(&arena, root), 2);
    }

    #[test]
    fn unfair_match_takes_the_max_rank_and_counts() {
        // Third insert into a tournament matches rank 0 against rank 1:
        // unfair, and the winner keeps the larger rank.
        let (mut arena, h) = heap(StructureKind::Tournament);
        arena.insert(h, 3.0, 0).unwrap();
        arena.insert(h, 5.0, 1).unwrap();
        assert_eq!(arena.phi_unfair(h), Ok(0));
        arena.insert(h, 4.0, 2).unwrap();
        assert_eq!(arena.phi_unfair(h), Ok(1));
        let root = arena.resolve(arena.find_min(h).unwrap().unwrap()).unwrap();
        assert_eq!(arena.node(root).rank, 1);
        assert_eq!(arena.node(root).key.value, 3.0);
        // The incremental unfair-edge count always equals a from-scratch
        // audit, including across a consolidating delete-min.
        for id in 3..12 {
            arena.insert(h, id as f64, id).unwrap();
        }
        arena.delete_min(h).unwrap();
        assert_eq!(arena.num_roots(h), Ok(1));
        let mut scratch = 0u64;
        let root = arena.resolve(arena.find_min(h).unwrap().unwrap()).unwrap();
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            let n = arena.node(x);
            if n.unfair {
                scratch += 1;
            }
            stack.extend([n.ord, n.unord].into_iter().flatten());
        }
        assert_eq!(arena.phi_unfair(h).unwrap(), scratch);
    }

    fn subtree_count(arena: &Arena, x: u32) -> usize {
        let mut n = 0;
        let mut stack = vec![x];
        while let Some(x) = stack.pop() {
            n += 1;
            let node = arena.node(x);
            stack.extend([node.ord, node.unord].into_iter().flatten());
        }
        n
    }
}
