//! Node classifications and potential functions behind the amortized
//! analyses, exposed as pure from-scratch audits, plus the budget checker
//! that turns instrumented traces into pass/fail amortized reports.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::arena::{Arena, HeapError, HeapId, StructureKind};

/// Type-1 node colors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Color {
    Green,
    Yellow,
    Red,
}

/// Type-2 node classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Class2 {
    Good,
    Bad,
    Root,
}

/// Node's children have rank differences 1 and 1.
fn is_11(arena: &Arena, x: u32) -> bool {
    let n = arena.node(x);
    n.rank - arena.rank_of(n.ord) == 1 && n.rank - arena.rank_of(n.unord) == 1
}

/// Type-1 color of a node. Roots are yellow when childless or when their
/// child is a 1,1-node, red otherwise (never green). A non-root is green
/// if it is a leaf, or if it and both children are 1,1-nodes; yellow if
/// it is a 0,1-node whose 0-child is a 1,1-node; red otherwise.
pub(crate) fn classify_index_type1(arena: &Arena, x: u32) -> Color {
    let n = arena.node(x);
    if n.parent.is_none() {
        return match n.ord {
            None => Color::Yellow,
            Some(c) if is_11(arena, c) => Color::Yellow,
            Some(_) => Color::Red,
        };
    }
    if n.ord.is_none() && n.unord.is_none() {
        return Color::Green;
    }
    let d_ord = n.rank - arena.rank_of(n.ord);
    let d_unord = n.rank - arena.rank_of(n.unord);
    let children_11 =
        [n.ord, n.unord].into_iter().flatten().all(|c| is_11(arena, c));
    if d_ord == 1 && d_unord == 1 && children_11 {
        return Color::Green;
    }
    let zero_child = if d_ord == 0 && d_unord == 1 {
        n.ord
    } else if d_unord == 0 && d_ord == 1 {
        n.unord
    } else {
        None
    };
    match zero_child {
        Some(c) if is_11(arena, c) => Color::Yellow,
        _ => Color::Red,
    }
}

/// Type-2 classification: bad iff a non-root whose ordered child sits at
/// rank difference two or more (a missing ordered child reads rank −1, so
/// a rank ≥ 1 node with no ordered child is bad).
pub(crate) fn classify_index_type2(arena: &Arena, x: u32) -> Class2 {
    let n = arena.node(x);
    if n.parent.is_none() {
        Class2::Root
    } else if n.rank - arena.rank_of(n.ord) >= 2 {
        Class2::Bad
    } else {
        Class2::Good
    }
}

/// Potential schemes, one per amortized analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Φ = number of unfair-match edges in the structure.
    TournamentUnfair,
    /// Φ = number of half trees.
    OnepassTreecount,
    /// Φ = Σ rank + {0 good child, 1 bad child, 2 root}.
    Type2GoodBad,
    /// Φ = Σ rank + {0 green/yellow child, 2 yellow root, 4 red}.
    Type1Color,
    /// Φ = Σ rank + {0, 2, 4, 6} for green/yellow child, stale yellow
    /// root, red child or fresh root, stale red root.
    Type1FreshStale,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Scheme::TournamentUnfair => "tournament-unfair",
            Scheme::OnepassTreecount => "onepass-treecount",
            Scheme::Type2GoodBad => "type2-goodbad",
            Scheme::Type1Color => "type1-color",
            Scheme::Type1FreshStale => "type1-freshstale",
        };
        write!(f, "{s}")
    }
}

impl FromStr for Scheme {
    type Err = HeapError;

    fn from_str(s: &str) -> Result<Self, HeapError> {
        match s {
            "tournament-unfair" => Ok(Scheme::TournamentUnfair),
            "onepass-treecount" => Ok(Scheme::OnepassTreecount),
            "type2-goodbad" => Ok(Scheme::Type2GoodBad),
            "type1-color" => Ok(Scheme::Type1Color),
            "type1-freshstale" => Ok(Scheme::Type1FreshStale),
            _ => Err(HeapError::BadParameter(format!("unknown analysis scheme `{s}`"))),
        }
    }
}

impl Scheme {
    /// The natural scheme for a structure kind, if any.
    pub fn default_for(kind: StructureKind) -> Option<Scheme> {
        match kind {
            StructureKind::Tournament => Some(Scheme::TournamentUnfair),
            StructureKind::BqOnePass => Some(Scheme::OnepassTreecount),
            StructureKind::Rp2 => Some(Scheme::Type2GoodBad),
            StructureKind::Rp1 => Some(Scheme::Type1Color),
            _ => None,
        }
    }
}

/// Per-node label inside a [`PotentialSnapshot`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    Good,
    Bad,
    Root,
    Green,
    Yellow,
    Red,
    YellowRoot,
    RedRoot,
    FreshRoot,
    /// One half tree (tree-count scheme; attached to the root's id).
    HalfTree,
    /// Node joined to its parent by an unfair match.
    Unfair,
    /// Node contributing nothing under the scheme.
    Neutral,
}

#[derive(Debug, Clone)]
pub struct PotentialSnapshot {
    pub scheme: Scheme,
    pub value: i64,
    /// id → (rank, classification).
    pub per_node: HashMap<u64, (i32, NodeClass)>,
}

fn all_nodes(arena: &Arena, h: HeapId) -> Result<Vec<u32>, HeapError> {
    let state = arena.heap(h)?;
    let mut stack = arena.collect_roots(state.head);
    let mut out = Vec::with_capacity(state.count);
    while let Some(x) = stack.pop() {
        out.push(x);
        let n = arena.node(x);
        stack.extend([n.ord, n.unord].into_iter().flatten());
    }
    Ok(out)
}

/// Compute a potential snapshot from scratch by full traversal. For the
/// fresh/stale scheme, `fresh` lists the ids of currently fresh roots
/// (disassembly outputs of rank ≥ 1 that have not yet been matched);
/// between operations all roots are stale and `None` is appropriate.
pub fn snapshot(
    arena: &Arena,
    h: HeapId,
    scheme: Scheme,
    fresh: Option<&HashSet<u64>>,
) -> Result<PotentialSnapshot, HeapError> {
    let mut per_node = HashMap::new();
    let mut value = 0i64;
    match scheme {
        Scheme::TournamentUnfair => {
            for x in all_nodes(arena, h)? {
                let n = arena.node(x);
                if n.unfair {
                    per_node.insert(n.key.id, (n.rank, NodeClass::Unfair));
                    value += 1;
                }
            }
        }
        Scheme::OnepassTreecount => {
            let state = arena.heap(h)?;
            for r in arena.collect_roots(state.head) {
                let n = arena.node(r);
                per_node.insert(n.key.id, (n.rank, NodeClass::HalfTree));
                value += 1;
            }
        }
        Scheme::Type2GoodBad => {
            for x in all_nodes(arena, h)? {
                let n = arena.node(x);
                let (class, extra) = match classify_index_type2(arena, x) {
                    Class2::Good => (NodeClass::Good, 0),
                    Class2::Bad => (NodeClass::Bad, 1),
                    Class2::Root => (NodeClass::Root, 2),
                };
                per_node.insert(n.key.id, (n.rank, class));
                value += n.rank as i64 + extra;
            }
        }
        Scheme::Type1Color | Scheme::Type1FreshStale => {
            for x in all_nodes(arena, h)? {
                let n = arena.node(x);
                let is_root = n.parent.is_none();
                let color = classify_index_type1(arena, x);
                let is_fresh = is_root && fresh.is_some_and(|f| f.contains(&n.key.id));
                let (class, extra) = match (scheme, color, is_root, is_fresh) {
                    (_, Color::Green, false, _) => (NodeClass::Green, 0),
                    (_, Color::Yellow, false, _) => (NodeClass::Yellow, 0),
                    (Scheme::Type1Color, Color::Red, false, _) => (NodeClass::Red, 4),
                    (Scheme::Type1Color, Color::Yellow, true, _) => (NodeClass::YellowRoot, 2),
                    (Scheme::Type1Color, Color::Red, true, _) => (NodeClass::RedRoot, 4),
                    (Scheme::Type1FreshStale, Color::Red, false, _) => (NodeClass::Red, 4),
                    (Scheme::Type1FreshStale, _, true, true) => (NodeClass::FreshRoot, 4),
                    (Scheme::Type1FreshStale, Color::Yellow, true, false) => {
                        (NodeClass::YellowRoot, 2)
                    }
                    (Scheme::Type1FreshStale, Color::Red, true, false) => (NodeClass::RedRoot, 6),
                    _ => (NodeClass::Neutral, 0),
                };
                per_node.insert(n.key.id, (n.rank, class));
                value += n.rank as i64 + extra;
            }
        }
    }
    Ok(PotentialSnapshot { scheme, value, per_node })
}

/// Type-1 colors of every node, keyed by id.
pub fn color_map(arena: &Arena, h: HeapId) -> Result<HashMap<u64, Color>, HeapError> {
    let mut out = HashMap::new();
    for x in all_nodes(arena, h)? {
        out.insert(arena.node(x).key.id, classify_index_type1(arena, x));
    }
    Ok(out)
}

/// Type-2 classes of every node, keyed by id.
pub fn class2_map(arena: &Arena, h: HeapId) -> Result<HashMap<u64, Class2>, HeapError> {
    let mut out = HashMap::new();
    for x in all_nodes(arena, h)? {
        out.insert(arena.node(x).key.id, classify_index_type2(arena, x));
    }
    Ok(out)
}

/// Flat structural dump of a heap, for tests and exports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeInfo {
    pub id: u64,
    pub value: f64,
    pub rank: i32,
    pub parent: Option<u64>,
    pub ord: Option<u64>,
    pub unord: Option<u64>,
    pub unfair: bool,
}

pub fn dump_nodes(arena: &Arena, h: HeapId) -> Result<Vec<NodeInfo>, HeapError> {
    let id_of = |i: Option<u32>| i.map(|i| arena.node(i).key.id);
    let mut out: Vec<NodeInfo> = all_nodes(arena, h)?
        .into_iter()
        .map(|x| {
            let n = arena.node(x);
            NodeInfo {
                id: n.key.id,
                value: n.key.value,
                rank: n.rank,
                parent: id_of(n.parent),
                ord: id_of(n.ord),
                unord: id_of(n.unord),
                unfair: n.unfair,
            }
        })
        .collect();
    out.sort_by_key(|n| n.id);
    Ok(out)
}

/// Per-operation record consumed by [`verify_amortized`] and the CSV
/// metrics stream.
#[derive(Debug, Clone, PartialEq)]
pub struct OpMetrics {
    pub op_index: usize,
    pub op: String,
    pub heap: String,
    pub n_before: usize,
    pub comparisons: u64,
    pub links: u64,
    pub rank_steps: u64,
    pub halftrees_after: usize,
    pub max_rank: i32,
    pub phi_before: Option<i64>,
    pub phi_after: Option<i64>,
}

/// Budget constants for the amortized check. The inequality tested per
/// op is `actual + phi_scale·ΔΦ ≤ phi_scale·budget(op)` with `actual` =
/// comparisons + rank-decrease steps, budget `c1` for constant-time ops
/// (insert, meld, find-min, decrease-key) and `c2·⌈lg n⌉ + c3` for
/// minimum deletions (arbitrary deletion gets both). `phi_scale` is the
/// constant the potential is scaled by, as the analyses allow.
#[derive(Debug, Clone, Copy)]
pub struct BudgetParams {
    pub phi_scale: i64,
    pub c1: i64,
    pub c2: i64,
    pub c3: i64,
}

impl BudgetParams {
    /// Frozen constants per scheme, fixed from instrumented calibration
    /// runs (fuzzed mixed traces; see the amortized tests).
    pub fn frozen(scheme: Scheme) -> BudgetParams {
        match scheme {
            Scheme::TournamentUnfair => BudgetParams { phi_scale: 1, c1: 2, c2: 2, c3: 1 },
            Scheme::OnepassTreecount => BudgetParams { phi_scale: 2, c1: 3, c2: 2, c3: 2 },
            Scheme::Type2GoodBad => BudgetParams { phi_scale: 2, c1: 6, c2: 2, c3: 2 },
            Scheme::Type1Color | Scheme::Type1FreshStale => {
                BudgetParams { phi_scale: 2, c1: 11, c2: 3, c3: 2 }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmortizedViolation {
    pub op_index: usize,
    pub detail: String,
}

/// ⌈lg n⌉ for n ≥ 1.
pub fn ceil_log2(n: usize) -> i64 {
    let n = n.max(1);
    (usize::BITS - (n - 1).max(1).leading_zeros()) as i64 * i64::from(n > 1)
}

/// Check every op in `metrics` against the potential-method inequality
/// and report the first violation, if any. Rows without potential values
/// are skipped (e.g. ops on heaps outside the analyzed one).
pub fn verify_amortized(
    metrics: &[OpMetrics],
    params: BudgetParams,
) -> Result<(), AmortizedViolation> {
    for m in metrics {
        let (Some(before), Some(after)) = (m.phi_before, m.phi_after) else { continue };
        let actual = (m.comparisons + m.rank_steps) as i64;
        let budget = match m.op.as_str() {
            "deletemin" => params.c2 * ceil_log2(m.n_before) + params.c3,
            "delete" => params.c1 + params.c2 * ceil_log2(m.n_before) + params.c3,
            _ => params.c1,
        };
        let lhs = actual + params.phi_scale * (after - before);
        let rhs = params.phi_scale * budget;
        if lhs > rhs {
            return Err(AmortizedViolation {
                op_index: m.op_index,
                detail: format!(
                    "op `{}` (n={}): actual {} + {}·ΔΦ {} = {} exceeds {}·budget {} = {}",
                    m.op,
                    m.n_before,
                    actual,
                    params.phi_scale,
                    after - before,
                    lhs,
                    params.phi_scale,
                    budget,
                    rhs
                ),
            });
        }
    }
    Ok(())
}
