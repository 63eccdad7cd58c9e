//! Key decreases with cascading rank decreases (rank-pairing heaps of
//! types 1 and 2 and the two deliberately weakened rules), plus the rank
//! and structural audits used by tests and the trace runner.

use crate::analysis::{classify_index_type1, Color};
use crate::arena::{Arena, CascadeStep, HeapError, HeapId, StructureKind};
use crate::key::Key;

/// New rank for a non-root with child ranks `v` and `w` under the type-1
/// rule: the larger child rank if the children differ, else one more.
pub fn rank_step_type1(v: i32, w: i32) -> i32 {
    use std::cmp::Ordering::*;
    match v.cmp(&w) {
        Greater => v,
        Less => w,
        Equal => w + 1,
    }
}

/// Type-2 rule: a child more than one rank ahead of its sibling decides
/// alone; otherwise one more than the larger.
pub fn rank_step_type2(v: i32, w: i32) -> i32 {
    if v > w + 1 {
        v
    } else if w > v + 1 {
        w
    } else {
        (v + 1).max(w + 1)
    }
}

/// Restore ranks upward from `u` after a subtree was detached below it.
/// Roots have their stored rank refreshed and stop the loop; non-roots
/// recompute via the rank rule and continue while the rank changes.
/// `capped(d)` stops after `d` rank-changing steps.
fn rank_decrease_loop(arena: &mut Arena, h: HeapId, start: Option<u32>, detached_rank: i32) {
    let kind = arena.heap(h).expect("live heap").kind;
    let mut u = start;
    match kind {
        StructureKind::VariantA(b) => {
            // Ancestor-only: never look at siblings, just cap this
            // node's rank at (rank below) + b and climb.
            let b = b as i32;
            let mut below = detached_rank;
            while let Some(x) = u {
                if arena.is_root(x) {
                    arena.make_root(h, x);
                    return;
                }
                let r = arena.node(x).rank;
                if r - below <= b {
                    return;
                }
                let new = below + b;
                record_step(arena, h, x, r, new, false);
                arena.node_mut(x).rank = new;
                below = new;
                u = arena.node(x).parent;
            }
        }
        _ => {
            let budget = match kind {
                StructureKind::Capped(d) => d as u64,
                _ => u64::MAX,
            };
            let mut steps = 0u64;
            while let Some(x) = u {
                if arena.is_root(x) {
                    arena.make_root(h, x);
                    return;
                }
                if steps >= budget {
                    return;
                }
                let v = arena.rank_of(arena.node(x).ord);
                let w = arena.rank_of(arena.node(x).unord);
                let k = match kind {
                    StructureKind::Rp2 => rank_step_type2(v, w),
                    _ => rank_step_type1(v, w),
                };
                let r = arena.node(x).rank;
                if k == r {
                    return;
                }
                let was_yellow = matches!(kind, StructureKind::Rp1 | StructureKind::Capped(_))
                    && classify_index_type1(arena, x) == Color::Yellow;
                record_step(arena, h, x, r, k, was_yellow);
                arena.node_mut(x).rank = k;
                steps += 1;
                u = arena.node(x).parent;
            }
        }
    }
}

fn record_step(arena: &mut Arena, h: HeapId, x: u32, old: i32, new: i32, was_yellow: bool) {
    arena.bump_rank_step(h);
    let id = arena.node(x).key.id;
    arena.report.cascade.push(CascadeStep { id, was_yellow, old_rank: old, new_rank: new });
}

/// Shared body of decrease-key and tombstone-delete: rewrite x's key
/// downward, detach x (keeping its ordered subtree) if it is not a root,
/// push it on the root list, and run the rank-decrease loop from its old
/// parent.
pub(crate) fn rewrite_key(
    arena: &mut Arena,
    h: HeapId,
    x: u32,
    rewrite: impl FnOnce(&mut Key),
) -> Result<(), HeapError> {
    let state = arena.heap(h)?;
    let kind = state.kind;
    if !kind.supports_decrease_key() {
        return Err(HeapError::Unsupported { op: "decrease_key/delete", kind: kind.to_string() });
    }
    rewrite(&mut arena.node_mut(x).key);
    let Some(p) = arena.node(x).parent else {
        // Root: no restructuring, at most the min pointer moves.
        let head = arena.heap(h)?.head.expect("rooted node implies nonempty");
        if x != head
            && !arena.plant_skip_min_update_bug
            && arena.cmp_nodes(h, x, head) == std::cmp::Ordering::Less
        {
            arena.heap_mut(h)?.head = Some(x);
        }
        return Ok(());
    };
    // Detach: the unordered child y takes x's place under p; x keeps its
    // ordered subtree and becomes a root.
    let y = arena.node(x).unord;
    arena.node_mut(x).unord = None;
    if arena.node(p).ord == Some(x) {
        arena.node_mut(p).ord = y;
    } else {
        debug_assert_eq!(arena.node(p).unord, Some(x));
        arena.node_mut(p).unord = y;
    }
    if let Some(y) = y {
        arena.node_mut(y).parent = Some(p);
    }
    arena.make_root(h, x);
    if arena.plant_skip_min_update_bug {
        push_root_no_min_update(arena, h, x);
    } else {
        arena.push_root(h, x);
    }
    rank_decrease_loop(arena, h, Some(p), arena.rank_of(y));
    Ok(())
}

/// Buggy root push used by the mutation test: splices the new root in
/// without the min comparison.
fn push_root_no_min_update(arena: &mut Arena, h: HeapId, x: u32) {
    let head = arena.heap(h).expect("live heap").head;
    match head {
        None => {
            arena.heap_mut(h).expect("live heap").head = Some(x);
            arena.node_mut(x).next = x;
        }
        Some(head) => {
            let after = arena.node(head).next;
            arena.node_mut(x).next = after;
            arena.node_mut(head).next = x;
        }
    }
    arena.heap_mut(h).expect("live heap").num_roots += 1;
}

/// One rank-rule or structural violation found by an audit.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub id: u64,
    pub detail: String,
}

/// Which rank rule to audit a heap against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankRule {
    Type1,
    Type2,
    VariantA(u32),
    /// No per-node rank constraint (capped heaps deliberately let ranks
    /// go stale); only root-rank consistency is checked.
    None,
}

impl RankRule {
    pub fn for_kind(kind: StructureKind) -> RankRule {
        match kind {
            StructureKind::Rp1 => RankRule::Type1,
            StructureKind::Rp2 => RankRule::Type2,
            StructureKind::VariantA(b) => RankRule::VariantA(b),
            StructureKind::Capped(_) => RankRule::None,
            // The binomial structures build perfect trees, which satisfy
            // the stricter rule.
            StructureKind::Tournament | StructureKind::BqOnePass | StructureKind::BqEager => {
                RankRule::Type1
            }
            StructureKind::Pairing => RankRule::None,
        }
    }
}

fn rank_ok(rule: RankRule, d_ord: i32, d_unord: i32) -> bool {
    match rule {
        RankRule::Type1 => {
            (d_ord == 1 && d_unord == 1)
                || (d_ord == 0 && d_unord >= 1)
                || (d_unord == 0 && d_ord >= 1)
        }
        RankRule::Type2 => {
            let (a, b) = if d_ord <= d_unord { (d_ord, d_unord) } else { (d_unord, d_ord) };
            (a == 1 && b == 1) || (a == 1 && b == 2) || (a == 0 && b >= 2)
        }
        RankRule::VariantA(_) | RankRule::None => true,
    }
}

/// Full-traversal rank audit: every non-root's child rank differences
/// must satisfy the rule (a missing child reads rank −1); every root must
/// have no unordered child and stored rank r(ord)+1. For `varianta:b`,
/// present children must have rank difference ≤ b.
pub fn audit_rank_rule(arena: &Arena, h: HeapId, rule: RankRule) -> Result<Vec<Violation>, HeapError> {
    let state = arena.heap(h)?;
    let mut out = Vec::new();
    let mut stack: Vec<u32> = Vec::new();
    for root in arena.collect_roots(state.head) {
        let n = arena.node(root);
        if n.unord.is_some() {
            out.push(Violation { id: n.key.id, detail: "root has an unordered child".into() });
        }
        if state.kind != StructureKind::Pairing && n.rank != arena.rank_of(n.ord) + 1 {
            out.push(Violation {
                id: n.key.id,
                detail: format!("root rank {} != ord child rank + 1", n.rank),
            });
        }
        stack.push(root);
    }
    while let Some(x) = stack.pop() {
        let n = arena.node(x);
        for c in [n.ord, n.unord].into_iter().flatten() {
            stack.push(c);
        }
        if n.parent.is_none() {
            continue;
        }
        let d_ord = n.rank - arena.rank_of(n.ord);
        let d_unord = n.rank - arena.rank_of(n.unord);
        if let RankRule::VariantA(b) = rule {
            for c in [n.ord, n.unord].into_iter().flatten() {
                let d = n.rank - arena.node(c).rank;
                if d > b as i32 {
                    out.push(Violation {
                        id: n.key.id,
                        detail: format!("child rank difference {d} exceeds bound {b}"),
                    });
                }
            }
        } else if !rank_ok(rule, d_ord, d_unord) {
            out.push(Violation {
                id: n.key.id,
                detail: format!("rank differences ({d_ord},{d_unord}) violate {rule:?}"),
            });
        }
    }
    Ok(out)
}

/// Structural audit of the heap-core invariants: root-list sanity,
/// parent/child link consistency, half order, and the item count.
pub fn audit_structure(arena: &Arena, h: HeapId) -> Result<Vec<Violation>, HeapError> {
    let state = arena.heap(h)?;
    let mut out = Vec::new();
    let roots = arena.collect_roots(state.head);
    if roots.len() != state.num_roots {
        out.push(Violation {
            id: 0,
            detail: format!("root list has {} entries, counter says {}", roots.len(), state.num_roots),
        });
    }
    let mut reachable = 0usize;
    let mut min_key: Option<Key> = None;
    let mut stack: Vec<u32> = Vec::new();
    for &root in &roots {
        if arena.node(root).parent.is_some() {
            out.push(Violation { id: arena.node(root).key.id, detail: "listed root has a parent".into() });
        }
        stack.push(root);
    }
    while let Some(x) = stack.pop() {
        reachable += 1;
        let n = arena.node(x);
        if min_key.is_none_or(|m| n.key < m) {
            min_key = Some(n.key);
        }
        // Half order over the whole ordered subtree follows by
        // transitivity from x beating each node on its loser path.
        let mut c = n.ord;
        while let Some(l) = c {
            if !(n.key < arena.node(l).key) {
                out.push(Violation { id: n.key.id, detail: "half order violated".into() });
            }
            c = arena.node(l).unord;
        }
        for c in [n.ord, n.unord].into_iter().flatten() {
            if arena.node(c).parent != Some(x) {
                out.push(Violation { id: arena.node(c).key.id, detail: "parent link mismatch".into() });
            }
            if arena.node(x).rank < 0 {
                out.push(Violation { id: n.key.id, detail: "negative rank".into() });
            }
            stack.push(c);
        }
    }
    if reachable != state.count {
        out.push(Violation {
            id: 0,
            detail: format!("{reachable} reachable nodes, count says {}", state.count),
        });
    }
    if let (Some(head), Some(min)) = (state.head, min_key) {
        if arena.node(head).key != min {
            out.push(Violation { id: min.id, detail: "head is not the minimum".into() });
        }
    }
    if state.kind == StructureKind::BqEager {
        for (r, slot) in state.rank_table.iter().enumerate() {
            if let Some(t) = slot {
                if arena.node(*t).rank != r as i32 || arena.node(*t).parent.is_some() {
                    out.push(Violation { id: arena.node(*t).key.id, detail: "rank table mismatch".into() });
                }
            }
        }
    }
    Ok(out)
}
