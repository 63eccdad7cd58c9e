//! Disassembly and the binomial-queue delete-min strategies: the lazy
//! single bucket pass and the classical eager carry discipline.

use crate::analysis::{classify_index_type1, Color};
use crate::arena::{Arena, HeapId, MatchPolicy};

/// Take the deleted root apart: walk from its ordered child through the
/// chain of unordered children; every node on the path keeps its ordered
/// subtree and becomes the root of a half tree, with its rank refreshed to
/// one more than its ordered child's. Outputs are in path order (largest
/// rank first).
pub(crate) fn disassemble(arena: &mut Arena, h: HeapId, root: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut cur = arena.node(root).ord;
    arena.node_mut(root).ord = None;
    while let Some(c) = cur {
        cur = arena.node(c).unord;
        arena.node_mut(c).unord = None;
        arena.make_root(h, c);
        out.push(c);
    }
    out
}

/// Single bucket pass: place each half tree in the bucket for its rank; on
/// collision, fairly match the pair, send the winner to the output, and
/// empty the bucket. Unmatched trees are flushed to the output afterwards.
pub(crate) fn one_pass_links(arena: &mut Arena, h: HeapId, candidates: &[u32]) -> Vec<u32> {
    let mut buckets: Vec<Option<u32>> = Vec::new();
    let mut out = Vec::new();
    for &t in candidates {
        let r = arena.node(t).rank as usize;
        if buckets.len() <= r {
            buckets.resize(r + 1, None);
        }
        match buckets[r].take() {
            None => buckets[r] = Some(t),
            Some(o) => out.push(arena.match_roots(h, o, t)),
        }
    }
    out.extend(buckets.into_iter().flatten());
    out
}

/// Delete-min for every one-pass structure (lazy binomial queue and all
/// rank-pairing variants): disassemble the minimum's tree, order the
/// resulting half trees with the surviving roots per the match policy, run
/// the bucket pass, and rebuild the root list around the new minimum.
pub(crate) fn one_pass_delete_min(arena: &mut Arena, h: HeapId, head: u32) {
    let old_roots: Vec<u32> = {
        let all = arena.collect_roots(Some(head));
        all[1..].to_vec()
    };
    let new_trees = disassemble(arena, h, head);
    arena.free_node(head);
    let policy = arena.heap(h).expect("live heap").policy;
    let candidates: Vec<u32> = match policy {
        MatchPolicy::Unrestricted => old_roots.iter().chain(&new_trees).copied().collect(),
        MatchPolicy::DisassemblyFirst => new_trees.iter().chain(&old_roots).copied().collect(),
        MatchPolicy::RedFirst => {
            let base: Vec<u32> = new_trees.iter().chain(&old_roots).copied().collect();
            let (red, rest): (Vec<u32>, Vec<u32>) = base
                .into_iter()
                .partition(|&t| classify_index_type1(arena, t) == Color::Red);
            red.into_iter().chain(rest).collect()
        }
    };
    arena.report.trees_processed = candidates.len();
    let out = one_pass_links(arena, h, &candidates);
    arena.rebuild_roots(h, &out);
}

fn table_trees(arena: &Arena, h: HeapId) -> Vec<u32> {
    arena.heap(h).expect("live heap").rank_table.iter().flatten().copied().collect()
}

/// Chain `trees` into a circular root list without touching the head or
/// counters; the caller decides the minimum.
fn link_circular(arena: &mut Arena, h: HeapId, trees: &[u32]) {
    let mut max_rank = -1;
    for (i, &t) in trees.iter().enumerate() {
        let next = trees[(i + 1) % trees.len()];
        let n = arena.node_mut(t);
        n.next = next;
        if n.rank > max_rank {
            max_rank = n.rank;
        }
    }
    let state = arena.heap_mut(h).expect("live heap");
    state.num_roots = trees.len();
    state.max_root_rank = max_rank;
}

/// Carry a tree into the rank table: fairly match it with the occupant of
/// its rank until it lands in an empty slot. Returns the placed tree.
fn eager_add_tree(arena: &mut Arena, h: HeapId, mut t: u32) -> u32 {
    loop {
        let r = arena.node(t).rank as usize;
        let table = &mut arena.heap_mut(h).expect("live heap").rank_table;
        if table.len() <= r {
            table.resize(r + 1, None);
        }
        match table[r].take() {
            None => {
                table[r] = Some(t);
                return t;
            }
            Some(o) => t = arena.match_roots(h, o, t),
        }
    }
}

/// Eager insert. At most one comparison beyond the carries: the old
/// minimum never loses a match, so it is still a root, and the new item
/// sits in the tree the carry chain produced; comparing those two roots
/// (when distinct) finds the new minimum.
pub(crate) fn eager_insert(arena: &mut Arena, h: HeapId, x: u32) {
    let old_head = arena.heap(h).expect("live heap").head;
    let placed = eager_add_tree(arena, h, x);
    let trees = table_trees(arena, h);
    link_circular(arena, h, &trees);
    let head = match old_head {
        None => placed,
        Some(m) if m == placed => placed,
        Some(m) => {
            if arena.cmp_nodes(h, placed, m) == std::cmp::Ordering::Less {
                placed
            } else {
                m
            }
        }
    };
    arena.heap_mut(h).expect("live heap").head = Some(head);
}

pub(crate) fn eager_delete_min(arena: &mut Arena, h: HeapId, head: u32) {
    let r = arena.node(head).rank as usize;
    let slot = arena.heap_mut(h).expect("live heap").rank_table[r].take();
    debug_assert_eq!(slot, Some(head));
    let new_trees = disassemble(arena, h, head);
    arena.free_node(head);
    arena.report.trees_processed = new_trees.len();
    for t in new_trees {
        eager_add_tree(arena, h, t);
    }
    let trees = table_trees(arena, h);
    arena.rebuild_roots(h, &trees);
}

/// Eager meld: carry every tree of the consumed heap into the survivor's
/// rank table, then rescan for the minimum.
pub(crate) fn eager_meld(arena: &mut Arena, h1: HeapId, other: &mut crate::arena::HeapState) {
    for t in other.rank_table.iter().flatten().copied().collect::<Vec<_>>() {
        eager_add_tree(arena, h1, t);
    }
    let trees = table_trees(arena, h1);
    arena.rebuild_roots(h1, &trees);
}
