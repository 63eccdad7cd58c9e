//! Two-pass pairing heap, kept in the same half-ordered node layout as
//! the rank-based structures. No rank bookkeeping; present purely as a
//! benchmark baseline.

use crate::arena::{Arena, HeapId};
use crate::binomial::disassemble;

/// Two-pass delete-min: take the root's children (most recent first),
/// link them in adjacent pairs left to right, then fold the pair winners
/// right to left into one tree.
pub(crate) fn delete_min(arena: &mut Arena, h: HeapId, head: u32) {
    let children = disassemble(arena, h, head);
    arena.free_node(head);
    arena.report.trees_processed = children.len();
    let mut winners = Vec::with_capacity(children.len() / 2 + 1);
    let mut it = children.chunks_exact(2);
    for pair in &mut it {
        winners.push(arena.match_roots(h, pair[0], pair[1]));
    }
    if let [last] = it.remainder() {
        winners.push(*last);
    }
    match winners.pop() {
        None => {
            let state = arena.heap_mut(h).expect("live heap");
            state.head = None;
            state.num_roots = 0;
            state.max_root_rank = -1;
        }
        Some(mut t) => {
            while let Some(w) = winners.pop() {
                t = arena.match_roots(h, w, t);
            }
            arena.node_mut(t).next = t;
            let rank = arena.node(t).rank;
            let state = arena.heap_mut(h).expect("live heap");
            state.head = Some(t);
            state.num_roots = 1;
            state.max_root_rank = rank;
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::arena::{Arena, HeapConfig, HeapError, StructureKind};
    use crate::workload::Rng;

    #[test]
    fn drains_sorted_and_rejects_decrease() {
        let mut arena = Arena::new();
        let h = arena.make_heap(HeapConfig::new(StructureKind::Pairing));
        let mut rng = Rng::seeded(3);
        let mut vals: Vec<f64> = (0..300).map(|_| rng.f64()).collect();
        for (id, &v) in vals.iter().enumerate() {
            arena.insert(h, v, id as u64).unwrap();
        }
        let x = arena.find_min(h).unwrap().unwrap();
        assert!(matches!(arena.decrease_key(h, x, 0.1), Err(HeapError::Unsupported { .. })));
        let mut out = Vec::new();
        while let Some(item) = arena.delete_min(h).unwrap() {
            out.push(item.value);
        }
        vals.sort_by(f64::total_cmp);
        assert_eq!(out, vals);
    }
}
