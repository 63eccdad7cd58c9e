//! The one-tree structure: a balanced single-elimination tournament kept
//! as a single half tree, plus lossless converters to the other tournament
//! representations (full, half-empty, heap-ordered).

use crate::arena::{Arena, Handle, HeapError, HeapId, Item};
use crate::binomial::disassemble;

/// Rank label in the reconstructed full/half-empty representations. The
/// half-ordered form stores only child ranks; a fair match pins the
/// internal node's rank exactly, while an unfair match only bounds it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankLabel {
    Exact(i32),
    AtLeast(i32),
}

/// Node of the full or half-empty representation: a binary tree whose
/// internal nodes are matches. In the full form every node carries an
/// item; in the half-empty form each item appears only in the highest
/// node that contains it.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchView {
    pub item: Option<Item>,
    pub rank: RankLabel,
    pub left: Option<Box<MatchView>>,
    pub right: Option<Box<MatchView>>,
}

impl MatchView {
    pub fn leaves(&self) -> usize {
        match (&self.left, &self.right) {
            (None, None) => 1,
            (l, r) => {
                l.as_deref().map_or(0, MatchView::leaves) + r.as_deref().map_or(0, MatchView::leaves)
            }
        }
    }

    pub fn internal_nodes(&self) -> usize {
        match (&self.left, &self.right) {
            (None, None) => 0,
            (l, r) => {
                1 + l.as_deref().map_or(0, MatchView::internal_nodes)
                    + r.as_deref().map_or(0, MatchView::internal_nodes)
            }
        }
    }

    /// Minimum key (value, id) over the leaf items of this subtree.
    pub fn min_leaf(&self) -> Option<(f64, u64)> {
        if self.left.is_none() && self.right.is_none() {
            return self.item.map(|i| (i.value, i.id));
        }
        let l = self.left.as_deref().and_then(MatchView::min_leaf);
        let r = self.right.as_deref().and_then(MatchView::min_leaf);
        match (l, r) {
            (Some(a), Some(b)) => Some(if a <= b { a } else { b }),
            (a, b) => a.or(b),
        }
    }
}

/// Node of the heap-ordered (multiway) representation; children are the
/// items this node defeated, most recent match first.
#[derive(Debug, Clone, PartialEq)]
pub struct HeapOrderedView {
    pub item: Item,
    pub rank: i32,
    pub children: Vec<HeapOrderedView>,
}

/// The items that lost to `x`, most recent first: the ordered child of
/// `x` followed by the chain of unordered children.
fn losers(arena: &Arena, x: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut cur = arena.node(x).ord;
    while let Some(c) = cur {
        out.push(c);
        cur = arena.node(c).unord;
    }
    out
}

fn item_of(arena: &Arena, x: u32) -> Item {
    let k = arena.node(x).key;
    Item { id: k.id, value: k.value }
}

/// Build the binary match tree for `x` and its ordered subtree; `full`
/// keeps the winner's item in every match node, the half-empty form only
/// in the topmost one.
fn match_tree(arena: &Arena, x: u32, full: bool) -> MatchView {
    let mut t = MatchView {
        item: Some(item_of(arena, x)),
        rank: RankLabel::Exact(0),
        left: None,
        right: None,
    };
    for &c in losers(arena, x).iter().rev() {
        if !full {
            // `t` is a lower occurrence of x's item; only the highest
            // node on x's winning path keeps the item.
            t.item = None;
        }
        let rank = if arena.node(c).unfair {
            RankLabel::AtLeast(arena.node(c).rank + 1)
        } else {
            RankLabel::Exact(arena.node(c).rank + 1)
        };
        t = MatchView {
            item: Some(item_of(arena, x)),
            rank,
            left: Some(Box::new(t)),
            right: Some(Box::new(match_tree(arena, c, full))),
        };
    }
    t
}

/// Full representation: a binary tree with one leaf per item and one
/// internal node per match, each labeled with the match winner.
pub fn expand_full(arena: &Arena, root: Handle) -> Result<MatchView, HeapError> {
    let i = arena.resolve(root)?;
    Ok(match_tree(arena, i, true))
}

/// Half-empty representation: the full tree with every item removed from
/// all but the highest node containing it.
pub fn expand_half_empty(arena: &Arena, root: Handle) -> Result<MatchView, HeapError> {
    let i = arena.resolve(root)?;
    Ok(match_tree(arena, i, false))
}

fn heap_ordered(arena: &Arena, x: u32, rank: i32) -> HeapOrderedView {
    let children = losers(arena, x)
        .into_iter()
        .map(|c| heap_ordered(arena, c, arena.node(c).rank))
        .collect();
    HeapOrderedView { item: item_of(arena, x), rank, children }
}

/// Heap-ordered representation: first child = ordered child, next sibling
/// = unordered child.
pub fn to_heap_ordered(arena: &Arena, root: Handle) -> Result<HeapOrderedView, HeapError> {
    let i = arena.resolve(root)?;
    Ok(heap_ordered(arena, i, arena.node(i).rank))
}

/// Structure-only image of a half tree, for round-trip tests.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfShape {
    pub id: u64,
    pub ord: Option<Box<HalfShape>>,
    pub unord: Option<Box<HalfShape>>,
}

pub fn half_shape(arena: &Arena, x: Handle) -> Result<HalfShape, HeapError> {
    fn go(arena: &Arena, i: u32) -> HalfShape {
        HalfShape {
            id: arena.node(i).key.id,
            ord: arena.node(i).ord.map(|c| Box::new(go(arena, c))),
            unord: arena.node(i).unord.map(|c| Box::new(go(arena, c))),
        }
    }
    Ok(go(arena, arena.resolve(x)?))
}

/// Invert the binary-tree reading: first child back to ordered child,
/// next sibling back to unordered child.
pub fn heap_ordered_to_half(view: &HeapOrderedView) -> HalfShape {
    fn sibling_chain(children: &[HeapOrderedView]) -> Option<Box<HalfShape>> {
        let (first, rest) = children.split_first()?;
        let mut shape = heap_ordered_to_half(first);
        shape.unord = sibling_chain(rest);
        Some(Box::new(shape))
    }
    HalfShape { id: view.item.id, ord: sibling_chain(&view.children), unord: None }
}

/// One-tree delete-min: disassemble the root's tree, cascade fair matches
/// through rank buckets until every survivor has a distinct rank, then
/// reduce the survivors to a single tree with unfair matches in
/// increasing rank order.
pub(crate) fn delete_min(arena: &mut Arena, h: HeapId, head: u32) {
    let trees = disassemble(arena, h, head);
    arena.free_node(head);
    arena.report.trees_processed = trees.len();
    let mut buckets: Vec<Option<u32>> = Vec::new();
    for mut t in trees {
        loop {
            let r = arena.node(t).rank as usize;
            if buckets.len() <= r {
                buckets.resize(r + 1, None);
            }
            match buckets[r].take() {
                None => {
                    buckets[r] = Some(t);
                    break;
                }
                Some(o) => t = arena.match_roots(h, o, t),
            }
        }
    }
    let mut survivors = buckets.into_iter().flatten();
    match survivors.next() {
        None => {
            let state = arena.heap_mut(h).expect("live heap");
            state.head = None;
            state.num_roots = 0;
            state.max_root_rank = -1;
        }
        Some(mut t) => {
            for s in survivors {
                t = arena.match_roots(h, t, s);
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
    use super::*;
    use crate::arena::{HeapConfig, StructureKind};
    use crate::workload::Rng;

    fn build(values: &[f64]) -> (Arena, HeapId) {
        let mut arena = Arena::new();
        let h = arena.make_heap(HeapConfig::new(StructureKind::Tournament));
        for (id, &v) in values.iter().enumerate() {
            arena.insert(h, v, id as u64).unwrap();
        }
        (arena, h)
    }

    #[test]
    fn one_tree_always() {
        let (mut arena, h) = build(&[5.0, 3.0, 9.0, 1.0, 7.0, 2.0, 8.0, 4.0]);
        assert_eq!(arena.num_roots(h), Ok(1));
        let min = arena.delete_min(h).unwrap().unwrap();
        assert_eq!(min.value, 1.0);
        assert_eq!(arena.num_roots(h), Ok(1));
        assert_eq!(arena.len(h), Ok(7));
    }

    #[test]
    fn two_node_tree_deletes_to_singleton() {
        let (mut arena, h) = build(&[2.0, 6.0]);
        arena.delete_min(h).unwrap();
        let root = arena.resolve(arena.find_min(h).unwrap().unwrap()).unwrap();
        assert_eq!(arena.node(root).rank, 0);
        assert!(arena.node(root).ord.is_none());
    }

    #[test]
    fn full_view_singleton_and_pair() {
        let (arena, h) = build(&[4.5]);
        let v = expand_full(&arena, arena.find_min(h).unwrap().unwrap()).unwrap();
        assert_eq!((v.leaves(), v.internal_nodes()), (1, 0));

        let (arena, h) = build(&[4.5, 2.5]);
        let v = expand_full(&arena, arena.find_min(h).unwrap().unwrap()).unwrap();
        assert_eq!((v.leaves(), v.internal_nodes()), (2, 1));
        assert_eq!(v.item.unwrap().value, 2.5);
    }

    #[test]
    fn full_view_winners_are_subtree_minima() {
        let (arena, h) = build(&[5.0, 3.0, 9.0, 1.0, 7.0, 2.0, 8.0]);
        let v = expand_full(&arena, arena.find_min(h).unwrap().unwrap()).unwrap();
        assert_eq!(v.leaves(), 7);
        assert_eq!(v.internal_nodes(), 6);
        fn check(v: &MatchView) {
            if v.left.is_some() || v.right.is_some() {
                assert_eq!(v.item.map(|i| (i.value, i.id)), v.min_leaf());
                for c in [&v.left, &v.right].into_iter().flatten() {
                    check(c);
                }
            }
        }
        check(&v);
    }

    #[test]
    fn half_empty_view_counts_each_item_once() {
        let (arena, h) = build(&[5.0, 3.0, 9.0, 1.0, 7.0, 2.0, 8.0]);
        let v = expand_half_empty(&arena, arena.find_min(h).unwrap().unwrap()).unwrap();
        fn items(v: &MatchView, out: &mut Vec<u64>) {
            if let Some(i) = v.item {
                out.push(i.id);
            }
            for c in [&v.left, &v.right].into_iter().flatten() {
                items(c, out);
            }
        }
        let mut ids = Vec::new();
        items(&v, &mut ids);
        ids.sort_unstable();
        assert_eq!(ids, (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn heap_ordered_round_trip_random_trees() {
        let mut rng = Rng::seeded(42);
        for _ in 0..200 {
            let n = 1 + (rng.below(40)) as usize;
            let values: Vec<f64> = (0..n).map(|_| rng.f64() * 100.0).collect();
            let mut arena = Arena::new();
            let h = arena.make_heap(HeapConfig::new(StructureKind::Tournament));
            for (id, &v) in values.iter().enumerate() {
                arena.insert(h, v, id as u64).unwrap();
            }
            // A few delete-mins vary the shapes.
            for _ in 0..rng.below(3) {
                arena.delete_min(h).unwrap();
            }
            if arena.len(h).unwrap() == 0 {
                continue;
            }
            let root = arena.find_min(h).unwrap().unwrap();
            let view = to_heap_ordered(&arena, root).unwrap();
            // Heap order: every child key exceeds its parent's.
            fn heap_ordered(v: &HeapOrderedView) -> bool {
                v.children.iter().all(|c| c.item.value >= v.item.value && heap_ordered(c))
            }
            assert!(heap_ordered(&view));
            assert_eq!(heap_ordered_to_half(&view), half_shape(&arena, root).unwrap());
        }
    }

    #[test]
    fn unfair_matches_per_deletemin_stay_logarithmic() {
        let mut arena = Arena::new();
        let h = arena.make_heap(HeapConfig::new(StructureKind::Tournament));
        let mut rng = Rng::seeded(9);
        for id in 0..512u64 {
            arena.insert(h, rng.f64(), id).unwrap();
        }
        for _ in 0..511 {
            let n = arena.len(h).unwrap() as f64;
            arena.delete_min(h).unwrap();
            let unfair = arena.last_op().unfair_matches;
            assert!(unfair <= n.log2() as u64 + 1, "unfair {unfair} for n={n}");
        }
    }
}
