//! Scripted counterexamples against the two weakened key-decrease
//! schemes: instance builders, the cascade-forcing decrease cycle for
//! the bounded-rank-difference rule, and the insert/delete-min attack
//! that makes capped-rank-decrease heaps pay per half tree.

use crate::arena::{
    Arena, CostCounters, Handle, HeapConfig, HeapError, HeapId, StructureKind, NODE_BUDGET,
};
use crate::key::Key;
use crate::trace::{Trace, TraceOp};

/// A heap under adversarial control, with the watermark used to mint
/// keys strictly below everything currently in the heap.
#[derive(Debug, Clone)]
pub struct AdversaryHeap {
    pub arena: Arena,
    pub h: HeapId,
    watermark: f64,
    next_id: u64,
    /// Heap ops performed so far, replayable against any implementation.
    pub trace: Trace,
}

impl AdversaryHeap {
    fn new(kind: StructureKind) -> Self {
        let mut arena = Arena::new();
        let h = arena.make_heap(HeapConfig::new(kind));
        let mut trace = Trace::new(Some(kind));
        trace.ops.push(TraceOp::Make { heap: "a".into() });
        AdversaryHeap { arena, h, watermark: -1.0, next_id: 0, trace }
    }

    fn fresh_id(&mut self) -> u64 {
        self.next_id += 1;
        self.next_id - 1
    }

    /// Insert a key strictly below every key ever used.
    fn insert_watermark(&mut self) -> Result<Handle, HeapError> {
        let id = self.fresh_id();
        let value = self.watermark;
        self.watermark -= 1.0;
        self.trace.ops.push(TraceOp::Insert { heap: "a".into(), id, value });
        self.arena.insert(self.h, value, id)
    }

    fn insert(&mut self, value: f64) -> Result<Handle, HeapError> {
        let id = self.fresh_id();
        self.trace.ops.push(TraceOp::Insert { heap: "a".into(), id, value });
        self.arena.insert(self.h, value, id)
    }

    fn delete_min(&mut self) -> Result<Option<u64>, HeapError> {
        self.trace.ops.push(TraceOp::DeleteMin { heap: "a".into() });
        Ok(self.arena.delete_min(self.h)?.map(|i| i.id))
    }

    /// Decrease a node's key to exactly `target` (strictly below its
    /// current value).
    fn decrease_to(&mut self, x: Handle, target: f64) -> Result<(), HeapError> {
        let key = self.arena.key(x)?;
        let delta = key.value - target;
        debug_assert!(delta > 0.0);
        self.trace.ops.push(TraceOp::DecreaseKey { heap: "a".into(), id: key.id, delta });
        self.arena.decrease_key(self.h, x, delta)
    }

    /// Insert below everything, then delete the just-inserted item,
    /// forcing a full bucket pass over the surviving roots.
    fn pump_cycle(&mut self) -> Result<(), HeapError> {
        let w = self.insert_watermark()?;
        let id = self.arena.key(w)?.id;
        let deleted = self.delete_min()?;
        debug_assert_eq!(deleted, Some(id));
        Ok(())
    }

    /// Rank of each root, sorted ascending.
    pub fn root_ranks(&self) -> Vec<i32> {
        let mut ranks: Vec<i32> = self
            .arena
            .roots(self.h)
            .expect("live heap")
            .iter()
            .map(|&r| self.arena.node(self.arena.resolve(r).expect("root handle")).rank)
            .collect();
        ranks.sort_unstable();
        ranks
    }

    fn root_of_rank(&self, rank: i32) -> Option<u32> {
        self.arena
            .roots(self.h)
            .expect("live heap")
            .into_iter()
            .map(|r| self.arena.resolve(r).expect("root handle"))
            .find(|&i| self.arena.node(i).rank == rank)
    }
}

fn subtree_size(arena: &Arena, x: u32) -> usize {
    let mut n = 0;
    let mut stack = vec![x];
    while let Some(x) = stack.pop() {
        n += 1;
        let node = arena.node(x);
        stack.extend([node.ord, node.unord].into_iter().flatten());
    }
    n
}

/// Check the heap holds exactly one half tree per rank 0..=max_rank,
/// each of exactly 2^rank nodes if `perfect`.
pub fn audit_one_per_rank(a: &AdversaryHeap, max_rank: i32, perfect: bool) -> Result<(), String> {
    let expect: Vec<i32> = (0..=max_rank).collect();
    let ranks = a.root_ranks();
    if ranks != expect {
        return Err(format!("root ranks {ranks:?}, expected one per rank 0..={max_rank}"));
    }
    if perfect {
        for r in a.arena.roots(a.h).expect("live heap") {
            let i = a.arena.resolve(r).expect("root handle");
            let rank = a.arena.node(i).rank;
            let size = subtree_size(&a.arena, i);
            if size != 1usize << rank {
                return Err(format!("rank {rank} tree has {size} nodes, expected {}", 1u32 << rank));
            }
        }
    }
    Ok(())
}

fn check_budget(needed: u128) -> Result<(), HeapError> {
    if needed > NODE_BUDGET as u128 {
        Err(HeapError::NodeBudget { needed, budget: NODE_BUDGET })
    } else {
        Ok(())
    }
}

/// Build, by honest insertions and minimum deletions, a heap with one
/// perfect half tree of each rank 0..=bk+1 under the bounded-difference
/// rule: insert 2^(bk+2) − 1 items, then pump insert/delete-min cycles;
/// each pump runs a maximum pairing pass, so the trees carry into the
/// binary representation of n, which is all ones.
pub fn build_varianta_perfect(b: u32, k: u32) -> Result<AdversaryHeap, HeapError> {
    if b < 1 || k < 1 {
        return Err(HeapError::BadParameter("need b >= 1, k >= 1".into()));
    }
    let top = (b as u64).checked_mul(k as u64).and_then(|x| x.checked_add(2)).unwrap_or(u64::MAX);
    if top >= 63 {
        return Err(HeapError::NodeBudget { needed: u128::MAX, budget: NODE_BUDGET });
    }
    let n: u128 = (1u128 << top) - 1;
    check_budget(n)?;
    let mut a = AdversaryHeap::new(StructureKind::VariantA(b));
    for i in 0..n as u64 {
        a.insert(i as f64)?;
    }
    let max_rank = (b * k + 1) as i32;
    for _ in 0..4 * (top + 2) {
        if audit_one_per_rank(&a, max_rank, true).is_ok() {
            return Ok(a);
        }
        a.pump_cycle()?;
    }
    Err(HeapError::BadParameter("pump build did not converge".into()))
}

/// Forge (by direct construction, not heap ops) a sparse instance with
/// the same rank skeleton as the perfect build: one half tree per rank
/// 0..=bk+1, where every tree is an ordered path and the top tree also
/// carries the unordered-child path the decrease cycle walks. Rank
/// differences are all 1, so the shape is legal for any b ≥ 1, and the
/// size is O((bk)²) instead of 2^(bk+2), which is what makes large k
/// measurable at all.
pub fn build_varianta_skeleton(b: u32, k: u32) -> Result<AdversaryHeap, HeapError> {
    if b < 1 || k < 1 {
        return Err(HeapError::BadParameter("need b >= 1, k >= 1".into()));
    }
    let top = (b * k + 1) as i32;
    check_budget((top as u128 + 1) * (top as u128 + 2) / 2 + top as u128 + 1)?;
    let mut a = AdversaryHeap::new(StructureKind::VariantA(b));
    // Values are depths: every node is strictly below its ordered
    // subtree, which is all half order requires.
    let make_path = |a: &mut AdversaryHeap, rank: i32, depth0: f64| -> u32 {
        // Root of rank `rank` with an ordered path of ranks rank-1..0.
        let mut bottom: Option<u32> = None;
        for r in 0..rank {
            let id = a.fresh_id();
            let i = a.arena.alloc(Key::new(depth0 + (rank - r) as f64, id));
            a.arena.node_mut(i).rank = r;
            a.arena.node_mut(i).ord = bottom;
            if let Some(c) = bottom {
                a.arena.node_mut(c).parent = Some(i);
            }
            bottom = Some(i);
        }
        let id = a.fresh_id();
        let root = a.arena.alloc(Key::new(depth0, id));
        a.arena.node_mut(root).rank = rank;
        a.arena.node_mut(root).ord = bottom;
        if let Some(c) = bottom {
            a.arena.node_mut(c).parent = Some(root);
        }
        root
    };
    let mut roots = Vec::new();
    for rank in 0..top {
        roots.push(make_path(&mut a, rank, 0.0));
    }
    // Top tree: root x of rank bk+1; ord(x) heads the unordered chain
    // c_bk .. c_0, where c_j has rank j and its own ordered path.
    let x = {
        let id = a.fresh_id();
        let x = a.arena.alloc(Key::new(0.0, id));
        a.arena.node_mut(x).rank = top;
        let mut below: Option<u32> = None; // c_{j-1}
        for j in 0..top {
            let c = make_path(&mut a, j, 1.0);
            a.arena.node_mut(c).unord = below;
            if let Some(bc) = below {
                a.arena.node_mut(bc).parent = Some(c);
            }
            below = Some(c);
        }
        a.arena.node_mut(x).ord = below;
        if let Some(c) = below {
            a.arena.node_mut(c).parent = Some(x);
        }
        x
    };
    roots.push(x);
    let count: usize = roots.iter().map(|&r| subtree_size(&a.arena, r)).sum();
    a.arena.rebuild_roots(a.h, &roots);
    let state = a.arena.heap_mut(a.h)?;
    state.count = count;
    Ok(a)
}

/// Totals for one adversary cycle.
#[derive(Debug, Clone, Copy, Default)]
pub struct CycleSummary {
    pub decrease_keys: u64,
    pub rank_steps: u64,
    pub comparisons: u64,
    pub links: u64,
}

/// One decrease cycle against the bounded-difference rule: thin the
/// unordered path under the top root to the nodes at rank difference b,
/// then decrease those keys bottom rank up — each one cascades rank
/// decreases along the whole remaining path. A minimum deletion of the
/// lowest detached node and one insertion restore one tree per rank.
pub fn run_varianta_cycle(a: &mut AdversaryHeap, b: u32, k: u32) -> Result<CycleSummary, HeapError> {
    let top = (b * k + 1) as i32;
    let shape = |a: &AdversaryHeap| a.root_ranks() == (0..=top).collect::<Vec<_>>();
    if !shape(a) {
        return Err(HeapError::BadParameter(format!(
            "precondition: expected one root per rank 0..={top}, got {:?}",
            a.root_ranks()
        )));
    }
    let x = a.root_of_rank(top).expect("shape audited");
    // The path of unordered children descending from ord(x): ranks bk..0.
    let mut path = Vec::new();
    let mut cur = a.arena.node(x).ord;
    while let Some(c) = cur {
        path.push((a.arena.handle_of(c), a.arena.node(c).rank));
        cur = a.arena.node(c).unord;
    }
    debug_assert_eq!(path.len(), top as usize);
    let before = a.arena.counters;
    let base = a.watermark;
    a.watermark -= 2.0 * top as f64 + 10.0;
    let mut decrease_keys = 0u64;
    // Phase 1: detach the path nodes whose rank is not divisible by b.
    // O(1) each, no rank changes; afterwards the path is k+1 nodes at
    // rank difference b. (For b = 1 every rank survives.)
    let mut offset = 1.0;
    for &(hnd, rank) in &path {
        if rank % b as i32 != 0 {
            a.decrease_to(hnd, base - offset)?;
            offset += 1.0;
            decrease_keys += 1;
        }
    }
    // Phase 2: decrease the survivors smallest rank to largest; each
    // cascades to the top of the path. The rank-0 node gets the globally
    // smallest key so the following delete-min removes exactly it.
    let survivors: Vec<Handle> = path
        .iter()
        .rev()
        .filter(|&&(_, r)| r % b as i32 == 0)
        .map(|&(h, _)| h)
        .collect();
    let deepest = base - 2.0 * top as f64 - 9.0;
    for (j, &hnd) in survivors.iter().enumerate() {
        a.decrease_to(hnd, deepest + j as f64)?;
        decrease_keys += 1;
    }
    // Intermediate shape: three rank-0 trees, two of each rank 1..=bk.
    let mut expect: Vec<i32> = vec![0, 0, 0];
    expect.extend((1..=top - 1).flat_map(|r| [r, r]));
    expect.sort_unstable();
    if a.root_ranks() != expect {
        return Err(HeapError::BadParameter(format!(
            "mid-cycle shape {:?} not 3×rank0 + 2×ranks 1..{}",
            a.root_ranks(),
            top - 1
        )));
    }
    let victim = a.arena.key(survivors[0])?.id;
    let deleted = a.delete_min()?;
    if deleted != Some(victim) {
        return Err(HeapError::BadParameter("delete-min removed the wrong node".into()));
    }
    a.insert_watermark()?;
    if !shape(a) {
        return Err(HeapError::BadParameter(format!(
            "post-cycle shape {:?} not one per rank 0..={top}",
            a.root_ranks()
        )));
    }
    let d = diff(a.arena.counters, before);
    Ok(CycleSummary {
        decrease_keys,
        rank_steps: d.rank_steps,
        comparisons: d.comparisons,
        links: d.links,
    })
}

fn diff(after: CostCounters, before: CostCounters) -> CostCounters {
    CostCounters {
        comparisons: after.comparisons - before.comparisons,
        links: after.links - before.links,
        rank_steps: after.rank_steps - before.rank_steps,
    }
}

/// Build one half tree per rank 0..=k under the capped-steps rule.
///
/// For d ≥ 1: pump a perfect build as for the bounded-difference rule,
/// then prune every node at distance ≥ d+2 from its root, deepest
/// first, by arbitrary deletion (tombstone decrease + minimum
/// deletion). Pruned nodes are leaves at removal time and all ranks are
/// distinct throughout, so no roots are disturbed; each surviving tree
/// has at most 2^(d+1) nodes.
///
/// For d = 0: the ladder construction — nothing but insertions, minimum
/// deletions of just-inserted items, and key decreases that change no
/// ranks, producing one ordered-path tree per rank.
pub fn build_capped_instance(d: u32, k: u32) -> Result<AdversaryHeap, HeapError> {
    if k < 1 {
        return Err(HeapError::BadParameter("need k >= 1".into()));
    }
    if d == 0 {
        return build_capped_ladder(k);
    }
    let n: u128 = (1u128 << (k + 1)) - 1;
    check_budget(n)?;
    let mut a = AdversaryHeap::new(StructureKind::Capped(d));
    for i in 0..n as u64 {
        a.insert(i as f64)?;
    }
    for _ in 0..4 * (k as usize + 3) {
        if audit_one_per_rank(&a, k as i32, true).is_ok() {
            break;
        }
        a.pump_cycle()?;
    }
    audit_one_per_rank(&a, k as i32, true).map_err(HeapError::BadParameter)?;
    // Prune: collect (distance, handle) over all trees, deepest first.
    let mut victims: Vec<(usize, Handle)> = Vec::new();
    for r in a.arena.roots(a.h)? {
        let root = a.arena.resolve(r)?;
        let mut stack = vec![(root, 0usize)];
        while let Some((x, dist)) = stack.pop() {
            if dist >= d as usize + 2 {
                victims.push((dist, a.arena.handle_of(x)));
            }
            let n = a.arena.node(x);
            stack.extend([n.ord, n.unord].into_iter().flatten().map(|c| (c, dist + 1)));
        }
    }
    victims.sort_by_key(|v| std::cmp::Reverse(v.0));
    for (_, hnd) in victims {
        let id = a.arena.key(hnd)?.id;
        a.trace.ops.push(TraceOp::Delete { heap: "a".into(), id });
        a.arena.delete(a.h, hnd)?;
    }
    let ranks = a.root_ranks();
    if ranks != (0..=k as i32).collect::<Vec<_>>() {
        return Err(HeapError::BadParameter(format!("post-prune ranks {ranks:?}")));
    }
    for r in a.arena.roots(a.h)? {
        let i = a.arena.resolve(r)?;
        if subtree_size(&a.arena, i) > 1 << (d + 1) {
            return Err(HeapError::BadParameter("tree larger than 2^(d+1) after prune".into()));
        }
    }
    Ok(a)
}

/// The d = 0 ladder: raise the maximum rank one step at a time. To gain
/// rank j from path trees of ranks 0..j−1, insert an item below
/// everything, then run j cycles of insert-below-everything plus
/// delete-min of the just-inserted item: each cycle fair-matches the
/// growing tree with the path tree of its rank, threading the old trees
/// onto an unordered path. Detaching that path by key decreases leaves
/// path trees of ranks 0..j−2 plus the new rank-j tree.
fn build_capped_ladder(k: u32) -> Result<AdversaryHeap, HeapError> {
    check_budget((k as u128 + 1) * (k as u128 + 2) / 2)?;
    let mut a = AdversaryHeap::new(StructureKind::Capped(0));
    a.insert_watermark()?; // the rank-0 path tree
    for target in 1..=k as i32 {
        for j in (1..=target).rev() {
            // Build rank j from the path trees of ranks 0..j-1.
            let s = a.insert_watermark()?;
            for _ in 0..j {
                a.pump_cycle()?;
            }
            debug_assert_eq!(a.arena.key(s).map(|k| k.value < 0.0), Ok(true));
            // Detach the unordered path: nodes below ord(root of rank j).
            let root = a.root_of_rank(j).expect("ladder just built");
            let p_top = a.arena.node(root).ord.expect("rank >= 1");
            let mut chain = Vec::new();
            let mut cur = a.arena.node(p_top).unord;
            while let Some(c) = cur {
                chain.push(a.arena.handle_of(c));
                cur = a.arena.node(c).unord;
            }
            for hnd in chain {
                let target = a.watermark;
                a.watermark -= 1.0;
                a.decrease_to(hnd, target)?;
            }
        }
        a.insert_watermark()?; // refill rank 0
    }
    audit_paths(&a, k as i32).map_err(HeapError::BadParameter)?;
    Ok(a)
}

/// Check one tree per rank 0..=max_rank, each an ordered path (root plus
/// ordered children of ranks rank−1..0, no unordered children).
pub fn audit_paths(a: &AdversaryHeap, max_rank: i32) -> Result<(), String> {
    let ranks = a.root_ranks();
    if ranks != (0..=max_rank).collect::<Vec<_>>() {
        return Err(format!("root ranks {ranks:?}, expected 0..={max_rank}"));
    }
    for r in a.arena.roots(a.h).expect("live heap") {
        let mut i = a.arena.resolve(r).expect("root handle");
        let mut expect = a.arena.node(i).rank;
        loop {
            let n = a.arena.node(i);
            if n.rank != expect {
                return Err(format!("path node rank {} expected {expect}", n.rank));
            }
            if n.unord.is_some() && n.parent.is_some() {
                return Err("path node has an unordered child".into());
            }
            match n.ord {
                None => {
                    if expect != 0 {
                        return Err(format!("path ends at rank {expect}"));
                    }
                    break;
                }
                Some(c) => {
                    i = c;
                    expect -= 1;
                }
            }
        }
    }
    Ok(())
}

/// Per-cycle cost of the insert + delete-min attack.
#[derive(Debug, Clone, Copy)]
pub struct AttackCycle {
    pub n: usize,
    pub comparisons: u64,
    pub links: u64,
    pub rank_steps: u64,
    /// Half trees handed to the matching phase of the delete-min.
    pub trees_processed: usize,
}

/// Repeat insert-below-everything + delete-min (removing the
/// just-inserted item). Against the post-build capped heap every cycle
/// pays for all ⌊n/2^(d+1)⌋ half trees; against a healthy heap the
/// per-cycle cost settles near lg n.
pub fn run_insert_deletemin_attack(
    a: &mut AdversaryHeap,
    cycles: usize,
) -> Result<Vec<AttackCycle>, HeapError> {
    let mut out = Vec::with_capacity(cycles);
    for _ in 0..cycles {
        let n = a.arena.len(a.h)?;
        let before = a.arena.counters;
        a.pump_cycle()?;
        let trees_processed = a.arena.last_op().trees_processed;
        let d = diff(a.arena.counters, before);
        out.push(AttackCycle {
            n,
            comparisons: d.comparisons,
            links: d.links,
            rank_steps: d.rank_steps,
            trees_processed,
        });
    }
    Ok(out)
}

/// Healthy type-1 control heap with `n` random items, for cost
/// comparisons against the adversarial builds.
pub fn control_rp1(n: usize, seed: u64) -> Result<AdversaryHeap, HeapError> {
    let mut rng = crate::workload::Rng::seeded(seed);
    let mut a = AdversaryHeap::new(StructureKind::Rp1);
    for _ in 0..n {
        a.insert(rng.f64() * 1e6)?;
    }
    Ok(a)
}
