//! Workload generation: a platform-stable PRNG, random op-mix and
//! sorting traces, random graphs, and the Dijkstra/Prim clients with
//! their Bellman-Ford and Kruskal oracles.

use std::collections::HashMap;

use crate::arena::{Arena, Handle, HeapConfig, HeapError, MatchPolicy, StructureKind};
use crate::trace::{Trace, TraceOp};

/// xorshift64* generator. Hand-rolled so that traces are bit-identical
/// across platforms and toolchains; the state update is the classic
/// shift-xor triple (13, 7, 17) followed by the odd-constant multiply.
#[derive(Debug, Clone)]
pub struct Rng(u64);

impl Rng {
    pub fn seeded(seed: u64) -> Rng {
        // splitmix-style scramble so that small seeds (0, 1, 2, ...)
        // diverge immediately; the state must be nonzero.
        let mut z = seed.wrapping_add(0x9e3779b97f4a7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^= z >> 31;
        Rng(if z == 0 { 0x9e3779b97f4a7c15 } else { z })
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x.wrapping_mul(0x2545f4914f6cdd1d)
    }

    /// Uniform in [0, n).
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        // Multiply-shift; bias is negligible for the n used here and the
        // result is identical everywhere, which is what matters.
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// n inserts of random keys followed by n delete-mins.
pub fn gen_sort(n: usize, seed: u64) -> Trace {
    let mut rng = Rng::seeded(seed);
    let mut t = Trace::new(None);
    t.ops.push(TraceOp::Make { heap: "h".into() });
    for id in 0..n as u64 {
        t.ops.push(TraceOp::Insert { heap: "h".into(), id, value: rng.f64() * 1e6 });
    }
    for _ in 0..n {
        t.ops.push(TraceOp::DeleteMin { heap: "h".into() });
    }
    t
}

/// Op-mix weights in order insert / deletemin / decreasekey / meld /
/// delete. For structures without decrease-key support, route the
/// decrease and delete weight to insert and deletemin.
#[derive(Debug, Clone, Copy)]
pub struct OpMix {
    pub insert: u64,
    pub deletemin: u64,
    pub decreasekey: u64,
    pub meld: u64,
    pub delete: u64,
}

impl OpMix {
    pub const STANDARD: OpMix =
        OpMix { insert: 50, deletemin: 25, decreasekey: 15, meld: 5, delete: 5 };

    pub fn for_kind(self, kind: StructureKind) -> OpMix {
        if kind.supports_decrease_key() {
            self
        } else {
            OpMix {
                insert: self.insert + self.decreasekey,
                deletemin: self.deletemin + self.delete,
                decreasekey: 0,
                meld: self.meld,
                delete: 0,
            }
        }
    }
}

/// Live-id index with O(1) random pick and removal.
#[derive(Debug, Clone, Default)]
struct IdPool {
    ids: Vec<u64>,
    pos: HashMap<u64, usize>,
}

impl IdPool {
    fn push(&mut self, id: u64) {
        self.pos.insert(id, self.ids.len());
        self.ids.push(id);
    }

    fn remove(&mut self, id: u64) {
        let p = self.pos.remove(&id).expect("id is live");
        self.ids.swap_remove(p);
        if let Some(&moved) = self.ids.get(p) {
            self.pos.insert(moved, p);
        }
    }

    fn pick(&self, rng: &mut Rng) -> Option<u64> {
        if self.ids.is_empty() {
            None
        } else {
            Some(self.ids[rng.below(self.ids.len() as u64) as usize])
        }
    }
}

/// Random trace over a pool of heaps, following the weight mix. Melds
/// keep the pool size constant by re-making the absorbed name. To know
/// which id each delete-min removes (so later ops only target live
/// ids), the generator mirrors every heap with an oracle heap.
pub fn gen_random(n_ops: usize, mix: OpMix, seed: u64) -> Trace {
    const POOL: usize = 6;
    let mut rng = Rng::seeded(seed);
    let mut t = Trace::new(None);
    let name = |i: usize| format!("h{i}");
    let mut mirror: Vec<crate::oracle::OracleHeap> =
        (0..POOL).map(|_| crate::oracle::OracleHeap::new(StructureKind::Rp2)).collect();
    let mut live: Vec<IdPool> = vec![IdPool::default(); POOL];
    for i in 0..POOL {
        t.ops.push(TraceOp::Make { heap: name(i) });
    }
    let mut next_id = 0u64;
    let total = mix.insert + mix.deletemin + mix.decreasekey + mix.meld + mix.delete;
    for _ in 0..n_ops {
        let mut pick = rng.below(total);
        let h = rng.below(POOL as u64) as usize;
        if pick < mix.insert {
            let id = next_id;
            next_id += 1;
            let value = rng.f64() * 1e6;
            mirror[h].insert(value, id).expect("fresh id");
            live[h].push(id);
            t.ops.push(TraceOp::Insert { heap: name(h), id, value });
            continue;
        }
        pick -= mix.insert;
        if pick < mix.deletemin {
            if let Some((id, _)) = mirror[h].delete_min() {
                live[h].remove(id);
            }
            t.ops.push(TraceOp::DeleteMin { heap: name(h) });
            continue;
        }
        pick -= mix.deletemin;
        if pick < mix.decreasekey {
            if let Some(id) = live[h].pick(&mut rng) {
                let delta = rng.f64() * 100.0 + 0.001;
                mirror[h].decrease_key(id, delta).expect("live id");
                t.ops.push(TraceOp::DecreaseKey { heap: name(h), id, delta });
            } else {
                t.ops.push(TraceOp::FindMin { heap: name(h) });
            }
            continue;
        }
        pick -= mix.decreasekey;
        if pick < mix.meld {
            let g = (h + 1 + rng.below(POOL as u64 - 1) as usize) % POOL;
            t.ops.push(TraceOp::Meld { heap: name(h), other: name(g) });
            let moved = std::mem::replace(&mut mirror[g], crate::oracle::OracleHeap::new(StructureKind::Rp2));
            let mut moved_ids = std::mem::take(&mut live[g]);
            mirror[h].meld(moved).expect("disjoint ids");
            if moved_ids.ids.len() > live[h].ids.len() {
                std::mem::swap(&mut live[h], &mut moved_ids);
            }
            for &id in &moved_ids.ids {
                live[h].push(id);
            }
            t.ops.push(TraceOp::Make { heap: name(g) });
            continue;
        }
        if let Some(id) = live[h].pick(&mut rng) {
            mirror[h].delete(id).expect("live id");
            live[h].remove(id);
            t.ops.push(TraceOp::Delete { heap: name(h), id });
        } else {
            t.ops.push(TraceOp::FindMin { heap: name(h) });
        }
    }
    t
}

/// Directed graph as an edge list; vertices 0..n.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<(u32, u32, f64)>,
}

impl Graph {
    /// Random graph: m directed edges with distinct random endpoints,
    /// weights uniform in [0, 1).
    pub fn random(n: usize, m: usize, seed: u64) -> Graph {
        let mut rng = Rng::seeded(seed);
        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let u = rng.below(n as u64) as u32;
            let mut v = rng.below(n as u64) as u32;
            if u == v {
                v = (v + 1) % n as u32;
            }
            edges.push((u, v, rng.f64()));
        }
        Graph { n, edges }
    }

    pub fn parse(text: &str) -> Result<Graph, HeapError> {
        let mut edges = Vec::new();
        let mut n = 0usize;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut tok = line.split_whitespace();
            let bad = || HeapError::BadParameter(format!("graph line {}: expected `u v w`", i + 1));
            let u: u32 = tok.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let v: u32 = tok.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let w: f64 = tok.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            if w < 0.0 || !w.is_finite() {
                return Err(HeapError::BadParameter(format!(
                    "graph line {}: negative or non-finite weight",
                    i + 1
                )));
            }
            n = n.max(u as usize + 1).max(v as usize + 1);
            edges.push((u, v, w));
        }
        Ok(Graph { n, edges })
    }

    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        for (u, v, w) in &self.edges {
            writeln!(s, "{u} {v} {w}").expect("string write");
        }
        s
    }

    fn adjacency(&self) -> Vec<Vec<(u32, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v, w) in &self.edges {
            adj[u as usize].push((v, w));
        }
        adj
    }

    fn undirected_adjacency(&self) -> Vec<Vec<(u32, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v, w) in &self.edges {
            adj[u as usize].push((v, w));
            adj[v as usize].push((u, w));
        }
        adj
    }
}

#[derive(Debug, Clone)]
pub struct DijkstraResult {
    /// Distance per vertex; unreachable = +inf.
    pub dist: Vec<f64>,
    pub decrease_keys: u64,
    /// The heap ops performed, as a replayable trace.
    pub trace: Trace,
}

/// Dijkstra with insert-on-discovery and decrease-key on relaxation,
/// driven by a real heap of the given kind.
pub fn dijkstra(
    graph: &Graph,
    source: u32,
    kind: StructureKind,
    policy: MatchPolicy,
) -> Result<DijkstraResult, HeapError> {
    let adj = graph.adjacency();
    let mut arena = Arena::new();
    let h = arena.make_heap(HeapConfig::new(kind).with_policy(policy));
    let heap_name = "d".to_string();
    let mut trace = Trace::new(Some(kind));
    trace.ops.push(TraceOp::Make { heap: heap_name.clone() });
    let mut dist = vec![f64::INFINITY; graph.n];
    let mut handle: HashMap<u32, Handle> = HashMap::new();
    let mut decrease_keys = 0u64;
    dist[source as usize] = 0.0;
    handle.insert(source, arena.insert(h, 0.0, source as u64)?);
    trace.ops.push(TraceOp::Insert { heap: heap_name.clone(), id: source as u64, value: 0.0 });
    while let Some(item) = arena.delete_min(h)? {
        trace.ops.push(TraceOp::DeleteMin { heap: heap_name.clone() });
        let u = item.id as u32;
        handle.remove(&u);
        let du = item.value;
        for &(v, w) in &adj[u as usize] {
            let cand = du + w;
            let dv = &mut dist[v as usize];
            if cand < *dv {
                match handle.get(&v) {
                    None if dv.is_infinite() => {
                        handle.insert(v, arena.insert(h, cand, v as u64)?);
                        trace.ops.push(TraceOp::Insert {
                            heap: heap_name.clone(),
                            id: v as u64,
                            value: cand,
                        });
                    }
                    Some(&x) => {
                        let delta = *dv - cand;
                        arena.decrease_key(h, x, delta)?;
                        decrease_keys += 1;
                        trace.ops.push(TraceOp::DecreaseKey {
                            heap: heap_name.clone(),
                            id: v as u64,
                            delta,
                        });
                    }
                    // Already finalized (scanned): Dijkstra with
                    // nonnegative weights never improves a scanned
                    // vertex.
                    None => unreachable!("improved a scanned vertex"),
                }
                *dv = cand;
            }
        }
    }
    trace.ops.push(TraceOp::DeleteMin { heap: heap_name });
    Ok(DijkstraResult { dist, decrease_keys, trace })
}

/// Bellman-Ford oracle. Relaxes edges in a fixed order until a fixed
/// point; with nonnegative weights it computes each distance as the sum
/// of weights along the same shortest-path tree Dijkstra finds, so the
/// floating-point results match exactly.
pub fn bellman_ford(graph: &Graph, source: u32) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; graph.n];
    dist[source as usize] = 0.0;
    loop {
        let mut changed = false;
        for &(u, v, w) in &graph.edges {
            let du = dist[u as usize];
            if du.is_finite() && du + w < dist[v as usize] {
                dist[v as usize] = du + w;
                changed = true;
            }
        }
        if !changed {
            return dist;
        }
    }
}

#[derive(Debug, Clone)]
pub struct MstResult {
    /// Chosen edge weights, sorted ascending; sum them in this order for
    /// exact cross-implementation equality.
    pub weights: Vec<f64>,
    pub decrease_keys: u64,
    pub trace: Trace,
}

impl MstResult {
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Prim's algorithm over the undirected view of the graph, one
/// component at a time, driven by a real heap with decrease-key.
pub fn prim(graph: &Graph, kind: StructureKind, policy: MatchPolicy) -> Result<MstResult, HeapError> {
    let adj = graph.undirected_adjacency();
    let mut arena = Arena::new();
    let heap_name = "p".to_string();
    let mut trace = Trace::new(Some(kind));
    let mut in_tree = vec![false; graph.n];
    let mut best = vec![f64::INFINITY; graph.n];
    let mut weights = Vec::new();
    let mut decrease_keys = 0u64;
    for start in 0..graph.n as u32 {
        if in_tree[start as usize] {
            continue;
        }
        let h = arena.make_heap(HeapConfig::new(kind).with_policy(policy));
        trace.ops.push(TraceOp::Make { heap: heap_name.clone() });
        let mut handle: HashMap<u32, Handle> = HashMap::new();
        best[start as usize] = 0.0;
        handle.insert(start, arena.insert(h, 0.0, start as u64)?);
        trace.ops.push(TraceOp::Insert { heap: heap_name.clone(), id: start as u64, value: 0.0 });
        while let Some(item) = arena.delete_min(h)? {
            trace.ops.push(TraceOp::DeleteMin { heap: heap_name.clone() });
            let u = item.id as u32;
            handle.remove(&u);
            in_tree[u as usize] = true;
            if u != start {
                weights.push(item.value);
            }
            for &(v, w) in &adj[u as usize] {
                if in_tree[v as usize] || w >= best[v as usize] {
                    continue;
                }
                match handle.get(&v) {
                    None => {
                        handle.insert(v, arena.insert(h, w, v as u64)?);
                        trace.ops.push(TraceOp::Insert {
                            heap: heap_name.clone(),
                            id: v as u64,
                            value: w,
                        });
                    }
                    Some(&x) => {
                        let delta = best[v as usize] - w;
                        arena.decrease_key(h, x, delta)?;
                        decrease_keys += 1;
                        trace.ops.push(TraceOp::DecreaseKey {
                            heap: heap_name.clone(),
                            id: v as u64,
                            delta,
                        });
                    }
                }
                best[v as usize] = w;
            }
        }
        trace.ops.push(TraceOp::DeleteMin { heap: heap_name.clone() });
    }
    weights.sort_by(f64::total_cmp);
    Ok(MstResult { weights, decrease_keys, trace })
}

/// Kruskal oracle with a plain union-find; returns the MST edge weights
/// sorted ascending for exact comparison against Prim.
pub fn kruskal(graph: &Graph) -> Vec<f64> {
    struct Dsu(Vec<u32>);
    impl Dsu {
        fn find(&mut self, x: u32) -> u32 {
            if self.0[x as usize] != x {
                let r = self.find(self.0[x as usize]);
                self.0[x as usize] = r;
                r
            } else {
                x
            }
        }
        fn union(&mut self, a: u32, b: u32) -> bool {
            let (ra, rb) = (self.find(a), self.find(b));
            if ra == rb {
                return false;
            }
            self.0[ra as usize] = rb;
            true
        }
    }
    let mut order: Vec<usize> = (0..graph.edges.len()).collect();
    order.sort_by(|&a, &b| {
        graph.edges[a].2.total_cmp(&graph.edges[b].2).then(a.cmp(&b))
    });
    let mut dsu = Dsu((0..graph.n as u32).collect());
    let mut weights = Vec::new();
    for i in order {
        let (u, v, w) = graph.edges[i];
        if u != v && dsu.union(u, v) {
            weights.push(w);
        }
    }
    weights.sort_by(f64::total_cmp);
    weights
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::TraceOp;

    #[test]
    fn sort_workload_shape() {
        let t = gen_sort(5, 7);
        let names: Vec<&str> = t.ops.iter().map(|o| o.name()).collect();
        assert_eq!(
            names,
            ["make", "insert", "insert", "insert", "insert", "insert",
             "deletemin", "deletemin", "deletemin", "deletemin", "deletemin"]
        );
        // Same seed, same trace.
        assert_eq!(gen_sort(5, 7).to_string(), t.to_string());
        assert_ne!(gen_sort(5, 8).to_string(), t.to_string());
    }

    #[test]
    fn random_workload_respects_kind_support() {
        let t = gen_random(4000, OpMix::STANDARD.for_kind(StructureKind::Tournament), 3);
        assert!(t.ops.iter().all(|o| !matches!(
            o,
            TraceOp::DecreaseKey { .. } | TraceOp::Delete { .. }
        )));
        let t = gen_random(4000, OpMix::STANDARD.for_kind(StructureKind::Rp2), 3);
        assert!(t.ops.iter().any(|o| matches!(o, TraceOp::DecreaseKey { .. })));
    }

    #[test]
    fn graph_parse_rejects_bad_weights() {
        assert!(Graph::parse("0 1 -2.0\n").is_err());
        assert!(Graph::parse("0 1 nan\n").is_err());
        let g = Graph::parse("# comment\n0 1 0.5\n1 2 0.25\n").unwrap();
        assert_eq!((g.n, g.edges.len()), (3, 2));
        assert_eq!(Graph::parse(&g.to_text()).unwrap().edges, g.edges);
    }

    #[test]
    fn dijkstra_two_node_graph() {
        let g = Graph::parse("0 1 2.5\n").unwrap();
        let r = dijkstra(&g, 0, StructureKind::Rp2, MatchPolicy::Unrestricted).unwrap();
        assert_eq!(r.dist, vec![0.0, 2.5]);
    }

    #[test]
    fn dijkstra_matches_bellman_ford_and_uses_decreases() {
        let g = Graph::random(300, 1500, 5);
        let bf = bellman_ford(&g, 0);
        let mut any_decreases = false;
        for kind in [
            StructureKind::Rp1,
            StructureKind::Rp2,
            StructureKind::VariantA(1),
            StructureKind::Capped(3),
        ] {
            let r = dijkstra(&g, 0, kind, kind.default_policy()).unwrap();
            assert_eq!(r.dist, bf, "kind {kind}");
            any_decreases |= r.decrease_keys > 0;
        }
        assert!(any_decreases);
    }

    #[test]
    fn prim_matches_kruskal() {
        for seed in 0..5 {
            let g = Graph::random(120, 600, seed);
            let mst = prim(&g, StructureKind::Rp2, MatchPolicy::Unrestricted).unwrap();
            assert_eq!(mst.weights, kruskal(&g), "seed {seed}");
        }
    }

    #[test]
    fn rng_is_stable() {
        let mut a = Rng::seeded(1);
        let mut b = Rng::seeded(1);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let x = a.f64();
        assert!((0.0..1.0).contains(&x));
    }
}
