//! End-to-end acceptance suite. Each test checks one headline property
//! of the library and prints a single `PASS [i/11]` line on success.

use std::collections::HashMap;
use std::time::Instant;

use heapbench::adversary::{
    build_capped_instance, build_varianta_skeleton, control_rp1, run_insert_deletemin_attack,
    run_varianta_cycle,
};
use heapbench::analysis::{ceil_log2, color_map, dump_nodes, snapshot, Color, Scheme};
use heapbench::oracle::{differential_run, exhaustive_small};
use heapbench::runner::{run_trace, write_csv, CheckMode, RunOptions};
use heapbench::workload::{bellman_ford, dijkstra, gen_random, kruskal, prim, Graph, OpMix, Rng};
use heapbench::{Arena, HeapConfig, HeapId, MatchPolicy, StructureKind};

fn pass(i: u32, what: &str) {
    println!("PASS [{i}/11] {what}");
}

fn heap(kind: StructureKind) -> (Arena, HeapId) {
    let mut arena = Arena::new();
    let h = arena.make_heap(HeapConfig::new(kind));
    (arena, h)
}

/// Size of every root's half tree, computed from a full node dump.
fn root_sizes(arena: &Arena, h: HeapId) -> Vec<(i32, usize)> {
    let nodes = dump_nodes(arena, h).expect("dump");
    let mut children: HashMap<u64, Vec<u64>> = HashMap::new();
    let mut by_id: HashMap<u64, &heapbench::analysis::NodeInfo> = HashMap::new();
    for n in &nodes {
        by_id.insert(n.id, n);
        if let Some(p) = n.parent {
            children.entry(p).or_default().push(n.id);
        }
    }
    let mut sizes = Vec::new();
    for n in &nodes {
        if n.parent.is_none() {
            let mut count = 0usize;
            let mut stack = vec![n.id];
            while let Some(id) = stack.pop() {
                count += 1;
                if let Some(cs) = children.get(&id) {
                    stack.extend(cs.iter().copied());
                }
            }
            sizes.push((by_id[&n.id].rank, count));
        }
    }
    sizes
}

/// Random single-heap op stream (no melds) used by the structural and
/// potential checks below; `check` runs after every op.
fn fuzz_ops(
    kind: StructureKind,
    ops: usize,
    seed: u64,
    with_decreases: bool,
    mut check: impl FnMut(&mut Arena, HeapId, &str),
) {
    let (mut arena, h) = heap(kind);
    let mut rng = Rng::seeded(seed);
    let mut next_id = 0u64;
    for _ in 0..ops {
        let roll = rng.below(10);
        let op = if roll <= 4 {
            arena.insert(h, rng.f64() * 1e4, next_id).expect("insert");
            next_id += 1;
            "insert"
        } else if roll <= 6 || !with_decreases {
            arena.delete_min(h).expect("deletemin");
            "deletemin"
        } else {
            let nodes = dump_nodes(&arena, h).expect("dump");
            if nodes.is_empty() {
                continue;
            }
            let id = nodes[rng.below(nodes.len() as u64) as usize].id;
            let x = arena.handle_by_id(h, id).expect("live id");
            if roll == 9 {
                arena.delete(h, x).expect("delete");
                "delete"
            } else {
                arena.decrease_key(h, x, rng.f64() * 100.0 + 0.001).expect("decrease");
                "decreasekey"
            }
        };
        check(&mut arena, h, op);
    }
}

#[test]
fn oracle_equivalence_on_large_random_traces() {
    let start = Instant::now();
    let standard = gen_random(100_000, OpMix::STANDARD, 0xace0);
    let no_decreases =
        gen_random(100_000, OpMix::STANDARD.for_kind(StructureKind::Tournament), 0xace1);
    let rp_kinds = [
        StructureKind::Rp1,
        StructureKind::Rp2,
        StructureKind::VariantA(2),
        StructureKind::Capped(2),
    ];
    let policies = [
        MatchPolicy::Unrestricted,
        MatchPolicy::RedFirst,
        MatchPolicy::DisassemblyFirst,
    ];
    let mut runs = 0;
    for kind in rp_kinds {
        for policy in policies {
            differential_run(&standard, kind, policy)
                .unwrap_or_else(|m| panic!("{kind:?} {policy:?}: {m:?}"));
            runs += 1;
        }
    }
    for kind in [
        StructureKind::Tournament,
        StructureKind::BqOnePass,
        StructureKind::BqEager,
        StructureKind::Pairing,
    ] {
        differential_run(&no_decreases, kind, kind.default_policy())
            .unwrap_or_else(|m| panic!("{kind:?}: {m:?}"));
        runs += 1;
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 30, "took {elapsed:?}, budget 30 s");
    pass(1, &format!(
        "oracle equivalence: {runs} kind/policy runs of 100k ops, zero mismatches, {elapsed:.2?}"
    ));
}

#[test]
fn exhaustive_small_sequences_agree_with_the_oracle() {
    let start = Instant::now();
    let mut total = 0u64;
    for kind in [StructureKind::Rp1, StructureKind::Rp2] {
        let report = exhaustive_small(kind, 6);
        assert_eq!(report.failures, Vec::<String>::new(), "{kind:?}");
        assert!(report.sequences > 1000, "{kind:?} enumerated {}", report.sequences);
        total += report.sequences;
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}, budget 60 s");
    pass(2, &format!(
        "exhaustive equivalence: all {total} sequences of length ≤ 6 clean, {elapsed:.2?}"
    ));
}

#[test]
fn rank_bounds_subtree_sizes_below() {
    // Smallest type-2 half tree of rank k has Fibonacci size F(k+2).
    let mut fib = vec![0usize, 1];
    while *fib.last().unwrap() < heapbench::NODE_BUDGET {
        let n = fib.len();
        fib.push(fib[n - 1] + fib[n - 2]);
    }
    assert_eq!([fib[2], fib[3], fib[4], fib[5], fib[6]], [1, 2, 3, 5, 8]);
    let mut checked = 0u64;
    for kind in [StructureKind::Rp1, StructureKind::Rp2] {
        let fib = &fib;
        fuzz_ops(kind, 4000, 0xb0bb, true, |arena, h, op| {
            for (rank, size) in root_sizes(arena, h) {
                let need = match kind {
                    StructureKind::Rp1 => 1usize << rank,
                    _ => fib[rank as usize + 2],
                };
                assert!(
                    size >= need,
                    "{kind:?} after {op}: rank {rank} tree has {size} nodes, needs {need}"
                );
                checked += 1;
            }
        });
    }
    pass(3, &format!(
        "rank bounds: {checked} half trees sized ≥ 2^k (type 1) / F(k+2) (type 2)"
    ));
}

#[test]
fn binomial_half_trees_stay_perfect() {
    let mut checked = 0u64;
    for kind in [StructureKind::BqOnePass, StructureKind::BqEager] {
        fuzz_ops(kind, 10_000, 0xbeef, false, |arena, h, op| {
            for (rank, size) in root_sizes(arena, h) {
                assert_eq!(
                    size,
                    1usize << rank,
                    "{kind:?} after {op}: rank {rank} tree is not perfect"
                );
                checked += 1;
            }
        });
    }
    pass(4, &format!("perfect trees: {checked} binomial half trees of exact size 2^k"));
}

#[test]
fn type2_potential_deltas_are_exact() {
    let scheme = Scheme::Type2GoodBad;
    let (mut arena, h) = heap(StructureKind::Rp2);
    let mut rng = Rng::seeded(0xdead);
    let mut next_id = 0u64;
    let mut phi = snapshot(&arena, h, scheme, None).expect("snapshot").value;
    let mut checked = 0u64;
    for _ in 0..10_000 {
        let before = phi;
        let roll = rng.below(10);
        if roll <= 4 {
            arena.insert(h, rng.f64() * 1e4, next_id).expect("insert");
            next_id += 1;
            phi = snapshot(&arena, h, scheme, None).expect("snapshot").value;
            assert_eq!(phi - before, 2, "insert must add exactly 2 potential");
        } else if roll <= 7 {
            let Some(item) = arena.delete_min(h).expect("deletemin") else { continue };
            let _ = item;
            let report = arena.last_op();
            let k = i64::from(report.deleted_rank.expect("nonempty delete-min"));
            let fair = report.fair_matches as i64;
            assert_eq!(report.unfair_matches, 0, "one-pass matching links equal ranks only");
            phi = snapshot(&arena, h, scheme, None).expect("snapshot").value;
            // Disassembly raises the potential by at most k−2 net of the
            // deleted root, and every fair match pays one unit back.
            assert!(
                phi - before + fair <= k - 2,
                "delete-min of rank {k}: ΔΦ {} with {fair} fair matches",
                phi - before
            );
        } else {
            let nodes = dump_nodes(&arena, h).expect("dump");
            if nodes.is_empty() {
                continue;
            }
            let id = nodes[rng.below(nodes.len() as u64) as usize].id;
            let x = arena.handle_by_id(h, id).expect("live id");
            arena.decrease_key(h, x, rng.f64() * 100.0 + 0.001).expect("decrease");
            phi = snapshot(&arena, h, scheme, None).expect("snapshot").value;
            assert!(phi - before <= 4, "decrease-key raised potential by {}", phi - before);
        }
        checked += 1;
    }
    pass(5, &format!(
        "type-2 potential: {checked} ops with exact insert/+2, decrease ≤ +4, delete-min ≤ k−2−fair"
    ));
}

#[test]
fn type1_decrease_color_lemmas() {
    let (mut arena, h) = heap(StructureKind::Rp1);
    let mut rng = Rng::seeded(0xc010);
    let mut next_id = 0u64;
    for _ in 0..2000 {
        arena.insert(h, rng.f64() * 1e6, next_id).expect("insert");
        next_id += 1;
    }
    let mut decreases = 0u64;
    while decreases < 10_000 {
        match rng.below(10) {
            0 => {
                arena.insert(h, rng.f64() * 1e6, next_id).expect("insert");
                next_id += 1;
            }
            1 => {
                arena.delete_min(h).expect("deletemin");
            }
            _ => {
                let nodes = dump_nodes(&arena, h).expect("dump");
                if nodes.is_empty() {
                    continue;
                }
                let id = nodes[rng.below(nodes.len() as u64) as usize].id;
                let before = color_map(&arena, h).expect("colors");
                let x = arena.handle_by_id(h, id).expect("live id");
                arena.decrease_key(h, x, rng.f64() * 100.0 + 0.001).expect("decrease");
                let after = color_map(&arena, h).expect("colors");
                let mut new_reds = 0u32;
                for (id, c) in &after {
                    if *c == Color::Red && before.get(id) != Some(&Color::Red) {
                        assert_ne!(
                            before.get(id),
                            Some(&Color::Green),
                            "decrease-key turned green node {id} red"
                        );
                        new_reds += 1;
                    }
                }
                assert!(new_reds <= 1, "decrease-key made {new_reds} new red nodes");
                let cascade = &arena.last_op().cascade;
                for (i, step) in cascade.iter().enumerate() {
                    assert!(
                        !step.was_yellow || i + 1 == cascade.len(),
                        "cascade continued past a yellow node"
                    );
                }
                decreases += 1;
            }
        }
    }
    pass(6, &format!(
        "type-1 colors: {decreases} decrease-keys, no green→red, ≤ 1 new red, cascades stop at yellow"
    ));
}

#[test]
fn tournament_comparisons_fit_the_amortized_budget() {
    let mix = OpMix::STANDARD.for_kind(StructureKind::Tournament);
    let mut worst = 0i64;
    for seed in 0..100u64 {
        let trace = gen_random(2000, mix, 0x7070 + seed);
        let report = run_trace(&trace, RunOptions::new(StructureKind::Tournament)).expect("run");
        let mut actual = 0i64;
        let mut budget = 0i64;
        for row in &report.rows {
            actual += row.comparisons as i64;
            match row.op.as_str() {
                "insert" | "meld" => budget += 2,
                "deletemin" if row.n_before > 0 => budget += 2 * ceil_log2(row.n_before),
                _ => {}
            }
        }
        assert!(
            actual <= budget,
            "seed {seed}: {actual} comparisons exceed budget {budget}"
        );
        worst = worst.max(budget - actual);
    }
    pass(7, "tournament budget: comparisons ≤ 2·(inserts+melds) + Σ 2⌈lg n⌉ on 100 traces");
    let _ = worst;
}

#[test]
fn varianta_cascade_cost_grows_superlinearly() {
    let start = Instant::now();
    let mut steps = Vec::new();
    for k in [16u32, 32, 64] {
        let mut a = build_varianta_skeleton(1, k).expect("build");
        let summary = run_varianta_cycle(&mut a, 1, k).expect("cycle");
        steps.push((k, summary.rank_steps));
    }
    for pair in steps.windows(2) {
        let ((k0, s0), (k1, s1)) = (pair[0], pair[1]);
        assert!(
            s1 >= 3 * s0,
            "doubling k from {k0} to {k1} only grew rank steps {s0} → {s1}"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 10, "took {elapsed:?}, budget 10 s");
    pass(8, &format!(
        "superlinear cascades: rank steps {:?} for k = 16, 32, 64, {elapsed:.2?}",
        steps.iter().map(|&(_, s)| s).collect::<Vec<_>>()
    ));
}

#[test]
fn capped_attack_processes_every_tree_and_the_control_does_not() {
    let k = 15u32;
    let mut attacked = build_capped_instance(0, k).expect("build");
    let n = attacked.arena.len(attacked.h).expect("len");
    let cycles = run_insert_deletemin_attack(&mut attacked, 50).expect("attack");
    for (i, c) in cycles.iter().enumerate() {
        assert!(
            c.trees_processed > k as usize,
            "attack cycle {i} touched only {} half trees",
            c.trees_processed
        );
    }
    let mut control = control_rp1(n, 0x5eed).expect("control");
    run_insert_deletemin_attack(&mut control, 64).expect("warm-up");
    let bound = (ceil_log2(n) + 1) as usize;
    let calm = run_insert_deletemin_attack(&mut control, 50).expect("control run");
    for (i, c) in calm.iter().enumerate() {
        assert!(
            c.trees_processed <= bound,
            "control cycle {i} touched {} half trees, bound {bound}",
            c.trees_processed
        );
    }
    pass(9, &format!(
        "degraded rank rule: every cycle touches ≥ {} half trees of the {n}-node instance, healthy control ≤ {bound}",
        k + 1
    ));
}

#[test]
fn graph_clients_match_their_oracles() {
    let kinds = [
        StructureKind::Rp1,
        StructureKind::Rp2,
        StructureKind::VariantA(2),
        StructureKind::Capped(2),
    ];
    let mut decreases = 0u64;
    for seed in 0..50u64 {
        let g = Graph::random(1000, 5000, 0x9a9a + seed);
        let expect = bellman_ford(&g, 0);
        for kind in kinds {
            let got = dijkstra(&g, 0, kind, kind.default_policy()).expect("dijkstra");
            assert_eq!(got.dist, expect, "seed {seed} {kind:?}");
            decreases += got.decrease_keys;
        }
        let mst = prim(&g, StructureKind::Rp2, MatchPolicy::Unrestricted).expect("prim");
        assert_eq!(mst.weights, kruskal(&g), "seed {seed} MST");
    }
    assert!(decreases > 0, "the workload never exercised decrease-key");
    pass(10, &format!(
        "graph clients: 50 graphs, shortest paths and MSTs exact, {decreases} decrease-keys used"
    ));
}

#[test]
fn identical_runs_render_identical_csv() {
    let trace = gen_random(20_000, OpMix::STANDARD, 0xd15c);
    let render = || {
        let mut opts = RunOptions::new(StructureKind::Rp2);
        opts.check = CheckMode::Cheap;
        opts.scheme = Some(Scheme::Type2GoodBad);
        let report = run_trace(&trace, opts).expect("run");
        let mut buf = Vec::new();
        write_csv(&report.rows, true, &mut buf).expect("csv");
        buf
    };
    let a = render();
    let b = render();
    assert!(!a.is_empty() && a == b, "two renders differ");
    pass(11, &format!("determinism: two renders produced {} identical bytes", a.len()));
}
