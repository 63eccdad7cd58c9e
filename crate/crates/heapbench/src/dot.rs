//! DOT (graph-description) export of the four tree representations, for
//! eyeballing structures during debugging.

use std::fmt::Write;
use std::str::FromStr;

use crate::arena::{Arena, HeapError, HeapId, StructureKind};
use crate::tournament::{expand_full, expand_half_empty, to_heap_ordered, HeapOrderedView, MatchView, RankLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DotView {
    HalfOrdered,
    HeapOrdered,
    Full,
    HalfEmpty,
}

impl FromStr for DotView {
    type Err = HeapError;

    fn from_str(s: &str) -> Result<Self, HeapError> {
        match s {
            "half-ordered" => Ok(DotView::HalfOrdered),
            "heap-ordered" => Ok(DotView::HeapOrdered),
            "full" => Ok(DotView::Full),
            "half-empty" => Ok(DotView::HalfEmpty),
            _ => Err(HeapError::BadParameter(format!("unknown view `{s}`"))),
        }
    }
}

fn node_label(id: u64, value: f64, rank: i32) -> String {
    format!("{id}:{value} [{rank}]")
}

fn rank_label(r: RankLabel) -> String {
    match r {
        RankLabel::Exact(k) => format!("[{k}]"),
        RankLabel::AtLeast(k) => format!("[\u{2265}{k}]"),
    }
}

/// Render a heap as DOT. Ordered-child edges are solid, unordered-child
/// edges dashed. The full and half-empty views reconstruct match nodes
/// and are only defined for tournament heaps.
pub fn export_dot(arena: &Arena, h: HeapId, view: DotView) -> Result<String, HeapError> {
    let mut out = String::new();
    writeln!(out, "digraph heap {{").expect("string write");
    writeln!(out, "  node [shape=box];").expect("string write");
    match view {
        DotView::HalfOrdered => {
            let roots = arena.roots(h)?;
            let mut stack: Vec<u32> = Vec::new();
            for r in &roots {
                stack.push(arena.resolve(*r)?);
            }
            while let Some(x) = stack.pop() {
                let n = arena.node(x);
                writeln!(out, "  n{x} [label=\"{}\"];", node_label(n.key.id, n.key.value, n.rank))
                    .expect("string write");
                if let Some(c) = n.ord {
                    writeln!(out, "  n{x} -> n{c};").expect("string write");
                    stack.push(c);
                }
                if let Some(c) = n.unord {
                    writeln!(out, "  n{x} -> n{c} [style=dashed];").expect("string write");
                    stack.push(c);
                }
            }
        }
        DotView::HeapOrdered => {
            let mut counter = 0usize;
            for r in arena.roots(h)? {
                let v = to_heap_ordered(arena, r)?;
                render_multi(&v, &mut counter, &mut out);
            }
        }
        DotView::Full | DotView::HalfEmpty => {
            if arena.kind(h)? != StructureKind::Tournament {
                return Err(HeapError::Unsupported {
                    op: "full/half-empty view",
                    kind: arena.kind(h)?.to_string(),
                });
            }
            let mut counter = 0usize;
            for r in arena.roots(h)? {
                let v = if view == DotView::Full {
                    expand_full(arena, r)?
                } else {
                    expand_half_empty(arena, r)?
                };
                render_match(&v, &mut counter, &mut out);
            }
        }
    }
    writeln!(out, "}}").expect("string write");
    Ok(out)
}

fn render_multi(v: &HeapOrderedView, counter: &mut usize, out: &mut String) -> usize {
    let me = *counter;
    *counter += 1;
    writeln!(out, "  n{me} [label=\"{}\"];", node_label(v.item.id, v.item.value, v.rank))
        .expect("string write");
    for c in &v.children {
        let cid = render_multi(c, counter, out);
        writeln!(out, "  n{me} -> n{cid};").expect("string write");
    }
    me
}

fn render_match(v: &MatchView, counter: &mut usize, out: &mut String) -> usize {
    let me = *counter;
    *counter += 1;
    let label = match v.item {
        Some(item) => format!("{}:{} {}", item.id, item.value, rank_label(v.rank)),
        None => rank_label(v.rank),
    };
    writeln!(out, "  n{me} [label=\"{label}\"];").expect("string write");
    for c in [&v.left, &v.right].into_iter().flatten() {
        let cid = render_match(c, counter, out);
        writeln!(out, "  n{me} -> n{cid};").expect("string write");
    }
    me
}
