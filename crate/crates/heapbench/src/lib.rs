//! Meldable heaps in the half-ordered representation, with cost counters,
//! structural audits, potential-function instrumentation, adversarial
//! instance builders, and a differential-testing oracle.
//!
//! The classic structures (tournament, one-pass and eager binomial queues,
//! type-1 and type-2 rank-pairing heaps, a two-pass pairing heap) all share
//! one node layout: every node has an ordered child, an unordered child, a
//! parent pointer, and a rank. Two weakened rank rules — `varianta:b` and
//! `capped:d` — exist to demonstrate, constructively, that the efficiency
//! of the real rules is fragile.

pub mod adversary;
pub mod analysis;
pub mod arena;
pub mod binomial;
pub mod dot;
pub mod key;
pub mod oracle;
pub mod pairing;
pub mod rp;
pub mod runner;
pub mod tournament;
pub mod trace;
pub mod workload;

pub use arena::{
    Arena, CostCounters, Handle, HeapConfig, HeapError, HeapId, Item, MatchPolicy, OpReport,
    StructureKind, NODE_BUDGET,
};
pub use key::Key;
