//! Item keys: a finite `f64` value plus a caller-chosen unique id.
//!
//! Ties are broken by the lexicographic order on `(value, id)`, so the
//! comparison is a strict total order as long as ids are unique among live
//! items. A tombstoned key orders below every ordinary key; tombstones are
//! how arbitrary deletion is implemented (decrease to "minus infinity"
//! without touching the float).

use std::cmp::Ordering;

#[derive(Debug, Clone, Copy)]
pub struct Key {
    pub value: f64,
    pub id: u64,
    pub(crate) tombstone: bool,
}

impl Key {
    pub fn new(value: f64, id: u64) -> Self {
        Key { value, id, tombstone: false }
    }

    pub fn is_tombstone(&self) -> bool {
        self.tombstone
    }
}

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.tombstone, other.tombstone) {
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            // Two tombstones: value is meaningless, ids still break ties.
            (true, true) => self.id.cmp(&other.id),
            (false, false) => self
                .value
                .total_cmp(&other.value)
                .then_with(|| self.id.cmp(&other.id)),
        }
    }
}
