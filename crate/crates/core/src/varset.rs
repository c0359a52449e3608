//! Compact variable sets.
//!
//! Graphs handled by this crate are small (exact separation queries and the
//! ancestral solver are exponential in the node count), so a set of variable
//! ids fits in a single `u64` word.

use std::fmt;

/// Dense variable index inside a graph or a grounded problem.
pub type VarId = usize;

/// Maximum number of variables representable in a [`VarSet`].
pub const MAX_VARS: usize = 64;

/// A set of variable ids backed by a 64-bit mask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarSet(u64);

impl VarSet {
    pub const EMPTY: VarSet = VarSet(0);

    pub fn from_bits(bits: u64) -> Self {
        VarSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(v: VarId) -> Self {
        debug_assert!(v < MAX_VARS);
        VarSet(1u64 << v)
    }

    /// All ids in `0..n`.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_VARS);
        if n == MAX_VARS {
            VarSet(u64::MAX)
        } else {
            VarSet((1u64 << n) - 1)
        }
    }

    pub fn contains(self, v: VarId) -> bool {
        v < MAX_VARS && self.0 & (1u64 << v) != 0
    }

    pub fn insert(&mut self, v: VarId) {
        debug_assert!(v < MAX_VARS);
        self.0 |= 1u64 << v;
    }

    pub fn remove(&mut self, v: VarId) {
        self.0 &= !(1u64 << v);
    }

    pub fn with(self, v: VarId) -> Self {
        VarSet(self.0 | (1u64 << v))
    }

    pub fn without(self, v: VarId) -> Self {
        VarSet(self.0 & !(1u64 << v))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: VarSet) -> Self {
        VarSet(self.0 | other.0)
    }

    pub fn intersection(self, other: VarSet) -> Self {
        VarSet(self.0 & other.0)
    }

    pub fn difference(self, other: VarSet) -> Self {
        VarSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: VarSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: VarSet) -> bool {
        self.0 & other.0 == 0
    }

    /// Smallest member, if any.
    pub fn first(self) -> Option<VarId> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros() as VarId)
        }
    }

    pub fn iter(self) -> VarSetIter {
        VarSetIter(self.0)
    }

    /// Every subset of `self` with at most `max_len` members, in increasing
    /// size and then increasing bit order.
    pub fn subsets_up_to(self, max_len: usize) -> Vec<VarSet> {
        let members: Vec<VarId> = self.iter().collect();
        let mut out = Vec::new();
        for k in 0..=max_len.min(members.len()) {
            combinations(&members, k, &mut |c| {
                out.push(c.iter().copied().collect());
            });
        }
        out
    }
}

fn combinations(items: &[VarId], k: usize, f: &mut impl FnMut(&[VarId])) {
    fn rec(
        items: &[VarId],
        k: usize,
        start: usize,
        cur: &mut Vec<VarId>,
        f: &mut impl FnMut(&[VarId]),
    ) {
        if cur.len() == k {
            f(cur);
            return;
        }
        let need = k - cur.len();
        for i in start..=items.len().saturating_sub(need) {
            if i >= items.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, k, i + 1, cur, f);
            cur.pop();
        }
    }
    let mut cur = Vec::with_capacity(k);
    rec(items, k, 0, &mut cur, f);
}

pub struct VarSetIter(u64);

impl Iterator for VarSetIter {
    type Item = VarId;

    fn next(&mut self) -> Option<VarId> {
        if self.0 == 0 {
            return None;
        }
        let v = self.0.trailing_zeros() as VarId;
        self.0 &= self.0 - 1;
        Some(v)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for VarSetIter {}

impl FromIterator<VarId> for VarSet {
    fn from_iter<I: IntoIterator<Item = VarId>>(iter: I) -> Self {
        let mut s = VarSet::EMPTY;
        for v in iter {
            s.insert(v);
        }
        s
    }
}

impl<'a> FromIterator<&'a VarId> for VarSet {
    fn from_iter<I: IntoIterator<Item = &'a VarId>>(iter: I) -> Self {
        iter.into_iter().copied().collect()
    }
}

impl IntoIterator for VarSet {
    type Item = VarId;
    type IntoIter = VarSetIter;

    fn into_iter(self) -> VarSetIter {
        self.iter()
    }
}

/// Serialized as the sorted list of member ids.
impl serde::Serialize for VarSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> serde::Deserialize<'de> for VarSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let ids = Vec::<VarId>::deserialize(d)?;
        if let Some(bad) = ids.iter().find(|&&v| v >= MAX_VARS) {
            return Err(serde::de::Error::custom(format!(
                "variable id {bad} exceeds {MAX_VARS}"
            )));
        }
        Ok(ids.into_iter().collect())
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
