use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Set of sub-formula indices `1..=64`, stored as a bitmask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet(u64);

impl IndexSet {
    pub const CAPACITY: usize = 64;

    pub const fn empty() -> Self {
        IndexSet(0)
    }

    /// `{1, ..., n}`.
    pub fn first(n: usize) -> Self {
        assert!(n <= Self::CAPACITY);
        if n == 64 {
            IndexSet(u64::MAX)
        } else {
            IndexSet((1u64 << n) - 1)
        }
    }

    pub const fn from_bits(bits: u64) -> Self {
        IndexSet(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(i: usize) -> Self {
        let mut s = IndexSet::empty();
        s.insert(i);
        s
    }

    pub fn contains(self, i: usize) -> bool {
        (1..=Self::CAPACITY).contains(&i) && self.0 & (1 << (i - 1)) != 0
    }

    pub fn insert(&mut self, i: usize) {
        assert!(
            (1..=Self::CAPACITY).contains(&i),
            "index {i} outside 1..={}",
            Self::CAPACITY
        );
        self.0 |= 1 << (i - 1);
    }

    pub fn remove(&mut self, i: usize) {
        if (1..=Self::CAPACITY).contains(&i) {
            self.0 &= !(1 << (i - 1));
        }
    }

    pub fn union(self, other: IndexSet) -> IndexSet {
        IndexSet(self.0 | other.0)
    }

    pub fn intersection(self, other: IndexSet) -> IndexSet {
        IndexSet(self.0 & other.0)
    }

    pub fn difference(self, other: IndexSet) -> IndexSet {
        IndexSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: IndexSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Indices in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(i + 1)
        })
    }

    /// All subsets of `self`, in ascending bitmask order.
    pub fn subsets(self) -> impl Iterator<Item = IndexSet> {
        let free = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let s = next?;
            next = if s == free {
                None
            } else {
                Some(s.wrapping_sub(free) & free)
            };
            Some(IndexSet(s))
        })
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = IndexSet::empty();
        for i in iter {
            s.insert(i);
        }
        s
    }
}

impl<const N: usize> From<[usize; N]> for IndexSet {
    fn from(v: [usize; N]) -> Self {
        v.into_iter().collect()
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, i) in self.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for IndexSet {
    type Err = String;

    /// Accepts `{1,2}`, `1,2`, `{}` or the empty string.
    fn from_str(s: &str) -> Result<Self, String> {
        let inner = s.trim();
        let inner = inner
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .unwrap_or(inner);
        let mut set = IndexSet::empty();
        for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let i: usize = part
                .parse()
                .map_err(|_| format!("bad index `{part}` in `{s}`"))?;
            if !(1..=IndexSet::CAPACITY).contains(&i) {
                return Err(format!("index {i} outside 1..={}", IndexSet::CAPACITY));
            }
            set.insert(i);
        }
        Ok(set)
    }
}

impl Serialize for IndexSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for IndexSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(deserializer)?;
        if let Some(bad) = v.iter().find(|i| !(1..=IndexSet::CAPACITY).contains(*i)) {
            return Err(serde::de::Error::custom(format!("index {bad} out of range")));
        }
        Ok(v.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_parse() {
        let s = IndexSet::from([2, 3, 5]);
        assert_eq!(s.to_string(), "{2,3,5}");
        assert_eq!("{2,3,5}".parse::<IndexSet>().unwrap(), s);
        assert_eq!("{}".parse::<IndexSet>().unwrap(), IndexSet::empty());
        assert!("{0}".parse::<IndexSet>().is_err());
    }

    #[test]
    fn subsets_ascending() {
        let s = IndexSet::from([3, 5]);
        let subs: Vec<_> = s.subsets().collect();
        assert_eq!(
            subs,
            vec![
                IndexSet::empty(),
                IndexSet::from([3]),
                IndexSet::from([5]),
                IndexSet::from([3, 5])
            ]
        );
        assert_eq!(IndexSet::empty().subsets().count(), 1);
    }

    #[test]
    fn full_capacity() {
        let s = IndexSet::first(64);
        assert_eq!(s.len(), 64);
        assert!(s.contains(64));
        assert_eq!(s.iter().last(), Some(64));
    }

    #[test]
    fn json_is_index_list() {
        let s = IndexSet::from([1, 4]);
        assert_eq!(serde_json::to_string(&s).unwrap(), "[1,4]");
        let back: IndexSet = serde_json::from_str("[1,4]").unwrap();
        assert_eq!(back, s);
    }
}
