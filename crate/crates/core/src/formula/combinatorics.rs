//! Index-set bookkeeping for the backward recursion and the monitor.

use super::{FormulaSpec, IndexSet, Op, RegionExpr};
use crate::error::{Error, Result};

/// Sub-formulae whose window ends before, contains, or starts after an
/// instant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Effective {
    pub before: IndexSet,
    pub now: IndexSet,
    pub after: IndexSet,
}

impl FormulaSpec {
    fn partition(&self, k: usize) -> Effective {
        let mut e = Effective {
            before: IndexSet::empty(),
            now: IndexSet::empty(),
            after: IndexSet::empty(),
        };
        for s in self.subformulae() {
            if s.window.b < k {
                e.before.insert(s.index);
            } else if k < s.window.a {
                e.after.insert(s.index);
            } else {
                e.now.insert(s.index);
            }
        }
        e
    }

    fn check_instant(&self, k: usize, max: usize) -> Result<()> {
        if k > max {
            return Err(Error::InstantOutOfRange { k, max });
        }
        Ok(())
    }

    pub fn effective_indices(&self, k: usize) -> Result<Effective> {
        self.check_instant(k, self.horizon())?;
        Ok(self.partition(k))
    }

    /// Indices that every potential set at `k` contains, and the `U'`
    /// indices that may or may not still be pending.
    fn mandatory_and_free(&self, k: usize) -> (IndexSet, IndexSet) {
        let e = self.partition(k);
        let mut mandatory = e.after;
        let mut free = IndexSet::empty();
        for i in e.now.iter() {
            let s = self.get(i);
            if s.op == Op::G || s.window.a == k {
                mandatory.insert(i);
            } else {
                free.insert(i);
            }
        }
        (mandatory, free)
    }

    /// Remaining sets the monitor can hold at instant `k`, in ascending
    /// bitmask order. At `k = T + 1` this is `{∅}`.
    pub fn potential_index_sets(&self, k: usize) -> Result<Vec<IndexSet>> {
        self.check_instant(k, self.horizon() + 1)?;
        if k == self.horizon() + 1 {
            return Ok(vec![IndexSet::empty()]);
        }
        let (mandatory, free) = self.mandatory_and_free(k);
        Ok(free.subsets().map(|s| s.union(mandatory)).collect())
    }

    pub fn is_potential(&self, k: usize, set: IndexSet) -> bool {
        if k > self.horizon() + 1 {
            return false;
        }
        if k == self.horizon() + 1 {
            return set.is_empty();
        }
        let (mandatory, free) = self.mandatory_and_free(k);
        mandatory.is_subset(set) && set.is_subset(mandatory.union(free))
    }

    /// Potential sets at `k + 1` compatible with `set` at `k`: an until
    /// discharged before `k + 1` stays discharged.
    pub fn successor_sets(&self, set: IndexSet, k: usize) -> Result<Vec<IndexSet>> {
        self.check_instant(k, self.horizon())?;
        if !self.is_potential(k, set) {
            return Err(Error::NotPotential { k, set });
        }
        if k == self.horizon() {
            return Ok(vec![IndexSet::empty()]);
        }
        let next = self.partition(k + 1).now;
        let gone: IndexSet = next
            .iter()
            .filter(|&i| self.get(i).op == Op::UPrime && !set.contains(i))
            .collect();
        Ok(self
            .potential_index_sets(k + 1)?
            .into_iter()
            .filter(|s| s.intersection(gone).is_empty())
            .collect())
    }

    /// Untils pending in `set` and discharged in `next`.
    pub fn satisfaction_set(&self, set: IndexSet, next: IndexSet) -> IndexSet {
        set.difference(next)
            .iter()
            .filter(|&i| i <= self.len() && self.get(i).op == Op::UPrime)
            .collect()
    }

    /// Region the state at `k` must lie in for the remaining set to move
    /// from `set` to `next`; conjuncts appear in index order.
    pub fn consistent_region(&self, k: usize, set: IndexSet, next: IndexSet) -> RegionExpr {
        let sat = self.satisfaction_set(set, next);
        let active = set.intersection(self.partition(k).now);
        let parts: Vec<RegionExpr> = active
            .iter()
            .map(|i| {
                let s = self.get(i);
                match s.op {
                    Op::G => s.left.clone(),
                    Op::UPrime if sat.contains(i) => {
                        RegionExpr::and_all([s.left.clone(), s.right_region().clone()])
                    }
                    Op::UPrime => RegionExpr::minus(s.left.clone(), s.right_region().clone()),
                }
            })
            .collect();
        RegionExpr::and_all(parts.iter().flat_map(|p| p.conjuncts()).cloned())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{normalize, parse_formula};

    fn five() -> FormulaSpec {
        let src = "G[0,2](h1u) && G[3,7](h1u & hg) && F[5,15](hf) && G[8,11](hg) && (h1u) U'[8,14] (h2u)";
        normalize(&parse_formula(src).unwrap()).unwrap()
    }

    fn s<const N: usize>(v: [usize; N]) -> IndexSet {
        IndexSet::from(v)
    }

    #[test]
    fn effective_partition() {
        let f = five();
        let e = f.effective_indices(7).unwrap();
        assert_eq!((e.before, e.now, e.after), (s([1]), s([2, 3]), s([4, 5])));
        assert_eq!(f.effective_indices(9).unwrap().now, s([3, 4, 5]));
        assert!(f.effective_indices(0).unwrap().before.is_empty());
        assert!(f.effective_indices(16).is_err());
    }

    #[test]
    fn potential_sets() {
        let f = five();
        assert_eq!(f.potential_index_sets(8).unwrap(), vec![s([4, 5]), s([3, 4, 5])]);
        assert_eq!(
            f.potential_index_sets(12).unwrap(),
            vec![IndexSet::empty(), s([3]), s([5]), s([3, 5])]
        );
        assert_eq!(f.potential_index_sets(16).unwrap(), vec![IndexSet::empty()]);
        // index 3 started at 5 and may already be discharged by 7
        assert_eq!(f.potential_index_sets(7).unwrap(), vec![s([2, 4, 5]), s([2, 3, 4, 5])]);
    }

    #[test]
    fn successors() {
        let f = five();
        assert_eq!(
            f.successor_sets(s([3, 4, 5]), 11).unwrap(),
            f.potential_index_sets(12).unwrap()
        );
        assert_eq!(
            f.successor_sets(s([2, 3, 4, 5]), 7).unwrap(),
            vec![s([4, 5]), s([3, 4, 5])]
        );
        assert_eq!(f.successor_sets(s([2, 4, 5]), 7).unwrap(), vec![s([4, 5])]);
        assert_eq!(f.successor_sets(s([3]), 15).unwrap(), vec![IndexSet::empty()]);
        assert!(matches!(
            f.successor_sets(s([1]), 7),
            Err(Error::NotPotential { .. })
        ));
    }

    #[test]
    fn satisfaction_sets() {
        let f = five();
        assert_eq!(f.satisfaction_set(s([3, 4, 5]), IndexSet::empty()), s([3, 5]));
        assert_eq!(f.satisfaction_set(s([3, 4, 5]), s([3])), s([5]));
        assert_eq!(f.satisfaction_set(s([3, 4, 5]), s([3, 5])), IndexSet::empty());
    }

    #[test]
    fn consistent_regions() {
        let f = five();
        let r = f.consistent_region(11, s([3, 4, 5]), s([3]));
        assert_eq!(r.to_string(), "!hf & hg & h1u & h2u");
        let r = f.consistent_region(11, s([3, 4, 5]), s([3, 5]));
        assert_eq!(r.to_string(), "!hf & hg & h1u & !h2u");
        assert_eq!(f.consistent_region(1, s([2, 3, 4, 5]), s([2, 3, 4, 5])), RegionExpr::True);
    }
}
