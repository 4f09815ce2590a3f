use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

use super::Interval;
use crate::error::{Error, Result};

pub(crate) type Dims = SmallVec<[Interval; 4]>;

/// Closed axis-aligned box `[lo_0, hi_0] x ... x [lo_{n-1}, hi_{n-1}]`.
#[derive(Clone, PartialEq)]
pub struct Aabb {
    dims: Dims,
}

impl Aabb {
    pub fn new(lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        let mut dims = Dims::with_capacity(lo.len());
        for (d, (&l, &h)) in lo.iter().zip(hi).enumerate() {
            if l.is_nan() || h.is_nan() || l > h {
                return Err(Error::InvalidBox(format!("dimension {d}: lo {l} > hi {h}")));
            }
            dims.push(Interval { lo: l, hi: h });
        }
        Ok(Aabb { dims })
    }

    pub fn from_intervals(dims: impl IntoIterator<Item = Interval>) -> Self {
        Aabb {
            dims: dims.into_iter().collect(),
        }
    }

    pub fn point(x: &[f64]) -> Self {
        Aabb::from_intervals(x.iter().map(|&v| Interval::point(v)))
    }

    /// Box spanning all of ℝⁿ.
    pub fn everything(n: usize) -> Self {
        Aabb::from_intervals((0..n).map(|_| Interval {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }))
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.dims
    }

    pub fn interval(&self, d: usize) -> Interval {
        self.dims[d]
    }

    pub fn lo(&self) -> Vec<f64> {
        self.dims.iter().map(|iv| iv.lo).collect()
    }

    pub fn hi(&self) -> Vec<f64> {
        self.dims.iter().map(|iv| iv.hi).collect()
    }

    pub fn center(&self) -> Vec<f64> {
        self.dims.iter().map(Interval::mid).collect()
    }

    pub fn volume(&self) -> f64 {
        self.dims.iter().map(Interval::width).product()
    }

    pub fn max_width(&self) -> f64 {
        self.dims.iter().map(Interval::width).fold(0.0, f64::max)
    }

    pub fn is_point(&self) -> bool {
        self.dims.iter().all(Interval::is_point)
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        x.len() == self.dims.len() && self.dims.iter().zip(x).all(|(iv, &v)| iv.contains(v))
    }

    pub fn contains_box(&self, other: &Aabb) -> bool {
        self.dims
            .iter()
            .zip(&other.dims)
            .all(|(a, b)| a.contains_interval(b))
    }

    /// Closed intersection test (touching faces count).
    pub fn intersects(&self, other: &Aabb) -> bool {
        self.dims
            .iter()
            .zip(&other.dims)
            .all(|(a, b)| a.lo <= b.hi && b.lo <= a.hi)
    }

    /// Volume of the closed intersection, `None` when the boxes are apart.
    pub fn overlap_volume(&self, other: &Aabb) -> Option<f64> {
        let mut v = 1.0;
        for (a, b) in self.dims.iter().zip(&other.dims) {
            let w = a.hi.min(b.hi) - a.lo.max(b.lo);
            if w < 0.0 {
                return None;
            }
            v *= w;
        }
        Some(v)
    }

    /// Closed intersection.
    pub fn intersection(&self, other: &Aabb) -> Option<Aabb> {
        let mut dims = Dims::with_capacity(self.dims.len());
        for (a, b) in self.dims.iter().zip(&other.dims) {
            dims.push(a.intersect(b)?);
        }
        Some(Aabb { dims })
    }

    /// Intersection as a set-algebra operand: pieces of measure zero are
    /// dropped unless an operand is itself flat in that dimension.
    pub(crate) fn meet(&self, other: &Aabb) -> Option<Aabb> {
        let mut dims = Dims::with_capacity(self.dims.len());
        for (a, b) in self.dims.iter().zip(&other.dims) {
            let iv = a.intersect(b)?;
            if iv.is_point() && !a.is_point() && !b.is_point() {
                return None;
            }
            dims.push(iv);
        }
        Some(Aabb { dims })
    }

    /// Whether subtracting `other` removes anything of positive measure
    /// (relative to `self`'s own dimensionality).
    fn cuts(&self, other: &Aabb) -> bool {
        self.dims.iter().zip(&other.dims).all(|(a, b)| {
            if a.is_point() {
                b.contains(a.lo)
            } else if b.is_point() {
                false
            } else {
                a.lo.max(b.lo) < a.hi.min(b.hi)
            }
        })
    }

    /// `self \ other` as disjoint boxes (measure semantics).
    pub(crate) fn subtract(&self, other: &Aabb) -> SmallVec<[Aabb; 4]> {
        if !self.cuts(other) {
            return smallvec::smallvec![self.clone()];
        }
        self.peel(other)
    }

    /// `self \ other` for closed covering checks: the result is empty iff
    /// `self ⊆ other`.
    pub(crate) fn subtract_closed(&self, other: &Aabb) -> SmallVec<[Aabb; 4]> {
        if !self.intersects(other) {
            return smallvec::smallvec![self.clone()];
        }
        self.peel(other)
    }

    fn peel(&self, other: &Aabb) -> SmallVec<[Aabb; 4]> {
        let mut out = SmallVec::new();
        let mut rest = self.clone();
        for d in 0..self.dims.len() {
            let o = other.dims[d];
            if rest.dims[d].lo < o.lo {
                let mut piece = rest.clone();
                piece.dims[d].hi = o.lo;
                out.push(piece);
                rest.dims[d].lo = o.lo;
            }
            if rest.dims[d].hi > o.hi {
                let mut piece = rest.clone();
                piece.dims[d].lo = o.hi;
                out.push(piece);
                rest.dims[d].hi = o.hi;
            }
        }
        out
    }

    pub fn bisect(&self, d: usize) -> (Aabb, Aabb) {
        let mid = self.dims[d].mid();
        let mut left = self.clone();
        let mut right = self.clone();
        left.dims[d].hi = mid;
        right.dims[d].lo = mid;
        (left, right)
    }

    /// All 2ⁿ corner points, in binary counting order.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let n = self.dims.len();
        let mut out = Vec::with_capacity(1 << n);
        for mask in 0..(1usize << n) {
            let v = (0..n)
                .map(|d| {
                    if mask & (1 << d) == 0 {
                        self.dims[d].lo
                    } else {
                        self.dims[d].hi
                    }
                })
                .collect();
            out.push(v);
        }
        out
    }

    pub fn hull(&self, other: &Aabb) -> Aabb {
        Aabb::from_intervals(self.dims.iter().zip(&other.dims).map(|(a, b)| a.hull(b)))
    }

    pub fn widen_ulp(&self) -> Aabb {
        Aabb::from_intervals(self.dims.iter().map(Interval::widen_ulp))
    }

    pub fn inflate(&self, slack: f64) -> Aabb {
        Aabb::from_intervals(self.dims.iter().map(|iv| iv.inflate(slack)))
    }

    /// Projection onto the given dimensions.
    pub fn project(&self, dims: &[usize]) -> Aabb {
        Aabb::from_intervals(dims.iter().map(|&d| self.dims[d]))
    }
}

impl fmt::Debug for Aabb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Aabb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (d, iv) in self.dims.iter().enumerate() {
            if d > 0 {
                write!(f, "x")?;
            }
            write!(f, "{iv}")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct AabbRepr {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Serialize for Aabb {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        AabbRepr {
            lo: self.lo(),
            hi: self.hi(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Aabb {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = AabbRepr::deserialize(deserializer)?;
        Aabb::new(&repr.lo, &repr.hi).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(lo: &[f64], hi: &[f64]) -> Aabb {
        Aabb::new(lo, hi).unwrap()
    }

    #[test]
    fn rejects_reversed_bounds() {
        assert!(Aabb::new(&[1.0], &[0.0]).is_err());
        assert!(Aabb::new(&[0.0, 0.0], &[1.0]).is_err());
    }

    #[test]
    fn subtract_leaves_disjoint_pieces() {
        let a = b(&[0.0, 0.0], &[4.0, 4.0]);
        let hole = b(&[1.0, 1.0], &[2.0, 2.0]);
        let pieces = a.subtract(&hole);
        let vol: f64 = pieces.iter().map(Aabb::volume).sum();
        assert_eq!(vol, 15.0);
        for (i, p) in pieces.iter().enumerate() {
            for q in &pieces[i + 1..] {
                assert!(p.meet(q).is_none());
            }
        }
    }

    #[test]
    fn touching_boxes_do_not_cut() {
        let a = b(&[0.0], &[1.0]);
        let c = b(&[1.0], &[2.0]);
        assert_eq!(a.subtract(&c).len(), 1);
        assert!(a.meet(&c).is_none());
        assert!(a.intersects(&c));
    }

    #[test]
    fn closed_subtraction_detects_cover() {
        let p = Aabb::point(&[2.0]);
        assert!(p.subtract_closed(&b(&[0.0], &[2.0])).is_empty());
        assert_eq!(p.subtract_closed(&b(&[0.0], &[1.9])).len(), 1);
    }
}
