//! Finite unions of interior-disjoint closed boxes.

use std::cmp::Ordering;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

use super::{Aabb, Resolution};
use crate::error::{Error, Result};
use crate::exec::{self, Parallelism};

/// Below this size set operations run sequentially.
const PAR_THRESHOLD: usize = 512;

/// Union of pairwise interior-disjoint closed boxes in ℝⁿ.
///
/// `eps` records the resolution the set was built at; it takes no part in
/// the set algebra. Membership queries go through a lazily built bounding
/// volume hierarchy.
#[derive(Clone)]
pub struct BoxUnion {
    dim: usize,
    eps: Resolution,
    boxes: Vec<Aabb>,
    index: OnceLock<BoxIndex>,
}

impl BoxUnion {
    pub fn empty(dim: usize, eps: Resolution) -> Self {
        BoxUnion {
            dim,
            eps,
            boxes: Vec::new(),
            index: OnceLock::new(),
        }
    }

    pub fn from_box(b: Aabb, eps: Resolution) -> Self {
        BoxUnion {
            dim: b.dim(),
            eps,
            boxes: vec![b],
            index: OnceLock::new(),
        }
    }

    /// Wraps boxes the caller guarantees to be interior-disjoint.
    pub fn from_disjoint(dim: usize, eps: Resolution, boxes: Vec<Aabb>) -> Result<Self> {
        if let Some(b) = boxes.iter().find(|b| b.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: b.dim(),
            });
        }
        Ok(BoxUnion {
            dim,
            eps,
            boxes,
            index: OnceLock::new(),
        })
    }

    /// Builds a union from arbitrary (possibly overlapping) boxes.
    pub fn from_boxes(dim: usize, eps: Resolution, boxes: Vec<Aabb>) -> Result<Self> {
        let mut acc = BoxUnion::empty(dim, eps.clone());
        for b in boxes {
            if b.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: b.dim(),
                });
            }
            let single = BoxUnion::from_box(b, eps.clone());
            acc = acc.union(&single)?;
        }
        Ok(acc)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eps(&self) -> &Resolution {
        &self.eps
    }

    pub fn with_eps(mut self, eps: Resolution) -> Self {
        self.eps = eps;
        self
    }

    pub fn boxes(&self) -> &[Aabb] {
        &self.boxes
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn volume(&self) -> f64 {
        self.boxes.iter().map(Aabb::volume).fold(0.0, |a, v| a + v)
    }

    pub fn bounding_box(&self) -> Option<Aabb> {
        let mut it = self.boxes.iter();
        let first = it.next()?.clone();
        Some(it.fold(first, |acc, b| acc.hull(b)))
    }

    fn index(&self) -> &BoxIndex {
        self.index.get_or_init(|| BoxIndex::build(&self.boxes))
    }

    /// Calls `f` with every box whose closure meets `query`; stops early
    /// when `f` returns `false`.
    pub fn visit_intersecting<'s, F>(&'s self, query: &Aabb, f: F)
    where
        F: FnMut(&'s Aabb) -> bool,
    {
        if self.boxes.is_empty() {
            return;
        }
        self.index().visit(&self.boxes, query, f);
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        if x.len() != self.dim {
            return false;
        }
        let q = Aabb::point(x);
        let mut found = false;
        self.visit_intersecting(&q, |_| {
            found = true;
            false
        });
        found
    }

    /// Whether the closed box `b` is covered by the union.
    pub fn contains_box(&self, b: &Aabb) -> bool {
        let mut parts: SmallVec<[&Aabb; 16]> = SmallVec::new();
        let mut single = false;
        self.visit_intersecting(b, |c| {
            single = c.contains_box(b);
            parts.push(c);
            !single
        });
        single || covered_by(&parts, b)
    }

    /// Whether the closure of some box meets `b`.
    pub fn intersects_box(&self, b: &Aabb) -> bool {
        let mut found = false;
        self.visit_intersecting(b, |_| {
            found = true;
            false
        });
        found
    }

    fn check_dim(&self, other: &BoxUnion) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    pub fn intersect(&self, other: &BoxUnion) -> Result<BoxUnion> {
        self.check_dim(other)?;
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let boxes = par_flat_map(&small.boxes, |a| {
            let mut out = Vec::new();
            large.visit_intersecting(a, |b| {
                if let Some(m) = a.meet(b) {
                    out.push(m);
                }
                true
            });
            out
        });
        Ok(self.derived(boxes).coalesced())
    }

    pub fn intersect_box(&self, b: &Aabb) -> Result<BoxUnion> {
        self.intersect(&BoxUnion::from_box(b.clone(), self.eps.clone()))
    }

    pub fn difference(&self, other: &BoxUnion) -> Result<BoxUnion> {
        self.check_dim(other)?;
        if other.is_empty() || self.is_empty() {
            return Ok(self.clone());
        }
        let boxes = par_flat_map(&self.boxes, |a| {
            let mut cutters = Vec::new();
            other.visit_intersecting(a, |b| {
                cutters.push(b.clone());
                true
            });
            let mut pieces = vec![a.clone()];
            for c in &cutters {
                let mut next = Vec::with_capacity(pieces.len() + 4);
                for p in &pieces {
                    next.extend(p.subtract(c));
                }
                pieces = next;
                if pieces.is_empty() {
                    break;
                }
            }
            pieces
        });
        Ok(self.derived(boxes).coalesced())
    }

    pub fn union(&self, other: &BoxUnion) -> Result<BoxUnion> {
        self.check_dim(other)?;
        if other.is_empty() {
            return Ok(self.clone());
        }
        if self.is_empty() {
            return Ok(other.clone().with_eps(self.eps.clone()));
        }
        let extra = other.difference(self)?;
        let mut boxes = self.boxes.clone();
        boxes.extend(extra.boxes);
        Ok(self.derived(boxes).coalesced())
    }

    fn derived(&self, boxes: Vec<Aabb>) -> BoxUnion {
        BoxUnion {
            dim: self.dim,
            eps: self.eps.clone(),
            boxes,
            index: OnceLock::new(),
        }
    }

    /// Merges face-adjacent boxes with identical cross-sections and sorts the
    /// result into a canonical order.
    pub fn coalesced(mut self) -> BoxUnion {
        self.boxes.retain(|b| b.dim() == self.dim);
        loop {
            let before = self.boxes.len();
            for d in 0..self.dim {
                self.boxes = merge_along(std::mem::take(&mut self.boxes), d);
            }
            if self.boxes.len() == before {
                break;
            }
        }
        self.boxes.sort_by(cmp_boxes);
        self.index = OnceLock::new();
        self
    }
}

/// Whether `b` lies in the union of the interior-disjoint boxes `parts`.
/// Boxes of `parts` that miss `b` are ignored.
pub(crate) fn covered_by(parts: &[&Aabb], b: &Aabb) -> bool {
    let mut meeting: SmallVec<[&Aabb; 16]> = SmallVec::new();
    let mut covered = 0.0;
    for &c in parts {
        if let Some(v) = c.overlap_volume(b) {
            if c.contains_box(b) {
                return true;
            }
            covered += v;
            meeting.push(c);
        }
    }
    // A clear volume shortfall settles the negative case without
    // subtracting.
    let vol = b.volume();
    if vol > 0.0 && covered < vol * (1.0 - 1e-9) {
        return false;
    }
    let mut pending: Vec<Aabb> = vec![b.clone()];
    for c in meeting {
        let mut next = Vec::with_capacity(pending.len());
        for p in &pending {
            next.extend(p.subtract_closed(c));
        }
        pending = next;
        if pending.is_empty() {
            return true;
        }
    }
    pending.is_empty()
}

fn par_flat_map<F>(boxes: &[Aabb], f: F) -> Vec<Aabb>
where
    F: Fn(&Aabb) -> Vec<Aabb> + Sync + Send,
{
    let mode = if boxes.len() >= PAR_THRESHOLD {
        Parallelism::Parallel
    } else {
        Parallelism::Sequential
    };
    exec::flat_map(mode, boxes, f)
}

fn cmp_boxes(a: &Aabb, b: &Aabb) -> Ordering {
    for (x, y) in a.intervals().iter().zip(b.intervals()) {
        let o = x.lo.total_cmp(&y.lo).then(x.hi.total_cmp(&y.hi));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

fn merge_along(mut boxes: Vec<Aabb>, d: usize) -> Vec<Aabb> {
    if boxes.len() < 2 {
        return boxes;
    }
    let key = |a: &Aabb, b: &Aabb| -> Ordering {
        for (e, (x, y)) in a.intervals().iter().zip(b.intervals()).enumerate() {
            if e == d {
                continue;
            }
            let o = x.lo.total_cmp(&y.lo).then(x.hi.total_cmp(&y.hi));
            if o != Ordering::Equal {
                return o;
            }
        }
        a.interval(d).lo.total_cmp(&b.interval(d).lo)
    };
    boxes.sort_by(key);
    let mut out: Vec<Aabb> = Vec::with_capacity(boxes.len());
    for b in boxes {
        if let Some(last) = out.last_mut() {
            let same_section = last
                .intervals()
                .iter()
                .zip(b.intervals())
                .enumerate()
                .all(|(e, (x, y))| e == d || x == y);
            if same_section && last.interval(d).hi == b.interval(d).lo {
                let mut dims: Vec<_> = last.intervals().to_vec();
                dims[d].hi = b.interval(d).hi;
                *last = Aabb::from_intervals(dims);
                continue;
            }
        }
        out.push(b);
    }
    out
}

impl PartialEq for BoxUnion {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.eps == other.eps && self.boxes == other.boxes
    }
}

impl fmt::Debug for BoxUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoxUnion")
            .field("dim", &self.dim)
            .field("eps", &self.eps)
            .field("boxes", &self.boxes)
            .finish()
    }
}

#[derive(Serialize, Deserialize)]
struct BoxUnionRepr {
    dim: usize,
    eps: Resolution,
    boxes: Vec<Aabb>,
}

impl Serialize for BoxUnion {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        BoxUnionRepr {
            dim: self.dim,
            eps: self.eps.clone(),
            boxes: self.boxes.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BoxUnion {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = BoxUnionRepr::deserialize(deserializer)?;
        BoxUnion::from_disjoint(repr.dim, repr.eps, repr.boxes).map_err(serde::de::Error::custom)
    }
}

const LEAF_SIZE: usize = 8;

#[derive(Clone, Debug)]
enum Node {
    Leaf { bounds: Aabb, start: usize, end: usize },
    Inner { bounds: Aabb, left: usize, right: usize },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

/// Static bounding volume hierarchy over the boxes of a union.
#[derive(Clone, Debug)]
struct BoxIndex {
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl BoxIndex {
    fn build(boxes: &[Aabb]) -> Self {
        let mut index = BoxIndex {
            order: (0..boxes.len()).collect(),
            nodes: Vec::new(),
        };
        if !boxes.is_empty() {
            index.build_node(boxes, 0, boxes.len());
        }
        index
    }

    fn build_node(&mut self, boxes: &[Aabb], start: usize, end: usize) -> usize {
        let bounds = self.order[start + 1..end]
            .iter()
            .fold(boxes[self.order[start]].clone(), |acc, &i| acc.hull(&boxes[i]));
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { bounds, start, end });
            return id;
        }
        let axis = (0..bounds.dim())
            .max_by(|&a, &b| {
                bounds
                    .interval(a)
                    .width()
                    .total_cmp(&bounds.interval(b).width())
            })
            .unwrap_or(0);
        let center = |i: usize| boxes[i].interval(axis).mid();
        let mid = (start + end) / 2;
        self.order[start..end]
            .select_nth_unstable_by(mid - start, |&a, &b| center(a).total_cmp(&center(b)));
        self.nodes.push(Node::Leaf {
            bounds: bounds.clone(),
            start,
            end,
        });
        let left = self.build_node(boxes, start, mid);
        let right = self.build_node(boxes, mid, end);
        self.nodes[id] = Node::Inner { bounds, left, right };
        id
    }

    fn visit<'a, F>(&self, boxes: &'a [Aabb], query: &Aabb, mut f: F)
    where
        F: FnMut(&'a Aabb) -> bool,
    {
        let mut stack: SmallVec<[usize; 32]> = smallvec::smallvec![0];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if !node.bounds().intersects(query) {
                continue;
            }
            match *node {
                Node::Leaf { start, end, .. } => {
                    for &i in &self.order[start..end] {
                        if boxes[i].intersects(query) && !f(&boxes[i]) {
                            return;
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
    }
}
