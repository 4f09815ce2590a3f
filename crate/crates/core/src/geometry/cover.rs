//! Box covers of symbolic regions.

use serde::{Deserialize, Serialize};

use super::bisect::{branch_and_bound, Decision};
use super::{Aabb, BoxUnion, Resolution};
use crate::error::{Error, Result};
use crate::exec::Parallelism;
use crate::formula::{AffinePredicate, RegionExpr};

/// Which side of the region boundary the cover errs on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Approx {
    /// Every box lies inside the region.
    #[default]
    Inner,
    /// The boxes cover the region.
    Outer,
}

/// Covers `{x ∈ domain : x ⊨ r}` with disjoint boxes.
///
/// Boxes, `true` and single-coordinate predicates are represented exactly.
/// Other predicates are resolved by bisecting `domain` down to `res`;
/// boundary cells are dropped for [`Approx::Inner`] and kept for
/// [`Approx::Outer`].
pub fn region_to_boxes(
    r: &RegionExpr,
    domain: &Aabb,
    res: &Resolution,
    approx: Approx,
) -> Result<BoxUnion> {
    region_to_boxes_with(r, domain, res, approx, Parallelism::default())
}

pub fn region_to_boxes_with(
    r: &RegionExpr,
    domain: &Aabb,
    res: &Resolution,
    approx: Approx,
    mode: Parallelism,
) -> Result<BoxUnion> {
    if !res.is_valid() {
        return Err(Error::Config(format!("invalid resolution {res}")));
    }
    let (inner, outer) = bounds(r, domain, res, mode)?;
    Ok(match approx {
        Approx::Inner => inner,
        Approx::Outer => outer,
    })
}

fn bounds(
    r: &RegionExpr,
    domain: &Aabb,
    res: &Resolution,
    mode: Parallelism,
) -> Result<(BoxUnion, BoxUnion)> {
    let n = domain.dim();
    let exact = |b: Option<Aabb>| {
        let u = match b {
            Some(b) => BoxUnion::from_box(b, res.clone()),
            None => BoxUnion::empty(n, res.clone()),
        };
        (u.clone(), u)
    };
    Ok(match r {
        RegionExpr::True => exact(Some(domain.clone())),
        RegionExpr::Box(b) => {
            if b.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: b.dim(),
                });
            }
            exact(domain.meet(b))
        }
        RegionExpr::Predicate(p) => {
            if p.dim() > n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: p.dim(),
                });
            }
            match p.axis_bounds() {
                Some((d, lo, hi)) => {
                    let mut dims = vec![super::Interval::new(f64::NEG_INFINITY, f64::INFINITY); n];
                    dims[d] = super::Interval::new(lo, hi);
                    exact(domain.meet(&Aabb::from_intervals(dims)))
                }
                None => predicate_bounds(p, domain, res, mode)?,
            }
        }
        RegionExpr::Atom(name) => return Err(Error::UnboundAtom(name.clone())),
        RegionExpr::Not(a) => {
            let (ai, ao) = bounds(a, domain, res, mode)?;
            let whole = BoxUnion::from_box(domain.clone(), res.clone());
            (whole.difference(&ao)?, whole.difference(&ai)?)
        }
        RegionExpr::And(a, b) => {
            let (ai, ao) = bounds(a, domain, res, mode)?;
            let (bi, bo) = bounds(b, domain, res, mode)?;
            (ai.intersect(&bi)?, ao.intersect(&bo)?)
        }
        RegionExpr::Or(a, b) => {
            let (ai, ao) = bounds(a, domain, res, mode)?;
            let (bi, bo) = bounds(b, domain, res, mode)?;
            (ai.union(&bi)?, ao.union(&bo)?)
        }
    })
}

fn predicate_bounds(
    p: &AffinePredicate,
    domain: &Aabb,
    res: &Resolution,
    mode: Parallelism,
) -> Result<(BoxUnion, BoxUnion)> {
    if domain.intervals().iter().any(|iv| !iv.lo.is_finite() || !iv.hi.is_finite()) {
        return Err(Error::Config(
            "general predicates need a bounded state domain".into(),
        ));
    }
    let run = branch_and_bound(vec![domain.clone()], res, mode, None, |b| {
        let (lo, hi) = p.range(b);
        if lo >= 0.0 {
            Decision::Accept
        } else if hi < 0.0 {
            Decision::Reject
        } else {
            Decision::Undecided
        }
    })
    .expect("no limit configured");
    let n = domain.dim();
    let inner = BoxUnion::from_disjoint(n, res.clone(), run.accepted.clone())?.coalesced();
    let mut all = run.accepted;
    all.extend(run.undecided);
    let outer = BoxUnion::from_disjoint(n, res.clone(), all)?.coalesced();
    Ok((inner, outer))
}
