//! One-step feasible and satisfiable sets by branch-and-bound over state
//! boxes.
//!
//! Both operators return inner approximations: every accepted state box is
//! certified with interval enclosures of the dynamics, and boxes still
//! undecided at the finest resolution are dropped.

use serde::{Deserialize, Serialize};

use crate::dynamics::{InputSet, SystemModel};
use crate::error::{Error, Result};
use crate::exec::Parallelism;
use crate::formula::IndexSet;
use smallvec::SmallVec;

use crate::geometry::{
    branch_and_bound, covered_by, Aabb, BoxUnion, Decision, Interval, Resolution,
};

/// Set the successor must land in.
#[derive(Clone, Copy, Debug)]
pub enum Target<'a> {
    /// No constraint on the successor.
    Everything,
    Set(&'a BoxUnion),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReachOptions {
    /// Maximum number of concrete inputs tried per state box when
    /// certifying existence of a good input.
    pub input_candidates: usize,
    /// Finest dyadic level of the input grid, per input dimension, used both
    /// for candidate generation and for the input partition in satisfiable
    /// mode.
    pub input_depth: u32,
    /// Abort when accepted plus pending boxes exceed this count.
    pub box_limit: Option<usize>,
    pub parallelism: Parallelism,
}

impl Default for ReachOptions {
    fn default() -> Self {
        ReachOptions {
            input_candidates: 81,
            input_depth: 5,
            box_limit: Some(1_000_000),
            parallelism: Parallelism::default(),
        }
    }
}

/// Diagnostics of one operator run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReachStats {
    pub processed: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub discarded: usize,
    pub discarded_volume: f64,
}

impl ReachStats {
    pub fn absorb(&mut self, other: &ReachStats) {
        self.processed += other.processed;
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.discarded += other.discarded;
        self.discarded_volume += other.discarded_volume;
    }
}

/// `{x ∈ 𝒳 | ∃u ∈ 𝒰_k : f(x, u) ∈ target}`, inner approximation.
pub fn one_step_feasible(
    model: &SystemModel,
    target: Target<'_>,
    k: usize,
    eps: &Resolution,
    opts: &ReachOptions,
) -> Result<(BoxUnion, ReachStats)> {
    run(model, target, k, eps, opts, Quantifier::Exists)
}

/// `{x ∈ 𝒳 | ∀u ∈ 𝒰_k : f(x, u) ∈ target}`, inner approximation.
pub fn one_step_satisfiable(
    model: &SystemModel,
    target: Target<'_>,
    k: usize,
    eps: &Resolution,
    opts: &ReachOptions,
) -> Result<(BoxUnion, ReachStats)> {
    run(model, target, k, eps, opts, Quantifier::ForAll)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Quantifier {
    Exists,
    ForAll,
}

fn run(
    model: &SystemModel,
    target: Target<'_>,
    k: usize,
    eps: &Resolution,
    opts: &ReachOptions,
    q: Quantifier,
) -> Result<(BoxUnion, ReachStats)> {
    let n = model.state_dim();
    if !eps.is_valid() {
        return Err(Error::Config(format!("invalid resolution {eps}")));
    }
    if let Resolution::PerDim(v) = eps {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
    }
    let domain = model.state_domain().clone();
    let target = match target {
        Target::Everything => {
            let mut stats = ReachStats::default();
            stats.processed = 1;
            stats.accepted = 1;
            return Ok((BoxUnion::from_box(domain, eps.clone()), stats));
        }
        Target::Set(t) => {
            if t.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: t.dim(),
                });
            }
            t
        }
    };
    if target.is_empty() {
        return Ok((BoxUnion::empty(n, eps.clone()), ReachStats::default()));
    }

    let inputs = model.input_set(k);
    let plan = InputPlan::new(inputs, opts);
    let dynamics = model.dynamics();
    let classify = |bx: &Aabb| -> Decision {
        let image = |u: &Aabb| dynamics.enclose(bx, u);
        let hulls: SmallVec<[Aabb; 1]> = plan.pieces.iter().map(image).collect();
        // Target boxes near the image of the whole input set. Every input
        // image inside one of the hulls is tested against this short list
        // only; any other image goes through the full index.
        let mut near: Vec<&Aabb> = Vec::new();
        for h in &hulls {
            target.visit_intersecting(h, |c| {
                near.push(c);
                true
            });
        }
        if near.is_empty() {
            // both quantifiers fail when no image meets the target
            return Decision::Reject;
        }
        let inside = |img: &Aabb| {
            if hulls.iter().any(|h| h.contains_box(img)) {
                covered_by(&near, img)
            } else {
                target.contains_box(img)
            }
        };
        let meets = |img: &Aabb| {
            if hulls.iter().any(|h| h.contains_box(img)) {
                near.iter().any(|c| c.intersects(img))
            } else {
                target.intersects_box(img)
            }
        };
        match q {
            Quantifier::Exists => {
                if plan.candidates.iter().any(|u| inside(&image(u))) {
                    return Decision::Accept;
                }
                Decision::Undecided
            }
            Quantifier::ForAll => {
                if plan.candidates.iter().any(|u| !meets(&image(u))) {
                    return Decision::Reject;
                }
                if hulls.iter().all(|h| inside(h))
                    || plan.partition.iter().all(|u| inside(&image(u)))
                {
                    return Decision::Accept;
                }
                Decision::Undecided
            }
        }
    };

    let run = branch_and_bound(vec![domain], eps, opts.parallelism, opts.box_limit, classify)
        .map_err(|e| Error::ResourceCeiling {
            k,
            set: IndexSet::empty(),
            limit: opts.box_limit.unwrap_or(e.0),
        })?;
    let stats = ReachStats {
        processed: run.processed,
        accepted: run.accepted.len(),
        rejected: run.rejected,
        discarded: run.undecided.len(),
        discarded_volume: run.undecided.iter().map(Aabb::volume).sum(),
    };
    log::debug!(
        "reach k={k}: {} processed, {} accepted, {} rejected, {} discarded (volume {:.3e})",
        stats.processed,
        stats.accepted,
        stats.rejected,
        stats.discarded,
        stats.discarded_volume
    );
    let set = BoxUnion::from_disjoint(n, eps.clone(), run.accepted)?.coalesced();
    Ok((set, stats))
}

/// Input boxes used by the classifier. All three lists depend only on the
/// input set and the options, never on the target, so the operators are
/// monotone in the target and in the state resolution.
struct InputPlan {
    /// The whole input set as boxes (one box, or one point per finite input).
    pieces: Vec<Aabb>,
    /// Concrete inputs as degenerate boxes, in a fixed order.
    candidates: Vec<Aabb>,
    /// A finer partition of the input set into boxes.
    partition: Vec<Aabb>,
}

impl InputPlan {
    fn new(inputs: &InputSet, opts: &ReachOptions) -> Self {
        match inputs {
            InputSet::Points { points } => {
                let pts: Vec<Aabb> = points.iter().map(|p| Aabb::point(p)).collect();
                InputPlan {
                    pieces: pts.clone(),
                    candidates: pts.clone(),
                    partition: pts,
                }
            }
            InputSet::Box(b) => InputPlan {
                pieces: vec![b.clone()],
                candidates: box_candidates(b, opts.input_candidates, opts.input_depth),
                partition: grid(b, opts.input_depth.min(partition_depth(b.dim()))),
            },
        }
    }
}

/// Keeps the satisfiable-mode partition at a few hundred boxes.
fn partition_depth(m: usize) -> u32 {
    match m {
        0 | 1 => 6,
        2 => 3,
        _ => 2,
    }
}

/// Points of the dyadic grids of `b`: level `l` has `2^l + 1` points per
/// non-degenerate axis, endpoints included. Uses the finest level up to
/// `depth` whose full grid fits in `budget`, listing the center first and
/// then each level's new points, coarse to fine.
fn box_candidates(b: &Aabb, budget: usize, depth: u32) -> Vec<Aabb> {
    let free = b.intervals().iter().filter(|iv| !iv.is_point()).count() as u32;
    let fits = |l: u32| {
        ((1usize << l) + 1)
            .checked_pow(free)
            .is_some_and(|n| n <= budget.max(1))
    };
    let level = (0..=depth.min(16)).take_while(|&l| fits(l)).last().unwrap_or(0);
    let steps = 1usize << level;
    // index j on the finest grid first appears at level `level - tz(j)`
    let first_level = |j: usize| {
        if j == 0 || j == steps {
            1.min(level)
        } else {
            level - j.trailing_zeros().min(level)
        }
    };
    let mut points: Vec<(u32, Vec<f64>)> = vec![(0, Vec::new())];
    for iv in b.intervals() {
        let axis: Vec<(u32, f64)> = if iv.is_point() || level == 0 {
            vec![(0, if iv.is_point() { iv.lo } else { iv.mid() })]
        } else {
            (0..=steps)
                .map(|j| {
                    let v = if j == steps {
                        iv.hi
                    } else {
                        iv.lo + iv.width() * j as f64 / steps as f64
                    };
                    (first_level(j), v)
                })
                .collect()
        };
        points = points
            .into_iter()
            .flat_map(|(l, p)| {
                axis.iter().map(move |&(al, v)| {
                    let mut p = p.clone();
                    p.push(v);
                    (l.max(al), p)
                })
            })
            .collect();
    }
    let center = b.center();
    points.retain(|(_, p)| *p != center);
    // stable sort keeps lexicographic order within a level
    points.sort_by_key(|(l, _)| *l);
    let mut out = vec![Aabb::point(&center)];
    out.extend(points.iter().map(|(_, p)| Aabb::point(p)));
    out
}

/// Splits every non-degenerate dimension of `b` into `2^level` parts.
fn grid(b: &Aabb, level: u32) -> Vec<Aabb> {
    let parts = 1usize << level.min(16);
    let mut cells = vec![Vec::<Interval>::new()];
    for iv in b.intervals() {
        let pieces: Vec<Interval> = if iv.is_point() {
            vec![*iv]
        } else {
            let w = iv.width() / parts as f64;
            (0..parts)
                .map(|i| {
                    let lo = iv.lo + w * i as f64;
                    let hi = if i + 1 == parts { iv.hi } else { iv.lo + w * (i + 1) as f64 };
                    Interval::new(lo, hi)
                })
                .collect()
        };
        cells = cells
            .into_iter()
            .flat_map(|c| {
                pieces.iter().map(move |p| {
                    let mut c = c.clone();
                    c.push(*p);
                    c
                })
            })
            .collect();
    }
    cells.into_iter().map(Aabb::from_intervals).collect()
}
