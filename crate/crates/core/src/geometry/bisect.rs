//! Level-synchronous branch-and-bound over boxes.

use super::{Aabb, Resolution};
use crate::exec::{self, Parallelism};

/// Outcome of classifying one candidate box.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject,
    Undecided,
}

/// Result of a bisection run.
#[derive(Clone, Debug, Default)]
pub struct Bisection {
    pub accepted: Vec<Aabb>,
    /// Terminal boxes that were never decided.
    pub undecided: Vec<Aabb>,
    pub processed: usize,
    pub rejected: usize,
}

/// The frontier plus accepted boxes grew past the configured limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LimitExceeded(pub usize);

/// Classifies `roots` and bisects undecided boxes until they are terminal
/// at `res`.
///
/// Every level of the tree is classified as one batch, so the parallel
/// and sequential modes visit the same boxes in the same order and return
/// identical results.
pub fn branch_and_bound<F>(
    roots: Vec<Aabb>,
    res: &Resolution,
    mode: Parallelism,
    limit: Option<usize>,
    classify: F,
) -> Result<Bisection, LimitExceeded>
where
    F: Fn(&Aabb) -> Decision + Sync + Send,
{
    let mut out = Bisection::default();
    let mut frontier = roots;
    while !frontier.is_empty() {
        let decisions = exec::map(mode, &frontier, &classify);
        out.processed += frontier.len();
        let mut next = Vec::new();
        for (b, d) in frontier.into_iter().zip(decisions) {
            match d {
                Decision::Accept => out.accepted.push(b),
                Decision::Reject => out.rejected += 1,
                Decision::Undecided => match res.split_dim(&b) {
                    Some(dim) => {
                        let (l, r) = b.bisect(dim);
                        next.push(l);
                        next.push(r);
                    }
                    None => out.undecided.push(b),
                },
            }
        }
        if let Some(limit) = limit {
            let live = out.accepted.len() + next.len();
            if live > limit {
                return Err(LimitExceeded(live));
            }
        }
        frontier = next;
    }
    Ok(out)
}
