//! Backward computation of the feasible and satisfiable set tables.

mod table;

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

pub use table::{Mode, SetTable};

use crate::dynamics::SystemModel;
use crate::error::{Error, Result};
use crate::exec::{self, Parallelism};
use crate::formula::{FormulaSpec, IndexSet, RegionExpr};
use crate::geometry::{region_to_boxes_with, Aabb, Approx, BoxUnion, Resolution};
use crate::reach::{one_step_feasible, one_step_satisfiable, ReachOptions, ReachStats, Target};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecomputeOptions {
    pub eps: Resolution,
    pub reach: ReachOptions,
    /// Largest number of boxes allowed in one entry.
    pub entry_limit: usize,
}

impl PrecomputeOptions {
    pub fn new(eps: Resolution) -> Self {
        PrecomputeOptions {
            eps,
            reach: ReachOptions::default(),
            entry_limit: 1_000_000,
        }
    }

    pub fn with_parallelism(mut self, p: Parallelism) -> Self {
        self.reach.parallelism = p;
        self
    }
}

/// Counters gathered while building a table.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PrecomputeStats {
    pub entries: usize,
    pub boxes: usize,
    pub one_step_calls: usize,
    pub reach: ReachStats,
}

/// Builds the table of `mode` for `spec` on `model`.
///
/// Instants are processed from `T` down to `0`. At each instant the
/// one-step set of every successor entry is computed once and shared by
/// all index sets, then the entries of the instant are assembled in
/// parallel. Entry `(T+1, ∅)` stores the state domain and stands for the
/// unconstrained space.
pub fn compute_tables(
    model: &SystemModel,
    spec: &FormulaSpec,
    mode: Mode,
    opts: &PrecomputeOptions,
) -> Result<(SetTable, PrecomputeStats)> {
    let n = model.state_dim();
    spec.check_geometric(n)?;
    let domain = model.state_domain().clone();
    if domain.intervals().iter().any(|iv| !iv.lo.is_finite() || !iv.hi.is_finite()) {
        return Err(Error::Config("state domain must be bounded".into()));
    }
    let eps = &opts.eps;
    if !eps.is_valid() {
        return Err(Error::Config(format!("invalid resolution {eps}")));
    }

    let horizon = spec.horizon();
    let mut entries = BTreeMap::new();
    let mut stats = PrecomputeStats::default();
    entries.insert(
        (horizon + 1, IndexSet::empty()),
        BoxUnion::from_box(domain.clone(), eps.clone()),
    );

    let covers = CoverCache::new(domain.clone(), eps.clone(), opts.reach.parallelism);
    for k in (0..=horizon).rev() {
        let sets = spec.potential_index_sets(k)?;
        let mut succ: Vec<(IndexSet, Vec<IndexSet>)> = Vec::with_capacity(sets.len());
        let mut needed: Vec<IndexSet> = Vec::new();
        for &set in &sets {
            let next = spec.successor_sets(set, k)?;
            needed.extend(next.iter().copied());
            succ.push((set, next));
        }
        needed.sort();
        needed.dedup();

        // Υ(X_{k+1}^{I'}) once per distinct successor entry.
        let mut one_step: HashMap<IndexSet, BoxUnion> = HashMap::new();
        for next in needed {
            let target = if k == horizon {
                Target::Everything
            } else {
                Target::Set(entries.get(&(k + 1, next)).ok_or(Error::MissingEntry {
                    k: k + 1,
                    set: next,
                })?)
            };
            let r = match mode {
                Mode::Feasible => one_step_feasible(model, target, k, eps, &opts.reach),
                Mode::Satisfiable => one_step_satisfiable(model, target, k, eps, &opts.reach),
            };
            let (set, s) = r.map_err(|e| relabel(e, k + 1, next))?;
            stats.one_step_calls += 1;
            stats.reach.absorb(&s);
            one_step.insert(next, set);
        }

        let built = exec::map(opts.reach.parallelism, &succ, |(set, nexts)| {
            build_entry(spec, &covers, &one_step, k, *set, nexts, n, opts)
        });
        for ((set, _), entry) in succ.iter().zip(built) {
            let entry = entry?;
            if mode == Mode::Feasible && k == 0 && *set == spec.all() && entry.is_empty() {
                log::warn!("entry (0, {set}) is empty: the formula cannot be met from any state");
            }
            entries.insert((k, *set), entry);
        }
    }

    stats.entries = entries.len();
    stats.boxes = entries.values().map(BoxUnion::len).sum();
    let table = SetTable {
        mode,
        eps: eps.clone(),
        formula_digest: spec.digest(),
        model_digest: model.digest().to_string(),
        entries,
    };
    Ok((table, stats))
}

/// Feasible and satisfiable tables with the same options.
pub fn compute_both(
    model: &SystemModel,
    spec: &FormulaSpec,
    opts: &PrecomputeOptions,
) -> Result<((SetTable, PrecomputeStats), (SetTable, PrecomputeStats))> {
    let x = compute_tables(model, spec, Mode::Feasible, opts)?;
    let y = compute_tables(model, spec, Mode::Satisfiable, opts)?;
    Ok((x, y))
}

#[allow(clippy::too_many_arguments)]
fn build_entry(
    spec: &FormulaSpec,
    covers: &CoverCache,
    one_step: &HashMap<IndexSet, BoxUnion>,
    k: usize,
    set: IndexSet,
    nexts: &[IndexSet],
    n: usize,
    opts: &PrecomputeOptions,
) -> Result<BoxUnion> {
    let mut acc = BoxUnion::empty(n, opts.eps.clone());
    for &next in nexts {
        let region = spec.consistent_region(k, set, next).with_dim(n)?;
        let cover = covers.get(&region)?;
        let part = cover.intersect(&one_step[&next])?;
        acc = acc.union(&part)?;
        if acc.len() > opts.entry_limit {
            acc = acc.coalesced();
        }
        if acc.len() > opts.entry_limit {
            return Err(Error::ResourceCeiling {
                k,
                set,
                limit: opts.entry_limit,
            });
        }
    }
    let acc = acc.coalesced();
    if acc.len() > opts.entry_limit {
        return Err(Error::ResourceCeiling {
            k,
            set,
            limit: opts.entry_limit,
        });
    }
    Ok(acc)
}

fn relabel(e: Error, k: usize, set: IndexSet) -> Error {
    match e {
        Error::ResourceCeiling { limit, .. } => Error::ResourceCeiling { k, set, limit },
        e => e,
    }
}

/// Inner box covers of consistent regions, clipped to the state domain and
/// keyed by their text form.
struct CoverCache {
    domain: Aabb,
    eps: Resolution,
    mode: Parallelism,
    cache: Mutex<HashMap<String, BoxUnion>>,
}

impl CoverCache {
    fn new(domain: Aabb, eps: Resolution, mode: Parallelism) -> Self {
        CoverCache {
            domain,
            eps,
            mode,
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn get(&self, r: &RegionExpr) -> Result<BoxUnion> {
        let key = r.to_string();
        if let Some(c) = self.cache.lock().expect("cover cache").get(&key) {
            return Ok(c.clone());
        }
        let c = region_to_boxes_with(r, &self.domain, &self.eps, Approx::Inner, self.mode)?;
        self.cache
            .lock()
            .expect("cover cache")
            .entry(key)
            .or_insert_with(|| c.clone());
        Ok(c)
    }
}
