//! Exhaustive dynamic programming on a finite state grid.
//!
//! The state domain is cut into equal cells, each represented by its
//! center; the successor of a cell under an input is the cell containing
//! the image of its center. Inputs are a finite set (the listed points, or
//! a regular grid over an input box). On this finite abstraction the
//! backward recursion is evaluated exactly, which makes it a reference for
//! the box-based tables, valid at grid resolution only.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::dynamics::{InputSet, SystemModel};
use crate::error::{Error, Result};
use crate::exec::{self, Parallelism};
use crate::formula::{FormulaSpec, IndexSet};
use crate::geometry::{Aabb, BoxUnion, Interval, Resolution};
use crate::precompute::{Mode, SetTable};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridOptions {
    /// Cell size; must divide the state domain evenly.
    pub cell: Resolution,
    /// Spacing of the input grid used for box input sets. Ignored for
    /// finite input sets.
    pub input_step: Option<Resolution>,
    /// Largest allowed `cells × inputs` product.
    pub limit: usize,
    pub parallelism: Parallelism,
}

impl GridOptions {
    pub fn new(cell: Resolution) -> Self {
        GridOptions {
            cell,
            input_step: None,
            limit: 50_000_000,
            parallelism: Parallelism::default(),
        }
    }
}

/// Cell layout over the state domain.
#[derive(Clone, Debug)]
pub struct Grid {
    lo: Vec<f64>,
    size: Vec<f64>,
    shape: Vec<usize>,
}

impl Grid {
    pub fn new(domain: &Aabb, cell: &Resolution) -> Result<Self> {
        let n = domain.dim();
        let mut lo = Vec::with_capacity(n);
        let mut size = Vec::with_capacity(n);
        let mut shape = Vec::with_capacity(n);
        for (d, iv) in domain.intervals().iter().enumerate() {
            let h = cell.at(d);
            let cells = iv.width() / h;
            let rounded = cells.round();
            if !(h > 0.0) || !cells.is_finite() || rounded < 1.0 || (cells - rounded).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "cell size {h} does not divide [{}, {}] evenly",
                    iv.lo, iv.hi
                )));
            }
            lo.push(iv.lo);
            size.push(h);
            shape.push(rounded as usize);
        }
        Ok(Grid { lo, size, shape })
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    fn coords(&self, mut i: usize) -> Vec<usize> {
        let mut c = vec![0; self.shape.len()];
        for d in (0..self.shape.len()).rev() {
            c[d] = i % self.shape[d];
            i /= self.shape[d];
        }
        c
    }

    fn linear(&self, c: &[usize]) -> usize {
        c.iter().zip(&self.shape).fold(0, |acc, (&x, &s)| acc * s + x)
    }

    pub fn center(&self, i: usize) -> Vec<f64> {
        self.coords(i)
            .iter()
            .enumerate()
            .map(|(d, &c)| self.lo[d] + (c as f64 + 0.5) * self.size[d])
            .collect()
    }

    pub fn cell_box(&self, i: usize) -> Aabb {
        Aabb::from_intervals(self.coords(i).iter().enumerate().map(|(d, &c)| {
            let hi = if c + 1 == self.shape[d] {
                self.lo[d] + self.shape[d] as f64 * self.size[d]
            } else {
                self.lo[d] + (c + 1) as f64 * self.size[d]
            };
            Interval::new(self.lo[d] + c as f64 * self.size[d], hi)
        }))
    }

    /// Cell containing `x`, if `x` lies in the domain.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        let mut c = Vec::with_capacity(self.shape.len());
        for (d, &v) in x.iter().enumerate() {
            let t = (v - self.lo[d]) / self.size[d];
            let s = self.shape[d];
            if !(t >= 0.0) || t > s as f64 {
                return None;
            }
            c.push((t.floor() as usize).min(s - 1));
        }
        Some(self.linear(&c))
    }

    /// Cells whose center lies in `set`.
    pub fn sample(&self, set: &BoxUnion) -> Vec<bool> {
        (0..self.len()).map(|i| set.contains_point(&self.center(i))).collect()
    }

    /// Box union made of the marked cells.
    pub fn to_union(&self, cells: &[bool]) -> Result<BoxUnion> {
        let boxes = cells
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| self.cell_box(i))
            .collect();
        let eps = Resolution::PerDim(self.size.clone());
        Ok(BoxUnion::from_disjoint(self.shape.len(), eps, boxes)?.coalesced())
    }

    /// For each cell, the Chebyshev distance in cells to the nearest marked
    /// cell (`usize::MAX` when nothing is marked).
    pub fn distance_to(&self, cells: &[bool]) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.len()];
        let mut queue = VecDeque::new();
        for (i, &m) in cells.iter().enumerate() {
            if m {
                dist[i] = 0;
                queue.push_back(i);
            }
        }
        let n = self.shape.len();
        while let Some(i) = queue.pop_front() {
            let c = self.coords(i);
            let mut offsets = vec![-1i64; n];
            loop {
                if offsets.iter().any(|&o| o != 0) {
                    let nb: Option<Vec<usize>> = c
                        .iter()
                        .zip(&offsets)
                        .zip(&self.shape)
                        .map(|((&x, &o), &s)| {
                            let y = x as i64 + o;
                            (0..s as i64).contains(&y).then_some(y as usize)
                        })
                        .collect();
                    if let Some(nb) = nb {
                        let j = self.linear(&nb);
                        if dist[j] == usize::MAX {
                            dist[j] = dist[i] + 1;
                            queue.push_back(j);
                        }
                    }
                }
                let mut d = 0;
                while d < n && offsets[d] == 1 {
                    offsets[d] = -1;
                    d += 1;
                }
                if d == n {
                    break;
                }
                offsets[d] += 1;
            }
        }
        dist
    }
}

/// Finite input set used at instant `k`.
fn input_points(set: &InputSet, step: Option<&Resolution>) -> Result<Vec<Vec<f64>>> {
    match set {
        InputSet::Points { points } => Ok(points.clone()),
        InputSet::Box(b) => {
            let mut axes = Vec::new();
            for (d, iv) in b.intervals().iter().enumerate() {
                let axis = match step {
                    Some(s) if !iv.is_point() => {
                        let h = s.at(d);
                        let count = (iv.width() / h).round() as usize;
                        if !(h > 0.0) || count == 0 {
                            return Err(Error::Config(format!("bad input step {h}")));
                        }
                        (0..=count)
                            .map(|j| if j == count { iv.hi } else { iv.lo + j as f64 * h })
                            .collect()
                    }
                    _ if iv.is_point() => vec![iv.lo],
                    _ => vec![iv.lo, iv.mid(), iv.hi],
                };
                axes.push(axis);
            }
            let mut pts = vec![Vec::new()];
            for axis in axes {
                pts = pts
                    .into_iter()
                    .flat_map(|p| {
                        axis.iter().map(move |&v| {
                            let mut p = p.clone();
                            p.push(v);
                            p
                        })
                    })
                    .collect();
            }
            Ok(pts)
        }
    }
}

/// Finite abstraction of a model: cells plus successor lists per instant.
pub struct GridSystem<'a> {
    model: &'a SystemModel,
    grid: Grid,
    opts: GridOptions,
    successors: HashMap<usize, Vec<Vec<Option<usize>>>>,
}

impl<'a> GridSystem<'a> {
    /// Builds successor lists for instants `0..=horizon`.
    pub fn new(model: &'a SystemModel, horizon: usize, opts: GridOptions) -> Result<Self> {
        let grid = Grid::new(model.state_domain(), &opts.cell)?;
        let mut successors = HashMap::new();
        let mut by_set: Vec<(InputSet, usize)> = Vec::new();
        let mut lists: Vec<Vec<Vec<Option<usize>>>> = Vec::new();
        for k in 0..=horizon {
            let set = model.input_set(k);
            let idx = match by_set.iter().find(|(s, _)| s == set) {
                Some(&(_, i)) => i,
                None => {
                    let pts = input_points(set, opts.input_step.as_ref())?;
                    let work = grid.len().saturating_mul(pts.len());
                    if work > opts.limit {
                        return Err(Error::GridTooLarge {
                            cells: grid.len(),
                            inputs: pts.len(),
                            limit: opts.limit,
                        });
                    }
                    let cells: Vec<usize> = (0..grid.len()).collect();
                    let dynamics = model.dynamics();
                    let list = exec::map(opts.parallelism, &cells, |&i| {
                        let c = grid.center(i);
                        pts.iter()
                            .map(|u| grid.locate(&dynamics.step(&c, u)))
                            .collect::<Vec<_>>()
                    });
                    lists.push(list);
                    by_set.push((set.clone(), lists.len() - 1));
                    lists.len() - 1
                }
            };
            successors.insert(k, lists[idx].clone());
        }
        Ok(GridSystem {
            model,
            grid,
            opts,
            successors,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Successor cells of `cell` at instant `k`, one per input (`None` when
    /// the image leaves the domain).
    pub fn successors(&self, k: usize, cell: usize) -> &[Option<usize>] {
        &self.successors[&k][cell]
    }

    /// Exact grid table for `spec`, keyed like the box-based tables.
    pub fn table(&self, spec: &FormulaSpec, mode: Mode) -> Result<SetTable> {
        let sets = self.cell_sets(spec, mode)?;
        let mut entries = BTreeMap::new();
        for ((k, set), cells) in sets {
            entries.insert((k, set), self.grid.to_union(&cells)?);
        }
        Ok(SetTable {
            mode,
            eps: self.opts.cell.clone(),
            formula_digest: spec.digest(),
            model_digest: self.model.digest().to_string(),
            entries,
        })
    }

    /// Backward recursion with one boolean per cell.
    pub fn cell_sets(
        &self,
        spec: &FormulaSpec,
        mode: Mode,
    ) -> Result<BTreeMap<(usize, IndexSet), Vec<bool>>> {
        let n = self.model.state_dim();
        spec.check_geometric(n)?;
        let horizon = spec.horizon();
        if horizon > *self.successors.keys().max().unwrap_or(&0) {
            return Err(Error::Config(format!(
                "grid built for a shorter horizon than {horizon}"
            )));
        }
        let cells = self.grid.len();
        let centers: Vec<Vec<f64>> = (0..cells).map(|i| self.grid.center(i)).collect();
        let mut out: BTreeMap<(usize, IndexSet), Vec<bool>> = BTreeMap::new();
        out.insert((horizon + 1, IndexSet::empty()), vec![true; cells]);
        for k in (0..=horizon).rev() {
            for set in spec.potential_index_sets(k)? {
                let mut entry = vec![false; cells];
                for next in spec.successor_sets(set, k)? {
                    let region = spec.consistent_region(k, set, next).with_dim(n)?;
                    let later = &out[&(k + 1, next)];
                    let succ = &self.successors[&k];
                    for i in 0..cells {
                        if entry[i] || !region.contains(&centers[i])? {
                            continue;
                        }
                        entry[i] = if k == horizon {
                            true
                        } else {
                            let hit = |s: &Option<usize>| s.is_some_and(|j| later[j]);
                            match mode {
                                Mode::Feasible => succ[i].iter().any(hit),
                                Mode::Satisfiable => succ[i].iter().all(hit),
                            }
                        };
                    }
                }
                out.insert((k, set), entry);
            }
        }
        Ok(out)
    }
}

/// Agreement of one entry, measured on cell centers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryComparison {
    pub k: usize,
    #[serde(rename = "I")]
    pub set: IndexSet,
    pub table_cells: usize,
    pub oracle_cells: usize,
    /// Cells in the table but not in the oracle set.
    pub table_not_in_oracle: usize,
    /// Cells in the oracle set but not in the table.
    pub oracle_not_in_table: usize,
    /// Largest distance, in cells, from a table cell to the oracle set.
    pub table_to_oracle: Option<usize>,
    /// Largest distance, in cells, from an oracle cell to the table.
    pub oracle_to_table: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub note: String,
    pub entries: Vec<EntryComparison>,
}

impl ComparisonReport {
    /// Total number of table cells outside the oracle sets.
    pub fn violations(&self) -> usize {
        self.entries.iter().map(|e| e.table_not_in_oracle).sum()
    }

    pub fn is_identical(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.table_not_in_oracle == 0 && e.oracle_not_in_table == 0)
    }
}

/// Samples `table` at the cell centers of `grid` and compares every entry
/// with the oracle cell sets.
pub fn compare(
    grid: &Grid,
    table: &SetTable,
    oracle: &BTreeMap<(usize, IndexSet), Vec<bool>>,
) -> Result<ComparisonReport> {
    let mut entries = Vec::new();
    for (&(k, set), want) in oracle {
        let got = grid.sample(table.entry(k, set)?);
        let count = |v: &[bool]| v.iter().filter(|&&b| b).count();
        let diff = |a: &[bool], b: &[bool]| a.iter().zip(b).filter(|(&x, &y)| x && !y).count();
        let directed = |from: &[bool], to: &[bool]| -> Option<usize> {
            if !from.iter().any(|&b| b) {
                return Some(0);
            }
            let dist = grid.distance_to(to);
            from.iter()
                .zip(&dist)
                .filter(|(&m, _)| m)
                .map(|(_, &d)| (d != usize::MAX).then_some(d))
                .try_fold(0, |acc, d| d.map(|d| acc.max(d)))
        };
        entries.push(EntryComparison {
            k,
            set,
            table_cells: count(&got),
            oracle_cells: count(want),
            table_not_in_oracle: diff(&got, want),
            oracle_not_in_table: diff(want, &got),
            table_to_oracle: directed(&got, want),
            oracle_to_table: directed(want, &got),
        });
    }
    Ok(ComparisonReport {
        note: "the oracle is exact for the grid abstraction only; cells are compared at their \
               centers and nothing is claimed between grid points"
            .into(),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_spec;

    #[test]
    fn grid_layout() {
        let d = Aabb::new(&[0.0, 0.0], &[4.0, 2.0]).unwrap();
        let g = Grid::new(&d, &Resolution::uniform(1.0)).unwrap();
        assert_eq!(g.len(), 8);
        assert_eq!(g.center(0), vec![0.5, 0.5]);
        assert_eq!(g.center(1), vec![0.5, 1.5]);
        assert_eq!(g.locate(&[3.2, 0.1]), Some(6));
        assert_eq!(g.locate(&[4.0, 2.0]), Some(7));
        assert_eq!(g.locate(&[4.1, 0.0]), None);
        assert!(Grid::new(&d, &Resolution::uniform(0.3)).is_err());
        let marks = [true, false, false, false, false, false, false, false];
        assert_eq!(g.distance_to(&marks), vec![0, 1, 1, 1, 2, 2, 3, 3]);
        assert_eq!(g.to_union(&[true; 8]).unwrap().len(), 1);
    }

    #[test]
    fn temperature_satisfiable_tail() {
        let model = SystemModel::building_temperature();
        let spec = parse_spec("F[0,8] (box(20,25)) && G[10,15] (box(20,25))").unwrap();
        let mut opts = GridOptions::new(Resolution::uniform(0.01));
        opts.input_step = Some(Resolution::uniform(0.05));
        let sys = GridSystem::new(&model, spec.horizon(), opts).unwrap();
        let y = sys.cell_sets(&spec, Mode::Satisfiable).unwrap();
        let cells = &y[&(14, IndexSet::singleton(2))];
        let g = sys.grid();
        let on: Vec<f64> = (0..g.len()).filter(|&i| cells[i]).map(|i| g.center(i)[0]).collect();
        let (lo, hi) = (on[0], *on.last().unwrap());
        assert!((lo - 20.0 / 0.94).abs() <= 0.015, "{lo}");
        assert!((hi - 20.6 / 0.86).abs() <= 0.015, "{hi}");
        assert_eq!(on.len(), ((hi - lo) / 0.01).round() as usize + 1);
    }

    #[test]
    fn size_guard() {
        let model = SystemModel::spacecraft();
        let mut opts = GridOptions::new(Resolution::uniform(0.05));
        opts.limit = 1_000_000;
        assert!(matches!(
            GridSystem::new(&model, 3, opts),
            Err(Error::GridTooLarge { .. })
        ));
    }
}
