use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Conjunct, Formula, IndexSet, RegionExpr, Window};
use crate::error::{Error, Result};

/// Temporal operator of a normalised sub-formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Op {
    /// Always.
    G,
    /// Until, with the left region required from the window start.
    UPrime,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubFormula {
    /// 1-based position after sorting by window start.
    pub index: usize,
    pub op: Op,
    pub window: Window,
    /// The region for `G`; the left region for `U'`.
    pub left: RegionExpr,
    /// The right region, present only for `U'`.
    pub right: Option<RegionExpr>,
}

impl SubFormula {
    pub fn right_region(&self) -> &RegionExpr {
        self.right.as_ref().unwrap_or(&RegionExpr::True)
    }
}

/// A conjunction of `G` and `U'` sub-formulae indexed by ascending start.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormulaSpec {
    subformulae: Vec<SubFormula>,
    horizon: usize,
    start: usize,
}

/// Rewrites `F` and `U` into `G`/`U'` and numbers the result.
///
/// `F[a,b] h` becomes `true U'[a,b] h`; `l U[a,b] r` becomes
/// `(l U'[a,b] r) && G[0,a] l`. Sub-formulae are stably sorted by window
/// start, so ties keep source order.
pub fn normalize(formula: &Formula) -> Result<FormulaSpec> {
    let mut parts: Vec<(Op, Window, RegionExpr, Option<RegionExpr>)> = Vec::new();
    for c in &formula.conjuncts {
        match c {
            Conjunct::Always { window, region } => parts.push((Op::G, *window, region.clone(), None)),
            Conjunct::Eventually { window, region } => {
                parts.push((Op::UPrime, *window, RegionExpr::True, Some(region.clone())))
            }
            Conjunct::Until {
                window,
                left,
                right,
            } => {
                parts.push((Op::UPrime, *window, left.clone(), Some(right.clone())));
                let prefix = Window { a: 0, b: window.a };
                parts.push((Op::G, prefix, left.clone(), None));
            }
            Conjunct::UntilFromStart {
                window,
                left,
                right,
            } => parts.push((Op::UPrime, *window, left.clone(), Some(right.clone()))),
        }
    }
    FormulaSpec::from_parts(parts)
}

impl FormulaSpec {
    fn from_parts(mut parts: Vec<(Op, Window, RegionExpr, Option<RegionExpr>)>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Config("formula has no conjuncts".into()));
        }
        if parts.len() > IndexSet::CAPACITY {
            return Err(Error::TooManySubformulae(parts.len()));
        }
        parts.sort_by_key(|p| p.1.a);
        let subformulae: Vec<SubFormula> = parts
            .into_iter()
            .enumerate()
            .map(|(i, (op, window, left, right))| SubFormula {
                index: i + 1,
                op,
                window,
                left,
                right,
            })
            .collect();
        let horizon = subformulae.iter().map(|s| s.window.b).max().unwrap_or(0);
        let start = subformulae.iter().map(|s| s.window.a).min().unwrap_or(0);
        Ok(FormulaSpec {
            subformulae,
            horizon,
            start,
        })
    }

    pub fn subformulae(&self) -> &[SubFormula] {
        &self.subformulae
    }

    /// Sub-formula by 1-based index.
    pub fn get(&self, i: usize) -> &SubFormula {
        &self.subformulae[i - 1]
    }

    pub fn len(&self) -> usize {
        self.subformulae.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subformulae.is_empty()
    }

    /// Last constrained instant `T`.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// First constrained instant `S`.
    pub fn start(&self) -> usize {
        self.start
    }

    pub fn all(&self) -> IndexSet {
        IndexSet::first(self.len())
    }

    pub fn regions(&self) -> impl Iterator<Item = &RegionExpr> {
        self.subformulae
            .iter()
            .flat_map(|s| std::iter::once(&s.left).chain(s.right.as_ref()))
    }

    /// Names of regions without geometry.
    pub fn atoms(&self) -> Vec<String> {
        let mut v: Vec<String> = self.regions().flat_map(RegionExpr::atoms).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Errors unless every region has geometry of dimension `n`.
    pub fn check_geometric(&self, n: usize) -> Result<()> {
        if let Some(a) = self.atoms().into_iter().next() {
            return Err(Error::UnboundAtom(a));
        }
        for r in self.regions() {
            r.with_dim(n)?;
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical text form.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_string().as_bytes()))
    }
}

impl fmt::Display for FormulaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, s) in self.subformulae.iter().enumerate() {
            if n > 0 {
                write!(f, " && ")?;
            }
            match s.op {
                Op::G => write!(f, "G{} ({})", s.window, s.left)?,
                Op::UPrime => write!(f, "({}) U'{} ({})", s.left, s.window, s.right_region())?,
            }
        }
        Ok(())
    }
}
