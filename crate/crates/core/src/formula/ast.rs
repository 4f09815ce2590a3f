use std::fmt;

use serde::{Deserialize, Serialize};

use super::RegionExpr;
use crate::error::{Error, Result};

/// Closed window `[a, b]` of integer instants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub a: usize,
    pub b: usize,
}

impl Window {
    pub fn new(a: i64, b: i64) -> Result<Self> {
        if a < 0 || b < 0 {
            return Err(Error::InvalidWindow {
                start: a,
                end: b,
                reason: "bounds must be non-negative",
            });
        }
        if a > b {
            return Err(Error::InvalidWindow {
                start: a,
                end: b,
                reason: "start after end",
            });
        }
        Ok(Window {
            a: a as usize,
            b: b as usize,
        })
    }

    pub fn contains(&self, k: usize) -> bool {
        self.a <= k && k <= self.b
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.a, self.b)
    }
}

/// One temporal conjunct as written in the source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Conjunct {
    Always {
        window: Window,
        region: RegionExpr,
    },
    Eventually {
        window: Window,
        region: RegionExpr,
    },
    /// Standard until: the left region must hold from instant 0.
    Until {
        window: Window,
        left: RegionExpr,
        right: RegionExpr,
    },
    /// Until whose left region only has to hold from the window start.
    UntilFromStart {
        window: Window,
        left: RegionExpr,
        right: RegionExpr,
    },
}

impl Conjunct {
    pub fn window(&self) -> Window {
        match self {
            Conjunct::Always { window, .. }
            | Conjunct::Eventually { window, .. }
            | Conjunct::Until { window, .. }
            | Conjunct::UntilFromStart { window, .. } => *window,
        }
    }

    pub fn regions(&self) -> Vec<&RegionExpr> {
        match self {
            Conjunct::Always { region, .. } | Conjunct::Eventually { region, .. } => vec![region],
            Conjunct::Until { left, right, .. } | Conjunct::UntilFromStart { left, right, .. } => {
                vec![left, right]
            }
        }
    }

    fn map_regions<F>(&self, f: F) -> Result<Conjunct>
    where
        F: Fn(&RegionExpr) -> Result<RegionExpr>,
    {
        Ok(match self {
            Conjunct::Always { window, region } => Conjunct::Always {
                window: *window,
                region: f(region)?,
            },
            Conjunct::Eventually { window, region } => Conjunct::Eventually {
                window: *window,
                region: f(region)?,
            },
            Conjunct::Until {
                window,
                left,
                right,
            } => Conjunct::Until {
                window: *window,
                left: f(left)?,
                right: f(right)?,
            },
            Conjunct::UntilFromStart {
                window,
                left,
                right,
            } => Conjunct::UntilFromStart {
                window: *window,
                left: f(left)?,
                right: f(right)?,
            },
        })
    }
}

/// Conjunction of temporal conjuncts, before normalisation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Formula {
    pub conjuncts: Vec<Conjunct>,
}

impl Formula {
    /// Largest state dimension referenced by any region.
    pub fn min_dim(&self) -> Option<usize> {
        self.conjuncts
            .iter()
            .flat_map(|c| c.regions())
            .filter_map(RegionExpr::min_dim)
            .max()
    }

    /// Pads every predicate to `n` coefficients and checks box dimensions.
    pub fn with_dim(&self, n: usize) -> Result<Formula> {
        let conjuncts = self
            .conjuncts
            .iter()
            .map(|c| c.map_regions(|r| r.with_dim(n)))
            .collect::<Result<_>>()?;
        Ok(Formula { conjuncts })
    }

    pub fn substitute(
        &self,
        bindings: &std::collections::HashMap<String, RegionExpr>,
    ) -> Formula {
        let conjuncts = self
            .conjuncts
            .iter()
            .map(|c| c.map_regions(|r| Ok(r.substitute(bindings))).expect("infallible"))
            .collect();
        Formula { conjuncts }
    }

    pub fn horizon(&self) -> usize {
        self.conjuncts.iter().map(|c| c.window().b).max().unwrap_or(0)
    }
}

impl fmt::Display for Conjunct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Conjunct::Always { window, region } => write!(f, "G{window} ({region})"),
            Conjunct::Eventually { window, region } => write!(f, "F{window} ({region})"),
            Conjunct::Until {
                window,
                left,
                right,
            } => write!(f, "({left}) U{window} ({right})"),
            Conjunct::UntilFromStart {
                window,
                left,
                right,
            } => write!(f, "({left}) U'{window} ({right})"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.conjuncts.iter().enumerate() {
            if i > 0 {
                write!(f, " && ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}
