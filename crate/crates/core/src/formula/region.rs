use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Aabb;

/// Half-space `{x : c·x + d ≥ 0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffinePredicate {
    pub coefficients: Vec<f64>,
    pub offset: f64,
}

impl AffinePredicate {
    pub fn new(coefficients: Vec<f64>, offset: f64) -> Self {
        AffinePredicate {
            coefficients,
            offset,
        }
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (c, v) in self.coefficients.iter().zip(x) {
            acc += c * v;
        }
        acc + self.offset
    }

    pub fn holds(&self, x: &[f64]) -> bool {
        self.eval(x) >= 0.0
    }

    /// Corners of `b` minimising and maximising the predicate function.
    ///
    /// Rounded arithmetic is monotone, so evaluating at these corners bounds
    /// every evaluation inside the box.
    fn extreme_corners(&self, b: &Aabb) -> (Vec<f64>, Vec<f64>) {
        let mut lo = Vec::with_capacity(b.dim());
        let mut hi = Vec::with_capacity(b.dim());
        for (d, iv) in b.intervals().iter().enumerate() {
            let c = self.coefficients.get(d).copied().unwrap_or(0.0);
            if c >= 0.0 {
                lo.push(iv.lo);
                hi.push(iv.hi);
            } else {
                lo.push(iv.hi);
                hi.push(iv.lo);
            }
        }
        (lo, hi)
    }

    /// Range of the predicate function over `b`.
    pub fn range(&self, b: &Aabb) -> (f64, f64) {
        let (lo, hi) = self.extreme_corners(b);
        (self.eval(&lo), self.eval(&hi))
    }

    /// For a predicate on a single coordinate, that coordinate and the
    /// bounds of the half-line it describes.
    pub fn axis_bounds(&self) -> Option<(usize, f64, f64)> {
        let mut nz = self
            .coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0);
        let (d, &c) = nz.next()?;
        if nz.next().is_some() {
            return None;
        }
        let t = -self.offset / c;
        if c > 0.0 {
            Some((d, t, f64::INFINITY))
        } else {
            Some((d, f64::NEG_INFINITY, t))
        }
    }

    fn padded(&self, n: usize) -> Result<AffinePredicate> {
        if self.coefficients.len() > n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.coefficients.len(),
            });
        }
        let mut c = self.coefficients.clone();
        c.resize(n, 0.0);
        Ok(AffinePredicate::new(c, self.offset))
    }
}

/// Symbolic state region built from predicates with boolean connectives.
///
/// `Atom` is a named region with no geometry attached; it is useful for
/// reasoning about formulae abstractly but cannot be evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RegionExpr {
    True,
    Predicate(AffinePredicate),
    Box(Aabb),
    Atom(String),
    Not(Box<RegionExpr>),
    And(Box<RegionExpr>, Box<RegionExpr>),
    Or(Box<RegionExpr>, Box<RegionExpr>),
}

impl RegionExpr {
    pub fn atom(name: impl Into<String>) -> Self {
        RegionExpr::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(r: RegionExpr) -> Self {
        RegionExpr::Not(Box::new(r))
    }

    pub fn and(a: RegionExpr, b: RegionExpr) -> Self {
        RegionExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: RegionExpr, b: RegionExpr) -> Self {
        RegionExpr::Or(Box::new(a), Box::new(b))
    }

    /// Left-nested conjunction that drops `True` operands.
    pub fn and_all(parts: impl IntoIterator<Item = RegionExpr>) -> Self {
        parts
            .into_iter()
            .filter(|p| *p != RegionExpr::True)
            .reduce(RegionExpr::and)
            .unwrap_or(RegionExpr::True)
    }

    /// `a \ b`, written `a & !b` (just `!b` when `a` is `True`).
    pub fn minus(a: RegionExpr, b: RegionExpr) -> Self {
        RegionExpr::and_all([a, RegionExpr::not(b)])
    }

    /// Operands of the top-level conjunction chain.
    pub fn conjuncts(&self) -> Vec<&RegionExpr> {
        match self {
            RegionExpr::And(a, b) => {
                let mut v = a.conjuncts();
                v.extend(b.conjuncts());
                v
            }
            other => vec![other],
        }
    }

    pub fn atoms(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_atoms(&self, out: &mut Vec<String>) {
        match self {
            RegionExpr::Atom(n) => out.push(n.clone()),
            RegionExpr::Not(a) => a.collect_atoms(out),
            RegionExpr::And(a, b) | RegionExpr::Or(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            _ => {}
        }
    }

    /// Replaces atoms that have a binding.
    pub fn substitute(&self, bindings: &HashMap<String, RegionExpr>) -> RegionExpr {
        match self {
            RegionExpr::Atom(n) => bindings.get(n).cloned().unwrap_or_else(|| self.clone()),
            RegionExpr::Not(a) => RegionExpr::not(a.substitute(bindings)),
            RegionExpr::And(a, b) => RegionExpr::and(a.substitute(bindings), b.substitute(bindings)),
            RegionExpr::Or(a, b) => RegionExpr::or(a.substitute(bindings), b.substitute(bindings)),
            _ => self.clone(),
        }
    }

    /// Largest dimension referenced by a predicate or box, if any.
    pub fn min_dim(&self) -> Option<usize> {
        match self {
            RegionExpr::True | RegionExpr::Atom(_) => None,
            RegionExpr::Predicate(p) => Some(p.dim()),
            RegionExpr::Box(b) => Some(b.dim()),
            RegionExpr::Not(a) => a.min_dim(),
            RegionExpr::And(a, b) | RegionExpr::Or(a, b) => match (a.min_dim(), b.min_dim()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    /// Fixes the state dimension: predicates are zero-padded to `n`
    /// coefficients and boxes must have exactly `n` dimensions.
    pub fn with_dim(&self, n: usize) -> Result<RegionExpr> {
        Ok(match self {
            RegionExpr::Predicate(p) => RegionExpr::Predicate(p.padded(n)?),
            RegionExpr::Box(b) => {
                if b.dim() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: b.dim(),
                    });
                }
                self.clone()
            }
            RegionExpr::Not(a) => RegionExpr::not(a.with_dim(n)?),
            RegionExpr::And(a, b) => RegionExpr::and(a.with_dim(n)?, b.with_dim(n)?),
            RegionExpr::Or(a, b) => RegionExpr::or(a.with_dim(n)?, b.with_dim(n)?),
            _ => self.clone(),
        })
    }

    /// Exact membership of a point.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        Ok(match self {
            RegionExpr::True => true,
            RegionExpr::Predicate(p) => {
                check_len(p.dim(), x)?;
                p.holds(x)
            }
            RegionExpr::Box(b) => {
                check_len(b.dim(), x)?;
                b.contains_point(x)
            }
            RegionExpr::Atom(n) => return Err(Error::UnboundAtom(n.clone())),
            RegionExpr::Not(a) => !a.contains(x)?,
            RegionExpr::And(a, b) => a.contains(x)? && b.contains(x)?,
            RegionExpr::Or(a, b) => a.contains(x)? || b.contains(x)?,
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            RegionExpr::Or(..) => 1,
            RegionExpr::And(..) => 2,
            RegionExpr::Not(_) => 3,
            _ => 4,
        }
    }
}

fn check_len(n: usize, x: &[f64]) -> Result<()> {
    if x.len() < n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    Ok(())
}

struct Wrapped<'a>(&'a RegionExpr, u8);

impl fmt::Display for Wrapped<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.precedence() < self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

pub(crate) fn fmt_number(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        // `+ 0.0` turns -0 into 0
        format!("{}", v + 0.0)
    }
}

impl fmt::Display for AffinePredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (d, &c) in self.coefficients.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c == 1.0 {
                write!(f, "x{d}")?;
            } else if c == -1.0 {
                write!(f, "-x{d}")?;
            } else {
                write!(f, "{}*x{d}", fmt_number(c))?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " >= {}", fmt_number(-self.offset))
    }
}

impl fmt::Display for RegionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionExpr::True => write!(f, "true"),
            RegionExpr::Predicate(p) => write!(f, "{p}"),
            RegionExpr::Box(b) => {
                write!(f, "box(")?;
                for (d, iv) in b.intervals().iter().enumerate() {
                    if d > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{},{}", fmt_number(iv.lo), fmt_number(iv.hi))?;
                }
                write!(f, ")")
            }
            RegionExpr::Atom(n) => write!(f, "{n}"),
            RegionExpr::Not(a) => write!(f, "!{}", Wrapped(a, 4)),
            RegionExpr::And(a, b) => write!(f, "{} & {}", Wrapped(a, 2), Wrapped(b, 3)),
            RegionExpr::Or(a, b) => write!(f, "{} | {}", Wrapped(a, 1), Wrapped(b, 2)),
        }
    }
}
