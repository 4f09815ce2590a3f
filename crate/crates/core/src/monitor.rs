//! Online monitoring against pre-computed tables.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dynamics::Trace;
use crate::error::{Error, Result};
use crate::formula::{FormulaSpec, IndexSet, Op};
use crate::precompute::{Mode, SetTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerdictKind {
    /// Some continuation still meets the formula.
    Feasible,
    /// No continuation meets the formula.
    Violated,
    /// Every continuation meets the formula.
    SatisfiedGuaranteed,
    /// Every sub-formula has been met.
    Completed,
}

impl VerdictKind {
    pub fn is_terminal(self) -> bool {
        self != VerdictKind::Feasible
    }

    pub fn name(self) -> &'static str {
        match self {
            VerdictKind::Feasible => "FEASIBLE",
            VerdictKind::Violated => "VIOLATED",
            VerdictKind::SatisfiedGuaranteed => "SATISFIED_GUARANTEED",
            VerdictKind::Completed => "COMPLETED",
        }
    }
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Decision at one instant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub k: usize,
    pub verdict: VerdictKind,
    /// Pending sub-formulae when the state arrived.
    pub remaining: IndexSet,
    /// Pending sub-formulae after the removals of this instant.
    pub after: IndexSet,
}

impl fmt::Display for Verdict {
    /// `k,VERDICT,{indices}`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.k, self.verdict, self.remaining)
    }
}

/// Streaming monitor. Tables are borrowed, so any number of monitors can
/// share them.
#[derive(Clone, Debug)]
pub struct Monitor<'a> {
    spec: &'a FormulaSpec,
    feasible: &'a SetTable,
    satisfiable: Option<&'a SetTable>,
    remaining: IndexSet,
    k: usize,
    terminal: Option<Verdict>,
}

impl<'a> Monitor<'a> {
    /// Fails unless both tables were built for `spec` and agree on the model.
    pub fn new(
        spec: &'a FormulaSpec,
        feasible: &'a SetTable,
        satisfiable: Option<&'a SetTable>,
    ) -> Result<Self> {
        check_mode(feasible, Mode::Feasible)?;
        let digest = spec.digest();
        check_formula(feasible, &digest)?;
        if let Some(y) = satisfiable {
            check_mode(y, Mode::Satisfiable)?;
            check_formula(y, &digest)?;
            if y.model_digest() != feasible.model_digest() {
                return Err(Error::DigestMismatch {
                    what: "model",
                    expected: feasible.model_digest().to_string(),
                    found: y.model_digest().to_string(),
                });
            }
        }
        Ok(Monitor {
            spec,
            feasible,
            satisfiable,
            remaining: spec.all(),
            k: 0,
            terminal: None,
        })
    }

    pub fn instant(&self) -> usize {
        self.k
    }

    pub fn remaining(&self) -> IndexSet {
        self.remaining
    }

    pub fn terminal(&self) -> Option<Verdict> {
        self.terminal
    }

    /// Consumes the state at the current instant.
    pub fn step(&mut self, x: &[f64]) -> Result<Verdict> {
        if let Some(t) = self.terminal {
            return Err(Error::MonitorTerminated(t.k));
        }
        let (k, set) = (self.k, self.remaining);
        let feasible = self.feasible.get(k, set).ok_or_else(|| Error::TableInconsistent {
            k,
            message: format!("no feasible entry for remaining set {set}"),
        })?;
        if x.len() != feasible.dim() {
            return Err(Error::DimensionMismatch {
                expected: feasible.dim(),
                found: x.len(),
            });
        }
        let verdict = |verdict, after| Verdict {
            k,
            verdict,
            remaining: set,
            after,
        };

        let v = if !feasible.contains_point(x) {
            verdict(VerdictKind::Violated, set)
        } else if self
            .satisfiable
            .and_then(|y| y.get(k, set))
            .is_some_and(|y| y.contains_point(x))
        {
            verdict(VerdictKind::SatisfiedGuaranteed, set)
        } else {
            let after = self.removals(k, set, x)?;
            if after.is_empty() {
                verdict(VerdictKind::Completed, after)
            } else {
                if !self.spec.is_potential(k + 1, after) {
                    return Err(Error::TableInconsistent {
                        k,
                        message: format!("remaining set {after} is not potential at {}", k + 1),
                    });
                }
                verdict(VerdictKind::Feasible, after)
            }
        };
        if v.verdict.is_terminal() {
            self.terminal = Some(v);
        }
        self.remaining = v.after;
        self.k += 1;
        Ok(v)
    }

    /// Drops every sub-formula met at instant `k` by state `x`, evaluated
    /// on the exact regions.
    fn removals(&self, k: usize, set: IndexSet, x: &[f64]) -> Result<IndexSet> {
        let mut after = set;
        for i in set.iter() {
            let s = self.spec.get(i);
            if !s.window.contains(k) {
                continue;
            }
            match s.op {
                Op::G => {
                    if k == s.window.b {
                        // Implied by membership in the feasible entry.
                        if !s.left.contains(x)? {
                            return Err(Error::TableInconsistent {
                                k,
                                message: format!(
                                    "state {x:?} is feasible but leaves the region of {i}"
                                ),
                            });
                        }
                        after.remove(i);
                    }
                }
                Op::UPrime => {
                    if s.left.contains(x)? && s.right_region().contains(x)? {
                        after.remove(i);
                    }
                }
            }
        }
        Ok(after)
    }
}

fn check_mode(t: &SetTable, want: Mode) -> Result<()> {
    if t.mode() != want {
        return Err(Error::WrongMode {
            expected: want.name(),
            found: t.mode().name(),
        });
    }
    Ok(())
}

fn check_formula(t: &SetTable, digest: &str) -> Result<()> {
    if t.formula_digest() != digest {
        return Err(Error::DigestMismatch {
            what: "formula",
            expected: digest.to_string(),
            found: t.formula_digest().to_string(),
        });
    }
    Ok(())
}

/// Verdicts for a whole trace, stopping at the first terminal verdict.
/// A trace that ends early leaves the last verdict as `Feasible`.
pub fn run_monitor(
    spec: &FormulaSpec,
    feasible: &SetTable,
    satisfiable: Option<&SetTable>,
    trace: &Trace,
) -> Result<Vec<Verdict>> {
    if trace.start != 0 {
        return Err(Error::Config(format!(
            "trace starts at instant {}, expected 0",
            trace.start
        )));
    }
    let mut m = Monitor::new(spec, feasible, satisfiable)?;
    let mut out = Vec::new();
    for x in &trace.states {
        let v = m.step(x)?;
        out.push(v);
        if v.verdict.is_terminal() {
            break;
        }
    }
    Ok(out)
}
