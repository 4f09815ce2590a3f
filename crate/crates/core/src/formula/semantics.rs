//! Boolean satisfaction of formulae by finite state sequences.

use super::{Conjunct, Formula, FormulaSpec, Op, RegionExpr, Window};
use crate::error::{Error, Result};

fn check_length(horizon: usize, states: &[Vec<f64>]) -> Result<()> {
    if states.len() <= horizon {
        return Err(Error::InstantOutOfRange {
            k: horizon,
            max: states.len().saturating_sub(1),
        });
    }
    Ok(())
}

fn always(w: Window, r: &RegionExpr, states: &[Vec<f64>]) -> Result<bool> {
    for x in &states[w.a..=w.b] {
        if !r.contains(x)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Some `k' ∈ [a,b]` has `right` at `k'` and `left` on `[from, k']`.
fn until(w: Window, from: usize, left: &RegionExpr, right: &RegionExpr, states: &[Vec<f64>]) -> Result<bool> {
    let mut left_so_far = true;
    for (k, x) in states.iter().enumerate().take(w.b + 1).skip(from) {
        left_so_far = left_so_far && left.contains(x)?;
        if !left_so_far {
            return Ok(false);
        }
        if k >= w.a && right.contains(x)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Whether `states` (starting at instant 0) satisfies `formula`.
pub fn satisfies(formula: &Formula, states: &[Vec<f64>]) -> Result<bool> {
    check_length(formula.horizon(), states)?;
    for c in &formula.conjuncts {
        let ok = match c {
            Conjunct::Always { window, region } => always(*window, region, states)?,
            Conjunct::Eventually { window, region } => {
                until(*window, window.a, &RegionExpr::True, region, states)?
            }
            Conjunct::Until {
                window,
                left,
                right,
            } => until(*window, 0, left, right, states)?,
            Conjunct::UntilFromStart {
                window,
                left,
                right,
            } => until(*window, window.a, left, right, states)?,
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether sub-formula `i` (1-based) holds on `states`.
pub fn subformula_holds(spec: &FormulaSpec, i: usize, states: &[Vec<f64>]) -> Result<bool> {
    let s = spec.get(i);
    check_length(s.window.b, states)?;
    match s.op {
        Op::G => always(s.window, &s.left, states),
        Op::UPrime => until(s.window, s.window.a, &s.left, s.right_region(), states),
    }
}

/// Whether `states` satisfies every sub-formula of `spec`.
pub fn satisfies_spec(spec: &FormulaSpec, states: &[Vec<f64>]) -> Result<bool> {
    check_length(spec.horizon(), states)?;
    for i in 1..=spec.len() {
        if !subformula_holds(spec, i, states)? {
            return Ok(false);
        }
    }
    Ok(true)
}
