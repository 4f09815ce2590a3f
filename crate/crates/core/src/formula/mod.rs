//! Formulae: syntax, normalisation to `G`/`U'` conjunctions, and the
//! index-set combinatorics used by the backward recursion and monitor.

mod ast;
mod combinatorics;
mod index;
mod normalize;
mod parser;
mod region;
pub mod semantics;

pub use ast::{Conjunct, Formula, Window};
pub use combinatorics::Effective;
pub use index::IndexSet;
pub use normalize::{normalize, FormulaSpec, Op, SubFormula};
pub use parser::{parse_formula, parse_formula_for_dim, parse_region};
pub use region::{AffinePredicate, RegionExpr};


/// Parses and normalises in one step.
pub fn parse_spec(text: &str) -> crate::Result<FormulaSpec> {
    normalize(&parse_formula(text)?)
}
