//! Predictive runtime monitoring of signal temporal logic over known
//! discrete-time dynamics.
//!
//! Offline, [`precompute::compute_tables`] walks the horizon backwards and
//! stores, for every instant and every set of still-pending sub-formulae,
//! the states from which the formula can still be met (and, optionally, the
//! states from which it is met whatever the inputs). Online, a
//! [`monitor::Monitor`] answers each new state with a table lookup.

pub mod dynamics;
pub mod error;
pub mod exec;
pub mod formula;
pub mod geometry;
pub mod monitor;
pub mod oracle;
pub mod precompute;
pub mod reach;

pub use error::{Error, Result};
