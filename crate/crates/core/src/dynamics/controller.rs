use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{InputSet, SystemModel};
use crate::error::{Error, Result};

/// Source of inputs for simulation.
#[derive(Clone, Debug)]
pub enum Controller {
    Constant(Vec<f64>),
    /// Uniform draws from the admissible input set.
    Random(ChaCha8Rng),
    /// Row `k` of a fixed input table.
    Table(Vec<Vec<f64>>),
}

impl Controller {
    pub fn random(seed: u64) -> Self {
        Controller::Random(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Reads `k,u0,...` CSV with consecutive instants from 0.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut r = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let bad = |message: String| Error::Trace { row: i + 2, message };
            let k: usize = rec
                .get(0)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("bad instant".into()))?;
            if k != i {
                return Err(bad(format!("expected instant {i}, found {k}")));
            }
            let u = rec
                .iter()
                .skip(1)
                .map(|f| f.parse::<f64>().map_err(|_| bad(format!("bad value `{f}`"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(u);
        }
        Ok(Controller::Table(rows))
    }

    pub fn input(&mut self, model: &SystemModel, k: usize) -> Result<Vec<f64>> {
        match self {
            Controller::Constant(u) => Ok(u.clone()),
            Controller::Table(rows) => rows.get(k).cloned().ok_or_else(|| {
                Error::Config(format!("input table has no row for instant {k}"))
            }),
            Controller::Random(rng) => Ok(match model.input_set(k) {
                InputSet::Box(b) => b
                    .intervals()
                    .iter()
                    .map(|iv| {
                        if iv.is_point() {
                            iv.lo
                        } else {
                            rng.gen_range(iv.lo..=iv.hi)
                        }
                    })
                    .collect(),
                InputSet::Points { points } => points[rng.gen_range(0..points.len())].clone(),
            }),
        }
    }
}

impl FromStr for Controller {
    type Err = Error;

    /// `constant:u0,u1,...`, `random:SEED` or `file:PATH`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("controller `{s}`: expected KIND:ARG")))?;
        match kind {
            "constant" => {
                let u = arg
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| Error::Config(format!("controller `{s}`: {e}")))?;
                Ok(Controller::Constant(u))
            }
            "random" => {
                let seed = arg
                    .trim()
                    .parse()
                    .map_err(|e| Error::Config(format!("controller `{s}`: {e}")))?;
                Ok(Controller::random(seed))
            }
            "file" => Controller::from_csv(arg),
            _ => Err(Error::Config(format!(
                "controller `{s}`: kind must be constant, random or file"
            ))),
        }
    }
}
