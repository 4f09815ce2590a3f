use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Aabb;

/// Admissible inputs at one instant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputSet {
    Box(Aabb),
    /// A finite set of input vectors.
    Points { points: Vec<Vec<f64>> },
}

impl InputSet {
    pub fn dim(&self) -> usize {
        match self {
            InputSet::Box(b) => b.dim(),
            InputSet::Points { points } => points.first().map_or(0, Vec::len),
        }
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        match self {
            InputSet::Box(b) => u.len() == b.dim() && b.contains_point(u),
            InputSet::Points { points } => points.iter().any(|p| p.as_slice() == u),
        }
    }

    pub fn bounding_box(&self) -> Aabb {
        match self {
            InputSet::Box(b) => b.clone(),
            InputSet::Points { points } => points
                .iter()
                .map(|p| Aabb::point(p))
                .reduce(|a, b| a.hull(&b))
                .expect("validated non-empty"),
        }
    }

    fn validate(&self, m: usize) -> Result<()> {
        match self {
            InputSet::Box(b) => {
                if b.dim() != m {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        found: b.dim(),
                    });
                }
                if b.intervals().iter().any(|iv| !iv.lo.is_finite() || !iv.hi.is_finite()) {
                    return Err(Error::Config("input box must be bounded".into()));
                }
            }
            InputSet::Points { points } => {
                if points.is_empty() {
                    return Err(Error::Config("input point set is empty".into()));
                }
                if let Some(p) = points.iter().find(|p| p.len() != m) {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        found: p.len(),
                    });
                }
                if points.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(Error::Config("input points must be finite".into()));
                }
            }
        }
        Ok(())
    }
}

/// One piece of a time-varying input domain; `until_k` is inclusive and
/// absent on the last piece.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchedulePiece {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub until_k: Option<usize>,
    #[serde(flatten)]
    pub set: PieceSet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PieceSet {
    Box(Aabb),
    Points(Vec<Vec<f64>>),
}

impl From<PieceSet> for InputSet {
    fn from(p: PieceSet) -> Self {
        match p {
            PieceSet::Box(b) => InputSet::Box(b),
            PieceSet::Points(points) => InputSet::Points { points },
        }
    }
}

impl From<InputSet> for PieceSet {
    fn from(s: InputSet) -> Self {
        match s {
            InputSet::Box(b) => PieceSet::Box(b),
            InputSet::Points { points } => PieceSet::Points(points),
        }
    }
}

/// Input domain as a function of the instant.
#[derive(Clone, Debug, PartialEq)]
pub struct InputSchedule {
    pieces: Vec<(Option<usize>, InputSet)>,
}

impl InputSchedule {
    pub fn constant(set: InputSet) -> Self {
        InputSchedule {
            pieces: vec![(None, set)],
        }
    }

    /// Pieces must have strictly increasing `until_k`, and only the last
    /// may be open-ended.
    pub fn new(pieces: Vec<(Option<usize>, InputSet)>, m: usize) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::Config("input schedule is empty".into()));
        }
        let mut prev: Option<usize> = None;
        for (i, (until, set)) in pieces.iter().enumerate() {
            set.validate(m)?;
            let last = i + 1 == pieces.len();
            match until {
                None if !last => {
                    return Err(Error::Config(
                        "only the last input piece may omit until_k".into(),
                    ))
                }
                Some(u) if prev.is_some_and(|p| *u <= p) => {
                    return Err(Error::Config("until_k must increase".into()))
                }
                _ => {}
            }
            prev = *until;
        }
        Ok(InputSchedule { pieces })
    }

    pub fn at(&self, k: usize) -> &InputSet {
        self.pieces
            .iter()
            .find(|(until, _)| until.is_none_or(|u| k <= u))
            .map(|(_, s)| s)
            .unwrap_or(&self.pieces.last().expect("non-empty").1)
    }

    pub fn pieces(&self) -> &[(Option<usize>, InputSet)] {
        &self.pieces
    }
}
