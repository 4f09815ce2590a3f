use serde::{Deserialize, Serialize};

use super::Aabb;

/// Minimum box edge length used by bisection, uniform or per dimension.
///
/// A box is terminal once every edge is at most the resolution of its
/// dimension; non-terminal boxes are split along the dimension with the
/// largest width-to-resolution ratio.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Resolution {
    Uniform(f64),
    PerDim(Vec<f64>),
}

impl Resolution {
    pub fn uniform(eps: f64) -> Self {
        Resolution::Uniform(eps)
    }

    pub fn at(&self, d: usize) -> f64 {
        match self {
            Resolution::Uniform(e) => *e,
            Resolution::PerDim(v) => v[d.min(v.len() - 1)],
        }
    }

    pub fn is_valid(&self) -> bool {
        match self {
            Resolution::Uniform(e) => e.is_finite() && *e > 0.0,
            Resolution::PerDim(v) => !v.is_empty() && v.iter().all(|e| e.is_finite() && *e > 0.0),
        }
    }

    /// Smallest per-dimension value; used where a single number is needed.
    pub fn min_eps(&self) -> f64 {
        match self {
            Resolution::Uniform(e) => *e,
            Resolution::PerDim(v) => v.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    pub fn halved(&self) -> Self {
        match self {
            Resolution::Uniform(e) => Resolution::Uniform(e / 2.0),
            Resolution::PerDim(v) => Resolution::PerDim(v.iter().map(|e| e / 2.0).collect()),
        }
    }

    pub fn is_terminal(&self, b: &Aabb) -> bool {
        self.split_dim(b).is_none()
    }

    pub fn split_dim(&self, b: &Aabb) -> Option<usize> {
        let mut best = None;
        let mut best_ratio = 1.0;
        for (d, iv) in b.intervals().iter().enumerate() {
            let ratio = iv.width() / self.at(d);
            if ratio > best_ratio {
                best_ratio = ratio;
                best = Some(d);
            }
        }
        best
    }
}

impl std::fmt::Display for Resolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Resolution::Uniform(e) => write!(f, "{e}"),
            Resolution::PerDim(v) => {
                let parts: Vec<String> = v.iter().map(|e| e.to_string()).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

impl std::str::FromStr for Resolution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Result<Vec<f64>, _> = s.split(',').map(|p| p.trim().parse::<f64>()).collect();
        let parts = parts.map_err(|e| format!("bad resolution `{s}`: {e}"))?;
        let res = match parts.as_slice() {
            [e] => Resolution::Uniform(*e),
            _ => Resolution::PerDim(parts),
        };
        if res.is_valid() {
            Ok(res)
        } else {
            Err(format!("resolution must be positive: `{s}`"))
        }
    }
}
