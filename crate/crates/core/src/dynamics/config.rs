use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::input::{InputSchedule, InputSet, SchedulePiece};
use super::models::{Affine, Dynamics, Spacecraft, Temperature, Unicycle};
use crate::error::{Error, Result};
use crate::geometry::Aabb;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    BuildingTemperature,
    DoubleIntegrator,
    Unicycle,
    Spacecraft,
    Affine,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::BuildingTemperature => "building_temperature",
            ModelKind::DoubleIntegrator => "double_integrator",
            ModelKind::Unicycle => "unicycle",
            ModelKind::Spacecraft => "spacecraft",
            ModelKind::Affine => "affine",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputDomainConfig {
    Constant(InputSet),
    Schedule(Vec<SchedulePiece>),
}

/// System description as read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub model: ModelKind,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub affine: Option<Affine>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_domain: Option<Aabb>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_domain: Option<InputDomainConfig>,
}

impl SystemConfig {
    pub fn builtin(model: ModelKind) -> Self {
        SystemConfig {
            model,
            params: BTreeMap::new(),
            affine: None,
            state_domain: None,
            input_domain: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("system config: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    fn take_params(&self, known: &[(&str, f64)]) -> Result<Vec<f64>> {
        if let Some(bad) = self.params.keys().find(|k| !known.iter().any(|(n, _)| n == k)) {
            let names: Vec<_> = known.iter().map(|(n, _)| *n).collect();
            return Err(Error::Config(format!(
                "unknown parameter `{bad}` for {}; expected one of {names:?}",
                self.model.name()
            )));
        }
        Ok(known
            .iter()
            .map(|(n, d)| self.params.get(*n).copied().unwrap_or(*d))
            .collect())
    }

    /// Dynamics plus the default domains of the model.
    pub(crate) fn resolve(&self) -> Result<(Dynamics, Aabb, InputSchedule)> {
        let b = |lo: &[f64], hi: &[f64]| Aabb::new(lo, hi).expect("static bounds");
        let (dynamics, x, u) = match self.model {
            ModelKind::BuildingTemperature => {
                let d = Temperature::default();
                let p = self.take_params(&[
                    ("tau", d.tau),
                    ("t_h", d.t_h),
                    ("t_e", d.t_e),
                    ("alpha_e", d.alpha_e),
                    ("alpha_h", d.alpha_h),
                ])?;
                let t = Temperature {
                    tau: p[0],
                    t_h: p[1],
                    t_e: p[2],
                    alpha_e: p[3],
                    alpha_h: p[4],
                };
                (
                    Dynamics::Temperature(t),
                    Some(b(&[0.0], &[45.0])),
                    Some(InputSchedule::constant(InputSet::Box(b(&[0.0], &[1.0])))),
                )
            }
            ModelKind::DoubleIntegrator => {
                let p = self.take_params(&[("dt", 0.5)])?;
                (
                    Dynamics::Affine(Affine::double_integrator(p[0])),
                    Some(b(&[0.0, -1.5, 0.0, -1.5], &[10.0, 1.5, 10.0, 1.5])),
                    Some(InputSchedule::constant(InputSet::Box(b(
                        &[-1.0, -1.0],
                        &[1.0, 1.0],
                    )))),
                )
            }
            ModelKind::Unicycle => {
                let p = self.take_params(&[("dt", Unicycle::default().dt)])?;
                let half_pi = std::f64::consts::FRAC_PI_2;
                let schedule = InputSchedule::new(
                    vec![
                        (Some(10), InputSet::Box(b(&[-10.0, -0.3], &[10.0, 0.3]))),
                        (None, InputSet::Box(b(&[-3.0, -0.3], &[3.0, 0.3]))),
                    ],
                    2,
                )?;
                (
                    Dynamics::Unicycle(Unicycle { dt: p[0] }),
                    Some(b(&[0.0, 0.0, -half_pi], &[100.0, 100.0, half_pi])),
                    Some(schedule),
                )
            }
            ModelKind::Spacecraft => {
                let d = Spacecraft::default();
                let p = self.take_params(&[("dt", d.dt), ("mu", d.mu), ("r", d.r), ("m_c", d.m_c)])?;
                let s = Spacecraft {
                    dt: p[0],
                    mu: p[1],
                    r: p[2],
                    m_c: p[3],
                };
                (
                    Dynamics::Spacecraft(s),
                    Some(b(&[-100.0, -100.0, 0.0, 0.0], &[0.0, 0.0, 3.5, 3.5])),
                    Some(InputSchedule::constant(InputSet::Box(b(
                        &[0.0, 0.0],
                        &[10.0, 10.0],
                    )))),
                )
            }
            ModelKind::Affine => {
                self.take_params(&[])?;
                let mut a = self
                    .affine
                    .clone()
                    .ok_or_else(|| Error::Config("affine model needs an `affine` section".into()))?;
                a.validate()?;
                (Dynamics::Affine(a), None, None)
            }
        };
        if self.affine.is_some() && self.model != ModelKind::Affine {
            return Err(Error::Config(format!(
                "`affine` section given for model {}",
                self.model.name()
            )));
        }
        let (n, m) = (dynamics.state_dim(), dynamics.input_dim());
        let x = match (&self.state_domain, x) {
            (Some(s), _) => s.clone(),
            (None, Some(d)) => d,
            (None, None) => return Err(Error::Config("missing state_domain".into())),
        };
        if x.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x.dim(),
            });
        }
        if x.intervals().iter().any(|iv| !iv.lo.is_finite() || !iv.hi.is_finite()) {
            return Err(Error::Config("state_domain must be bounded".into()));
        }
        let u = match (&self.input_domain, u) {
            (Some(InputDomainConfig::Constant(s)), _) => {
                InputSchedule::new(vec![(None, s.clone())], m)?
            }
            (Some(InputDomainConfig::Schedule(pieces)), _) => InputSchedule::new(
                pieces
                    .iter()
                    .map(|p| (p.until_k, p.set.clone().into()))
                    .collect(),
                m,
            )?,
            (None, Some(d)) => d,
            (None, None) => return Err(Error::Config("missing input_domain".into())),
        };
        Ok((dynamics, x, u))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_builtin_with_override() {
        let c = SystemConfig::from_json(r#"{"model":"building_temperature","params":{"alpha_e":0.05}}"#)
            .unwrap();
        let (d, x, _) = c.resolve().unwrap();
        assert!(matches!(d, Dynamics::Temperature(t) if t.alpha_e == 0.05));
        assert_eq!(x, Aabb::new(&[0.0], &[45.0]).unwrap());
    }

    #[test]
    fn rejects_unknown_parameter() {
        let c = SystemConfig::from_json(r#"{"model":"unicycle","params":{"speed":1}}"#).unwrap();
        assert!(matches!(c.resolve(), Err(Error::Config(_))));
    }

    #[test]
    fn affine_with_schedule() {
        let c = SystemConfig::from_json(
            r#"{"model":"affine",
                "affine":{"A":[[1,0],[0,1]],"B":[[1,0],[0,1]]},
                "state_domain":{"lo":[0,0],"hi":[16,16]},
                "input_domain":[{"until_k":2,"points":[[2,0],[0,2]]},{"box":{"lo":[-1,-1],"hi":[1,1]}}]}"#,
        )
        .unwrap();
        let (d, _, u) = c.resolve().unwrap();
        assert_eq!(d.state_dim(), 2);
        assert!(u.at(1).contains(&[2.0, 0.0]));
        assert!(u.at(3).contains(&[0.5, 0.5]));
    }

    #[test]
    fn affine_needs_domains() {
        let c = SystemConfig::from_json(r#"{"model":"affine","affine":{"A":[[1]],"B":[[1]]}}"#)
            .unwrap();
        assert!(matches!(c.resolve(), Err(Error::Config(_))));
    }
}
