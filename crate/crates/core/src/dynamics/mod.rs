//! Discrete-time system models `x_{k+1} = f(x_k, u_k)`.

mod config;
mod controller;
mod input;
mod models;
mod trace;

use std::path::Path;

use sha2::{Digest, Sha256};

pub use config::{InputDomainConfig, ModelKind, SystemConfig};
pub use controller::Controller;
pub use input::{InputSchedule, InputSet, PieceSet, SchedulePiece};
pub use models::{Affine, Dynamics, Spacecraft, Temperature, Unicycle};
pub use trace::{Trace, TraceReader};

use crate::error::{Error, Result};
use crate::geometry::Aabb;

/// Dynamics together with the state domain and the (possibly
/// time-varying) input domain.
#[derive(Clone, Debug)]
pub struct SystemModel {
    config: SystemConfig,
    dynamics: Dynamics,
    state_domain: Aabb,
    inputs: InputSchedule,
    digest: String,
}

impl SystemModel {
    pub fn from_config(config: SystemConfig) -> Result<Self> {
        let (dynamics, state_domain, inputs) = config.resolve()?;
        let json = serde_json::to_string(&config)?;
        let digest = hex::encode(Sha256::digest(json.as_bytes()));
        Ok(SystemModel {
            config,
            dynamics,
            state_domain,
            inputs,
            digest,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_config(SystemConfig::load(path)?)
    }

    pub fn builtin(kind: ModelKind) -> Result<Self> {
        Self::from_config(SystemConfig::builtin(kind))
    }

    pub fn building_temperature() -> Self {
        Self::builtin(ModelKind::BuildingTemperature).expect("built-in model")
    }

    pub fn double_integrator() -> Self {
        Self::builtin(ModelKind::DoubleIntegrator).expect("built-in model")
    }

    pub fn unicycle() -> Self {
        Self::builtin(ModelKind::Unicycle).expect("built-in model")
    }

    pub fn spacecraft() -> Self {
        Self::builtin(ModelKind::Spacecraft).expect("built-in model")
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }

    /// Hex SHA-256 of the JSON configuration.
    pub fn digest(&self) -> &str {
        &self.digest
    }

    pub fn state_dim(&self) -> usize {
        self.dynamics.state_dim()
    }

    pub fn input_dim(&self) -> usize {
        self.dynamics.input_dim()
    }

    pub fn state_domain(&self) -> &Aabb {
        &self.state_domain
    }

    pub fn input_set(&self, k: usize) -> &InputSet {
        self.inputs.at(k)
    }

    pub fn input_schedule(&self) -> &InputSchedule {
        &self.inputs
    }

    fn check_state(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.state_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.state_dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Successor state; `u` must be admissible at instant `k`.
    pub fn step(&self, x: &[f64], u: &[f64], k: usize) -> Result<Vec<f64>> {
        self.check_state(x)?;
        if u.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                found: u.len(),
            });
        }
        if !self.input_set(k).contains(u) {
            return Err(Error::InputOutOfDomain {
                k,
                input: u.to_vec(),
            });
        }
        Ok(self.dynamics.step(x, u))
    }

    /// Box containing every successor of `bx` under inputs in `bu`.
    pub fn image_enclosure(&self, bx: &Aabb, bu: &Aabb, k: usize) -> Result<Aabb> {
        if bx.dim() != self.state_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.state_dim(),
                found: bx.dim(),
            });
        }
        if !self.input_set(k).bounding_box().contains_box(bu) {
            return Err(Error::InputOutOfDomain { k, input: bu.center() });
        }
        Ok(self.dynamics.enclose(bx, bu))
    }

    /// Runs `steps` steps from `x0`, which must lie in the state domain.
    pub fn simulate(&self, x0: &[f64], controller: &mut Controller, steps: usize) -> Result<Trace> {
        self.check_state(x0)?;
        if !self.state_domain.contains_point(x0) {
            return Err(Error::StateOutOfDomain { state: x0.to_vec() });
        }
        let mut states = Vec::with_capacity(steps + 1);
        states.push(x0.to_vec());
        for k in 0..steps {
            let u = controller.input(self, k)?;
            let next = self.step(&states[k], &u, k)?;
            states.push(next);
        }
        Ok(Trace::new(0, states))
    }
}
