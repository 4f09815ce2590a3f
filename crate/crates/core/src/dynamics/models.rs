//! Closed-form dynamics with matching box enclosures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Interval};

/// Single-zone heating: `x' = x + τ(αe(Te − x) + αH(Th − x)u)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Temperature {
    pub tau: f64,
    pub t_h: f64,
    pub t_e: f64,
    pub alpha_e: f64,
    pub alpha_h: f64,
}

impl Default for Temperature {
    fn default() -> Self {
        Temperature {
            tau: 1.0,
            t_h: 55.0,
            t_e: 0.0,
            alpha_e: 0.06,
            alpha_h: 0.08,
        }
    }
}

impl Temperature {
    fn step(&self, x: f64, u: f64) -> f64 {
        let gain = 1.0 - self.tau * self.alpha_e - self.tau * self.alpha_h * u;
        let drive = self.tau * (self.alpha_e * self.t_e + self.alpha_h * self.t_h * u);
        x * gain + drive
    }
}

/// `x' = A x + B u + c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(default)]
    pub c: Vec<f64>,
}

impl Affine {
    /// Planar double integrator sampled every `dt`, state `(x, vx, y, vy)`.
    pub fn double_integrator(dt: f64) -> Self {
        let h = dt * dt / 2.0;
        Affine {
            a: vec![
                vec![1.0, dt, 0.0, 0.0],
                vec![0.0, 1.0, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, dt],
                vec![0.0, 0.0, 0.0, 1.0],
            ],
            b: vec![vec![h, 0.0], vec![dt, 0.0], vec![0.0, h], vec![0.0, dt]],
            c: vec![0.0; 4],
        }
    }

    pub(crate) fn validate(&mut self) -> Result<()> {
        let n = self.a.len();
        if n == 0 {
            return Err(Error::Config("affine model needs a non-empty A".into()));
        }
        if let Some(row) = self.a.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: row.len(),
            });
        }
        if self.b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.b.len(),
            });
        }
        let m = self.b[0].len();
        if let Some(row) = self.b.iter().find(|r| r.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: row.len(),
            });
        }
        if self.c.is_empty() {
            self.c = vec![0.0; n];
        }
        if self.c.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.c.len(),
            });
        }
        let all = self.a.iter().chain(&self.b).flatten().chain(&self.c);
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("affine coefficients must be finite".into()));
        }
        Ok(())
    }

    fn row(&self, i: usize, x: &[f64], u: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (a, v) in self.a[i].iter().zip(x) {
            acc += a * v;
        }
        for (b, v) in self.b[i].iter().zip(u) {
            acc += b * v;
        }
        acc + self.c[i]
    }

    /// Exact image box: each row is evaluated at its minimising and
    /// maximising corner, in the same operation order as [`Affine::row`].
    fn enclose(&self, bx: &Aabb, bu: &Aabb) -> Aabb {
        let (x, u) = (bx.intervals(), bu.intervals());
        Aabb::from_intervals(self.a.iter().zip(&self.b).zip(&self.c).map(|((ar, br), &c)| {
            let (mut lo, mut hi) = (0.0, 0.0);
            for (&k, iv) in ar.iter().zip(x).chain(br.iter().zip(u)) {
                let (l, h) = if k >= 0.0 { (iv.lo, iv.hi) } else { (iv.hi, iv.lo) };
                lo += k * l;
                hi += k * h;
            }
            Interval::new(lo + c, hi + c)
        }))
    }
}

/// Kinematic unicycle `(x, y, θ)` with inputs `(v, ω)`, forward Euler.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Unicycle {
    pub dt: f64,
}

impl Default for Unicycle {
    fn default() -> Self {
        Unicycle { dt: 0.5 }
    }
}

/// Planar relative motion in the rotating frame of a target on a circular
/// orbit, forward Euler. State `(x, y, vx, vy)`, thrust `(ux, uy)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spacecraft {
    pub dt: f64,
    pub mu: f64,
    pub r: f64,
    pub m_c: f64,
}

impl Default for Spacecraft {
    fn default() -> Self {
        Spacecraft {
            dt: 0.5,
            mu: 3.986e14 * 60.0 * 60.0,
            r: 42164e3,
            m_c: 500.0,
        }
    }
}

impl Spacecraft {
    fn mean_motion(&self) -> f64 {
        (self.mu / (self.r * self.r * self.r)).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Dynamics {
    Temperature(Temperature),
    Affine(Affine),
    Unicycle(Unicycle),
    Spacecraft(Spacecraft),
}

impl Dynamics {
    pub fn state_dim(&self) -> usize {
        match self {
            Dynamics::Temperature(_) => 1,
            Dynamics::Affine(a) => a.a.len(),
            Dynamics::Unicycle(_) => 3,
            Dynamics::Spacecraft(_) => 4,
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Dynamics::Temperature(_) => 1,
            Dynamics::Affine(a) => a.b[0].len(),
            Dynamics::Unicycle(_) | Dynamics::Spacecraft(_) => 2,
        }
    }

    /// Absolute outward margin added to nonlinear enclosures, covering the
    /// rounding gap between point and interval evaluation.
    fn slack(&self) -> Option<f64> {
        match self {
            Dynamics::Affine(_) => None,
            Dynamics::Temperature(_) | Dynamics::Unicycle(_) => Some(1e-12),
            Dynamics::Spacecraft(_) => Some(1e-9),
        }
    }

    pub fn step(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        match self {
            Dynamics::Temperature(t) => vec![t.step(x[0], u[0])],
            Dynamics::Affine(a) => (0..a.a.len()).map(|i| a.row(i, x, u)).collect(),
            Dynamics::Unicycle(m) => {
                let (v, w) = (m.dt * u[0], m.dt * u[1]);
                vec![x[0] + v * x[2].cos(), x[1] + v * x[2].sin(), x[2] + w]
            }
            Dynamics::Spacecraft(s) => {
                let n = s.mean_motion();
                let (px, py, vx, vy) = (x[0], x[1], x[2], x[3]);
                let rx = s.r + px;
                let rc2 = rx * rx + py * py;
                let g = s.mu / (rc2 * rc2.sqrt());
                let ax = n * n * px + 2.0 * n * vy + s.mu / (s.r * s.r) - g * rx + u[0] / s.m_c;
                let ay = n * n * py - 2.0 * n * vx - g * py + u[1] / s.m_c;
                vec![px + s.dt * vx, py + s.dt * vy, vx + s.dt * ax, vy + s.dt * ay]
            }
        }
    }

    /// Box containing `{step(x, u) : x ∈ bx, u ∈ bu}`.
    pub fn enclose(&self, bx: &Aabb, bu: &Aabb) -> Aabb {
        let out = match self {
            Dynamics::Affine(a) => return a.enclose(bx, bu),
            Dynamics::Temperature(t) => {
                // bilinear in (x, u): the extremes sit at the corners
                let xs = bx.interval(0);
                let us = bu.interval(0);
                let vals = [
                    t.step(xs.lo, us.lo),
                    t.step(xs.lo, us.hi),
                    t.step(xs.hi, us.lo),
                    t.step(xs.hi, us.hi),
                ];
                let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Aabb::from_intervals([Interval::new(lo, hi)])
            }
            Dynamics::Unicycle(m) => {
                let x = bx.intervals();
                let v = bu.interval(0).scale(m.dt);
                let w = bu.interval(1).scale(m.dt);
                Aabb::from_intervals([
                    x[0] + v * x[2].cos(),
                    x[1] + v * x[2].sin(),
                    x[2] + w,
                ])
            }
            Dynamics::Spacecraft(s) => {
                let n = s.mean_motion();
                let x = bx.intervals();
                let (px, py, vx, vy) = (x[0], x[1], x[2], x[3]);
                let rx = px + s.r;
                let rc2 = rx.sqr() + py.sqr();
                let g = (rc2 * rc2.sqrt()).recip().scale(s.mu);
                let ax = px.scale(n * n) + vy.scale(2.0 * n) + s.mu / (s.r * s.r) - g * rx
                    + bu.interval(0).scale(1.0 / s.m_c);
                let ay = py.scale(n * n) - vx.scale(2.0 * n) - g * py
                    + bu.interval(1).scale(1.0 / s.m_c);
                Aabb::from_intervals([
                    px + vx.scale(s.dt),
                    py + vy.scale(s.dt),
                    vx + ax.scale(s.dt),
                    vy + ay.scale(s.dt),
                ])
            }
        };
        match self.slack() {
            Some(s) => out.inflate(s),
            None => out,
        }
    }
}
