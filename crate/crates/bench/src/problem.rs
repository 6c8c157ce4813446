//! Problem registry.

use std::f64::consts::PI;

use grp_core::riemann::{solve_star, RiemannOptions};
use grp_core::scheme::BoundaryPolicy;
use grp_core::{GasModel, PrimitiveState};

use crate::error::BenchError;

/// Right-moving isentropic simple wave on the periodic unit interval.
///
/// `p = rho^gamma`, `u - 2c/(gamma - 1)` is uniform and
/// `rho(x, 0) = 1 + amplitude sin(2 pi x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimpleWave {
    pub amplitude: f64,
}

impl SimpleWave {
    pub fn density0(&self, x: f64) -> f64 {
        1.0 + self.amplitude * (2.0 * PI * x).sin()
    }

    fn density0_dx(&self, x: f64) -> f64 {
        2.0 * PI * self.amplitude * (2.0 * PI * x).cos()
    }

    fn sound_speed(&self, rho: f64, gas: &GasModel) -> f64 {
        (gas.gamma() * rho.powf(gas.gamma() - 1.0)).sqrt()
    }

    /// State along the wave as a function of density.
    pub fn state(&self, rho: f64, gas: &GasModel) -> PrimitiveState {
        let g = gas.gamma();
        let c0 = self.sound_speed(1.0, gas);
        let c = self.sound_speed(rho, gas);
        PrimitiveState::new(rho, 2.0 * (c - c0) / (g - 1.0), rho.powf(g))
    }

    /// Characteristic speed `u + c` carried from `x` at `t = 0`.
    fn char_speed(&self, x: f64, gas: &GasModel) -> f64 {
        let s = self.state(self.density0(x), gas);
        s.u + gas.sound_speed(&s)
    }

    fn char_speed_dx(&self, x: f64, gas: &GasModel) -> f64 {
        let rho = self.density0(x);
        let c = self.sound_speed(rho, gas);
        0.5 * (gas.gamma() + 1.0) * c / rho * self.density0_dx(x)
    }

    /// First time at which characteristics cross.
    pub fn breaking_time(&self, gas: &GasModel) -> f64 {
        let n = 20_000;
        let steepest = (0..n)
            .map(|k| self.char_speed_dx(k as f64 / n as f64, gas))
            .fold(f64::INFINITY, f64::min);
        -1.0 / steepest
    }

    /// Exact solution, found by tracing the characteristic through `(x, t)`
    /// back to `t = 0`. Valid before [`SimpleWave::breaking_time`].
    pub fn exact(&self, x: f64, t: f64, gas: &GasModel) -> PrimitiveState {
        let mut xi = x - self.char_speed(x, gas) * t;
        for _ in 0..50 {
            let g = xi + self.char_speed(xi, gas) * t - x;
            let dg = 1.0 + self.char_speed_dx(xi, gas) * t;
            let step = g / dg;
            xi -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        self.state(self.density0(xi), gas)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialData {
    Riemann { left: PrimitiveState, right: PrimitiveState, x0: f64 },
    SimpleWave(SimpleWave),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub name: String,
    pub x_min: f64,
    pub x_max: f64,
    pub initial: InitialData,
    pub gamma: f64,
    pub t_end: f64,
    pub boundary: BoundaryPolicy,
}

pub const PROBLEM_NAMES: [&str; 3] = ["sod", "leblanc_tangliu", "smooth"];

impl ProblemSpec {
    pub fn sod(gamma: f64) -> Self {
        Self {
            name: "sod".into(),
            x_min: 0.0,
            x_max: 1.0,
            initial: InitialData::Riemann {
                left: PrimitiveState::new(1.0, 0.0, 1.0),
                right: PrimitiveState::new(0.125, 0.0, 0.1),
                x0: 0.5,
            },
            gamma,
            t_end: 0.25,
            boundary: BoundaryPolicy::Transmissive,
        }
    }

    /// Shock tube with density and pressure ratio 1e4 on `[-10, 10]`. The
    /// end time puts the right shock 60% of the way across the right half.
    pub fn leblanc_tangliu(gamma: f64) -> Result<Self, BenchError> {
        let left = PrimitiveState::new(1e4, 0.0, 1e4);
        let right = PrimitiveState::new(1.0, 0.0, 1.0);
        let gas = GasModel::new(gamma)?;
        let fan = solve_star(&left, &right, &gas, &RiemannOptions::default())?;
        let sigma = fan.wave_speeds().right_head;
        Ok(Self {
            name: "leblanc_tangliu".into(),
            x_min: -10.0,
            x_max: 10.0,
            initial: InitialData::Riemann { left, right, x0: 0.0 },
            gamma,
            t_end: 0.6 * 10.0 / sigma,
            boundary: BoundaryPolicy::Transmissive,
        })
    }

    pub fn smooth(gamma: f64) -> Self {
        Self {
            name: "smooth".into(),
            x_min: 0.0,
            x_max: 1.0,
            initial: InitialData::SimpleWave(SimpleWave { amplitude: 0.2 }),
            gamma,
            t_end: 0.2,
            boundary: BoundaryPolicy::Periodic,
        }
    }

    pub fn by_name(name: &str, gamma: f64) -> Result<Self, BenchError> {
        match name {
            "sod" => Ok(Self::sod(gamma)),
            "leblanc_tangliu" | "leblanc" => Self::leblanc_tangliu(gamma),
            "smooth" => Ok(Self::smooth(gamma)),
            other => Err(BenchError::UnknownProblem(other.to_string())),
        }
    }

    pub fn gas(&self) -> Result<GasModel, BenchError> {
        Ok(GasModel::new(self.gamma)?)
    }

    pub fn is_riemann(&self) -> bool {
        matches!(self.initial, InitialData::Riemann { .. })
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |key: &str, msg: String| Err(BenchError::Validation { key: key.to_string(), message: msg });
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return bad("t_end", format!("t_end = {} must be positive", self.t_end));
        }
        if !(self.x_max > self.x_min) {
            return bad("domain", format!("[{}, {}] is empty", self.x_min, self.x_max));
        }
        if !(self.gamma > 1.0) {
            return bad("gamma", format!("gamma = {} must exceed 1", self.gamma));
        }
        match self.initial {
            InitialData::Riemann { left, right, x0 } => {
                if !left.is_physical() || !right.is_physical() {
                    return bad("initial", "Riemann states need positive density and pressure".into());
                }
                if !(x0 > self.x_min && x0 < self.x_max) {
                    return bad("x0", format!("interface {x0} lies outside the domain"));
                }
            }
            InitialData::SimpleWave(w) => {
                if !(w.amplitude.abs() < 1.0) {
                    return bad("amplitude", "amplitude must be below 1".into());
                }
                let tb = w.breaking_time(&self.gas()?);
                if self.t_end >= tb {
                    return bad("t_end", format!("t_end = {} is past the breaking time {tb}", self.t_end));
                }
            }
        }
        Ok(())
    }

    /// Initial primitive state at a point.
    pub fn initial_state(&self, x: f64, gas: &GasModel) -> PrimitiveState {
        match self.initial {
            InitialData::Riemann { left, right, x0 } => {
                if x < x0 {
                    left
                } else {
                    right
                }
            }
            InitialData::SimpleWave(w) => w.state(w.density0(x), gas),
        }
    }
}
