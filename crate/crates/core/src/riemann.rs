//! Exact solver for the associated Riemann problem of a polytropic gas.
//!
//! All wave formulas are written once, for a wave facing the right state
//! (the `u + c` family). The left family is obtained by mirroring the left
//! state, applying the right-wave formula and mirroring back.

use crate::error::{Error, Result};
use crate::gas::{GasModel, Mirror, PrimitiveState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveKind {
    Shock,
    /// Also used for zero-strength waves.
    Rarefaction,
}

impl WaveKind {
    pub fn name(&self) -> &'static str {
        match self {
            WaveKind::Shock => "shock",
            WaveKind::Rarefaction => "rarefaction",
        }
    }
}

/// A nonlinear wave of the Riemann fan.
///
/// `head` bounds the wave against the outer (initial) state and `tail`
/// against the star region; for a shock both equal the shock speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wave {
    pub kind: WaveKind,
    pub head: f64,
    pub tail: f64,
}

impl Wave {
    pub fn shock_speed(&self) -> Option<f64> {
        match self.kind {
            WaveKind::Shock => Some(self.head),
            WaveKind::Rarefaction => None,
        }
    }
}

impl Mirror for Wave {
    fn mirror(&self) -> Self {
        Wave { kind: self.kind, head: -self.head, tail: -self.tail }
    }
}

/// Characteristic and shock speeds of a solved fan, ordered left to right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveSpeeds {
    pub left_head: f64,
    pub left_tail: f64,
    pub contact: f64,
    pub right_tail: f64,
    pub right_head: f64,
}

/// Full structure of the associated Riemann solution.
///
/// `rho_star_left` / `rho_star_right` are the densities on either side of
/// the contact (the 1* and 2* states).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannFan {
    pub p_star: f64,
    pub u_star: f64,
    pub rho_star_left: f64,
    pub rho_star_right: f64,
    pub left: Wave,
    pub right: Wave,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannOptions {
    /// Relative tolerance on the star pressure and on the pressure-function residual.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for RiemannOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 100 }
    }
}

/// Post-shock density `H(p; p_behind, rho_behind)` on the Hugoniot curve.
pub fn hugoniot_density(p: f64, behind: &PrimitiveState, gas: &GasModel) -> f64 {
    let mu2 = gas.mu2();
    let ratio = p / behind.p;
    behind.rho * (ratio + mu2) / (mu2 * ratio + 1.0)
}

/// `(dH/dp, dH/dp_behind, dH/drho_behind)` at `(p; p_behind, rho_behind)`.
pub fn hugoniot_density_partials(p: f64, behind: &PrimitiveState, gas: &GasModel) -> (f64, f64, f64) {
    let mu2 = gas.mu2();
    let (pb, rb) = (behind.p, behind.rho);
    let den = mu2 * p + pb;
    let one_m_mu4 = 1.0 - mu2 * mu2;
    let h1 = rb * pb * one_m_mu4 / (den * den);
    let h2 = -rb * p * one_m_mu4 / (den * den);
    let h3 = (p + mu2 * pb) / den;
    (h1, h2, h3)
}

/// `sqrt((rho - rho_b)(p - p_b) / (rho rho_b))` with `rho = H(p)`; always `>= 0`.
pub fn shock_velocity_jump(p: f64, behind: &PrimitiveState, gas: &GasModel) -> f64 {
    let rho = hugoniot_density(p, behind, gas);
    let v = (rho - behind.rho) * (p - behind.p) / (rho * behind.rho);
    v.max(0.0).sqrt()
}

/// Signed shock branch `(p - p_b) * sqrt((1 - mu^2) / (rho_b (p + mu^2 p_b)))`.
///
/// Equals [`shock_velocity_jump`] for `p >= p_b` and is smooth through `p = p_b`.
fn signed_shock_jump(p: f64, behind: &PrimitiveState, gas: &GasModel) -> (f64, f64) {
    let mu2 = gas.mu2();
    let s = p + mu2 * behind.p;
    let k = ((1.0 - mu2) / (behind.rho * s)).sqrt();
    let f = (p - behind.p) * k;
    let df = k * (p + (1.0 + 2.0 * mu2) * behind.p) / (2.0 * s);
    (f, df)
}

/// `(dPhi/dp, dPhi/dp_behind, dPhi/drho_behind)` for the shock branch.
pub fn shock_velocity_jump_partials(p: f64, behind: &PrimitiveState, gas: &GasModel) -> (f64, f64, f64) {
    let mu2 = gas.mu2();
    let (pb, rb) = (behind.p, behind.rho);
    let s = p + mu2 * pb;
    let k = ((1.0 - mu2) / (rb * s)).sqrt();
    let d_p = k * (p + (1.0 + 2.0 * mu2) * pb) / (2.0 * s);
    let d_pb = -k * ((2.0 + mu2) * p + mu2 * pb) / (2.0 * s);
    let d_rb = -(p - pb) * k / (2.0 * rb);
    (d_p, d_pb, d_rb)
}

/// Isentropic counterpart of the shock jump, `(2 c_b/(gamma-1)) ((p/p_b)^((gamma-1)/(2 gamma)) - 1)`.
pub fn rarefaction_velocity_jump(p: f64, behind: &PrimitiveState, gas: &GasModel) -> f64 {
    let g = gas.gamma();
    let c = gas.sound_speed(behind);
    2.0 * c / (g - 1.0) * ((p / behind.p).powf((g - 1.0) / (2.0 * g)) - 1.0)
}

/// Pressure function of one wave and its derivative in `p`.
fn wave_function(p: f64, side: &PrimitiveState, gas: &GasModel) -> (f64, f64) {
    if p > side.p {
        signed_shock_jump(p, side, gas)
    } else {
        let g = gas.gamma();
        let f = rarefaction_velocity_jump(p, side, gas);
        let c = gas.sound_speed(side);
        let df = (p / side.p).powf(-(g + 1.0) / (2.0 * g)) / (side.rho * c);
        (f, df)
    }
}

/// Density at `p` on the isentrope through `side`.
fn isentrope_density(p: f64, side: &PrimitiveState, gas: &GasModel) -> f64 {
    side.rho * (p / side.p).powf(1.0 / gas.gamma())
}

/// Speed of a right-facing (`u + c`) shock of strength `p_star` into `right`.
fn right_shock_speed(p_star: f64, right: &PrimitiveState, gas: &GasModel) -> f64 {
    let g = gas.gamma();
    let c = gas.sound_speed(right);
    right.u + c * ((g + 1.0) / (2.0 * g) * p_star / right.p + (g - 1.0) / (2.0 * g)).sqrt()
}

/// Right wave (`u + c` family) of a fan with star pressure/velocity given.
fn right_wave(p_star: f64, u_star: f64, right: &PrimitiveState, gas: &GasModel) -> (Wave, f64) {
    if p_star > right.p {
        let sigma = right_shock_speed(p_star, right, gas);
        (
            Wave { kind: WaveKind::Shock, head: sigma, tail: sigma },
            hugoniot_density(p_star, right, gas),
        )
    } else {
        let rho = isentrope_density(p_star, right, gas);
        let c_star = gas.sound_speed(&PrimitiveState::new(rho, u_star, p_star));
        (
            Wave { kind: WaveKind::Rarefaction, head: right.u + gas.sound_speed(right), tail: u_star + c_star },
            rho,
        )
    }
}

/// Star-region solution of the Riemann problem with data `left | right`.
pub fn solve_star(
    left: &PrimitiveState,
    right: &PrimitiveState,
    gas: &GasModel,
    opts: &RiemannOptions,
) -> Result<RiemannFan> {
    let left = left.validated()?;
    let right = right.validated()?;
    let g = gas.gamma();
    let (cl, cr) = (gas.sound_speed(&left), gas.sound_speed(&right));
    let du = right.u - left.u;
    let deficit = 2.0 * (cl + cr) / (g - 1.0) - du;
    if !(deficit > 0.0) {
        return Err(Error::VacuumFormation { deficit });
    }

    let p_star = if left.p == right.p && left.u == right.u {
        left.p
    } else {
        star_pressure(&left, &right, gas, opts)?
    };
    let (fl, _) = wave_function(p_star, &left, gas);
    let (fr, _) = wave_function(p_star, &right, gas);
    let u_star = 0.5 * (left.u + right.u) + 0.5 * (fr - fl);

    let (right_w, rho_star_right) = right_wave(p_star, u_star, &right, gas);
    let (left_m, rho_star_left) = right_wave(p_star, -u_star, &left.mirror(), gas);
    Ok(RiemannFan {
        p_star,
        u_star,
        rho_star_left,
        rho_star_right,
        left: left_m.mirror(),
        right: right_w,
    })
}

/// Safeguarded Newton iteration on `f_L(p) + f_R(p) + u_R - u_L = 0`.
///
/// The pressure function is increasing and concave; a bracket is kept and
/// any Newton step leaving it (or going non-positive) is replaced by bisection.
fn star_pressure(left: &PrimitiveState, right: &PrimitiveState, gas: &GasModel, opts: &RiemannOptions) -> Result<f64> {
    let g = gas.gamma();
    let (cl, cr) = (gas.sound_speed(left), gas.sound_speed(right));
    let du = right.u - left.u;
    let z = (g - 1.0) / (2.0 * g);
    let scale = cl + cr + left.u.abs() + right.u.abs();
    let residual = |p: f64| {
        let (fl, dfl) = wave_function(p, left, gas);
        let (fr, dfr) = wave_function(p, right, gas);
        (fl + fr + du, dfl + dfr)
    };

    let guess = ((cl + cr - 0.5 * (g - 1.0) * du) / (cl / left.p.powf(z) + cr / right.p.powf(z))).powf(1.0 / z);
    let mut p = if guess.is_finite() && guess > 0.0 { guess } else { 0.5 * (left.p + right.p) };
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    let mut last = f64::NAN;

    for _ in 0..opts.max_iter {
        let (f, df) = residual(p);
        last = f;
        if f == 0.0 {
            return Ok(p);
        }
        if f < 0.0 {
            lo = lo.max(p);
        } else {
            hi = hi.min(p);
        }
        let mut next = p - f / df;
        if !(next.is_finite() && next > lo && next < hi) {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * p.max(lo) };
        }
        let converged = (next - p).abs() <= opts.tol * 0.5 * (next + p);
        p = next;
        if converged {
            let (f, _) = residual(p);
            if f.abs() <= opts.tol * scale {
                return Ok(p);
            }
            last = f;
        }
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, residual: last })
}

impl Mirror for RiemannFan {
    fn mirror(&self) -> Self {
        RiemannFan {
            p_star: self.p_star,
            u_star: -self.u_star,
            rho_star_left: self.rho_star_right,
            rho_star_right: self.rho_star_left,
            left: self.right.mirror(),
            right: self.left.mirror(),
        }
    }
}

impl RiemannFan {
    pub fn wave_speeds(&self) -> WaveSpeeds {
        WaveSpeeds {
            left_head: self.left.head,
            left_tail: self.left.tail,
            contact: self.u_star,
            right_tail: self.right.tail,
            right_head: self.right.head,
        }
    }

    pub fn star_left(&self) -> PrimitiveState {
        PrimitiveState::new(self.rho_star_left, self.u_star, self.p_star)
    }

    pub fn star_right(&self) -> PrimitiveState {
        PrimitiveState::new(self.rho_star_right, self.u_star, self.p_star)
    }

    /// Self-similar solution `R(xi; left, right)` at `xi = x/t`.
    ///
    /// On the contact itself (`xi == u_star`) the left star state is returned.
    pub fn sample(&self, left: &PrimitiveState, right: &PrimitiveState, gas: &GasModel, xi: f64) -> PrimitiveState {
        if xi > self.u_star {
            self.sample_right_side(right, gas, xi)
        } else {
            self.mirror().sample_right_side(&left.mirror(), gas, -xi).mirror()
        }
    }

    /// Sampling for `xi > u_star`.
    fn sample_right_side(&self, right: &PrimitiveState, gas: &GasModel, xi: f64) -> PrimitiveState {
        match self.right.kind {
            WaveKind::Shock => {
                if xi >= self.right.head {
                    *right
                } else {
                    self.star_right()
                }
            }
            WaveKind::Rarefaction => {
                if xi >= self.right.head {
                    *right
                } else if xi <= self.right.tail {
                    self.star_right()
                } else {
                    right_fan_state(right, gas, xi)
                }
            }
        }
    }
}

/// State inside a right-facing centred rarefaction at `xi = u + c`.
pub(crate) fn right_fan_state(right: &PrimitiveState, gas: &GasModel, xi: f64) -> PrimitiveState {
    let g = gas.gamma();
    let cr = gas.sound_speed(right);
    let base = 2.0 / (g + 1.0) - (g - 1.0) / ((g + 1.0) * cr) * (right.u - xi);
    let u = 2.0 / (g + 1.0) * (-cr + 0.5 * (g - 1.0) * right.u + xi);
    PrimitiveState::new(right.rho * base.powf(2.0 / (g - 1.0)), u, right.p * base.powf(2.0 * g / (g - 1.0)))
}
