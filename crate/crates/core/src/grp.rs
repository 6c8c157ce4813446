//! Generalized Riemann problem (GRP) solver.
//!
//! Given piecewise-linear data at an interface, computes the interface value
//! `u_*` (the associated Riemann solution at `x/t = 0`) and the instantaneous
//! time derivatives `(du/dt)_*`, `(dp/dt)_*`, `(drho/dt)_*`.
//!
//! Two solvers are provided. The acoustic solver linearises about the
//! interface state and is used for weak jumps. The nonlinear solver couples
//! one linear relation per wave family,
//!
//! ```text
//! a_L (D0u/Dt)_* + b_L (D0p/Dt)_* = d_L
//! a_R (D0u/Dt)_* + b_R (D0p/Dt)_* = d_R
//! ```
//!
//! where rarefaction families carry the entropy-variation terms through the
//! sound-speed ratio `theta = c_*/c_side`, and shock families come from
//! differentiating the Rankine-Hugoniot relations along the shock path.
//! Formulas are written for a left rarefaction and a right shock; the other
//! two orientations use the [`Mirror`] map.

use crate::error::{Error, Result};
use crate::gas::{ConservedState, GasModel, Mirror, PrimitiveState, SlopeState};
use crate::riemann::{
    hugoniot_density_partials, shock_velocity_jump_partials, solve_star, RiemannFan, RiemannOptions, WaveKind,
};

/// Interface data: limit values and one-sided slopes on both sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrpInput {
    pub left: PrimitiveState,
    pub left_slope: SlopeState,
    pub right: PrimitiveState,
    pub right_slope: SlopeState,
}

impl GrpInput {
    pub fn new(left: PrimitiveState, left_slope: SlopeState, right: PrimitiveState, right_slope: SlopeState) -> Self {
        Self { left, left_slope, right, right_slope }
    }

    /// Piecewise-constant data.
    pub fn riemann(left: PrimitiveState, right: PrimitiveState) -> Self {
        Self::new(left, SlopeState::ZERO, right, SlopeState::ZERO)
    }

    /// Dimensionless jump size used to choose between the acoustic and nonlinear solvers.
    pub fn jump_measure(&self, gas: &GasModel) -> f64 {
        let (l, r) = (&self.left, &self.right);
        let c_min = gas.sound_speed(l).min(gas.sound_speed(r));
        let dp = (l.p - r.p).abs() / l.p.min(r.p);
        let du = (l.u - r.u).abs() / c_min;
        let drho = (l.rho - r.rho).abs() / l.rho.min(r.rho);
        dp.max(du).max(drho)
    }
}

impl Mirror for GrpInput {
    fn mirror(&self) -> Self {
        Self {
            left: self.right.mirror(),
            left_slope: self.right_slope.mirror(),
            right: self.left.mirror(),
            right_slope: self.left_slope.mirror(),
        }
    }
}

/// Material derivatives `(D0u/Dt)_*`, `(D0p/Dt)_*` with `D0/Dt = d/dt + u d/dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialDerivatives {
    pub du: f64,
    pub dp: f64,
}

impl Mirror for MaterialDerivatives {
    fn mirror(&self) -> Self {
        Self { du: -self.du, dp: self.dp }
    }
}

/// Instantaneous time derivatives at the interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrpDerivatives {
    pub drho_dt: f64,
    pub du_dt: f64,
    pub dp_dt: f64,
    /// Present when the nonlinear solver produced the result.
    pub material: Option<MaterialDerivatives>,
}

impl GrpDerivatives {
    pub const ZERO: GrpDerivatives = GrpDerivatives { drho_dt: 0.0, du_dt: 0.0, dp_dt: 0.0, material: None };

    pub fn is_finite(&self) -> bool {
        self.drho_dt.is_finite() && self.du_dt.is_finite() && self.dp_dt.is_finite()
    }

    fn as_slope(&self) -> SlopeState {
        SlopeState::new(self.drho_dt, self.du_dt, self.dp_dt)
    }
}

impl Mirror for GrpDerivatives {
    fn mirror(&self) -> Self {
        Self {
            drho_dt: self.drho_dt,
            du_dt: -self.du_dt,
            dp_dt: self.dp_dt,
            material: self.material.map(|m| m.mirror()),
        }
    }
}

/// One linear relation `a (D0u/Dt)_* + b (D0p/Dt)_* = d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideCoefficients {
    pub a: f64,
    pub b: f64,
    pub d: f64,
}

impl Mirror for SideCoefficients {
    fn mirror(&self) -> Self {
        Self { a: -self.a, b: self.b, d: self.d }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrpMode {
    /// Linearised derivatives everywhere (the one-stage ADER-type scheme).
    Acoustic,
    /// Nonlinear solver for strong jumps, acoustic below the threshold.
    Nonlinear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrpConfig {
    pub mode: GrpMode,
    /// Jumps with [`GrpInput::jump_measure`] below this use the acoustic solver.
    pub acoustic_threshold: f64,
    pub riemann: RiemannOptions,
}

impl Default for GrpConfig {
    fn default() -> Self {
        Self { mode: GrpMode::Nonlinear, acoustic_threshold: 0.01, riemann: RiemannOptions::default() }
    }
}

impl GrpConfig {
    pub fn acoustic() -> Self {
        Self { mode: GrpMode::Acoustic, ..Self::default() }
    }
}

/// Which branch of the dispatch produced a [`GrpSolution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GrpPath {
    /// Every wave moves right; the left data is taken.
    UpwindLeft,
    /// Every wave moves left; the right data is taken.
    UpwindRight,
    Acoustic,
    Nonlinear,
    /// Interface inside a rarefaction fan.
    Sonic,
    /// Nonlinear system degenerate; acoustic solver used instead.
    FallbackAcoustic,
    /// Both solvers degenerate; zero derivatives (Godunov flux).
    FallbackGodunov,
}

impl GrpPath {
    pub const ALL: [GrpPath; 7] = [
        GrpPath::UpwindLeft,
        GrpPath::UpwindRight,
        GrpPath::Acoustic,
        GrpPath::Nonlinear,
        GrpPath::Sonic,
        GrpPath::FallbackAcoustic,
        GrpPath::FallbackGodunov,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            GrpPath::UpwindLeft => "upwind_left",
            GrpPath::UpwindRight => "upwind_right",
            GrpPath::Acoustic => "acoustic",
            GrpPath::Nonlinear => "nonlinear",
            GrpPath::Sonic => "sonic",
            GrpPath::FallbackAcoustic => "fallback_acoustic",
            GrpPath::FallbackGodunov => "fallback_godunov",
        }
    }

    fn index(&self) -> usize {
        *self as usize
    }

    pub fn is_fallback(&self) -> bool {
        matches!(self, GrpPath::FallbackAcoustic | GrpPath::FallbackGodunov)
    }
}

/// Tally of dispatch paths taken over a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PathCounts([u64; 7]);

impl PathCounts {
    pub fn record(&mut self, path: GrpPath) {
        self.0[path.index()] += 1;
    }

    pub fn get(&self, path: GrpPath) -> u64 {
        self.0[path.index()]
    }

    pub fn merge(&mut self, other: &PathCounts) {
        for (a, b) in self.0.iter_mut().zip(other.0) {
            *a += b;
        }
    }

    pub fn fallbacks(&self) -> u64 {
        self.get(GrpPath::FallbackAcoustic) + self.get(GrpPath::FallbackGodunov)
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrpSolution {
    pub star: PrimitiveState,
    pub derivatives: GrpDerivatives,
    pub path: GrpPath,
}

impl GrpSolution {
    /// `u_* + (dt/2) (du/dt)_*`, the time-centred interface state.
    pub fn midpoint(&self, dt: f64) -> PrimitiveState {
        self.star.extrapolate(&self.derivatives.as_slope(), 0.5 * dt)
    }

    /// `u_* + dt (du/dt)_*`, the interface state at the end of the step.
    pub fn advanced(&self, dt: f64) -> PrimitiveState {
        self.star.extrapolate(&self.derivatives.as_slope(), dt)
    }

    /// Physical flux of the midpoint state.
    pub fn flux(&self, dt: f64, gas: &GasModel) -> Result<ConservedState> {
        let mid = self.midpoint(dt).validated()?;
        Ok(gas.flux(&mid))
    }
}

impl Mirror for GrpSolution {
    fn mirror(&self) -> Self {
        let path = match self.path {
            GrpPath::UpwindLeft => GrpPath::UpwindRight,
            GrpPath::UpwindRight => GrpPath::UpwindLeft,
            p => p,
        };
        Self { star: self.star.mirror(), derivatives: self.derivatives.mirror(), path }
    }
}

/// `Theta(beta_L) / Theta(beta)` across a polytropic fan: `(c/c_L)^(1/(2 mu^2))`.
pub fn theta_ratio(c_beta: f64, c_l: f64, gas: &GasModel) -> f64 {
    (c_beta / c_l).powf(0.5 / gas.mu2())
}

/// `(T s_x)(0, beta) / (T_L s'_L)` across a polytropic fan: `theta^(1/mu^2 + 1)`.
pub fn entropy_rate_ratio(theta: f64, gas: &GasModel) -> f64 {
    theta.powf(1.0 / gas.mu2() + 1.0)
}

/// Relation for the left (`u - c`) rarefaction family.
pub fn rarefaction_side_coefficients(
    left: &PrimitiveState,
    left_slope: &SlopeState,
    fan: &RiemannFan,
    gas: &GasModel,
) -> Result<SideCoefficients> {
    if fan.left.kind != WaveKind::Rarefaction {
        return Err(Error::WrongWaveKind { expected: "rarefaction", side: "left" });
    }
    let mu2 = gas.mu2();
    let star = fan.star_left();
    let c_star = gas.sound_speed(&star);
    let c_l = gas.sound_speed(left);
    let theta = c_star / c_l;
    let expand = theta_ratio(c_star, c_l, gas);
    let t_ds = gas.initial_entropy_gradient(left, left_slope);
    let dpsi = gas.psi_gradient(left, left_slope);
    let entropy_coef = (1.0 + mu2) / (1.0 + 2.0 * mu2) * expand
        + mu2 / (1.0 + 2.0 * mu2) * theta.powf((1.0 + mu2) / mu2);
    Ok(SideCoefficients {
        a: 1.0,
        b: 1.0 / (star.rho * c_star),
        d: entropy_coef * t_ds - c_l * expand * dpsi,
    })
}

/// Relation for the right (`u + c`) shock family.
pub fn shock_side_coefficients(
    right: &PrimitiveState,
    right_slope: &SlopeState,
    fan: &RiemannFan,
    gas: &GasModel,
) -> Result<SideCoefficients> {
    let Some(sigma) = fan.right.shock_speed() else {
        return Err(Error::WrongWaveKind { expected: "shock", side: "right" });
    };
    let star = fan.star_right();
    let c_star = gas.sound_speed(&star);
    let c_r = gas.sound_speed(right);
    let (phi_p, phi_pb, phi_rb) = shock_velocity_jump_partials(fan.p_star, right, gas);
    let rel_star = sigma - fan.u_star;
    let rel_r = sigma - right.u;

    let l_p = -1.0 / right.rho + rel_r * phi_pb;
    let l_u = rel_r - right.rho * c_r * c_r * phi_pb - right.rho * phi_rb;
    let l_rho = rel_r * phi_rb;
    Ok(SideCoefficients {
        a: 1.0 + star.rho * rel_star * phi_p,
        b: -(rel_star / (star.rho * c_star * c_star) + phi_p),
        d: l_p * right_slope.dp + l_u * right_slope.du + l_rho * right_slope.drho,
    })
}

/// Cramer's rule for the two side relations.
pub fn solve_material_derivatives(l: &SideCoefficients, r: &SideCoefficients) -> Result<MaterialDerivatives> {
    let det = l.a * r.b - r.a * l.b;
    let scale = (l.a.abs() + r.a.abs()) * (l.b.abs() + r.b.abs());
    if !(det.abs() >= 1e-14 * scale) || !det.is_finite() {
        return Err(Error::SingularSystem { det });
    }
    Ok(MaterialDerivatives {
        du: (l.d * r.b - r.d * l.b) / det,
        dp: (l.a * r.d - r.a * l.d) / det,
    })
}

/// Converts material to partial time derivatives using the smooth-flow
/// relations `D0p/Dt = -rho c^2 u_x` and `rho D0u/Dt = -p_x`.
pub fn material_to_temporal(mat: &MaterialDerivatives, star: &PrimitiveState, gas: &GasModel) -> (f64, f64) {
    let c2 = gas.sound_speed(star).powi(2);
    let du_dt = mat.du + star.u * mat.dp / (star.rho * c2);
    let dp_dt = mat.dp + star.u * star.rho * mat.du;
    (du_dt, dp_dt)
}

/// Interface between a left rarefaction and the contact: `dp = c^2 drho + p_s ds`
/// with the entropy advected from the damped initial gradient.
fn rarefaction_density_rate(left: &PrimitiveState, left_slope: &SlopeState, fan: &RiemannFan, dp_dt: f64, gas: &GasModel) -> f64 {
    let star = fan.star_left();
    let c_star = gas.sound_speed(&star);
    let theta = c_star / gas.sound_speed(left);
    let t_ds_star = entropy_rate_ratio(theta, gas) * gas.initial_entropy_gradient(left, left_slope);
    (dp_dt + gas.pressure_entropy_factor(star.rho) * star.u * t_ds_star) / (c_star * c_star)
}

/// Interface between the contact and a right shock, from differentiating
/// `rho = H(p; p_R, rho_R)` along the shock path.
fn shock_density_rate(
    right: &PrimitiveState,
    right_slope: &SlopeState,
    fan: &RiemannFan,
    mat: &MaterialDerivatives,
    gas: &GasModel,
) -> f64 {
    let sigma = fan.right.head;
    let star = fan.star_right();
    let u = star.u;
    let c2_star = gas.sound_speed(&star).powi(2);
    let c2_r = gas.sound_speed(right).powi(2);
    let (h1, h2, h3) = hugoniot_density_partials(fan.p_star, right, gas);
    let rel_r = sigma - right.u;

    let g_rho = u - sigma;
    let g_p = sigma / c2_star - u * h1;
    let g_u = u * star.rho * (sigma - u) * h1;
    let h = rel_r * h2 * right_slope.dp + rel_r * h3 * right_slope.drho - right.rho * (h2 * c2_r + h3) * right_slope.du;
    (u * h - g_p * mat.dp - g_u * mat.du) / g_rho
}

/// `(drho/dt)_*` on the side of the contact where the interface lies
/// (left of it when `u_* >= 0`).
pub fn density_time_derivative(
    fan: &RiemannFan,
    input: &GrpInput,
    mat: &MaterialDerivatives,
    dp_dt: f64,
    gas: &GasModel,
) -> f64 {
    if fan.u_star >= 0.0 {
        match fan.left.kind {
            WaveKind::Rarefaction => rarefaction_density_rate(&input.left, &input.left_slope, fan, dp_dt, gas),
            WaveKind::Shock => shock_density_rate(
                &input.left.mirror(),
                &input.left_slope.mirror(),
                &fan.mirror(),
                &mat.mirror(),
                gas,
            ),
        }
    } else {
        match fan.right.kind {
            WaveKind::Shock => shock_density_rate(&input.right, &input.right_slope, fan, mat, gas),
            WaveKind::Rarefaction => rarefaction_density_rate(
                &input.right.mirror(),
                &input.right_slope.mirror(),
                &fan.mirror(),
                dp_dt,
                gas,
            ),
        }
    }
}

/// Lax-Wendroff replacement of time by space derivatives in smooth flow.
pub fn smooth_time_derivatives(state: &PrimitiveState, slope: &SlopeState, gas: &GasModel) -> GrpDerivatives {
    let c2 = gas.sound_speed(state).powi(2);
    GrpDerivatives {
        drho_dt: -(state.u * slope.drho + state.rho * slope.du),
        du_dt: -(state.u * slope.du + slope.dp / state.rho),
        dp_dt: -(state.u * slope.dp + state.rho * c2 * slope.du),
        material: None,
    }
}

/// Linearised GRP about the interface state `star`.
pub fn acoustic_grp(input: &GrpInput, star: &PrimitiveState, gas: &GasModel) -> GrpDerivatives {
    let c = gas.sound_speed(star);
    let (u, rho) = (star.u, star.rho);
    if u - c >= 0.0 {
        return smooth_time_derivatives(star, &input.left_slope, gas);
    }
    if u + c <= 0.0 {
        return smooth_time_derivatives(star, &input.right_slope, gas);
    }
    let (sl, sr) = (&input.left_slope, &input.right_slope);
    let w_plus = (u + c) * (sl.du + sl.dp / (rho * c));
    let w_minus = (u - c) * (sr.du - sr.dp / (rho * c));
    let du_dt = -0.5 * (w_plus + w_minus);
    let dp_dt = -0.5 * rho * c * (w_plus - w_minus);
    let upwind = if u > 0.0 { sl } else { sr };
    let drho_dt = (dp_dt + u * (upwind.dp - c * c * upwind.drho)) / (c * c);
    GrpDerivatives { drho_dt, du_dt, dp_dt, material: None }
}

fn left_family_coefficients(input: &GrpInput, fan: &RiemannFan, gas: &GasModel) -> Result<SideCoefficients> {
    match fan.left.kind {
        WaveKind::Rarefaction => rarefaction_side_coefficients(&input.left, &input.left_slope, fan, gas),
        WaveKind::Shock => Ok(shock_side_coefficients(&input.left.mirror(), &input.left_slope.mirror(), &fan.mirror(), gas)?
            .mirror()),
    }
}

fn right_family_coefficients(input: &GrpInput, fan: &RiemannFan, gas: &GasModel) -> Result<SideCoefficients> {
    match fan.right.kind {
        WaveKind::Shock => shock_side_coefficients(&input.right, &input.right_slope, fan, gas),
        WaveKind::Rarefaction => Ok(rarefaction_side_coefficients(
            &input.right.mirror(),
            &input.right_slope.mirror(),
            &fan.mirror(),
            gas,
        )?
        .mirror()),
    }
}

/// Nonlinear GRP for an interface inside the star region.
pub fn nonlinear_grp(input: &GrpInput, fan: &RiemannFan, gas: &GasModel) -> Result<GrpDerivatives> {
    let cl = left_family_coefficients(input, fan, gas)?;
    let cr = right_family_coefficients(input, fan, gas)?;
    let mat = solve_material_derivatives(&cl, &cr)?;
    let star = if fan.u_star >= 0.0 { fan.star_left() } else { fan.star_right() };
    let (du_dt, dp_dt) = material_to_temporal(&mat, &star, gas);
    let drho_dt = density_time_derivative(fan, input, &mat, dp_dt, gas);
    Ok(GrpDerivatives { drho_dt, du_dt, dp_dt, material: Some(mat) })
}

/// Full interface solve: locates `x = 0` in the Riemann fan and applies the
/// upwind, sonic, acoustic or nonlinear treatment.
pub fn grp_interface_dispatch(input: &GrpInput, gas: &GasModel, config: &GrpConfig) -> Result<GrpSolution> {
    let fan = solve_star(&input.left, &input.right, gas, &config.riemann)?;
    let w = fan.wave_speeds();

    if w.left_head >= 0.0 {
        return Ok(GrpSolution {
            star: input.left,
            derivatives: smooth_time_derivatives(&input.left, &input.left_slope, gas),
            path: GrpPath::UpwindLeft,
        });
    }
    if w.right_head <= 0.0 {
        return Ok(GrpSolution {
            star: input.right,
            derivatives: smooth_time_derivatives(&input.right, &input.right_slope, gas),
            path: GrpPath::UpwindRight,
        });
    }

    let star = fan.sample(&input.left, &input.right, gas, 0.0);
    let in_left_fan = fan.left.kind == WaveKind::Rarefaction && w.left_tail > 0.0;
    let in_right_fan = fan.right.kind == WaveKind::Rarefaction && w.right_tail < 0.0;
    if in_left_fan || in_right_fan {
        let slope = if in_left_fan { input.left_slope } else { input.right_slope };
        let sonic = GrpInput::new(star, slope, star, slope);
        return Ok(GrpSolution { star, derivatives: acoustic_grp(&sonic, &star, gas), path: GrpPath::Sonic });
    }

    let acoustic = |path| GrpSolution { star, derivatives: acoustic_grp(input, &star, gas), path };
    if config.mode == GrpMode::Acoustic || input.jump_measure(gas) < config.acoustic_threshold {
        return Ok(acoustic(GrpPath::Acoustic));
    }

    match nonlinear_grp(input, &fan, gas) {
        Ok(d) if d.is_finite() => Ok(GrpSolution { star, derivatives: d, path: GrpPath::Nonlinear }),
        outcome => {
            log::debug!("nonlinear GRP degenerate ({outcome:?}); falling back to acoustic");
            let fallback = acoustic(GrpPath::FallbackAcoustic);
            if fallback.derivatives.is_finite() {
                Ok(fallback)
            } else {
                log::debug!("acoustic GRP degenerate; falling back to Godunov");
                Ok(GrpSolution { star, derivatives: GrpDerivatives::ZERO, path: GrpPath::FallbackGodunov })
            }
        }
    }
}

/// Second-order GRP flux `f(u_* + (dt/2) (du/dt)_*)`.
///
/// Fails with [`Error::NonPhysicalState`] if the midpoint state is not
/// positive, which means `dt` is too large.
pub fn grp_flux(input: &GrpInput, gas: &GasModel, dt: f64, config: &GrpConfig) -> Result<ConservedState> {
    grp_interface_dispatch(input, gas, config)?.flux(dt, gas)
}
