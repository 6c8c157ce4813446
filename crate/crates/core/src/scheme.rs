//! Finite-volume driver.
//!
//! Cell averages are advanced by
//! `u_j^{n+1} = u_j^n - (dt/dx) (F_{j+1/2} - F_{j-1/2})`
//! with interface fluxes from one of the solvers in [`FluxSolver`]. Slopes are
//! carried in primitive variables because that is what the GRP solver uses.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gas::{ConservedState, GasModel, Mirror, PrimitiveState, SlopeState};
use crate::grp::{grp_interface_dispatch, GrpConfig, GrpInput, GrpMode, PathCounts};
use crate::riemann::{solve_star, RiemannOptions};

/// Uniform 1D grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub n_cells: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
}

impl Grid {
    pub const GHOST_WIDTH: usize = 2;

    pub fn new(n_cells: usize, x_min: f64, x_max: f64) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::InvalidGrid("need at least one cell".into()));
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidGrid(format!("bad domain [{x_min}, {x_max}]")));
        }
        Ok(Self { n_cells, x_min, x_max, dx: (x_max - x_min) / n_cells as f64 })
    }

    pub fn center(&self, j: usize) -> f64 {
        self.x_min + (j as f64 + 0.5) * self.dx
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|j| self.center(j)).collect()
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }
}

/// Cell averages plus the primitive slopes carried by the GRP scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    pub cells: Vec<ConservedState>,
    pub slopes: Vec<SlopeState>,
}

impl CellField {
    pub fn from_primitives(prims: &[PrimitiveState], gas: &GasModel) -> Result<Self> {
        let cells = prims
            .iter()
            .map(|s| s.validated().map(|s| gas.primitive_to_conserved(&s)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { slopes: vec![SlopeState::ZERO; cells.len()], cells })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Primitive states, failing on the first non-physical cell.
    pub fn primitives(&self, gas: &GasModel) -> Result<Vec<PrimitiveState>> {
        to_primitives(&self.cells, gas)
    }

    /// `sum_j u_j dx` for each conserved component.
    pub fn totals(&self, dx: f64) -> ConservedState {
        self.cells.iter().fold(ConservedState::new(0.0, 0.0, 0.0), |acc, c| acc + *c) * dx
    }
}

fn to_primitives(cells: &[ConservedState], gas: &GasModel) -> Result<Vec<PrimitiveState>> {
    cells
        .iter()
        .enumerate()
        .map(|(j, c)| {
            gas.conserved_to_primitive(c).map_err(|e| match e {
                Error::NonPhysicalState { rho, p } => Error::NonPhysicalCell { cell: j, rho, p },
                other => other,
            })
        })
        .collect()
}

macro_rules! named_enum {
    ($(#[$m:meta])* $name:ident { $($variant:ident => $s:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(&self) -> &'static str {
                match self { $($name::$variant => $s),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($s => Ok($name::$variant),)+
                    _ => Err(Error::InvalidScheme(format!(
                        "unknown {} '{}' (expected one of: {})",
                        stringify!($name),
                        s,
                        [$($s),+].join(", ")
                    ))),
                }
            }
        }
    };
}

named_enum!(
    /// Interface flux.
    FluxSolver {
        ExactGodunov => "exact-godunov",
        Hllc => "hllc",
        RoeEfix => "roe-efix",
        GrpAcoustic => "grp-acoustic",
        GrpNonlinear => "grp-nonlinear",
    }
);

named_enum!(Reconstruction { None => "none", Muscl => "muscl" });

named_enum!(TimeIntegrator { Euler => "euler", Rk2 => "rk2", GrpOnestep => "grp-onestep" });

named_enum!(Limiter { Minmod => "minmod", VanLeer => "vanleer" });

named_enum!(
    /// Ghost-cell treatment at both ends of the domain.
    BoundaryPolicy {
        Transmissive => "transmissive",
        Reflective => "reflective",
        Periodic => "periodic",
    }
);

impl FluxSolver {
    pub fn is_grp(&self) -> bool {
        matches!(self, FluxSolver::GrpAcoustic | FluxSolver::GrpNonlinear)
    }
}

pub fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

pub fn van_leer(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else {
        2.0 * a * b / (a + b)
    }
}

impl Limiter {
    pub fn apply(&self, a: f64, b: f64) -> f64 {
        match self {
            Limiter::Minmod => minmod(a, b),
            Limiter::VanLeer => van_leer(a, b),
        }
    }

    pub fn slope(&self, a: &SlopeState, b: &SlopeState) -> SlopeState {
        SlopeState::new(self.apply(a.drho, b.drho), self.apply(a.du, b.du), self.apply(a.dp, b.dp))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeSpec {
    pub flux_solver: FluxSolver,
    pub reconstruction: Reconstruction,
    pub time_integrator: TimeIntegrator,
    pub limiter: Limiter,
    pub cfl: f64,
    /// Roe entropy fix: width `efix_delta * c_hat`, combined with the
    /// Harten-Hyman width. `None` disables the fix.
    pub efix_delta: Option<f64>,
    /// Compression factor applied to neighbour differences when projecting
    /// GRP slopes.
    pub projection_alpha: f64,
    pub acoustic_threshold: f64,
    pub riemann: RiemannOptions,
}

impl SchemeSpec {
    pub const FIRST_ORDER_CFL: f64 = 0.5;
    pub const SECOND_ORDER_CFL: f64 = 0.32;

    fn base(flux_solver: FluxSolver, reconstruction: Reconstruction, time_integrator: TimeIntegrator, cfl: f64) -> Self {
        Self {
            flux_solver,
            reconstruction,
            time_integrator,
            limiter: Limiter::Minmod,
            cfl,
            efix_delta: Some(0.1),
            projection_alpha: 1.9,
            acoustic_threshold: GrpConfig::default().acoustic_threshold,
            riemann: RiemannOptions::default(),
        }
    }

    /// Piecewise-constant data, forward Euler.
    pub fn first_order(flux_solver: FluxSolver) -> Self {
        Self::base(flux_solver, Reconstruction::None, TimeIntegrator::Euler, Self::FIRST_ORDER_CFL)
    }

    /// MUSCL reconstruction with Heun time stepping.
    pub fn muscl_rk2(flux_solver: FluxSolver) -> Self {
        Self::base(flux_solver, Reconstruction::Muscl, TimeIntegrator::Rk2, Self::SECOND_ORDER_CFL)
    }

    /// One-step GRP scheme (`grp-acoustic` or `grp-nonlinear`).
    pub fn grp(flux_solver: FluxSolver) -> Self {
        Self::base(flux_solver, Reconstruction::Muscl, TimeIntegrator::GrpOnestep, Self::SECOND_ORDER_CFL)
    }

    /// Default CFL for a given combination.
    pub fn default_cfl(reconstruction: Reconstruction, time_integrator: TimeIntegrator) -> f64 {
        if reconstruction == Reconstruction::None && time_integrator == TimeIntegrator::Euler {
            Self::FIRST_ORDER_CFL
        } else {
            Self::SECOND_ORDER_CFL
        }
    }

    pub fn with_cfl(mut self, cfl: f64) -> Self {
        self.cfl = cfl;
        self
    }

    pub fn with_limiter(mut self, limiter: Limiter) -> Self {
        self.limiter = limiter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::InvalidScheme(format!("cfl = {} must lie in (0, 1)", self.cfl)));
        }
        let grp_flux = self.flux_solver.is_grp();
        let grp_step = self.time_integrator == TimeIntegrator::GrpOnestep;
        if grp_step != grp_flux {
            return Err(Error::InvalidScheme(format!(
                "time integrator {} cannot be combined with flux {}",
                self.time_integrator, self.flux_solver
            )));
        }
        if grp_flux && self.reconstruction != Reconstruction::Muscl {
            return Err(Error::InvalidScheme(format!("{} needs muscl reconstruction", self.flux_solver)));
        }
        if let Some(d) = self.efix_delta {
            if !(d >= 0.0) {
                return Err(Error::InvalidScheme(format!("efix_delta = {d} must be non-negative")));
            }
        }
        if !(self.projection_alpha >= 1.0 && self.projection_alpha <= 2.0) {
            return Err(Error::InvalidScheme(format!(
                "projection_alpha = {} must lie in [1, 2]",
                self.projection_alpha
            )));
        }
        Ok(())
    }

    pub fn grp_config(&self) -> GrpConfig {
        GrpConfig {
            mode: if self.flux_solver == FluxSolver::GrpAcoustic { GrpMode::Acoustic } else { GrpMode::Nonlinear },
            acoustic_threshold: self.acoustic_threshold,
            riemann: self.riemann,
        }
    }

    /// Short label such as `grp-nonlinear` or `hllc+muscl+rk2`.
    pub fn label(&self) -> String {
        if self.flux_solver.is_grp() {
            return self.flux_solver.to_string();
        }
        match (self.reconstruction, self.time_integrator) {
            (Reconstruction::None, TimeIntegrator::Euler) => self.flux_solver.to_string(),
            (r, t) => format!("{}+{}+{}", self.flux_solver, r, t),
        }
    }
}

/// Extends `interior` by [`Grid::GHOST_WIDTH`] ghost cells on each side.
///
/// Reflective ghosts are mirror images, which negates velocity (and, for
/// slopes, the scalar gradients).
pub fn boundary_fill<T: Copy + Mirror>(interior: &[T], policy: BoundaryPolicy) -> Vec<T> {
    let n = interior.len();
    let g = Grid::GHOST_WIDTH;
    assert!(n >= g, "need at least {g} interior cells");
    let mut out = Vec::with_capacity(n + 2 * g);
    for k in (0..g).rev() {
        out.push(match policy {
            BoundaryPolicy::Transmissive => interior[0],
            BoundaryPolicy::Reflective => interior[k].mirror(),
            BoundaryPolicy::Periodic => interior[n - 1 - k],
        });
    }
    out.extend_from_slice(interior);
    for k in 0..g {
        out.push(match policy {
            BoundaryPolicy::Transmissive => interior[n - 1],
            BoundaryPolicy::Reflective => interior[n - 1 - k].mirror(),
            BoundaryPolicy::Periodic => interior[k],
        });
    }
    out
}

fn difference(a: &PrimitiveState, b: &PrimitiveState, dx: f64) -> SlopeState {
    SlopeState::new((b.rho - a.rho) / dx, (b.u - a.u) / dx, (b.p - a.p) / dx)
}

/// Limited slopes of ghost-extended primitives. The outermost cells get zero.
pub fn muscl_slopes(ext: &[PrimitiveState], limiter: Limiter, dx: f64) -> Vec<SlopeState> {
    let mut slopes = vec![SlopeState::ZERO; ext.len()];
    for j in 1..ext.len().saturating_sub(1) {
        slopes[j] = limiter.slope(&difference(&ext[j - 1], &ext[j], dx), &difference(&ext[j], &ext[j + 1], dx));
    }
    slopes
}

/// Flattens a slope whose edge values would lose positivity.
pub fn positivity_guard(state: &PrimitiveState, slope: &SlopeState, dx: f64) -> SlopeState {
    let ok = state.extrapolate(slope, 0.5 * dx).is_physical() && state.extrapolate(slope, -0.5 * dx).is_physical();
    if ok {
        *slope
    } else {
        SlopeState::ZERO
    }
}

/// Interface data for the `n + 1` interfaces of the interior, from
/// ghost-extended states and slopes. Interface `i` separates interior cells
/// `i - 1` and `i`.
pub fn interface_inputs(ext: &[PrimitiveState], slopes: &[SlopeState], dx: f64) -> Vec<GrpInput> {
    let g = Grid::GHOST_WIDTH;
    let n = ext.len() - 2 * g;
    (0..=n)
        .map(|i| {
            let (l, r) = (g + i - 1, g + i);
            let sl = positivity_guard(&ext[l], &slopes[l], dx);
            let sr = positivity_guard(&ext[r], &slopes[r], dx);
            GrpInput::new(ext[l].extrapolate(&sl, 0.5 * dx), sl, ext[r].extrapolate(&sr, -0.5 * dx), sr)
        })
        .collect()
}

/// Limited primitive reconstruction of a field, returning per-interface data.
pub fn reconstruct(
    prims: &[PrimitiveState],
    limiter: Limiter,
    policy: BoundaryPolicy,
    dx: f64,
) -> Vec<GrpInput> {
    let ext = boundary_fill(prims, policy);
    let slopes = muscl_slopes(&ext, limiter, dx);
    interface_inputs(&ext, &slopes, dx)
}

/// `dt = cfl dx / max_j (|u_j| + c_j)`.
pub fn cfl_timestep(prims: &[PrimitiveState], gas: &GasModel, cfl: f64, dx: f64) -> f64 {
    let smax = prims.iter().map(|s| s.u.abs() + gas.sound_speed(s)).fold(0.0, f64::max);
    cfl * dx / smax
}

/// Godunov flux from the exact Riemann solution sampled at `x/t = 0`.
pub fn exact_godunov_flux(
    left: &PrimitiveState,
    right: &PrimitiveState,
    gas: &GasModel,
    opts: &RiemannOptions,
) -> Result<ConservedState> {
    let fan = solve_star(left, right, gas, opts)?;
    Ok(gas.flux(&fan.sample(left, right, gas, 0.0)))
}

/// HLLC flux with Davis wave-speed estimates.
pub fn hllc_flux(left: &PrimitiveState, right: &PrimitiveState, gas: &GasModel) -> ConservedState {
    let (cl, cr) = (gas.sound_speed(left), gas.sound_speed(right));
    let s_l = (left.u - cl).min(right.u - cr);
    let s_r = (left.u + cl).max(right.u + cr);
    if s_l >= 0.0 {
        return gas.flux(left);
    }
    if s_r <= 0.0 {
        return gas.flux(right);
    }
    let ml = left.rho * (s_l - left.u);
    let mr = right.rho * (s_r - right.u);
    let s_star = (right.p - left.p + left.u * ml - right.u * mr) / (ml - mr);
    let star = |s: &PrimitiveState, sk: f64| {
        let u = gas.primitive_to_conserved(s);
        let factor = s.rho * (sk - s.u) / (sk - s_star);
        let ene = u.ene / s.rho + (s_star - s.u) * (s_star + s.p / (s.rho * (sk - s.u)));
        (u, ConservedState::new(factor, factor * s_star, factor * ene))
    };
    if s_star >= 0.0 {
        let (u, u_star) = star(left, s_l);
        gas.flux(left) + s_l * (u_star - u)
    } else {
        let (u, u_star) = star(right, s_r);
        gas.flux(right) + s_r * (u_star - u)
    }
}

/// Roe-averaged eigen-decomposition of a jump.
#[derive(Debug, Clone, Copy)]
pub struct RoeWaves {
    pub speeds: [f64; 3],
    pub strengths: [f64; 3],
    pub vectors: [ConservedState; 3],
    pub c_hat: f64,
}

impl RoeWaves {
    pub fn new(left: &PrimitiveState, right: &PrimitiveState, gas: &GasModel) -> Self {
        let (wl, wr) = (left.rho.sqrt(), right.rho.sqrt());
        let h = |s: &PrimitiveState| (gas.primitive_to_conserved(s).ene + s.p) / s.rho;
        let u = (wl * left.u + wr * right.u) / (wl + wr);
        let hh = (wl * h(left) + wr * h(right)) / (wl + wr);
        let c = ((gas.gamma() - 1.0) * (hh - 0.5 * u * u)).sqrt();
        let rho = wl * wr;
        let (drho, du, dp) = (right.rho - left.rho, right.u - left.u, right.p - left.p);
        Self {
            speeds: [u - c, u, u + c],
            strengths: [
                (dp - rho * c * du) / (2.0 * c * c),
                drho - dp / (c * c),
                (dp + rho * c * du) / (2.0 * c * c),
            ],
            vectors: [
                ConservedState::new(1.0, u - c, hh - u * c),
                ConservedState::new(1.0, u, 0.5 * u * u),
                ConservedState::new(1.0, u + c, hh + u * c),
            ],
            c_hat: c,
        }
    }

    /// `A_hat (u_R - u_L)` reassembled from the waves.
    pub fn jacobian_jump(&self) -> ConservedState {
        (0..3).fold(ConservedState::new(0.0, 0.0, 0.0), |acc, k| acc + (self.speeds[k] * self.strengths[k]) * self.vectors[k])
    }
}

/// Roe flux. Acoustic eigenvalues are smoothed over a width
/// `max(delta_HH, efix_delta * c_hat)` when `efix_delta` is given.
pub fn roe_flux(left: &PrimitiveState, right: &PrimitiveState, gas: &GasModel, efix_delta: Option<f64>) -> ConservedState {
    let waves = RoeWaves::new(left, right, gas);
    let (cl, cr) = (gas.sound_speed(left), gas.sound_speed(right));
    let outer = [(left.u - cl, right.u - cr), (left.u, right.u), (left.u + cl, right.u + cr)];
    let mut diss = ConservedState::new(0.0, 0.0, 0.0);
    for k in 0..3 {
        let lam = waves.speeds[k];
        let mut abs = lam.abs();
        if let (Some(factor), true) = (efix_delta, k != 1) {
            let (lam_l, lam_r) = outer[k];
            let delta = (lam - lam_l).max(lam_r - lam).max(factor * waves.c_hat).max(0.0);
            if abs < delta {
                abs = (lam * lam + delta * delta) / (2.0 * delta);
            }
        }
        diss = diss + (abs * waves.strengths[k]) * waves.vectors[k];
    }
    0.5 * (gas.flux(left) + gas.flux(right)) - 0.5 * diss
}

/// Provisional slopes from interface states at the end of the step, limited
/// against `alpha` times the neighbouring cell-average differences.
pub fn project_slopes(
    new_ext: &[PrimitiveState],
    advanced: &[PrimitiveState],
    limiter: Limiter,
    alpha: f64,
    dx: f64,
) -> Vec<SlopeState> {
    let g = Grid::GHOST_WIDTH;
    let n = advanced.len() - 1;
    (0..n)
        .map(|j| {
            let prov = difference(&advanced[j], &advanced[j + 1], dx);
            let back = difference(&new_ext[g + j - 1], &new_ext[g + j], dx);
            let fwd = difference(&new_ext[g + j], &new_ext[g + j + 1], dx);
            let bound = limiter.slope(
                &SlopeState::new(alpha * back.drho, alpha * back.du, alpha * back.dp),
                &SlopeState::new(alpha * fwd.drho, alpha * fwd.du, alpha * fwd.dp),
            );
            SlopeState::new(minmod(prov.drho, bound.drho), minmod(prov.du, bound.du), minmod(prov.dp, bound.dp))
        })
        .collect()
}

fn map_interfaces<T, F>(inputs: &[GrpInput], parallel: bool, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&GrpInput) -> Result<T> + Sync + Send,
{
    if parallel {
        inputs.par_iter().map(f).collect()
    } else {
        inputs.iter().map(f).collect()
    }
}

fn conservative_update(cells: &[ConservedState], fluxes: &[ConservedState], lambda: f64) -> Vec<ConservedState> {
    cells
        .iter()
        .enumerate()
        .map(|(j, u)| *u - lambda * (fluxes[j + 1] - fluxes[j]))
        .collect()
}

/// Everything a step needs besides the field itself.
#[derive(Debug, Clone, Copy)]
pub struct StepContext<'a> {
    pub grid: &'a Grid,
    pub spec: &'a SchemeSpec,
    pub gas: &'a GasModel,
    pub boundary: BoundaryPolicy,
    pub parallel: bool,
}

impl StepContext<'_> {
    fn fluxes(&self, cells: &[ConservedState]) -> Result<Vec<ConservedState>> {
        let prims = to_primitives(cells, self.gas)?;
        let ext = boundary_fill(&prims, self.boundary);
        let slopes = match self.spec.reconstruction {
            Reconstruction::None => vec![SlopeState::ZERO; ext.len()],
            Reconstruction::Muscl => muscl_slopes(&ext, self.spec.limiter, self.grid.dx),
        };
        let inputs = interface_inputs(&ext, &slopes, self.grid.dx);
        let (gas, spec) = (self.gas, self.spec);
        map_interfaces(&inputs, self.parallel, |inp| match spec.flux_solver {
            FluxSolver::ExactGodunov => exact_godunov_flux(&inp.left, &inp.right, gas, &spec.riemann),
            FluxSolver::Hllc => Ok(hllc_flux(&inp.left, &inp.right, gas)),
            FluxSolver::RoeEfix => Ok(roe_flux(&inp.left, &inp.right, gas, spec.efix_delta)),
            FluxSolver::GrpAcoustic | FluxSolver::GrpNonlinear => {
                Err(Error::InvalidScheme(format!("{} needs the grp-onestep integrator", spec.flux_solver)))
            }
        })
    }

    fn euler(&self, cells: &[ConservedState], dt: f64) -> Result<Vec<ConservedState>> {
        let fluxes = self.fluxes(cells)?;
        Ok(conservative_update(cells, &fluxes, dt / self.grid.dx))
    }

    fn grp_onestep(&self, field: &CellField, dt: f64, paths: &mut PathCounts) -> Result<CellField> {
        let dx = self.grid.dx;
        let prims = field.primitives(self.gas)?;
        let ext = boundary_fill(&prims, self.boundary);
        let slopes = boundary_fill(&field.slopes, self.boundary);
        let inputs = interface_inputs(&ext, &slopes, dx);
        let config = self.spec.grp_config();
        let gas = self.gas;
        let solved = map_interfaces(&inputs, self.parallel, |inp| {
            let sol = grp_interface_dispatch(inp, gas, &config)?;
            Ok((sol.flux(dt, gas)?, sol.advanced(dt), sol.path))
        })?;
        let fluxes: Vec<_> = solved.iter().map(|s| s.0).collect();
        let advanced: Vec<_> = solved.iter().map(|s| s.1).collect();
        for s in &solved {
            paths.record(s.2);
        }
        let cells = conservative_update(&field.cells, &fluxes, dt / dx);
        let new_prims = to_primitives(&cells, gas)?;
        let new_ext = boundary_fill(&new_prims, self.boundary);
        let slopes = project_slopes(&new_ext, &advanced, self.spec.limiter, self.spec.projection_alpha, dx);
        Ok(CellField { cells, slopes })
    }
}

/// Advances `field` by `dt`. GRP dispatch paths are added to `paths`.
pub fn step(field: &CellField, ctx: &StepContext<'_>, dt: f64, paths: &mut PathCounts) -> Result<CellField> {
    let new = match ctx.spec.time_integrator {
        TimeIntegrator::GrpOnestep => return ctx.grp_onestep(field, dt, paths),
        TimeIntegrator::Euler => ctx.euler(&field.cells, dt)?,
        TimeIntegrator::Rk2 => {
            let stage1 = ctx.euler(&field.cells, dt)?;
            let stage2 = ctx.euler(&stage1, dt)?;
            field.cells.iter().zip(&stage2).map(|(a, b)| 0.5 * (*a + *b)).collect()
        }
    };
    to_primitives(&new, ctx.gas)?;
    Ok(CellField { slopes: vec![SlopeState::ZERO; new.len()], cells: new })
}

/// Time-marching driver.
#[derive(Debug, Clone)]
pub struct Solver {
    pub grid: Grid,
    pub spec: SchemeSpec,
    pub gas: GasModel,
    pub boundary: BoundaryPolicy,
    pub field: CellField,
    pub time: f64,
    pub steps: usize,
    /// Steps that were repeated with a halved `dt` after a non-physical GRP midpoint.
    pub retries: usize,
    pub paths: PathCounts,
    pub parallel: bool,
}

impl Solver {
    const MAX_HALVINGS: usize = 10;

    pub fn new(
        grid: Grid,
        spec: SchemeSpec,
        gas: GasModel,
        boundary: BoundaryPolicy,
        initial: &[PrimitiveState],
    ) -> Result<Self> {
        spec.validate()?;
        if initial.len() != grid.n_cells {
            return Err(Error::InvalidGrid(format!("{} initial states for {} cells", initial.len(), grid.n_cells)));
        }
        if grid.n_cells < Grid::GHOST_WIDTH {
            return Err(Error::InvalidGrid(format!("need at least {} cells", Grid::GHOST_WIDTH)));
        }
        let mut field = CellField::from_primitives(initial, &gas)?;
        if spec.time_integrator == TimeIntegrator::GrpOnestep {
            let ext = boundary_fill(initial, boundary);
            let g = Grid::GHOST_WIDTH;
            field.slopes = muscl_slopes(&ext, spec.limiter, grid.dx)[g..g + grid.n_cells].to_vec();
        }
        Ok(Self {
            grid,
            spec,
            gas,
            boundary,
            field,
            time: 0.0,
            steps: 0,
            retries: 0,
            paths: PathCounts::default(),
            parallel: grid.n_cells >= 2048,
        })
    }

    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    fn context(&self) -> StepContext<'_> {
        StepContext { grid: &self.grid, spec: &self.spec, gas: &self.gas, boundary: self.boundary, parallel: self.parallel }
    }

    pub fn primitives(&self) -> Result<Vec<PrimitiveState>> {
        self.field.primitives(&self.gas)
    }

    pub fn timestep(&self) -> Result<f64> {
        Ok(cfl_timestep(&self.primitives()?, &self.gas, self.spec.cfl, self.grid.dx))
    }

    /// One step of size `dt`. For the GRP scheme a non-physical midpoint
    /// state makes the step retry with half the time step; the step actually
    /// taken is returned.
    pub fn advance(&mut self, dt: f64) -> Result<f64> {
        let mut dt = dt;
        let mut halvings = 0;
        loop {
            let mut paths = PathCounts::default();
            match step(&self.field, &self.context(), dt, &mut paths) {
                Ok(field) => {
                    self.field = field;
                    self.time += dt;
                    self.steps += 1;
                    self.paths.merge(&paths);
                    return Ok(dt);
                }
                Err(Error::NonPhysicalState { rho, p })
                    if self.spec.time_integrator == TimeIntegrator::GrpOnestep && halvings < Self::MAX_HALVINGS =>
                {
                    log::debug!("t = {}: non-physical GRP midpoint (rho {rho}, p {p}); halving dt", self.time);
                    halvings += 1;
                    self.retries += 1;
                    dt *= 0.5;
                }
                Err(e) => return Err(e),
            }
        }
    }

    /// Marches to `t_end`, shortening the last step to land on it.
    pub fn run_until(&mut self, t_end: f64) -> Result<()> {
        while self.time < t_end {
            let dt = self.timestep()?.min(t_end - self.time);
            if !(dt > 0.0) {
                break;
            }
            if t_end - (self.time + dt) < 1e-14 * t_end {
                self.advance(t_end - self.time)?;
                self.time = t_end;
            } else {
                self.advance(dt)?;
            }
        }
        Ok(())
    }

    /// Fixed number of CFL steps.
    pub fn run_steps(&mut self, n: usize) -> Result<()> {
        for _ in 0..n {
            let dt = self.timestep()?;
            self.advance(dt)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn gas() -> GasModel {
        GasModel::air()
    }

    #[test]
    fn limiter_definitions() {
        assert_eq!(minmod(1.0, 2.0), 1.0);
        assert_eq!(minmod(-1.0, 2.0), 0.0);
        assert_eq!(minmod(0.0, 3.0), 0.0);
        assert_eq!(minmod(-3.0, -2.0), -2.0);
        assert_eq!(van_leer(1.0, 1.0), 1.0);
        assert_eq!(van_leer(1.0, -1.0), 0.0);
        assert_relative_eq!(van_leer(1.0, 3.0), 1.5);
    }

    #[test]
    fn grid_layout() {
        let g = Grid::new(4, 0.0, 1.0).unwrap();
        assert_eq!(g.dx, 0.25);
        assert_eq!(g.center(0), 0.125);
        assert_eq!(g.centers().len(), 4);
        assert!(Grid::new(0, 0.0, 1.0).is_err());
        assert!(Grid::new(4, 1.0, 1.0).is_err());
    }

    #[test]
    fn boundary_policies() {
        let cells: Vec<_> = (0..4).map(|j| PrimitiveState::new(1.0 + j as f64, 0.5 + j as f64, 2.0)).collect();
        let t = boundary_fill(&cells, BoundaryPolicy::Transmissive);
        assert_eq!(t.len(), 8);
        assert_eq!((t[0], t[1], t[6], t[7]), (cells[0], cells[0], cells[3], cells[3]));
        let r = boundary_fill(&cells, BoundaryPolicy::Reflective);
        assert_eq!(r[1], PrimitiveState::new(1.0, -0.5, 2.0));
        assert_eq!(r[0], PrimitiveState::new(2.0, -1.5, 2.0));
        assert_eq!(r[6], PrimitiveState::new(4.0, -3.5, 2.0));
        let p = boundary_fill(&cells, BoundaryPolicy::Periodic);
        assert_eq!((p[0], p[1], p[6], p[7]), (cells[2], cells[3], cells[0], cells[1]));
        let uniform = vec![PrimitiveState::new(1.0, 0.0, 1.0); 5];
        for policy in BoundaryPolicy::ALL {
            assert!(boundary_fill(&uniform, *policy).iter().all(|s| *s == uniform[0]));
        }
    }

    #[test]
    fn reconstruction_examples() {
        let uniform = vec![PrimitiveState::new(1.0, 0.3, 1.0); 6];
        let inputs = reconstruct(&uniform, Limiter::Minmod, BoundaryPolicy::Transmissive, 0.1);
        assert_eq!(inputs.len(), 7);
        assert!(inputs.iter().all(|i| i.left_slope.is_zero() && i.right_slope.is_zero()));

        let dx = 0.1;
        let linear: Vec<_> = (0..10).map(|j| PrimitiveState::new(2.0 + (j as f64 + 0.5) * dx, 0.0, 1.0)).collect();
        let inputs = reconstruct(&linear, Limiter::Minmod, BoundaryPolicy::Transmissive, dx);
        for i in &inputs[2..9] {
            assert_relative_eq!(i.left_slope.drho, 1.0, max_relative = 1e-12);
            assert_relative_eq!(i.right_slope.drho, 1.0, max_relative = 1e-12);
            assert_relative_eq!(i.left.rho, i.right.rho, max_relative = 1e-12);
        }
        // cell average is the midpoint of the two edge values
        for j in 1..9 {
            let mean = 0.5 * (inputs[j].right.rho + inputs[j + 1].left.rho);
            assert_relative_eq!(mean, linear[j].rho, max_relative = 1e-14);
        }
    }

    #[test]
    fn positivity_guard_flattens() {
        let s = PrimitiveState::new(0.1, 0.0, 1.0);
        let steep = SlopeState::new(10.0, 0.0, 0.0);
        assert!(positivity_guard(&s, &steep, 0.1).is_zero());
        let mild = SlopeState::new(1.0, 0.0, 0.0);
        assert_eq!(positivity_guard(&s, &mild, 0.1), mild);
    }

    #[test]
    fn cfl_examples() {
        let g = gas();
        let single = [PrimitiveState::new(1.0, 0.0, 1.0)];
        assert_relative_eq!(cfl_timestep(&single, &g, 0.5, 0.1), 0.05 / 1.4f64.sqrt(), max_relative = 1e-14);
        let with_fast = [single[0], PrimitiveState::new(1.0, 2.0, 1.0)];
        assert!(cfl_timestep(&with_fast, &g, 0.5, 0.1) < cfl_timestep(&single, &g, 0.5, 0.1));
        // extreme-ratio shock tube: both sides have c = sqrt(1.4)
        let grid = Grid::new(200, -10.0, 10.0).unwrap();
        let init: Vec<_> = grid
            .centers()
            .iter()
            .map(|&x| if x < 0.0 { PrimitiveState::new(1e4, 0.0, 1e4) } else { PrimitiveState::new(1.0, 0.0, 1.0) })
            .collect();
        assert_relative_eq!(cfl_timestep(&init, &g, 0.32, grid.dx), 0.32 * 0.1 / 1.4f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn scheme_validation() {
        for f in FluxSolver::ALL {
            if f.is_grp() {
                assert!(SchemeSpec::grp(*f).validate().is_ok());
                assert!(SchemeSpec::first_order(*f).validate().is_err());
                assert!(SchemeSpec::muscl_rk2(*f).validate().is_err());
                let mut no_recon = SchemeSpec::grp(*f);
                no_recon.reconstruction = Reconstruction::None;
                assert!(no_recon.validate().is_err());
            } else {
                assert!(SchemeSpec::first_order(*f).validate().is_ok());
                assert!(SchemeSpec::muscl_rk2(*f).validate().is_ok());
                let mut bad = SchemeSpec::first_order(*f);
                bad.time_integrator = TimeIntegrator::GrpOnestep;
                assert!(bad.validate().is_err());
            }
        }
        assert!(SchemeSpec::first_order(FluxSolver::Hllc).with_cfl(1.5).validate().is_err());
        assert!(SchemeSpec::first_order(FluxSolver::Hllc).with_cfl(0.0).validate().is_err());
        assert_eq!("grp-nonlinear".parse::<FluxSolver>().unwrap(), FluxSolver::GrpNonlinear);
        assert!("godunov2".parse::<FluxSolver>().is_err());
    }

    fn random_state(rng: &mut impl Rng) -> PrimitiveState {
        PrimitiveState::new(10f64.powf(rng.gen_range(-1.0..1.0)), rng.gen_range(-2.0..2.0), 10f64.powf(rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn approximate_fluxes_are_consistent() {
        let g = gas();
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for _ in 0..200 {
            let s = random_state(&mut rng);
            let f = g.flux(&s);
            let opts = RiemannOptions::default();
            for other in [hllc_flux(&s, &s, &g), roe_flux(&s, &s, &g, Some(0.1)), roe_flux(&s, &s, &g, None), exact_godunov_flux(&s, &s, &g, &opts).unwrap()] {
                assert!((other - f).max_abs() <= 1e-13 * f.max_abs().max(1.0));
            }
        }
    }

    #[test]
    fn hllc_upwinds_supersonic_data() {
        let g = gas();
        let l = PrimitiveState::new(1.0, -3.0, 1.0);
        let r = PrimitiveState::new(0.5, -2.5, 0.4);
        assert_eq!(hllc_flux(&l, &r, &g), g.flux(&r));
        assert_eq!(hllc_flux(&r.mirror(), &l.mirror(), &g), g.flux(&r.mirror()));
    }

    #[test]
    fn roe_linearization_property() {
        let g = gas();
        let mut rng = rand::rngs::StdRng::seed_from_u64(9);
        for _ in 0..1000 {
            let (l, r) = (random_state(&mut rng), random_state(&mut rng));
            let w = RoeWaves::new(&l, &r, &g);
            let df = g.flux(&r) - g.flux(&l);
            let du = g.primitive_to_conserved(&r) - g.primitive_to_conserved(&l);
            let scale = df.max_abs().max(du.max_abs()).max(1.0);
            assert!((w.jacobian_jump() - df).max_abs() < 1e-10 * scale);
            // the strengths decompose the conserved jump
            let recon = (0..3).fold(ConservedState::new(0.0, 0.0, 0.0), |a, k| a + w.strengths[k] * w.vectors[k]);
            assert!((recon - du).max_abs() < 1e-10 * scale);
        }
    }

    fn sod_init(grid: &Grid, x0: f64, l: PrimitiveState, r: PrimitiveState) -> Vec<PrimitiveState> {
        grid.centers().iter().map(|&x| if x < x0 { l } else { r }).collect()
    }

    /// Largest relative density jump between neighbours in `[a, b]`.
    fn max_jump(grid: &Grid, prims: &[PrimitiveState], a: f64, b: f64) -> f64 {
        (1..prims.len())
            .filter(|&j| grid.center(j) > a && grid.center(j) < b)
            .map(|j| (prims[j].rho - prims[j - 1].rho).abs() / prims[j].rho)
            .fold(0.0, f64::max)
    }

    #[test]
    fn roe_entropy_fix_removes_expansion_shock() {
        let g = gas();
        // transonic rarefaction: head speed -1.18, tail +0.18 (sonic point ahead of x = 0.3)
        let l = PrimitiveState::new(1.0, 0.75, 1.0);
        let r = PrimitiveState::new(0.125, 0.0, 0.1);
        let grid = Grid::new(200, 0.0, 1.0).unwrap();
        let init = sod_init(&grid, 0.3, l, r);
        let run = |efix| {
            let mut spec = SchemeSpec::first_order(FluxSolver::RoeEfix);
            spec.efix_delta = efix;
            let mut s = Solver::new(grid, spec, g, BoundaryPolicy::Transmissive, &init).unwrap();
            s.run_until(0.2).unwrap();
            max_jump(&grid, &s.primitives().unwrap(), 0.1, 0.4)
        };
        let (fixed, unfixed) = (run(Some(0.1)), run(None));
        assert!(unfixed > 0.1, "expected an expansion shock without the fix, max jump {unfixed}");
        assert!(fixed < 0.05, "entropy fix should smooth the sonic point, max jump {fixed}");
    }

    fn all_specs() -> Vec<SchemeSpec> {
        let mut specs = Vec::new();
        for f in [FluxSolver::ExactGodunov, FluxSolver::Hllc, FluxSolver::RoeEfix] {
            specs.push(SchemeSpec::first_order(f));
            specs.push(SchemeSpec::muscl_rk2(f));
            let mut muscl_euler = SchemeSpec::first_order(f);
            muscl_euler.reconstruction = Reconstruction::Muscl;
            muscl_euler.cfl = 0.32;
            specs.push(muscl_euler);
        }
        specs.push(SchemeSpec::grp(FluxSolver::GrpAcoustic));
        specs.push(SchemeSpec::grp(FluxSolver::GrpNonlinear));
        specs
    }

    #[test]
    fn uniform_field_is_steady() {
        let g = gas();
        let grid = Grid::new(20, 0.0, 1.0).unwrap();
        let init = vec![PrimitiveState::new(1.3, 0.4, 0.8); 20];
        for spec in all_specs() {
            let mut s = Solver::new(grid, spec, g, BoundaryPolicy::Transmissive, &init).unwrap();
            s.run_steps(20).unwrap();
            let u0 = g.primitive_to_conserved(&init[0]);
            for c in &s.field.cells {
                assert!((*c - u0).max_abs() < 1e-13, "{}", spec.label());
            }
        }
    }

    #[test]
    fn conservation_for_every_scheme() {
        let g = gas();
        let grid = Grid::new(200, -1.0, 1.0).unwrap();
        let init = sod_init(&grid, 0.0, PrimitiveState::new(1.0, 0.0, 1.0), PrimitiveState::new(0.125, 0.0, 0.1));
        for spec in all_specs() {
            let mut s = Solver::new(grid, spec, g, BoundaryPolicy::Transmissive, &init).unwrap();
            let before = s.field.totals(grid.dx);
            s.run_steps(100).unwrap();
            assert!(s.time < 0.5, "waves must not reach the boundary");
            let after = s.field.totals(grid.dx);
            let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(1e-300);
            assert!(rel(before.rho, after.rho) < 1e-11, "{} mass", spec.label());
            // the undisturbed boundary states exchange momentum flux p_L - p_R
            let expected = s.time * (1.0 - 0.1);
            assert!((after.mom - before.mom - expected).abs() < 1e-11 * before.ene, "{} momentum", spec.label());
            assert!(rel(before.ene, after.ene) < 1e-11, "{} energy", spec.label());
        }
    }

    #[test]
    fn mass_change_equals_boundary_flux() {
        let g = gas();
        let grid = Grid::new(50, 0.0, 1.0).unwrap();
        let init: Vec<_> = grid.centers().iter().map(|&x| PrimitiveState::new(1.0 + 0.5 * x, 0.5, 1.0)).collect();
        let spec = SchemeSpec::first_order(FluxSolver::ExactGodunov);
        let mut s = Solver::new(grid, spec, g, BoundaryPolicy::Transmissive, &init).unwrap();
        let before = s.field.totals(grid.dx).rho;
        let prims = s.primitives().unwrap();
        let dt = s.timestep().unwrap();
        // transmissive ghosts copy the edge cell, so each boundary flux is f(edge)
        let f_in = g.flux(&prims[0]).rho;
        let f_out = g.flux(&prims[49]).rho;
        s.advance(dt).unwrap();
        let after = s.field.totals(grid.dx).rho;
        assert_relative_eq!(after - before, dt * (f_in - f_out), max_relative = 1e-10);
    }

    #[test]
    fn stationary_contact_is_preserved() {
        let g = gas();
        let grid = Grid::new(40, 0.0, 1.0).unwrap();
        let init = sod_init(&grid, 0.5, PrimitiveState::new(1.0, 0.0, 1.0), PrimitiveState::new(0.1, 0.0, 1.0));
        for spec in [SchemeSpec::first_order(FluxSolver::ExactGodunov), SchemeSpec::grp(FluxSolver::GrpNonlinear), SchemeSpec::grp(FluxSolver::GrpAcoustic)] {
            let mut s = Solver::new(grid, spec, g, BoundaryPolicy::Transmissive, &init).unwrap();
            s.run_steps(50).unwrap();
            let prims = s.primitives().unwrap();
            for (a, b) in prims.iter().zip(&init) {
                assert!((a.rho - b.rho).abs() < 1e-13 && a.u.abs() < 1e-13 && (a.p - 1.0).abs() < 1e-13, "{}", spec.label());
            }
        }
    }

    #[test]
    fn projection_respects_limiter_bound() {
        let dx = 0.1;
        let ext: Vec<_> = (0..8).map(|j| PrimitiveState::new(if j < 4 { 1.0 } else { 0.2 }, 0.0, 1.0)).collect();
        let advanced: Vec<_> = (0..5).map(|i| PrimitiveState::new(1.0 - 0.3 * i as f64, 0.0, 1.0)).collect();
        let slopes = project_slopes(&ext, &advanced, Limiter::Minmod, 1.9, dx);
        for (j, s) in slopes.iter().enumerate() {
            let back = (ext[j + 2].rho - ext[j + 1].rho) / dx;
            let fwd = (ext[j + 3].rho - ext[j + 2].rho) / dx;
            assert!(s.drho.abs() <= 1.9 * minmod(back, fwd).abs() + 1e-14);
        }
    }

    #[test]
    fn reflective_wall_keeps_mass() {
        let g = gas();
        let grid = Grid::new(60, 0.0, 1.0).unwrap();
        let init = sod_init(&grid, 0.5, PrimitiveState::new(1.0, 0.0, 1.0), PrimitiveState::new(0.125, 0.0, 0.1));
        for spec in all_specs() {
            let mut s = Solver::new(grid, spec, g, BoundaryPolicy::Reflective, &init).unwrap();
            let before = s.field.totals(grid.dx);
            s.run_until(0.6).unwrap();
            let after = s.field.totals(grid.dx);
            assert_relative_eq!(before.rho, after.rho, max_relative = 1e-12);
            assert_relative_eq!(before.ene, after.ene, max_relative = 1e-12);
        }
    }
}
