//! Equation-of-state layer.
//!
//! Only the polytropic (ideal) gas ships. The solver layers above use the
//! closed forms that are specific to it, so they take a [`GasModel`]
//! directly; the [`EquationOfState`] trait collects the pointwise
//! thermodynamic queries that are independent of that choice.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Reflection `x -> -x` of the Euler equations.
///
/// Velocities change sign, scalars are unchanged, and x-derivatives of
/// scalars change sign while the x-derivative of velocity does not.
pub trait Mirror {
    fn mirror(&self) -> Self;
}

/// Pointwise fluid state in primitive variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimitiveState {
    pub rho: f64,
    pub u: f64,
    pub p: f64,
}

impl PrimitiveState {
    pub const fn new(rho: f64, u: f64, p: f64) -> Self {
        Self { rho, u, p }
    }

    /// Checks the vacuum-free invariant `rho > 0`, `p > 0` (finite).
    pub fn validated(self) -> Result<Self> {
        if self.is_physical() {
            Ok(self)
        } else {
            Err(Error::NonPhysicalState { rho: self.rho, p: self.p })
        }
    }

    pub fn is_physical(&self) -> bool {
        self.rho.is_finite() && self.p.is_finite() && self.u.is_finite() && self.rho > 0.0 && self.p > 0.0
    }

    /// `self + scale * slope`, the linear extrapolation of a reconstructed state.
    pub fn extrapolate(&self, slope: &SlopeState, dx: f64) -> Self {
        Self {
            rho: self.rho + dx * slope.drho,
            u: self.u + dx * slope.du,
            p: self.p + dx * slope.dp,
        }
    }
}

impl Mirror for PrimitiveState {
    fn mirror(&self) -> Self {
        Self { rho: self.rho, u: -self.u, p: self.p }
    }
}

/// Cell-average vector `(rho, rho u, rho E)`; also used for flux vectors.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConservedState {
    pub rho: f64,
    pub mom: f64,
    pub ene: f64,
}

impl ConservedState {
    pub const fn new(rho: f64, mom: f64, ene: f64) -> Self {
        Self { rho, mom, ene }
    }

    pub fn internal_energy_density(&self) -> f64 {
        self.ene - 0.5 * self.mom * self.mom / self.rho
    }

    pub fn max_abs(&self) -> f64 {
        self.rho.abs().max(self.mom.abs()).max(self.ene.abs())
    }
}

impl Add for ConservedState {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.rho + o.rho, self.mom + o.mom, self.ene + o.ene)
    }
}

impl Sub for ConservedState {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.rho - o.rho, self.mom - o.mom, self.ene - o.ene)
    }
}

impl Mul<f64> for ConservedState {
    type Output = Self;
    fn mul(self, a: f64) -> Self {
        Self::new(self.rho * a, self.mom * a, self.ene * a)
    }
}

impl Mul<ConservedState> for f64 {
    type Output = ConservedState;
    fn mul(self, c: ConservedState) -> ConservedState {
        c * self
    }
}

impl Neg for ConservedState {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.rho, -self.mom, -self.ene)
    }
}

/// One-sided x-derivatives of the primitive variables at an interface.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SlopeState {
    pub drho: f64,
    pub du: f64,
    pub dp: f64,
}

impl SlopeState {
    pub const ZERO: SlopeState = SlopeState { drho: 0.0, du: 0.0, dp: 0.0 };

    pub const fn new(drho: f64, du: f64, dp: f64) -> Self {
        Self { drho, du, dp }
    }

    pub fn is_finite(&self) -> bool {
        self.drho.is_finite() && self.du.is_finite() && self.dp.is_finite()
    }

    pub fn is_zero(&self) -> bool {
        self.drho == 0.0 && self.du == 0.0 && self.dp == 0.0
    }
}

impl Mirror for SlopeState {
    fn mirror(&self) -> Self {
        Self { drho: -self.drho, du: self.du, dp: -self.dp }
    }
}

/// Pointwise thermodynamic queries an equation of state must answer.
pub trait EquationOfState {
    fn sound_speed(&self, state: &PrimitiveState) -> f64;
    /// Specific internal energy `e(rho, p)`.
    fn internal_energy(&self, rho: f64, p: f64) -> f64;
    /// Inverse of [`Self::internal_energy`] in `p`.
    fn pressure(&self, rho: f64, e: f64) -> f64;
    /// Monotone function of the physical entropy.
    fn entropy_indicator(&self, state: &PrimitiveState) -> f64;
    /// Post-shock density on the Hugoniot curve through the state `behind`.
    fn hugoniot_density(&self, p: f64, behind: &PrimitiveState) -> f64;
}

/// Polytropic gas with index `gamma > 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasModel {
    gamma: f64,
    mu2: f64,
}

impl GasModel {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 1.0) {
            return Err(Error::InvalidGamma(gamma));
        }
        Ok(Self { gamma, mu2: (gamma - 1.0) / (gamma + 1.0) })
    }

    /// Air, `gamma = 1.4`.
    pub fn air() -> Self {
        Self::new(1.4).expect("1.4 is a valid polytropic index")
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `mu^2 = (gamma - 1) / (gamma + 1)`.
    pub fn mu2(&self) -> f64 {
        self.mu2
    }

    pub fn sound_speed(&self, state: &PrimitiveState) -> f64 {
        (self.gamma * state.p / state.rho).sqrt()
    }

    pub fn primitive_to_conserved(&self, state: &PrimitiveState) -> ConservedState {
        let mom = state.rho * state.u;
        let ene = 0.5 * mom * state.u + state.p / (self.gamma - 1.0);
        ConservedState::new(state.rho, mom, ene)
    }

    pub fn conserved_to_primitive(&self, cons: &ConservedState) -> Result<PrimitiveState> {
        let rho = cons.rho;
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::NonPhysicalState { rho, p: f64::NAN });
        }
        let u = cons.mom / rho;
        let p = (self.gamma - 1.0) * cons.internal_energy_density();
        if !(p > 0.0) || !p.is_finite() || !u.is_finite() {
            return Err(Error::NonPhysicalState { rho, p });
        }
        Ok(PrimitiveState { rho, u, p })
    }

    /// Physical flux `(rho u, rho u^2 + p, u (rho E + p))`.
    pub fn flux(&self, state: &PrimitiveState) -> ConservedState {
        let cons = self.primitive_to_conserved(state);
        ConservedState::new(cons.mom, cons.mom * state.u + state.p, state.u * (cons.ene + state.p))
    }

    /// `S = p / rho^gamma`.
    pub fn entropy_indicator(&self, state: &PrimitiveState) -> f64 {
        state.p / state.rho.powf(self.gamma)
    }

    /// `T s'` from the Gibbs relation `T ds = de - p/rho^2 drho` with the
    /// polytropic `e = p / ((gamma - 1) rho)`.
    pub fn initial_entropy_gradient(&self, state: &PrimitiveState, slope: &SlopeState) -> f64 {
        let gm1 = self.gamma - 1.0;
        slope.dp / (gm1 * state.rho) - self.gamma * state.p * slope.drho / (gm1 * state.rho * state.rho)
    }

    /// x-derivative of the kinematic-thermodynamic variable `psi = u + 2c/(gamma - 1)`.
    pub fn psi_gradient(&self, state: &PrimitiveState, slope: &SlopeState) -> f64 {
        let c = self.sound_speed(state);
        let dc = 0.5 * c * (slope.dp / state.p - slope.drho / state.rho);
        slope.du + 2.0 * dc / (self.gamma - 1.0)
    }

    /// `dp/ds` at fixed density divided by `T`: `(gamma - 1) rho`.
    pub(crate) fn pressure_entropy_factor(&self, rho: f64) -> f64 {
        (self.gamma - 1.0) * rho
    }
}

impl EquationOfState for GasModel {
    fn sound_speed(&self, state: &PrimitiveState) -> f64 {
        GasModel::sound_speed(self, state)
    }

    fn internal_energy(&self, rho: f64, p: f64) -> f64 {
        p / ((self.gamma - 1.0) * rho)
    }

    fn pressure(&self, rho: f64, e: f64) -> f64 {
        (self.gamma - 1.0) * rho * e
    }

    fn entropy_indicator(&self, state: &PrimitiveState) -> f64 {
        GasModel::entropy_indicator(self, state)
    }

    fn hugoniot_density(&self, p: f64, behind: &PrimitiveState) -> f64 {
        crate::riemann::hugoniot_density(p, behind, self)
    }
}
