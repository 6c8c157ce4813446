//! Finite-volume solvers for the one-dimensional compressible Euler equations
//! built around the generalized Riemann problem (GRP).
//!
//! The crate is layered bottom-up:
//!
//! * [`gas`]: polytropic equation of state and state conversions.
//! * [`riemann`]: exact solver for the associated (piecewise-constant)
//!   Riemann problem, plus the Hugoniot/shock-curve functions and their
//!   analytic partial derivatives.
//! * [`grp`]: acoustic and nonlinear GRP solvers giving the interface value
//!   and its instantaneous time derivative, and the resulting midpoint flux.
//! * [`scheme`]: grid, reconstruction, comparison fluxes (exact Godunov,
//!   HLLC, Roe), boundary conditions and time stepping.

pub mod error;
pub mod gas;
pub mod grp;
pub mod riemann;
pub mod scheme;

pub use error::{Error, Result};
pub use gas::{ConservedState, EquationOfState, GasModel, Mirror, PrimitiveState, SlopeState};
pub use grp::{GrpConfig, GrpDerivatives, GrpInput, GrpMode, GrpPath, GrpSolution, PathCounts, SideCoefficients};
pub use riemann::{RiemannFan, RiemannOptions, WaveKind};
pub use scheme::{
    BoundaryPolicy, CellField, FluxSolver, Grid, Limiter, Reconstruction, SchemeSpec, Solver,
    TimeIntegrator,
};
