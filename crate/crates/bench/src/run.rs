//! Single runs of a scheme on a problem.

use std::time::{Duration, Instant};

use grp_core::grp::PathCounts;
use grp_core::scheme::{BoundaryPolicy, Grid, Limiter, SchemeSpec, Solver};
use grp_core::{EquationOfState, GasModel, PrimitiveState};

use crate::error::BenchError;
use crate::problem::ProblemSpec;
use crate::reference::{cell_average_reference, exact_reference, l1_error, linf_error, ErrorNorms};

/// Values that replace the problem or scheme defaults for one run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub t_end: Option<f64>,
    pub cfl: Option<f64>,
    pub limiter: Option<Limiter>,
    pub boundary: Option<BoundaryPolicy>,
    /// Force parallel (or serial) flux evaluation.
    pub parallel: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub problem: String,
    pub scheme: String,
    pub spec: SchemeSpec,
    pub n_cells: usize,
    pub cfl: f64,
    pub t_end: f64,
    pub grid: Grid,
    pub x: Vec<f64>,
    pub state: Vec<PrimitiveState>,
    /// Specific internal energy.
    pub e: Vec<f64>,
    /// Entropy indicator `p / rho^gamma`.
    pub entropy: Vec<f64>,
    /// Riemann-type problem: `exact` is sampled at cell centres. Otherwise it
    /// holds exact cell averages.
    pub riemann: bool,
    pub exact: Option<Vec<PrimitiveState>>,
    pub l1: Option<ErrorNorms>,
    pub linf: Option<ErrorNorms>,
    pub wall_time: Duration,
    pub steps: usize,
    pub retries: usize,
    pub paths: PathCounts,
}

impl RunResult {
    pub fn density(&self) -> Vec<f64> {
        self.state.iter().map(|s| s.rho).collect()
    }
}

/// Runs `scheme` on `problem` with `n_cells` cells up to the problem's end time.
///
/// Riemann problems get the exact solution sampled at cell centres; the
/// smooth problem is compared against exact cell averages.
pub fn run(problem: &ProblemSpec, scheme: &SchemeSpec, n_cells: usize, overrides: &Overrides) -> Result<RunResult, BenchError> {
    let started = Instant::now();
    let mut problem = problem.clone();
    if let Some(t) = overrides.t_end {
        problem.t_end = t;
    }
    if let Some(b) = overrides.boundary {
        problem.boundary = b;
    }
    problem.validate()?;
    let mut spec = *scheme;
    if let Some(cfl) = overrides.cfl {
        spec.cfl = cfl;
    }
    if let Some(l) = overrides.limiter {
        spec.limiter = l;
    }
    spec.validate()?;

    let gas = problem.gas()?;
    let grid = Grid::new(n_cells, problem.x_min, problem.x_max)?;
    let x = grid.centers();
    let init: Vec<_> = x.iter().map(|&xi| problem.initial_state(xi, &gas)).collect();
    let mut solver = Solver::new(grid, spec, gas, problem.boundary, &init)?;
    if let Some(p) = overrides.parallel {
        solver = solver.with_parallel(p);
    }
    let label = spec.label();
    solver.run_until(problem.t_end).map_err(|source| BenchError::Numerical {
        problem: problem.name.clone(),
        scheme: label.clone(),
        n_cells,
        time: solver.time,
        step: solver.steps,
        source,
    })?;
    let state = solver.primitives()?;

    let exact = if problem.is_riemann() {
        exact_reference(&problem, &x, problem.t_end)?
    } else {
        cell_average_reference(&problem, &grid, problem.t_end, 2)?
    };
    let l1 = l1_error(&state, &exact, grid.dx);
    let linf = linf_error(&state, &exact);

    Ok(RunResult {
        problem: problem.name.clone(),
        scheme: label,
        spec,
        n_cells,
        cfl: spec.cfl,
        t_end: problem.t_end,
        grid,
        e: state.iter().map(|s| gas.internal_energy(s.rho, s.p)).collect(),
        entropy: state.iter().map(|s| GasModel::entropy_indicator(&gas, s)).collect(),
        x,
        state,
        riemann: problem.is_riemann(),
        exact: Some(exact),
        l1: Some(l1),
        linf: Some(linf),
        wall_time: started.elapsed(),
        steps: solver.steps,
        retries: solver.retries,
        paths: solver.paths,
    })
}
