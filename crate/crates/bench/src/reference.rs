//! Exact reference solutions and error norms.

use grp_core::riemann::{solve_star, RiemannOptions};
use grp_core::scheme::Grid;
use grp_core::{ConservedState, PrimitiveState};

use crate::error::BenchError;
use crate::problem::{InitialData, ProblemSpec};

/// Pointwise exact solution at time `t`.
///
/// Riemann problems are sampled from the self-similar solution at
/// `(x - x0) / t`; the simple wave is traced along characteristics.
pub fn exact_reference(problem: &ProblemSpec, xs: &[f64], t: f64) -> Result<Vec<PrimitiveState>, BenchError> {
    if !(t > 0.0) {
        return Err(BenchError::Validation { key: "t".into(), message: format!("reference time {t} must be positive") });
    }
    let gas = problem.gas()?;
    match problem.initial {
        InitialData::Riemann { left, right, x0 } => {
            let fan = solve_star(&left, &right, &gas, &RiemannOptions::default())?;
            Ok(xs.iter().map(|&x| fan.sample(&left, &right, &gas, (x - x0) / t)).collect())
        }
        InitialData::SimpleWave(w) => Ok(xs.iter().map(|&x| w.exact(x, t, &gas)).collect()),
    }
}

// 5-point Gauss-Legendre nodes and weights on [-1, 1]
const GAUSS: [(f64, f64); 5] = [
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (-0.538_469_310_105_683, 0.478_628_670_499_366_5),
    (0.0, 0.568_888_888_888_888_9),
    (0.538_469_310_105_683, 0.478_628_670_499_366_5),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Exact cell averages of the conserved variables, returned as primitive
/// states so they compare directly with a finite-volume field.
pub fn cell_average_reference(
    problem: &ProblemSpec,
    grid: &Grid,
    t: f64,
    subcells: usize,
) -> Result<Vec<PrimitiveState>, BenchError> {
    let gas = problem.gas()?;
    let h = grid.dx / subcells as f64;
    let mut xs = Vec::with_capacity(grid.n_cells * subcells * GAUSS.len());
    for j in 0..grid.n_cells {
        let left = grid.x_min + j as f64 * grid.dx;
        for k in 0..subcells {
            let mid = left + (k as f64 + 0.5) * h;
            xs.extend(GAUSS.iter().map(|(node, _)| mid + 0.5 * h * node));
        }
    }
    let states = exact_reference(problem, &xs, t)?;
    let per_cell = subcells * GAUSS.len();
    states
        .chunks(per_cell)
        .map(|chunk| {
            let sum = chunk.iter().zip(GAUSS.iter().cycle()).fold(ConservedState::new(0.0, 0.0, 0.0), |acc, (s, (_, w))| {
                acc + (0.5 * w / subcells as f64) * gas.primitive_to_conserved(s)
            });
            Ok(gas.conserved_to_primitive(&sum)?)
        })
        .collect()
}

/// Per-variable error norm.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorNorms {
    pub rho: f64,
    pub u: f64,
    pub p: f64,
}

/// `sum_j |num_j - ref_j| dx` per variable.
pub fn l1_error(num: &[PrimitiveState], reference: &[PrimitiveState], dx: f64) -> ErrorNorms {
    assert_eq!(num.len(), reference.len(), "grids do not match");
    num.iter().zip(reference).fold(ErrorNorms::default(), |acc, (a, b)| ErrorNorms {
        rho: acc.rho + (a.rho - b.rho).abs() * dx,
        u: acc.u + (a.u - b.u).abs() * dx,
        p: acc.p + (a.p - b.p).abs() * dx,
    })
}

/// `max_j |num_j - ref_j|` per variable.
pub fn linf_error(num: &[PrimitiveState], reference: &[PrimitiveState]) -> ErrorNorms {
    assert_eq!(num.len(), reference.len(), "grids do not match");
    num.iter().zip(reference).fold(ErrorNorms::default(), |acc, (a, b)| ErrorNorms {
        rho: acc.rho.max((a.rho - b.rho).abs()),
        u: acc.u.max((a.u - b.u).abs()),
        p: acc.p.max((a.p - b.p).abs()),
    })
}

/// Position of the steepest density jump between neighbouring cells whose
/// centres lie in `[a, b]`, taken at the interface between them.
pub fn steepest_density_jump(grid: &Grid, prims: &[PrimitiveState], a: f64, b: f64) -> Option<f64> {
    (0..prims.len().saturating_sub(1))
        .filter(|&j| grid.center(j) >= a && grid.center(j + 1) <= b)
        .map(|j| (j, (prims[j + 1].rho - prims[j].rho).abs()))
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .map(|(j, _)| grid.x_min + (j + 1) as f64 * grid.dx)
}

/// Observed order `log2(e_coarse / e_fine)` for successive halvings.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

