use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-physical state: rho = {rho}, p = {p}")]
    NonPhysicalState { rho: f64, p: f64 },

    #[error("non-physical state in cell {cell}: rho = {rho}, p = {p}")]
    NonPhysicalCell { cell: usize, rho: f64, p: f64 },

    #[error("vacuum is generated: pressure-positivity condition fails by {deficit}")]
    VacuumFormation { deficit: f64 },

    #[error("star-pressure iteration did not converge after {iterations} iterations (residual {residual})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("expected a {expected} wave on the {side} side")]
    WrongWaveKind { expected: &'static str, side: &'static str },

    #[error("singular kinematic-thermodynamic system (determinant {det})")]
    SingularSystem { det: f64 },

    #[error("invalid scheme: {0}")]
    InvalidScheme(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid gas model: gamma = {0} (must be > 1)")]
    InvalidGamma(f64),
}
