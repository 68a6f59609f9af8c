use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("Yukawa kernel is singular at r = 0 in dimension {0}")]
    KernelSingularity(usize),

    #[error("matrix dimension {dim} exceeds the dense-solver budget {budget}")]
    BudgetExceeded { dim: usize, budget: usize },

    #[error("eigensolver failed to converge")]
    EigenNonConvergence,

    #[error("metallic configuration: gap {gap:.3e} below threshold {threshold:.3e}")]
    Metallic { gap: f64, threshold: f64 },

    #[error("not an insulator: gap {gap:.3e} below g_min {g_min:.3e}")]
    NotAnInsulator { gap: f64, g_min: f64 },

    #[error("SCF did not converge after {iterations} iterations (last residual {residual:.3e})")]
    ScfNonConvergence { iterations: usize, residual: f64 },

    #[error("nu too large: {0}")]
    NuTooLarge(String),

    #[error("effective potential too large: |Y*f|_inf = {sup:.3e} exceeds {bound:.3e}")]
    PotentialTooLarge { sup: f64, bound: f64 },

    #[error("Krylov solver stagnated after {iterations} iterations (relative residual {residual:.3e})")]
    KrylovStagnation { iterations: usize, residual: f64 },

    #[error("spectral parameter z is within {distance:.3e} of the spectrum")]
    IllConditioned { distance: f64 },

    #[error("enumeration budget exceeded: {sites} sites > {budget}")]
    EnumerationBudget { sites: usize, budget: usize },

    #[error("SCF failed for configuration {sites:?}: {source}")]
    ConfigurationFailed {
        sites: Vec<usize>,
        #[source]
        source: Box<LabError>,
    },

    #[error("too many failed Monte Carlo samples: {failed} of {total}")]
    TooManyFailures { failed: usize, total: usize },

    #[error("radius {radius} exceeds the torus half-width {limit}")]
    RadiusTooLarge { radius: f64, limit: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl LabError {
    /// Process exit code: 2 for invalid input, 3 for solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::InvalidParameter(_) | LabError::Config(_) | LabError::GridMismatch => 2,
            _ => 3,
        }
    }

    /// Stable machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            LabError::InvalidParameter(_) => "invalid_parameter",
            LabError::GridMismatch => "grid_mismatch",
            LabError::KernelSingularity(_) => "kernel_singularity",
            LabError::BudgetExceeded { .. } => "budget_exceeded",
            LabError::EigenNonConvergence => "eigen_non_convergence",
            LabError::Metallic { .. } => "metallic_configuration",
            LabError::NotAnInsulator { .. } => "not_an_insulator",
            LabError::ScfNonConvergence { .. } => "scf_non_convergence",
            LabError::NuTooLarge(_) => "nu_too_large",
            LabError::PotentialTooLarge { .. } => "potential_too_large",
            LabError::KrylovStagnation { .. } => "krylov_stagnation",
            LabError::IllConditioned { .. } => "ill_conditioned",
            LabError::EnumerationBudget { .. } => "enumeration_budget_exceeded",
            LabError::ConfigurationFailed { .. } => "configuration_failed",
            LabError::TooManyFailures { .. } => "too_many_failures",
            LabError::RadiusTooLarge { .. } => "radius_too_large",
            LabError::Config(_) => "config",
            LabError::Io(_) => "io",
            LabError::Json(_) => "json",
        }
    }
}
