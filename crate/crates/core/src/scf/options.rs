use serde::{Deserialize, Serialize};

use crate::spectral::DEFAULT_DENSE_BUDGET;

/// Numerical controls shared by the periodic and defect solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Convergence threshold (L² for the periodic solver, L²_unif for defects).
    pub tol_scf: f64,
    /// Damping `α` of the periodic fixed-point iteration.
    pub mixing: f64,
    /// Minimal admissible gap of the periodic Hamiltonian.
    pub g_min: f64,
    pub max_iter: usize,
    /// Relative residual target of the `(1 + L)` Krylov solves.
    pub krylov_tol: f64,
    pub krylov_max_iter: usize,
    /// Largest matrix dimension handed to the dense eigensolver.
    pub dense_budget: usize,
    /// Minimal distance from `ε_F` to the spectrum of perturbed Hamiltonians.
    pub perturbed_gap_min: f64,
    /// `‖Y_m * f‖_∞` must stay below `potential_safety · g`.
    pub potential_safety: f64,
    /// Consecutive non-contracting steps tolerated before aborting.
    pub divergence_window: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_scf: 1e-9,
            mixing: 0.5,
            g_min: 0.1,
            max_iter: 500,
            krylov_tol: 1e-10,
            krylov_max_iter: 500,
            dense_budget: DEFAULT_DENSE_BUDGET,
            perturbed_gap_min: 0.02,
            potential_safety: 0.5,
            divergence_window: 5,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol_scf = tol;
        self
    }
}
