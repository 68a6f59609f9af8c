//! Defect self-consistent field: fixed point of
//! `G_ν(ρ) = L(1+L)⁻¹ν + (1+L)⁻¹ ρ_{Q̃₂(ρ−ν)}`.

use serde::{Deserialize, Serialize};

use super::dielectric::{full_response_to_potential, second_order_density, solve_one_plus_l};
use super::periodic::PeriodicGroundState;
use crate::error::{LabError, Result};
use crate::fields::{yukawa_convolve, ScalarField};
use crate::spectral::Spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialGuess {
    /// `ρ⁰ = L(1+L)⁻¹ν`.
    #[default]
    LinearResponse,
    Zero,
}

#[derive(Debug, Clone)]
pub struct DefectSolution {
    pub nu: ScalarField,
    /// Response density `ρ_ν = ρ_{γ_ν} − ρ₀`.
    pub rho_nu: ScalarField,
    /// `V_ν = Y_m * (ρ_ν − ν)`.
    pub v_nu: ScalarField,
    pub iterations: usize,
    /// Largest observed `‖Δρ_{k+1}‖ / ‖Δρ_k‖` (L²_unif).
    pub contraction_estimate: f64,
    /// `‖ρ_{k+1} − ρ_k‖_{L²_unif}` per iteration.
    pub residuals: Vec<f64>,
    /// `‖ρ_ν‖_{L²_unif} / ‖ν‖_{L²_unif}` (zero for `ν = 0`).
    pub response_constant: f64,
    /// Spectrum of `H₀ + V_ν` with the host Fermi level.
    pub spectrum: Spectrum,
}

impl DefectSolution {
    pub fn gap(&self) -> f64 {
        self.spectrum.gap().unwrap_or(0.0)
    }
}

/// Below this step size ratios are dominated by round-off and not recorded.
const RATIO_FLOOR: f64 = 1e-15;

pub fn solve_defect_scf(nu: &ScalarField, gs: &PeriodicGroundState) -> Result<DefectSolution> {
    solve_defect_scf_from(nu, gs, InitialGuess::LinearResponse)
}

pub fn solve_defect_scf_from(
    nu: &ScalarField,
    gs: &PeriodicGroundState,
    guess: InitialGuess,
) -> Result<DefectSolution> {
    nu.ensure_same_grid(&gs.rho_per)?;
    let grid = *gs.grid();
    let opts = &gs.options;
    if nu.is_zero() {
        return Ok(DefectSolution {
            nu: nu.clone(),
            rho_nu: ScalarField::zeros(grid),
            v_nu: ScalarField::zeros(grid),
            iterations: 1,
            contraction_estimate: 0.0,
            residuals: vec![0.0],
            response_constant: 0.0,
            spectrum: gs.spectrum.clone(),
        });
    }
    // L(1+L)⁻¹ν = ν − (1+L)⁻¹ν.
    let linear = nu.sub(&solve_one_plus_l(nu, gs)?);
    let mut rho = match guess {
        InitialGuess::LinearResponse => linear.clone(),
        InitialGuess::Zero => ScalarField::zeros(grid),
    };
    let mut residuals = Vec::new();
    let mut contraction: f64 = 0.0;
    let mut growing = 0usize;
    let mut converged = false;
    for it in 0..opts.max_iter {
        let q2 = second_order_density(&rho.sub(nu), gs).map_err(|e| match e {
            LabError::PotentialTooLarge { .. } | LabError::Metallic { .. } => {
                LabError::NuTooLarge(format!("iteration {it}: {e}"))
            }
            other => other,
        })?;
        let next = linear.add(&solve_one_plus_l(&q2, gs)?);
        let step = next.sub(&rho).l2_unif();
        if let Some(&prev) = residuals.last() {
            if prev > RATIO_FLOOR && step > RATIO_FLOOR {
                let ratio = step / prev;
                contraction = contraction.max(ratio);
                if ratio >= 1.0 {
                    growing += 1;
                    if growing >= opts.divergence_window {
                        return Err(LabError::NuTooLarge(format!(
                            "observed contraction factor {ratio:.3} >= 1 over {growing} iterations"
                        )));
                    }
                } else {
                    growing = 0;
                }
            }
        }
        residuals.push(step);
        rho = next;
        log::debug!("defect SCF iter {it}: step {step:.3e}");
        if step <= opts.tol_scf {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LabError::ScfNonConvergence {
            iterations: opts.max_iter,
            residual: residuals.last().copied().unwrap_or(f64::NAN),
        });
    }
    let v_nu = yukawa_convolve(&rho.sub(nu), gs.yukawa());
    let spectrum = gs.perturbed_spectrum(&v_nu)?;
    spectrum.require_gap(opts.perturbed_gap_min)?;
    let nu_norm = nu.l2_unif();
    Ok(DefectSolution {
        nu: nu.clone(),
        response_constant: rho.l2_unif() / nu_norm,
        rho_nu: rho,
        v_nu,
        iterations: residuals.len(),
        contraction_estimate: contraction,
        residuals,
        spectrum,
    })
}

/// Independent oracle: damped projector iteration
/// `ρ ← (1−α)ρ + α(ρ[𝟙(H₀ + Y_m*(ρ−ν) ≤ ε_F)] − ρ₀)` without preconditioning.
pub fn solve_defect_direct(
    nu: &ScalarField,
    gs: &PeriodicGroundState,
    mixing: f64,
    tol: f64,
    max_iter: usize,
) -> Result<ScalarField> {
    let mut rho = ScalarField::zeros(*gs.grid());
    for _ in 0..max_iter {
        let w = yukawa_convolve(&rho.sub(nu), gs.yukawa());
        let out = full_response_to_potential(&w, gs)?;
        let step = out.sub(&rho).l2_unif();
        rho = rho.scaled(1.0 - mixing).add_scaled(mixing, &out);
        if step <= tol {
            return Ok(rho);
        }
    }
    Err(LabError::ScfNonConvergence {
        iterations: max_iter,
        residual: f64::NAN,
    })
}

/// `‖ρ[𝟙(H₀+V_ν ≤ ε_F)] − ρ₀ − ρ_ν‖_{L²_unif}`: consistency of a solution
/// with the original self-consistent equation.
pub fn projector_consistency(sol: &DefectSolution, gs: &PeriodicGroundState) -> Result<f64> {
    let full = full_response_to_potential(&sol.v_nu, gs)?;
    Ok(full.sub(&sol.rho_nu).l2_unif())
}
