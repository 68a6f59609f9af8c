//! Periodic rHF ground state by damped fixed-point iteration on the density.

use serde::{Deserialize, Serialize};

use super::options::SolverOptions;
use crate::error::{LabError, Result};
use crate::fields::{periodic_gaussian, yukawa_convolve, ScalarField, TorusGrid, YukawaParams};
use crate::spectral::{diagonalize_with_budget, Hamiltonian, Spectrum};

/// Host crystal: one gaussian nucleus of total charge `nuclear_charge` at the
/// center of every unit cell, `electrons_per_cell` filled bands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrystalSpec {
    pub grid: TorusGrid,
    pub yukawa: YukawaParams,
    pub nuclear_charge: f64,
    pub nuclear_width: f64,
    pub electrons_per_cell: usize,
}

impl CrystalSpec {
    pub fn validate(&self) -> Result<()> {
        if self.yukawa.dim != self.grid.dim() {
            return Err(LabError::InvalidParameter(
                "Yukawa dimension differs from the grid dimension".into(),
            ));
        }
        if !(self.nuclear_charge > 0.0) || !(self.nuclear_width > 0.0) {
            return Err(LabError::InvalidParameter(
                "nuclear charge and width must be positive".into(),
            ));
        }
        if self.electrons_per_cell == 0 {
            return Err(LabError::InvalidParameter(
                "electrons_per_cell must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Number of occupied states on the supercell, `N_e · L^d`.
    pub fn occupied_states(&self) -> usize {
        self.electrons_per_cell * self.grid.num_cells()
    }

    /// `ν_per`: per-cell gaussian, discretely normalized so `∫_Γ ν_per = Z`.
    pub fn nu_per(&self) -> ScalarField {
        let g = self.grid;
        let mut center = [0.0; 3];
        for c in center.iter_mut().take(g.dim()) {
            *c = 0.5;
        }
        let bump = periodic_gaussian(g, center, self.nuclear_width);
        let bump = bump.scaled(self.nuclear_charge / bump.integral());
        let mut total = ScalarField::zeros(g);
        for site in g.sites() {
            total = total.add(&bump.translated([
                site.0[0] as i64,
                site.0[1] as i64,
                site.0[2] as i64,
            ]));
        }
        total
    }
}

/// Converged periodic ground state `γ₀ = 𝟙(H_per ≤ ε_F)`.
#[derive(Debug, Clone)]
pub struct PeriodicGroundState {
    pub crystal: CrystalSpec,
    pub options: SolverOptions,
    pub nu_per: ScalarField,
    /// Input density of the last iteration; `V_per = Y_m * (ρ_per − ν_per)`.
    pub rho_per: ScalarField,
    pub v_per: ScalarField,
    pub hamiltonian: Hamiltonian,
    /// Spectrum of `H_per` with `ε_F` set mid-gap.
    pub spectrum: Spectrum,
    /// Density of `𝟙(H_per ≤ ε_F)`; reference for all response densities.
    pub projector_density: ScalarField,
    pub fermi_level: f64,
    pub gap: f64,
    pub residuals: Vec<f64>,
}

impl PeriodicGroundState {
    pub fn grid(&self) -> &TorusGrid {
        &self.crystal.grid
    }

    pub fn yukawa(&self) -> &YukawaParams {
        &self.crystal.yukawa
    }

    /// Re-diagonalizes `H_per + extra` and places the host `ε_F`.
    pub fn perturbed_spectrum(&self, extra: &ScalarField) -> Result<Spectrum> {
        let h = self.hamiltonian.with_added_potential(extra);
        Ok(diagonalize_with_budget(&h, self.options.dense_budget)?.with_fermi_level(self.fermi_level))
    }
}

/// Damped iteration `ρ ← (1−α)ρ + α ρ[𝟙(H[ρ] ≤ ε_F)]`, `ε_F` mid-gap between
/// bands `N_e L^d` and `N_e L^d + 1`, from the uniform density.
pub fn solve_periodic(crystal: &CrystalSpec, options: &SolverOptions) -> Result<PeriodicGroundState> {
    let start = ScalarField::constant(crystal.grid, crystal.electrons_per_cell as f64);
    solve_periodic_from(crystal, options, start)
}

/// [`solve_periodic`] from an explicit initial density.
pub fn solve_periodic_from(
    crystal: &CrystalSpec,
    options: &SolverOptions,
    initial: ScalarField,
) -> Result<PeriodicGroundState> {
    crystal.validate()?;
    let grid = crystal.grid;
    initial.ensure_same_grid(&ScalarField::zeros(grid))?;
    let nu_per = crystal.nu_per();
    let n_occ = crystal.occupied_states();
    if n_occ >= grid.len() {
        return Err(LabError::InvalidParameter(
            "more occupied states than grid points".into(),
        ));
    }
    let mut rho = initial;
    let mut residuals = Vec::new();
    let mut last_gap = 0.0;
    for iter in 0..options.max_iter {
        let v = yukawa_convolve(&rho.sub(&nu_per), &crystal.yukawa);
        let h = Hamiltonian::new(v.clone());
        let spectrum = diagonalize_with_budget(&h, options.dense_budget)?.with_filling(n_occ)?;
        let gap = spectrum.gap().unwrap_or(0.0);
        let out = crate::spectral::density_of_columns(&grid, spectrum.occupied_vectors());
        let residual = out.sub(&rho).l2();
        residuals.push(residual);
        log::debug!("periodic SCF iter {iter}: residual {residual:.3e}, gap {gap:.4}");
        if residual <= options.tol_scf {
            if gap < options.g_min {
                return Err(LabError::NotAnInsulator {
                    gap,
                    g_min: options.g_min,
                });
            }
            let fermi_level = spectrum.fermi_level().expect("filling sets ε_F");
            return Ok(PeriodicGroundState {
                crystal: *crystal,
                options: *options,
                nu_per,
                rho_per: rho,
                v_per: v,
                hamiltonian: h,
                spectrum,
                projector_density: out,
                fermi_level,
                gap,
                residuals,
            });
        }
        if gap < 1e-10 && iter > 20 {
            // Degenerate at the Fermi level: the filling cannot open a gap.
            return Err(LabError::NotAnInsulator {
                gap,
                g_min: options.g_min,
            });
        }
        last_gap = gap;
        rho = rho.scaled(1.0 - options.mixing).add_scaled(options.mixing, &out);
    }
    if last_gap < options.g_min {
        // No gap ever opened; the oscillation is a Fermi-level degeneracy.
        return Err(LabError::NotAnInsulator {
            gap: last_gap,
            g_min: options.g_min,
        });
    }
    Err(LabError::ScfNonConvergence {
        iterations: options.max_iter,
        residual: residuals.last().copied().unwrap_or(f64::NAN),
    })
}
