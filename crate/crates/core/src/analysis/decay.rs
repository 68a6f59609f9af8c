//! Shell-norm decay profiles of the defect response.

use serde::Serialize;

use super::fit::{fit_decay, local_exponents, DecayFits};
use crate::error::{LabError, Result};
use crate::fields::{ScalarField, Site};
use crate::scf::DefectSolution;

#[derive(Debug, Clone, Serialize)]
pub struct DecayProfile {
    pub radii: Vec<f64>,
    /// `sup` of the local `H²_unif` norm of `V_ν` over cells at distance ≥ R
    /// from `supp ν`.
    pub potential_norms: Vec<f64>,
    /// Same with the local `L²` norm of `ρ_ν`.
    pub density_norms: Vec<f64>,
    /// Fits on the potential envelope, first shell excluded.
    pub potential_fits: DecayFits,
    pub density_fits: DecayFits,
    /// Local power-law exponents of the potential envelope between
    /// consecutive radii.
    pub potential_exponents: Vec<f64>,
}

/// `R ↦ max_{d(k, support) ≥ R} local_norms[k]`.
pub fn shell_envelope(
    field_norms: &[f64],
    distances: &[f64],
    radii: &[f64],
) -> Vec<f64> {
    radii
        .iter()
        .map(|&r| {
            field_norms
                .iter()
                .zip(distances)
                .filter(|(_, &d)| d >= r - 1e-12)
                .map(|(n, _)| *n)
                .fold(0.0, f64::max)
        })
        .collect()
}

fn cell_distances(field: &ScalarField, support: &[Site]) -> Vec<f64> {
    let g = field.grid();
    g.sites().map(|s| g.distance_to_set(s, support)).collect()
}

pub fn decay_profile(sol: &DefectSolution, radii: &[f64]) -> Result<DecayProfile> {
    let grid = *sol.nu.grid();
    let support = sol.nu.support_sites();
    let limit = grid.half_width();
    if let Some(&r) = radii.iter().find(|&&r| r > limit || r <= 0.0) {
        return Err(LabError::RadiusTooLarge { radius: r, limit });
    }
    let (potential_norms, density_norms) = if support.is_empty() {
        (vec![0.0; radii.len()], vec![0.0; radii.len()])
    } else {
        let dist = cell_distances(&sol.nu, &support);
        let v_local = sol.v_nu.one_minus_laplacian().cell_l2_norms();
        let rho_local = sol.rho_nu.cell_l2_norms();
        (
            shell_envelope(&v_local, &dist, radii),
            shell_envelope(&rho_local, &dist, radii),
        )
    };
    let skip = radii.len().min(1);
    Ok(DecayProfile {
        potential_fits: fit_decay(&radii[skip..], &potential_norms[skip..]),
        density_fits: fit_decay(&radii[skip..], &density_norms[skip..]),
        potential_exponents: local_exponents(radii, &potential_norms),
        radii: radii.to_vec(),
        potential_norms,
        density_norms,
    })
}
