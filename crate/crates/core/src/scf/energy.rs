//! Energy diagnostics: the defect energy `ℰ^ν(Q)` and the relative energy
//! `ℰ^rel` around a converged defect state.

use faer::{Mat, MatRef};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::defect::DefectSolution;
use super::periodic::PeriodicGroundState;
use crate::error::{LabError, Result};
use crate::fields::{interaction_energy, ScalarField};
use crate::spectral::{density_of_columns, Hamiltonian, Spectrum};

/// `Σ_i ⟨u_i, (H − ε_F) u_i⟩` over orthonormal columns.
fn shifted_trace(h: &Hamiltonian, cols: MatRef<'_, f64>, fermi_level: f64) -> f64 {
    let n = cols.nrows();
    (0..cols.ncols())
        .map(|i| {
            let u: Vec<f64> = (0..n).map(|p| cols[(p, i)]).collect();
            let hu = h.apply(&u);
            u.iter().zip(&hu).map(|(a, b)| a * b).sum::<f64>() - fermi_level
        })
        .sum()
}

/// `ℰ^ν(Q) = Tr((H_per − ε_F) Q) + ½ D_m(ρ_Q − ν, ρ_Q − ν)` for
/// `Q = P − P₀`, `P` the projector on `trial_occupied`. In finite dimension
/// `Tr_{γ₀}` is the plain trace.
pub fn defect_energy(
    trial_occupied: MatRef<'_, f64>,
    nu: &ScalarField,
    gs: &PeriodicGroundState,
) -> Result<f64> {
    nu.ensure_same_grid(&gs.rho_per)?;
    if trial_occupied.nrows() != gs.grid().len() {
        return Err(LabError::GridMismatch);
    }
    let grid = gs.grid();
    let reference = gs.spectrum.occupied_vectors();
    let kinetic = shifted_trace(&gs.hamiltonian, trial_occupied, gs.fermi_level)
        - shifted_trace(&gs.hamiltonian, reference, gs.fermi_level);
    let rho_q = density_of_columns(grid, trial_occupied).sub(&density_of_columns(grid, reference));
    let charge = rho_q.sub(nu);
    Ok(kinetic + 0.5 * interaction_energy(&charge, &charge, gs.yukawa())?)
}

/// `ℰ^ν` of the Fermi projector of a gapped spectrum on the host grid.
pub fn defect_energy_of_spectrum(
    spectrum: &Spectrum,
    nu: &ScalarField,
    gs: &PeriodicGroundState,
) -> Result<f64> {
    spectrum.require_gap(gs.options.perturbed_gap_min)?;
    defect_energy(spectrum.occupied_vectors(), nu, gs)
}

/// Rotation of occupied orbital `occupied` toward unoccupied orbital
/// `unoccupied` by `angle`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairRotation {
    pub occupied: usize,
    pub unoccupied: usize,
    pub angle: f64,
}

/// Occupied columns of `spectrum` after applying disjoint pair rotations;
/// the result stays orthonormal.
pub fn rotate_occupied(spectrum: &Spectrum, rotations: &[PairRotation]) -> Mat<f64> {
    let occ = spectrum.occupied_vectors();
    let unocc = spectrum.unoccupied_vectors();
    let mut out = occ.to_owned();
    for r in rotations {
        let (c, s) = (r.angle.cos(), r.angle.sin());
        for p in 0..out.nrows() {
            out[(p, r.occupied)] = c * occ[(p, r.occupied)] + s * unocc[(p, r.unoccupied)];
        }
    }
    out
}

/// Random direction: `pairs` disjoint rotations with unit-norm coefficients.
pub fn random_direction(spectrum: &Spectrum, pairs: usize, rng: &mut ChaCha8Rng) -> Vec<PairRotation> {
    let n_o = spectrum.occupied_count();
    let n_u = spectrum.len() - n_o;
    let k = pairs.min(n_o).min(n_u).max(1);
    let occ = sample(rng, n_o, k).into_vec();
    let unocc = sample(rng, n_u.min(4 * k).max(k), k).into_vec();
    let coeffs: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt().max(1e-300);
    occ.into_iter()
        .zip(unocc)
        .zip(coeffs)
        .map(|((i, a), c)| PairRotation {
            occupied: i,
            unoccupied: a,
            angle: c / norm,
        })
        .collect()
}

fn scale_direction(dir: &[PairRotation], theta: f64) -> Vec<PairRotation> {
    dir.iter()
        .map(|r| PairRotation {
            angle: r.angle * theta,
            ..*r
        })
        .collect()
}

/// `ℰ^rel(γ) = Tr((H − ε_F)(γ − γ_ν)) + ½ D_m(ρ_γ − ρ_{γ_ν}, ρ_γ − ρ_{γ_ν})`
/// with `H = H₀ + V_ν`.
pub fn relative_energy(
    trial_occupied: MatRef<'_, f64>,
    solution: &DefectSolution,
    gs: &PeriodicGroundState,
) -> Result<f64> {
    let h = gs.hamiltonian.with_added_potential(&solution.v_nu);
    let reference = solution.spectrum.occupied_vectors();
    let grid = gs.grid();
    let kinetic = shifted_trace(&h, trial_occupied, gs.fermi_level)
        - shifted_trace(&h, reference, gs.fermi_level);
    let drho = density_of_columns(grid, trial_occupied).sub(&density_of_columns(grid, reference));
    Ok(kinetic + 0.5 * interaction_energy(&drho, &drho, gs.yukawa())?)
}

#[derive(Debug, Clone, Serialize)]
pub struct RelativeEnergyReport {
    pub theta: f64,
    pub energy_at_zero: f64,
    /// `ℰ^rel` at angle `θ` for each direction.
    pub energies: Vec<f64>,
    /// `ℰ^rel` at angle `θ/2` for each direction.
    pub half_energies: Vec<f64>,
    /// `ℰ^rel(θ) / ℰ^rel(θ/2)`, ≈ 4 for a quadratic minimum.
    pub ratios: Vec<f64>,
    pub all_positive: bool,
}

/// Probes `ℰ^rel` along `directions` random occupied/unoccupied rotations.
pub fn relative_energy_check(
    solution: &DefectSolution,
    gs: &PeriodicGroundState,
    theta: f64,
    directions: usize,
    seed: u64,
) -> Result<RelativeEnergyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let energy_at_zero = relative_energy(solution.spectrum.occupied_vectors(), solution, gs)?;
    let mut energies = Vec::with_capacity(directions);
    let mut half_energies = Vec::with_capacity(directions);
    for _ in 0..directions {
        let dir = random_direction(&solution.spectrum, 4, &mut rng);
        let full = rotate_occupied(&solution.spectrum, &scale_direction(&dir, theta));
        let half = rotate_occupied(&solution.spectrum, &scale_direction(&dir, 0.5 * theta));
        energies.push(relative_energy(full.as_ref(), solution, gs)?);
        half_energies.push(relative_energy(half.as_ref(), solution, gs)?);
    }
    let ratios = energies
        .iter()
        .zip(&half_energies)
        .map(|(a, b)| a / b)
        .collect();
    let all_positive = energies.iter().chain(&half_energies).all(|&e| e > 0.0);
    Ok(RelativeEnergyReport {
        theta,
        energy_at_zero,
        energies,
        half_energies,
        ratios,
        all_positive,
    })
}
