//! The dielectric operator `L: f ↦ −ρ_{Q₁,f}`, the `(1 + L)` solver and the
//! second-order density remainder `ρ_{Q̃₂,f}`.

use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;
use serde::Serialize;

use super::krylov::{conjugate_gradient, CgReport};
use super::periodic::PeriodicGroundState;
use crate::error::{LabError, Result};
use crate::fields::{yukawa_convolve, ScalarField, Site};
use crate::spectral::density_of_columns;

/// First-order density response to the potential `w`, from the residues of
/// the contour integral: `δρ = Σ_{i occ, a unocc} 2 ψ_i ψ_a ⟨ψ_a|w|ψ_i⟩ / (ε_i − ε_a)`.
fn first_order_density(gs: &PeriodicGroundState, w: &[f64]) -> Vec<f64> {
    let s = &gs.spectrum;
    let occ = s.occupied_vectors();
    let unocc = s.unoccupied_vectors();
    let n_o = occ.ncols();
    let n = occ.nrows();
    let ev = s.eigenvalues();
    let weighted = Mat::<f64>::from_fn(n, n_o, |p, i| w[p] * occ[(p, i)]);
    let mut m = unocc.transpose() * &weighted;
    for i in 0..n_o {
        for a in 0..m.nrows() {
            m[(a, i)] /= ev[i] - ev[n_o + a];
        }
    }
    let b = unocc * &m;
    let scale = 2.0 / gs.grid().point_volume();
    (0..n)
        .map(|p| (0..n_o).map(|i| occ[(p, i)] * b[(p, i)]).sum::<f64>() * scale)
        .collect()
}

/// `L f = −ρ_{Q₁,f}` with `Q₁` the first-order projector response to `Y_m * f`.
pub fn apply_dielectric_l(f: &ScalarField, gs: &PeriodicGroundState) -> Result<ScalarField> {
    f.ensure_same_grid(&gs.rho_per)?;
    gs.spectrum.require_gap(gs.options.g_min)?;
    if f.is_zero() {
        return Ok(ScalarField::zeros(*f.grid()));
    }
    let w = yukawa_convolve(f, gs.yukawa());
    let d = first_order_density(gs, w.values());
    ScalarField::from_values(*f.grid(), d.into_iter().map(|v| -v).collect())
}

/// `⟨f, g⟩_{H⁻¹}` for the ground state's screening mass.
pub fn hminus1_inner(gs: &PeriodicGroundState, f: &ScalarField, g: &ScalarField) -> f64 {
    f.hminus1_inner(g, gs.yukawa().mass)
}

/// Solves `(1 + L) f = g` by conjugate gradients in the `H⁻¹` metric, where
/// `1 + L` is self-adjoint and coercive.
pub fn solve_one_plus_l(g: &ScalarField, gs: &PeriodicGroundState) -> Result<ScalarField> {
    Ok(solve_one_plus_l_report(g, gs)?.0)
}

pub fn solve_one_plus_l_report(
    g: &ScalarField,
    gs: &PeriodicGroundState,
) -> Result<(ScalarField, CgReport)> {
    g.ensure_same_grid(&gs.rho_per)?;
    gs.spectrum.require_gap(gs.options.g_min)?;
    let apply = |f: &ScalarField| {
        let lf = apply_dielectric_l(f, gs).expect("gap checked above");
        f.add(&lf)
    };
    conjugate_gradient(
        apply,
        |a, b| hminus1_inner(gs, a, b),
        g,
        gs.options.krylov_tol,
        gs.options.krylov_max_iter,
    )
}

/// Dense matrix of `L` acting on grid values (column `j` is `L e_j`).
pub fn assemble_dielectric_l(gs: &PeriodicGroundState) -> Result<Mat<f64>> {
    let grid = *gs.grid();
    let n = grid.len();
    if n > gs.options.dense_budget {
        return Err(LabError::BudgetExceeded {
            dim: n,
            budget: gs.options.dense_budget,
        });
    }
    gs.spectrum.require_gap(gs.options.g_min)?;
    // Columns of the Yukawa operator.
    let mut kernel = Mat::<f64>::zeros(n, n);
    let mut unit = ScalarField::zeros(grid);
    for j in 0..n {
        unit.values_mut()[j] = 1.0;
        let col = yukawa_convolve(&unit, gs.yukawa());
        unit.values_mut()[j] = 0.0;
        for p in 0..n {
            kernel[(p, j)] = col.values()[p];
        }
    }
    let s = &gs.spectrum;
    let occ = s.occupied_vectors();
    let unocc = s.unoccupied_vectors();
    let n_o = occ.ncols();
    let ev = s.eigenvalues();
    let scale = -2.0 / grid.point_volume();
    let mut out = Mat::<f64>::zeros(n, n);
    for i in 0..n_o {
        // Rows of ⟨ψ_a| u_i W_j⟩ for every column j, divided by ε_i − ε_a.
        let weighted = Mat::<f64>::from_fn(n, n, |p, j| occ[(p, i)] * kernel[(p, j)]);
        let mut m = unocc.transpose() * &weighted;
        for a in 0..m.nrows() {
            let inv = 1.0 / (ev[i] - ev[n_o + a]);
            for j in 0..n {
                m[(a, j)] *= inv;
            }
        }
        let b = unocc * &m;
        for j in 0..n {
            for p in 0..n {
                out[(p, j)] += scale * occ[(p, i)] * b[(p, j)];
            }
        }
    }
    Ok(out)
}

/// Block norm profile of `(1 + L)⁻¹` against cell separation.
#[derive(Debug, Clone, Serialize)]
pub struct OffDiagonalProfile {
    pub separations: Vec<usize>,
    /// `max_j ‖𝟙_{Γ+j}(1+L)⁻¹𝟙_{Γ+j+s}‖` for each separation `s`.
    pub block_norms: Vec<f64>,
    pub diagonal_norm: f64,
}

/// Operator norms of cell-block compressions of the dense inverse `(1 + L)⁻¹`.
pub fn one_plus_l_offdiagonal_profile(
    gs: &PeriodicGroundState,
    separations: &[usize],
) -> Result<OffDiagonalProfile> {
    let grid = *gs.grid();
    let n = grid.len();
    let mut a = assemble_dielectric_l(gs)?;
    for p in 0..n {
        a[(p, p)] += 1.0;
    }
    let lu = a.partial_piv_lu();
    let inv = lu.inverse();
    let block_norm = |j: Site, k: Site| -> Result<f64> {
        let rows = grid.cell_points(j);
        let cols = grid.cell_points(k);
        let block = Mat::<f64>::from_fn(rows.len(), cols.len(), |r, c| inv[(rows[r], cols[c])]);
        let sv = block
            .singular_values()
            .map_err(|_| LabError::EigenNonConvergence)?;
        Ok(sv.iter().copied().fold(0.0, f64::max))
    };
    let base = Site::ORIGIN;
    let diagonal_norm = block_norm(base, base)?;
    let mut block_norms = Vec::with_capacity(separations.len());
    for &s in separations {
        if s as f64 > grid.half_width() {
            return Err(LabError::RadiusTooLarge {
                radius: s as f64,
                limit: grid.half_width(),
            });
        }
        let mut shift = [0i64; 3];
        shift[0] = s as i64;
        block_norms.push(block_norm(base, grid.shift_site(base, shift))?);
    }
    Ok(OffDiagonalProfile {
        separations: separations.to_vec(),
        block_norms,
        diagonal_norm,
    })
}

/// `ρ[𝟙(H₀ + Y_m*f ≤ ε_F)] − ρ₀`, the full nonlinear response.
pub fn full_response_density(f: &ScalarField, gs: &PeriodicGroundState) -> Result<ScalarField> {
    let w = yukawa_convolve(f, gs.yukawa());
    full_response_to_potential(&w, gs)
}

pub fn full_response_to_potential(w: &ScalarField, gs: &PeriodicGroundState) -> Result<ScalarField> {
    let s = gs.perturbed_spectrum(w)?;
    s.require_gap(gs.options.perturbed_gap_min)?;
    Ok(density_of_columns(gs.grid(), s.occupied_vectors()).sub(&gs.projector_density))
}

/// `ρ_{Q̃₂,f} = ρ[𝟙(H₀ + Y_m*f ≤ ε_F)] − ρ₀ + L f`.
pub fn second_order_density(f: &ScalarField, gs: &PeriodicGroundState) -> Result<ScalarField> {
    f.ensure_same_grid(&gs.rho_per)?;
    if f.is_zero() {
        return Ok(ScalarField::zeros(*f.grid()));
    }
    let w = yukawa_convolve(f, gs.yukawa());
    let bound = gs.options.potential_safety * gs.gap;
    let sup = w.sup_norm();
    if sup >= bound {
        return Err(LabError::PotentialTooLarge { sup, bound });
    }
    let full = full_response_to_potential(&w, gs)?;
    let lf = ScalarField::from_values(
        *f.grid(),
        first_order_density(gs, w.values()).into_iter().map(|v| -v).collect(),
    )?;
    Ok(full.add(&lf))
}
