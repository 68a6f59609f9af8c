//! Locality, superposition and thermodynamic-limit error curves. Each sample
//! is an independent defect solve; curves are assembled in input order.

use rayon::prelude::*;
use serde::Serialize;

use super::fit::{linear_fit, LinearFit};
use crate::error::{LabError, Result};
use crate::fields::{ScalarField, Site, TorusGrid};
use crate::scf::{solve_defect_scf, DefectSolution, PeriodicGroundState};
use crate::spectral::local_projector_distance;

#[derive(Debug, Clone, Serialize)]
pub struct ErrorCurve {
    /// Truncation sizes or separations, in cells.
    pub parameters: Vec<f64>,
    pub errors: Vec<f64>,
    /// `error(p_{i+1}) / error(p_i)`; zero when both vanish.
    pub ratios: Vec<f64>,
    /// Fit of `log error` against `log parameter` over positive errors; the
    /// decay exponent is `−slope`.
    pub power_law: LinearFit,
}

impl ErrorCurve {
    fn new(parameters: Vec<f64>, errors: Vec<f64>) -> Self {
        let ratios = errors
            .windows(2)
            .map(|w| if w[0] == 0.0 && w[1] == 0.0 { 0.0 } else { w[1] / w[0] })
            .collect();
        let (xs, ys): (Vec<f64>, Vec<f64>) = parameters
            .iter()
            .zip(&errors)
            .filter(|(_, e)| **e > 0.0)
            .map(|(p, e)| (p.ln(), e.ln()))
            .unzip();
        ErrorCurve {
            power_law: linear_fit(&xs, &ys),
            parameters,
            errors,
            ratios,
        }
    }

    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_non_increasing(&self) -> bool {
        self.errors.windows(2).all(|w| w[1] <= w[0])
    }
}

/// The cell at the middle of the torus, `⌊L/2⌋` along every active axis.
pub fn center_site(grid: &TorusGrid) -> Site {
    let mut s = [0usize; 3];
    for c in s.iter_mut().take(grid.dim()) {
        *c = grid.cells() / 2;
    }
    Site(s)
}

/// Cells at distance `≤ radius` from `center` (always including `center`).
pub fn ball(grid: &TorusGrid, center: Site, radius: f64) -> Vec<Site> {
    grid.sites()
        .filter(|&s| grid.site_distance(s, center) <= radius)
        .collect()
}

/// Cells at distance `< radius` from `set` (always including `set`).
pub fn neighborhood(grid: &TorusGrid, set: &[Site], radius: f64) -> Vec<Site> {
    grid.sites()
        .filter(|&s| {
            let d = grid.distance_to_set(s, set);
            d == 0.0 || d < radius
        })
        .collect()
}

fn solve_all(nus: &[ScalarField], gs: &PeriodicGroundState) -> Result<Vec<DefectSolution>> {
    nus.par_iter().map(|nu| solve_defect_scf(nu, gs)).collect()
}

/// `ν_{L'} = ν·𝟙_{Γ_{L'}}` with `Γ_{L'}` centered on the torus center.
pub fn truncate(nu: &ScalarField, side: usize) -> ScalarField {
    let g = nu.grid();
    nu.restricted_to(&g.box_sites(center_site(g), side))
}

fn check_truncations(grid: &TorusGrid, truncations: &[usize]) -> Result<()> {
    if truncations.iter().any(|&t| t == 0 || t > grid.cells()) {
        return Err(LabError::InvalidParameter(format!(
            "truncation sizes must lie in 1..={}",
            grid.cells()
        )));
    }
    Ok(())
}

/// `‖V_ν − V_{ν_L}‖_{H²_unif(B)} + ‖ρ_ν − ρ_{ν_L}‖_{L²_unif(B)}` on the ball
/// `B` of radius `L/4^β` around the center.
pub fn locality_error(
    nu: &ScalarField,
    truncations: &[usize],
    beta: f64,
    gs: &PeriodicGroundState,
) -> Result<ErrorCurve> {
    let grid = *nu.grid();
    check_truncations(&grid, truncations)?;
    let mut nus = vec![nu.clone()];
    nus.extend(truncations.iter().map(|&t| truncate(nu, t)));
    let sols = solve_all(&nus, gs)?;
    let full = &sols[0];
    let center = center_site(&grid);
    let errors = truncations
        .iter()
        .zip(&sols[1..])
        .map(|(&t, sol)| {
            let region = ball(&grid, center, t as f64 / 4f64.powf(beta));
            full.v_nu.sub(&sol.v_nu).h2_unif_on(&region)
                + full.rho_nu.sub(&sol.rho_nu).l2_unif_on(&region)
        })
        .collect();
    Ok(ErrorCurve::new(
        truncations.iter().map(|&t| t as f64).collect(),
        errors,
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct SuperpositionCurve {
    pub curve: ErrorCurve,
    /// `|‖V₁₂ − V₂‖ − ‖V₁‖|` on the same region, bounded by the error.
    pub triangle_gaps: Vec<f64>,
    pub triangle_holds: bool,
}

/// `‖V_{ν₁+ν₂} − V_{ν₁} − V_{ν₂}‖_{H²_unif}` near `supp ν₂`, with
/// `ν₂ = χ(· − R e₁)`.
pub fn superposition_error(
    chi: &ScalarField,
    separations: &[usize],
    beta: f64,
    gs: &PeriodicGroundState,
) -> Result<SuperpositionCurve> {
    let grid = *chi.grid();
    let limit = grid.half_width();
    if let Some(&r) = separations
        .iter()
        .find(|&&r| r == 0 || r as f64 > limit)
    {
        return Err(LabError::RadiusTooLarge {
            radius: r as f64,
            limit,
        });
    }
    let shift = |r: usize| [r as i64, 0, 0];
    let mut nus = vec![chi.clone()];
    for &r in separations {
        let second = chi.translated(shift(r));
        nus.push(second.clone());
        nus.push(chi.add(&second));
    }
    let sols = solve_all(&nus, gs)?;
    let v1 = &sols[0].v_nu;
    let support = chi.support_sites();
    let mut errors = Vec::new();
    let mut triangle_gaps = Vec::new();
    let mut triangle_holds = true;
    for (i, &r) in separations.iter().enumerate() {
        let v2 = &sols[1 + 2 * i].v_nu;
        let v12 = &sols[2 + 2 * i].v_nu;
        let supp2: Vec<Site> = support
            .iter()
            .map(|&s| grid.shift_site(s, shift(r)))
            .collect();
        let region = neighborhood(&grid, &supp2, r as f64 / 4f64.powf(beta));
        let err = v12.sub(v1).sub(v2).h2_unif_on(&region);
        let gap = (v12.sub(v2).h2_unif_on(&region) - v1.h2_unif_on(&region)).abs();
        triangle_holds &= gap <= err * (1.0 + 1e-12) + 1e-15;
        errors.push(err);
        triangle_gaps.push(gap);
    }
    Ok(SuperpositionCurve {
        curve: ErrorCurve::new(separations.iter().map(|&r| r as f64).collect(), errors),
        triangle_gaps,
        triangle_holds,
    })
}

/// Local trace-norm distance on `region` between the Fermi projector of the
/// full defect and of each truncation `ν_{L'}`.
pub fn thermodynamic_limit_curve(
    nu: &ScalarField,
    truncations: &[usize],
    region: &[Site],
    gs: &PeriodicGroundState,
) -> Result<ErrorCurve> {
    let grid = *nu.grid();
    check_truncations(&grid, truncations)?;
    let mut nus = vec![nu.clone()];
    nus.extend(truncations.iter().map(|&t| truncate(nu, t)));
    let sols = solve_all(&nus, gs)?;
    let threshold = gs.options.perturbed_gap_min;
    let errors = sols[1..]
        .iter()
        .map(|s| local_projector_distance(&sols[0].spectrum, &s.spectrum, region, threshold))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ErrorCurve::new(
        truncations.iter().map(|&t| t as f64).collect(),
        errors,
    ))
}
