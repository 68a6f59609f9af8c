//! Resolvent-kernel decay probe for `(z − H)⁻¹` (Combes–Thomas type bounds).

use num_complex::Complex64;
use serde::Serialize;

use super::spectrum::Spectrum;
use crate::analysis::fit::{linear_fit, LinearFit};
use crate::error::{LabError, Result};
use crate::fields::Site;

#[derive(Debug, Clone, Serialize)]
pub struct ResolventDecay {
    pub z_re: f64,
    pub z_im: f64,
    /// `d(z, σ(H))`.
    pub distance: f64,
    /// `c₁(z) = d(z, σ(H))⁻¹`.
    pub c1: f64,
    /// `c₂(z) = d(z, σ(H)) / (1 + |z|)`.
    pub c2: f64,
    pub radii: Vec<usize>,
    /// `‖u‖_{L²}` over cells at distance exactly `R` from the source cell.
    pub shell_norms: Vec<f64>,
    /// Fit of `log(shell norm) = a − rate·R`.
    pub fit: LinearFit,
}

impl ResolventDecay {
    pub fn rate(&self) -> f64 {
        -self.fit.slope
    }
}

/// Applies `(z − H)⁻¹` to the indicator of `source_cell` through the
/// eigendecomposition and records shell norms at the requested radii.
pub fn resolvent_kernel_decay(
    spectrum: &Spectrum,
    z: Complex64,
    source_cell: Site,
    radii: &[usize],
) -> Result<ResolventDecay> {
    let grid = *spectrum.grid();
    let distance = spectrum
        .eigenvalues()
        .iter()
        .map(|&l| (z - l).norm())
        .fold(f64::INFINITY, f64::min);
    if distance < 1e-8 {
        return Err(LabError::IllConditioned { distance });
    }
    for &r in radii {
        if r as f64 > grid.half_width() {
            return Err(LabError::RadiusTooLarge {
                radius: r as f64,
                limit: grid.half_width(),
            });
        }
    }
    let u = spectrum.vectors();
    let source = grid.cell_points(source_cell);
    let n = grid.len();
    // u_i · 𝟙_cell, then Σ_i u_i (·)/(z − λ_i).
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (i, &lambda) in spectrum.eigenvalues().iter().enumerate() {
        let overlap: f64 = source.iter().map(|&p| u[(p, i)]).sum();
        if overlap == 0.0 {
            continue;
        }
        let coeff = overlap / (z - lambda);
        for (p, slot) in out.iter_mut().enumerate() {
            *slot += coeff * u[(p, i)];
        }
    }
    let w = grid.point_volume();
    let mut cell_sq = vec![0.0; grid.num_cells()];
    for (p, v) in out.iter().enumerate() {
        cell_sq[grid.site_index(grid.cell_of(p))] += v.norm_sqr() * w;
    }
    let shell_norms: Vec<f64> = radii
        .iter()
        .map(|&r| {
            grid.sites()
                .filter(|&s| (grid.site_distance(s, source_cell) - r as f64).abs() < 1e-9)
                .map(|s| cell_sq[grid.site_index(s)])
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let xs: Vec<f64> = radii.iter().map(|&r| r as f64).collect();
    let ys: Vec<f64> = shell_norms.iter().map(|v| v.max(1e-300).ln()).collect();
    let fit = linear_fit(&xs, &ys);
    Ok(ResolventDecay {
        z_re: z.re,
        z_im: z.im,
        distance,
        c1: 1.0 / distance,
        c2: distance / (1.0 + z.norm()),
        radii: radii.to_vec(),
        shell_norms,
        fit,
    })
}
