//! Yukawa (screened Coulomb) interaction: closed-form kernel, periodic
//! convolution and the interaction energy `D_m`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::bessel;
use super::field::ScalarField;
use super::fourier;
use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YukawaParams {
    pub mass: f64,
    pub dim: usize,
}

impl YukawaParams {
    pub fn new(mass: f64, dim: usize) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(LabError::InvalidParameter(format!(
                "screening mass must be positive (got {mass})"
            )));
        }
        if !(1..=3).contains(&dim) {
            return Err(LabError::InvalidParameter(format!(
                "dimension must be 1, 2 or 3 (got {dim})"
            )));
        }
        Ok(Self { mass, dim })
    }

    /// `|S^{d−1}|`: 2, 2π, 4π.
    pub fn sphere_measure(&self) -> f64 {
        sphere_measure(self.dim)
    }

    /// Fourier symbol `|S^{d−1}| / (|k|² + m²)`.
    pub fn symbol(&self, k2: f64) -> f64 {
        self.sphere_measure() / (k2 + self.mass * self.mass)
    }
}

pub fn sphere_measure(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 4.0 * PI,
    }
}

/// Free-space kernel `Y_m(r)`: `m⁻¹e^{−mr}` (d=1), `K₀(mr)` (d=2),
/// `r⁻¹e^{−mr}` (d=3).
pub fn yukawa_kernel_closed_form(dim: usize, mass: f64, r: f64) -> Result<f64> {
    if !(mass > 0.0) {
        return Err(LabError::InvalidParameter("mass must be positive".into()));
    }
    if r < 0.0 {
        return Err(LabError::InvalidParameter("distance must be non-negative".into()));
    }
    match dim {
        1 => Ok((-mass * r).exp() / mass),
        2 | 3 if r == 0.0 => Err(LabError::KernelSingularity(dim)),
        2 => Ok(bessel::k0(mass * r)),
        3 => Ok((-mass * r).exp() / r),
        _ => Err(LabError::InvalidParameter(format!("unsupported dimension {dim}"))),
    }
}

/// `Y_m * f` on the torus: Fourier coefficients multiplied by
/// `|S^{d−1}|/(|k|²+m²)`. Exact discrete solution of
/// `−ΔV + m²V = |S^{d−1}| f`.
pub fn yukawa_convolve(f: &ScalarField, params: &YukawaParams) -> ScalarField {
    let grid = *f.grid();
    let values = fourier::apply_multiplier(&grid, f.values(), |k2| params.symbol(k2));
    ScalarField::from_values(grid, values).expect("multiplier preserves length")
}

/// `D_m(f, g) = |S^{d−1}| Σ_k f̂(k)* ĝ(k)/(|k|²+m²)` with the torus Parseval
/// normalization; equals `∫ f (Y_m * g)`.
pub fn interaction_energy(f: &ScalarField, g: &ScalarField, params: &YukawaParams) -> Result<f64> {
    f.ensure_same_grid(g)?;
    Ok(params.sphere_measure() * f.hminus1_inner(g, params.mass))
}
