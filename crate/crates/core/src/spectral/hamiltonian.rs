use std::f64::consts::PI;

use faer::Mat;

use crate::error::{LabError, Result};
use crate::fields::{ScalarField, TorusGrid};

/// Default dense-solver budget (matrix dimension).
pub const DEFAULT_DENSE_BUDGET: usize = 4096;

/// `H = −½Δ + V` with the spectral (Fourier multiplier) Laplacian.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    grid: TorusGrid,
    potential: ScalarField,
}

impl Hamiltonian {
    pub fn new(potential: ScalarField) -> Self {
        Self {
            grid: *potential.grid(),
            potential,
        }
    }

    pub fn free(grid: TorusGrid) -> Self {
        Self::new(ScalarField::zeros(grid))
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn potential(&self) -> &ScalarField {
        &self.potential
    }

    /// Same kinetic part, potential shifted by `extra`.
    pub fn with_added_potential(&self, extra: &ScalarField) -> Self {
        Self::new(self.potential.add(extra))
    }

    /// Kinetic multiplier `½|k|²`.
    pub fn kinetic_multiplier(k2: f64) -> f64 {
        0.5 * k2
    }

    /// Dense real-symmetric matrix in the orthonormal point basis.
    pub fn matrix(&self) -> Mat<f64> {
        let g = &self.grid;
        let n = g.axis_len();
        let stencil = kinetic_stencil(g);
        let size = g.len();
        let mut h = Mat::<f64>::zeros(size, size);
        for row in 0..size {
            let mr = g.multi_index(row);
            h[(row, row)] = self.potential.values()[row];
            for axis in 0..g.dim() {
                for j in 0..n {
                    let mut mc = mr;
                    mc[axis] = j;
                    let col = g.flat_index(mc);
                    let delta = (mr[axis] + n - j) % n;
                    h[(row, col)] += stencil[delta];
                }
            }
        }
        h
    }

    /// `H` applied to grid values (spectral kinetic part).
    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        let kin = crate::fields::fourier::apply_multiplier(&self.grid, values, Self::kinetic_multiplier);
        kin.iter()
            .zip(values)
            .zip(self.potential.values())
            .map(|((k, v), w)| k + w * v)
            .collect()
    }

    pub fn check_budget(&self, budget: usize) -> Result<()> {
        if self.grid.len() > budget {
            Err(LabError::BudgetExceeded {
                dim: self.grid.len(),
                budget,
            })
        } else {
            Ok(())
        }
    }
}

/// One-axis kinetic matrix row `t(δ) = N⁻¹ Σ_j ½k_j² cos(2πjδ/N)`.
fn kinetic_stencil(g: &TorusGrid) -> Vec<f64> {
    let n = g.axis_len();
    (0..n)
        .map(|delta| {
            (0..n)
                .map(|j| {
                    let k = g.frequency(j);
                    let phase = 2.0 * PI * (j * delta % n) as f64 / n as f64;
                    0.5 * k * k * phase.cos()
                })
                .sum::<f64>()
                / n as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_matches_matrix_free_apply() {
        let g = TorusGrid::new(2, 2, 3).unwrap();
        let v = ScalarField::from_fn(g, |x| (x[0] - x[1]).sin());
        let h = Hamiltonian::new(v);
        let m = h.matrix();
        let x: Vec<f64> = (0..g.len()).map(|i| (i as f64).cos()).collect();
        let y = h.apply(&x);
        for r in 0..g.len() {
            let dense: f64 = (0..g.len()).map(|c| m[(r, c)] * x[c]).sum();
            assert!((dense - y[r]).abs() < 1e-10);
        }
    }

    #[test]
    fn matrix_is_symmetric() {
        let g = TorusGrid::new(1, 3, 4).unwrap();
        let m = Hamiltonian::free(g).matrix();
        for r in 0..g.len() {
            for c in 0..g.len() {
                assert!((m[(r, c)] - m[(c, r)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn budget() {
        let g = TorusGrid::new(1, 8, 8).unwrap();
        assert!(Hamiltonian::free(g).check_budget(32).is_err());
        assert!(Hamiltonian::free(g).check_budget(64).is_ok());
    }
}
