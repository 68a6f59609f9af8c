use serde::{Deserialize, Serialize};

use super::fourier;
use super::grid::{Site, TorusGrid};
use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    L2,
    L2Unif,
    Hminus1,
    H2Unif,
}

/// Real grid function on a torus (densities, potentials).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn from_values(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LabError::InvalidParameter(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every grid point position.
    pub fn from_fn<F: Fn([f64; 3]) -> f64>(grid: TorusGrid, f: F) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Self { grid, values }
    }

    /// Indicator of a set of cells, value 1 inside.
    pub fn cell_indicator(grid: TorusGrid, sites: &[Site]) -> Self {
        let mut out = Self::zeros(grid);
        for &s in sites {
            for p in grid.cell_points(s) {
                out.values[p] = 1.0;
            }
        }
        out
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn ensure_same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(LabError::GridMismatch)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, s: f64, other: &ScalarField) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + s * b)
                .collect(),
        }
    }

    pub fn add(&self, other: &ScalarField) -> Self {
        self.add_scaled(1.0, other)
    }

    pub fn sub(&self, other: &ScalarField) -> Self {
        self.add_scaled(-1.0, other)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &ScalarField) -> Self {
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    /// Quadrature `∫ f g` with weight `h^d`.
    pub fn dot(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.grid.point_volume()
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.point_volume()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Local `L²(Γ+k)` norm of every cell, indexed like `TorusGrid::site_index`.
    pub fn cell_l2_norms(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.grid.num_cells()];
        for (i, v) in self.values.iter().enumerate() {
            acc[self.grid.site_index(self.grid.cell_of(i))] += v * v;
        }
        let w = self.grid.point_volume();
        acc.into_iter().map(|s| (s * w).sqrt()).collect()
    }

    /// `(1 − Δ) f`, Laplacian formed spectrally.
    pub fn one_minus_laplacian(&self) -> Self {
        Self {
            grid: self.grid,
            values: fourier::apply_multiplier(&self.grid, &self.values, |k2| 1.0 + k2),
        }
    }

    /// Discrete `⟨f, g⟩_{H⁻¹}`: torus Parseval sum with weight `1/(|k|² + m²)`.
    pub fn hminus1_inner(&self, other: &ScalarField, mass: f64) -> f64 {
        let k2 = self.grid.wavenumbers_sq();
        let a = fourier::forward_real(&self.grid, &self.values);
        let b = fourier::forward_real(&self.grid, &other.values);
        // c_k = h^d · DFT, ∫ f g = |Γ_L|⁻¹ Σ c̄_k d_k.
        let w = self.grid.point_volume();
        let sum: f64 = a
            .iter()
            .zip(&b)
            .zip(&k2)
            .map(|((x, y), k)| (x.conj() * y).re / (k + mass * mass))
            .sum();
        sum * w * w / self.grid.volume()
    }

    pub fn norm(&self, kind: NormKind, mass: f64) -> f64 {
        match kind {
            NormKind::L2 => self.dot(self).sqrt(),
            NormKind::L2Unif => self.cell_l2_norms().into_iter().fold(0.0, f64::max),
            NormKind::Hminus1 => self.hminus1_inner(self, mass).max(0.0).sqrt(),
            NormKind::H2Unif => self
                .one_minus_laplacian()
                .cell_l2_norms()
                .into_iter()
                .fold(0.0, f64::max),
        }
    }

    pub fn l2(&self) -> f64 {
        self.norm(NormKind::L2, 1.0)
    }

    pub fn l2_unif(&self) -> f64 {
        self.norm(NormKind::L2Unif, 1.0)
    }

    pub fn h2_unif(&self) -> f64 {
        self.norm(NormKind::H2Unif, 1.0)
    }

    /// Max over `sites` of the local `L²` norm.
    pub fn l2_unif_on(&self, sites: &[Site]) -> f64 {
        let norms = self.cell_l2_norms();
        sites
            .iter()
            .map(|&s| norms[self.grid.site_index(s)])
            .fold(0.0, f64::max)
    }

    /// Max over `sites` of the local `L²` norm of `(1 − Δ) f`.
    pub fn h2_unif_on(&self, sites: &[Site]) -> f64 {
        self.one_minus_laplacian().l2_unif_on(sites)
    }

    /// Restriction to a set of cells (zero elsewhere).
    pub fn restricted_to(&self, sites: &[Site]) -> Self {
        let mut out = Self::zeros(self.grid);
        for &s in sites {
            for p in self.grid.cell_points(s) {
                out.values[p] = self.values[p];
            }
        }
        out
    }

    /// Translation by whole cells: `out(x + shift) = f(x)`.
    pub fn translated(&self, shift: [i64; 3]) -> Self {
        let perm = self.grid.translation_permutation(shift);
        let mut values = vec![0.0; self.values.len()];
        for (i, &target) in perm.iter().enumerate() {
            values[target] = self.values[i];
        }
        Self {
            grid: self.grid,
            values,
        }
    }

    /// Sites whose cell carries a nonzero value.
    pub fn support_sites(&self) -> Vec<Site> {
        let norms = self.cell_l2_norms();
        self.grid
            .sites()
            .filter(|&s| norms[self.grid.site_index(s)] > 0.0)
            .collect()
    }
}
