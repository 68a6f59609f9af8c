use std::io::Write;

use faer::{Mat, MatRef, Side};

use super::hamiltonian::Hamiltonian;
use super::test_function::TestFunction;
use crate::error::{LabError, Result};
use crate::fields::{ScalarField, Site, TorusGrid};

/// Full eigendecomposition of a discretized Hamiltonian.
///
/// Eigenvectors are stored as orthonormal columns `u_i` of the point basis;
/// the grid function is `ψ_i = u_i / h^{d/2}`, normalized with weight `h^d`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    grid: TorusGrid,
    eigenvalues: Vec<f64>,
    vectors: Mat<f64>,
    fermi_level: Option<f64>,
}

/// Dense diagonalization with the default budget.
pub fn diagonalize(h: &Hamiltonian) -> Result<Spectrum> {
    diagonalize_with_budget(h, super::hamiltonian::DEFAULT_DENSE_BUDGET)
}

pub fn diagonalize_with_budget(h: &Hamiltonian, budget: usize) -> Result<Spectrum> {
    h.check_budget(budget)?;
    // Single-threaded and deterministic; concurrency lives one level up.
    faer::set_global_parallelism(faer::Par::Seq);
    let m = h.matrix();
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| LabError::EigenNonConvergence)?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let size = m.nrows();
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| s[i]).collect();
    let mut vectors = Mat::<f64>::zeros(size, size);
    for (col, &src) in order.iter().enumerate() {
        // Sign convention: largest-magnitude component positive (first on ties).
        let mut best = 0;
        for r in 0..size {
            if u[(r, src)].abs() > u[(best, src)].abs() + 1e-12 {
                best = r;
            }
        }
        let sign = if u[(best, src)] < 0.0 { -1.0 } else { 1.0 };
        for r in 0..size {
            vectors[(r, col)] = sign * u[(r, src)];
        }
    }
    Ok(Spectrum {
        grid: *h.grid(),
        eigenvalues,
        vectors,
        fermi_level: None,
    })
}

impl Spectrum {
    /// Assembles a spectrum from precomputed pairs (columns of `vectors` must
    /// be orthonormal and sorted like `eigenvalues`).
    pub fn from_parts(grid: TorusGrid, eigenvalues: Vec<f64>, vectors: Mat<f64>) -> Result<Self> {
        if vectors.nrows() != grid.len() || vectors.ncols() != eigenvalues.len() {
            return Err(LabError::InvalidParameter("spectrum shape mismatch".into()));
        }
        Ok(Self {
            grid,
            eigenvalues,
            vectors,
            fermi_level: None,
        })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn vectors(&self) -> MatRef<'_, f64> {
        self.vectors.as_ref()
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn fermi_level(&self) -> Option<f64> {
        self.fermi_level
    }

    pub fn with_fermi_level(mut self, fermi_level: f64) -> Self {
        self.fermi_level = Some(fermi_level);
        self
    }

    /// Places `ε_F` mid-way between eigenvalues `n_occ − 1` and `n_occ`.
    pub fn with_filling(self, n_occ: usize) -> Result<Self> {
        let ev = &self.eigenvalues;
        if n_occ == 0 || n_occ >= ev.len() {
            return Err(LabError::InvalidParameter(format!(
                "filling {n_occ} outside 1..{}",
                ev.len()
            )));
        }
        let mid = 0.5 * (ev[n_occ - 1] + ev[n_occ]);
        Ok(self.with_fermi_level(mid))
    }

    /// Distance from `ε_F` to the spectrum; `None` without a Fermi level.
    pub fn gap(&self) -> Option<f64> {
        let ef = self.fermi_level?;
        Some(
            self.eigenvalues
                .iter()
                .map(|l| (l - ef).abs())
                .fold(f64::INFINITY, f64::min),
        )
    }

    /// Number of eigenvalues `≤ ε_F`.
    pub fn occupied_count(&self) -> usize {
        match self.fermi_level {
            Some(ef) => self.eigenvalues.iter().take_while(|&&l| l <= ef).count(),
            None => 0,
        }
    }

    /// Errors unless a Fermi level is set and the gap is at least `threshold`.
    pub fn require_gap(&self, threshold: f64) -> Result<f64> {
        let gap = self.gap().ok_or_else(|| {
            LabError::InvalidParameter("spectrum has no Fermi level".into())
        })?;
        if gap < threshold {
            return Err(LabError::Metallic { gap, threshold });
        }
        Ok(gap)
    }

    /// Orbital `ψ_i` as a grid function (weight-`h^d` normalized).
    pub fn orbital(&self, i: usize) -> ScalarField {
        let scale = 1.0 / self.grid.point_volume().sqrt();
        let values = (0..self.grid.len())
            .map(|r| self.vectors[(r, i)] * scale)
            .collect();
        ScalarField::from_values(self.grid, values).expect("orbital length")
    }

    /// Occupied columns `u_i`, `λ_i ≤ ε_F`.
    pub fn occupied_vectors(&self) -> MatRef<'_, f64> {
        let n = self.occupied_count();
        self.vectors.as_ref().subcols(0, n)
    }

    pub fn unoccupied_vectors(&self) -> MatRef<'_, f64> {
        let n = self.occupied_count();
        self.vectors.as_ref().subcols(n, self.len() - n)
    }

    /// Density of the Fermi projector, `ρ(x) = Σ_{λ_i ≤ ε_F} |ψ_i(x)|²`.
    pub fn density(&self, gap_threshold: f64) -> Result<ScalarField> {
        self.require_gap(gap_threshold)?;
        Ok(density_of_columns(&self.grid, self.occupied_vectors()))
    }

    /// `Σ_i φ(λ_i)`.
    pub fn trace_of_function(&self, phi: &TestFunction) -> f64 {
        self.eigenvalues.iter().map(|&l| phi.eval(l)).sum()
    }

    /// `Σ_i φ(λ_i) ∫_{Γ+cell} |ψ_i|²`.
    pub fn local_trace_of_function(&self, phi: &TestFunction, cell: Site) -> f64 {
        let points = self.grid.cell_points(cell);
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                let w: f64 = points.iter().map(|&p| self.vectors[(p, i)].powi(2)).sum();
                phi.eval(l) * w
            })
            .sum()
    }

    /// Weight `∫_{Γ+k} |ψ_i|²` of every eigenvector on every cell
    /// (`[i][cell]`).
    pub fn cell_weights(&self) -> Vec<Vec<f64>> {
        let cells = self.grid.cell_map();
        (0..self.len())
            .map(|i| {
                let mut w = vec![0.0; self.grid.num_cells()];
                for (p, &c) in cells.iter().enumerate() {
                    w[c] += self.vectors[(p, i)].powi(2);
                }
                w
            })
            .collect()
    }

    /// Largest residual `‖Hu − λu‖₂ / (1 + |λ|)` over all pairs.
    pub fn max_residual(&self, h: &Hamiltonian) -> f64 {
        let m = h.matrix();
        let hv = &m * &self.vectors;
        (0..self.len())
            .map(|i| {
                let r: f64 = (0..self.grid.len())
                    .map(|p| (hv[(p, i)] - self.eigenvalues[i] * self.vectors[(p, i)]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                r / (1.0 + self.eigenvalues[i].abs())
            })
            .fold(0.0, f64::max)
    }

    /// Max entry of `|UᵀU − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.vectors.transpose() * &self.vectors;
        let mut err: f64 = 0.0;
        for r in 0..g.nrows() {
            for c in 0..g.ncols() {
                let target = if r == c { 1.0 } else { 0.0 };
                err = err.max((g[(r, c)] - target).abs());
            }
        }
        err
    }

    /// CSV export: `index,eigenvalue[,w_cell0,...]`.
    pub fn write_csv<W: Write>(&self, mut w: W, with_weights: bool) -> Result<()> {
        let weights = with_weights.then(|| self.cell_weights());
        write!(w, "index,eigenvalue")?;
        if weights.is_some() {
            for c in 0..self.grid.num_cells() {
                write!(w, ",w{c}")?;
            }
        }
        writeln!(w)?;
        for (i, l) in self.eigenvalues.iter().enumerate() {
            write!(w, "{i},{l:e}")?;
            if let Some(ws) = &weights {
                for x in &ws[i] {
                    write!(w, ",{x:e}")?;
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// `ρ(x) = Σ_i u_i(x)² / h^d` over the given orthonormal columns.
pub fn density_of_columns(grid: &TorusGrid, cols: MatRef<'_, f64>) -> ScalarField {
    let scale = 1.0 / grid.point_volume();
    let values = (0..grid.len())
        .map(|p| (0..cols.ncols()).map(|i| cols[(p, i)].powi(2)).sum::<f64>() * scale)
        .collect();
    ScalarField::from_values(*grid, values).expect("density length")
}

/// Trace norm of `𝟙_B (P₁ − P₂) 𝟙_B` for the Fermi projectors of two gapped
/// spectra on the same grid.
pub fn local_projector_distance(
    s1: &Spectrum,
    s2: &Spectrum,
    region: &[Site],
    gap_threshold: f64,
) -> Result<f64> {
    if s1.grid != s2.grid {
        return Err(LabError::GridMismatch);
    }
    s1.require_gap(gap_threshold)?;
    s2.require_gap(gap_threshold)?;
    projector_distance_of_columns(&s1.grid, s1.occupied_vectors(), s2.occupied_vectors(), region)
}

/// Same as [`local_projector_distance`] for explicit occupied column sets.
pub fn projector_distance_of_columns(
    grid: &TorusGrid,
    occ1: MatRef<'_, f64>,
    occ2: MatRef<'_, f64>,
    region: &[Site],
) -> Result<f64> {
    let mut points: Vec<usize> = region.iter().flat_map(|&s| grid.cell_points(s)).collect();
    points.sort_unstable();
    points.dedup();
    let b = points.len();
    let restrict = |occ: MatRef<'_, f64>| {
        Mat::<f64>::from_fn(b, occ.ncols(), |r, c| occ[(points[r], c)])
    };
    let a1 = restrict(occ1);
    let a2 = restrict(occ2);
    let diff = &a1 * a1.transpose() - &a2 * a2.transpose();
    faer::set_global_parallelism(faer::Par::Seq);
    let ev = diff
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| LabError::EigenNonConvergence)?;
    Ok(ev.iter().map(|x| x.abs()).sum())
}
