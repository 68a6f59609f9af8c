use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Lattice site (unit cell) of the torus, `d` meaningful components.
///
/// Components are stored reduced modulo the number of cells per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site(pub [usize; 3]);

impl Site {
    pub const ORIGIN: Site = Site([0, 0, 0]);
}

/// Periodic computational domain: `cells` unit cells per axis, each sampled
/// by `points_per_cell` points per axis.
///
/// Cell `k` covers `[k, k+1)` along each axis; the torus is `[0, L)^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    dim: usize,
    cells: usize,
    points_per_cell: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, cells: usize, points_per_cell: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(LabError::InvalidParameter(format!(
                "dimension must be 1, 2 or 3 (got {dim})"
            )));
        }
        if cells == 0 || points_per_cell == 0 {
            return Err(LabError::InvalidParameter(
                "cells and points_per_cell must be positive".into(),
            ));
        }
        Ok(Self {
            dim,
            cells,
            points_per_cell,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn points_per_cell(&self) -> usize {
        self.points_per_cell
    }

    /// Points per axis, `L·n`.
    pub fn axis_len(&self) -> usize {
        self.cells * self.points_per_cell
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.axis_len().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.points_per_cell as f64
    }

    /// Quadrature weight `h^d`.
    pub fn point_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Torus volume `L^d`.
    pub fn volume(&self) -> f64 {
        (self.cells as f64).powi(self.dim as i32)
    }

    pub fn num_cells(&self) -> usize {
        self.cells.pow(self.dim as u32)
    }

    pub fn points_in_cell(&self) -> usize {
        self.points_per_cell.pow(self.dim as u32)
    }

    /// Row-major multi-index of a point (unused axes are zero).
    pub fn multi_index(&self, idx: usize) -> [usize; 3] {
        let n = self.axis_len();
        let mut out = [0; 3];
        let mut rem = idx;
        for axis in (0..self.dim).rev() {
            out[axis] = rem % n;
            rem /= n;
        }
        out
    }

    pub fn flat_index(&self, multi: [usize; 3]) -> usize {
        let n = self.axis_len();
        (0..self.dim).fold(0, |acc, axis| acc * n + multi[axis] % n)
    }

    pub fn position(&self, idx: usize) -> [f64; 3] {
        let h = self.spacing();
        let m = self.multi_index(idx);
        [m[0] as f64 * h, m[1] as f64 * h, m[2] as f64 * h]
    }

    pub fn cell_of(&self, idx: usize) -> Site {
        let m = self.multi_index(idx);
        let n = self.points_per_cell;
        Site([m[0] / n, m[1] / n, m[2] / n])
    }

    pub fn site_index(&self, site: Site) -> usize {
        (0..self.dim).fold(0, |acc, axis| acc * self.cells + site.0[axis] % self.cells)
    }

    pub fn site_from_index(&self, mut idx: usize) -> Site {
        let mut out = [0; 3];
        for axis in (0..self.dim).rev() {
            out[axis] = idx % self.cells;
            idx /= self.cells;
        }
        Site(out)
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.num_cells()).map(|i| self.site_from_index(i))
    }

    /// Site reached from `site` by the signed lattice vector `shift`.
    pub fn shift_site(&self, site: Site, shift: [i64; 3]) -> Site {
        let l = self.cells as i64;
        let mut out = [0; 3];
        for axis in 0..self.dim {
            out[axis] = (site.0[axis] as i64 + shift[axis]).rem_euclid(l) as usize;
        }
        Site(out)
    }

    /// Flat indices of the points in `site`, in row-major order.
    pub fn cell_points(&self, site: Site) -> Vec<usize> {
        let n = self.points_per_cell;
        let mut out = Vec::with_capacity(self.points_in_cell());
        let mut local = [0usize; 3];
        loop {
            let mut multi = [0; 3];
            for axis in 0..self.dim {
                multi[axis] = site.0[axis] * n + local[axis];
            }
            out.push(self.flat_index(multi));
            let mut axis = self.dim;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                local[axis] += 1;
                if local[axis] < n {
                    break;
                }
                local[axis] = 0;
            }
        }
    }

    /// Cell index of every point, computed once per call.
    pub fn cell_map(&self) -> Vec<usize> {
        (0..self.len())
            .map(|i| self.site_index(self.cell_of(i)))
            .collect()
    }

    /// Signed integer frequency of Fourier index `j` on one axis.
    pub fn signed_mode(&self, j: usize) -> i64 {
        let n = self.axis_len() as i64;
        let j = j as i64;
        if j > n / 2 {
            j - n
        } else {
            j
        }
    }

    /// Angular frequency `2πj/L` of Fourier index `j` on one axis.
    pub fn frequency(&self, j: usize) -> f64 {
        2.0 * PI * self.signed_mode(j) as f64 / self.cells as f64
    }

    /// `|k|²` for every Fourier index, in the same layout as the field values.
    pub fn wavenumbers_sq(&self) -> Vec<f64> {
        let axis: Vec<f64> = (0..self.axis_len())
            .map(|j| self.frequency(j).powi(2))
            .collect();
        (0..self.len())
            .map(|idx| {
                let m = self.multi_index(idx);
                (0..self.dim).map(|a| axis[m[a]]).sum()
            })
            .collect()
    }

    /// Periodic Euclidean distance between two cell centers, in cell units.
    pub fn site_distance(&self, a: Site, b: Site) -> f64 {
        let l = self.cells as i64;
        (0..self.dim)
            .map(|axis| {
                let diff = (a.0[axis] as i64 - b.0[axis] as i64).rem_euclid(l);
                let wrapped = diff.min(l - diff) as f64;
                wrapped * wrapped
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Distance from `site` to the nearest member of `set`; infinite for an empty set.
    pub fn distance_to_set(&self, site: Site, set: &[Site]) -> f64 {
        set.iter()
            .map(|&s| self.site_distance(site, s))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest cell distance realizable on the torus (half-width), `L/2`.
    pub fn half_width(&self) -> f64 {
        self.cells as f64 / 2.0
    }

    /// Sites of the box `Γ_{L'}` centered on `center`: per axis the offsets
    /// `-floor(L'/2) ..= ceil(L'/2) - 1`, clipped to the torus.
    pub fn box_sites(&self, center: Site, side: usize) -> Vec<Site> {
        let side = side.min(self.cells);
        let lo = -((side / 2) as i64);
        let hi = lo + side as i64;
        let mut out = Vec::new();
        let ranges: Vec<std::ops::Range<i64>> = (0..3)
            .map(|axis| if axis < self.dim { lo..hi } else { 0..1 })
            .collect();
        for a in ranges[0].clone() {
            for b in ranges[1].clone() {
                for c in ranges[2].clone() {
                    out.push(self.shift_site(center, [a, b, c]));
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Flat index permutation realizing a translation by whole cells:
    /// `out[perm[i]] = in[i]`.
    pub fn translation_permutation(&self, shift: [i64; 3]) -> Vec<usize> {
        let n = self.axis_len() as i64;
        let ppc = self.points_per_cell as i64;
        (0..self.len())
            .map(|idx| {
                let m = self.multi_index(idx);
                let mut t = [0usize; 3];
                for axis in 0..self.dim {
                    t[axis] = (m[axis] as i64 + shift[axis] * ppc).rem_euclid(n) as usize;
                }
                self.flat_index(t)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequency_zero_appears_once() {
        let g = TorusGrid::new(1, 4, 3).unwrap();
        let zeros = (0..g.axis_len()).filter(|&j| g.frequency(j) == 0.0).count();
        assert_eq!(zeros, 1);
        assert_eq!(g.axis_len(), 12);
    }

    #[test]
    fn multi_index_roundtrip_3d() {
        let g = TorusGrid::new(3, 3, 2).unwrap();
        for idx in 0..g.len() {
            assert_eq!(g.flat_index(g.multi_index(idx)), idx);
        }
    }

    #[test]
    fn cell_points_partition_the_grid() {
        let g = TorusGrid::new(2, 3, 4).unwrap();
        let mut seen = vec![0usize; g.len()];
        for site in g.sites() {
            for p in g.cell_points(site) {
                assert_eq!(g.cell_of(p), site);
                seen[p] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn periodic_distance_wraps() {
        let g = TorusGrid::new(1, 8, 2).unwrap();
        assert_eq!(g.site_distance(Site([0, 0, 0]), Site([7, 0, 0])), 1.0);
        assert_eq!(g.site_distance(Site([1, 0, 0]), Site([5, 0, 0])), 4.0);
    }

    #[test]
    fn box_sites_counts() {
        let g = TorusGrid::new(1, 16, 2).unwrap();
        let b = g.box_sites(Site::ORIGIN, 4);
        assert_eq!(b.len(), 4);
        assert!(b.contains(&Site([14, 0, 0])));
        assert!(b.contains(&Site([1, 0, 0])));
        assert_eq!(g.box_sites(Site::ORIGIN, 40).len(), 16);
    }

    #[test]
    fn rejects_bad_dimension() {
        assert!(TorusGrid::new(4, 3, 3).is_err());
        assert!(TorusGrid::new(1, 0, 3).is_err());
    }
}
