//! Shared fixtures: reference-instance ground states are solved once per
//! test binary.
#![allow(dead_code)]

use std::sync::OnceLock;

use faer::Mat;
use rhf_lab::fields::fourier::apply_multiplier;
use rhf_lab::fields::*;
use rhf_lab::scf::*;

pub const CHI_AMPLITUDE: f64 = 0.2;
pub const CHI_WIDTH: f64 = 0.05;

pub fn crystal(cells: usize) -> CrystalSpec {
    CrystalSpec {
        grid: TorusGrid::new(1, cells, 16).unwrap(),
        yukawa: YukawaParams::new(1.0, 1).unwrap(),
        nuclear_charge: 4.0,
        nuclear_width: 0.1,
        electrons_per_cell: 1,
    }
}

/// Reference-instance ground state on an `cells`-cell torus (8, 16, 32, 64
/// or 128), default solver options.
pub fn ground_state(cells: usize) -> &'static PeriodicGroundState {
    static CACHE: [OnceLock<PeriodicGroundState>; 5] = [const { OnceLock::new() }; 5];
    let slot = match cells {
        8 => 0,
        16 => 1,
        32 => 2,
        64 => 3,
        128 => 4,
        _ => panic!("no cached ground state for L = {cells}"),
    };
    CACHE[slot].get_or_init(|| solve_periodic(&crystal(cells), &SolverOptions::default()).unwrap())
}

pub fn chi(grid: TorusGrid, site: Site) -> ScalarField {
    cell_gaussian(grid, site, CHI_WIDTH, CHI_AMPLITUDE)
}

pub fn chi_at_center(gs: &PeriodicGroundState) -> ScalarField {
    let g = *gs.grid();
    chi(g, rhf_lab::analysis::center_site(&g))
}

/// Dense matrix of a Fourier multiplier on a grid.
pub fn multiplier_matrix(grid: &TorusGrid, symbol: impl Fn(f64) -> f64 + Copy) -> Mat<f64> {
    let n = grid.len();
    let mut out = Mat::<f64>::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = apply_multiplier(grid, &e, symbol);
        e[j] = 0.0;
        for i in 0..n {
            out[(i, j)] = col[i];
        }
    }
    out
}

/// `G^{1/2} L G^{−1/2}` with `G` the `H⁻¹` Gram matrix; symmetric and
/// positive semi-definite when `L` is self-adjoint and non-negative in `H⁻¹`.
pub fn metric_symmetrized_dielectric(gs: &PeriodicGroundState) -> Mat<f64> {
    let grid = *gs.grid();
    let m2 = gs.yukawa().mass.powi(2);
    let l = assemble_dielectric_l(gs).unwrap();
    let half = multiplier_matrix(&grid, move |k2| (k2 + m2).powf(-0.5));
    let inv_half = multiplier_matrix(&grid, move |k2| (k2 + m2).sqrt());
    &half * &l * &inv_half
}

/// `(‖M − Mᵀ‖_F / ‖M‖_F, λ_min((M + Mᵀ)/2))`.
pub fn asymmetry_and_min_eigenvalue(m: &Mat<f64>) -> (f64, f64) {
    let asym = (m - m.transpose()).norm_l2() / m.norm_l2();
    let sym = Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    let ev = sym.self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
    (asym, ev.iter().copied().fold(f64::INFINITY, f64::min))
}

/// `χ` repeated in every cell.
pub fn defect_lattice(gs: &PeriodicGroundState) -> ScalarField {
    let grid = *gs.grid();
    grid.sites().fold(ScalarField::zeros(grid), |acc, s| acc.add(&chi(grid, s)))
}

/// Normalized gaussian source at the origin.
pub fn unit_bump(grid: TorusGrid, width: f64) -> ScalarField {
    let g = periodic_gaussian(grid, [0.0; 3], width);
    let total = g.integral();
    g.scaled(1.0 / total)
}

/// `e^{m²σ²/2} Σ_{|j_a| ≤ 3} Y_m(|x + jL|)`: exterior field of a gaussian
/// source of width σ, periodized by direct lattice summation.
pub fn lattice_sum(dim: usize, mass: f64, cells: f64, width: f64, x: [f64; 3]) -> f64 {
    let mut total = 0.0;
    let range = |a: usize| if a < dim { -3..=3 } else { 0..=0 };
    for j0 in range(0) {
        for j1 in range(1) {
            for j2 in range(2) {
                let j = [j0, j1, j2];
                let r2: f64 = (0..dim).map(|a| (x[a] + j[a] as f64 * cells).powi(2)).sum();
                total += yukawa_kernel_closed_form(dim, mass, r2.sqrt()).unwrap();
            }
        }
    }
    (mass * mass * width * width / 2.0).exp() * total
}

/// Max relative error of `Y * bump` against the lattice sum over grid
/// points at distance ≥ 1 from every image of the source.
pub fn kernel_fidelity(dim: usize, cells: usize, ppc: usize, mass: f64) -> f64 {
    let grid = TorusGrid::new(dim, cells, ppc).unwrap();
    let width = 0.15;
    let v = yukawa_convolve(&unit_bump(grid, width), &YukawaParams::new(mass, dim).unwrap());
    let l = cells as f64;
    let mut worst: f64 = 0.0;
    for (idx, &val) in v.values().iter().enumerate() {
        let x = grid.position(idx);
        let near: f64 = (0..dim)
            .map(|a| {
                let d = x[a].rem_euclid(l);
                d.min(l - d).powi(2)
            })
            .sum::<f64>()
            .sqrt();
        if near < 1.0 {
            continue;
        }
        let exact = lattice_sum(dim, mass, l, width, x);
        worst = worst.max(((val - exact) / exact).abs());
    }
    worst
}
