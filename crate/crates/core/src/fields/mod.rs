//! Periodic grids, scalar fields, norms, Fourier multipliers and the Yukawa
//! interaction.

pub mod bessel;
mod field;
pub mod fourier;
mod grid;
pub mod io;
mod yukawa;

pub use field::{NormKind, ScalarField};
pub use grid::{Site, TorusGrid};
pub use yukawa::{
    interaction_energy, sphere_measure, yukawa_convolve, yukawa_kernel_closed_form, YukawaParams,
};

/// Field norm of the requested kind (`mass` enters only the `H⁻¹` weight).
pub fn field_norm(f: &ScalarField, kind: NormKind, mass: f64) -> f64 {
    f.norm(kind, mass)
}

/// Gaussian `exp(−|x−c|²/2σ²)` using the nearest periodic image of `center`.
pub fn periodic_gaussian(grid: TorusGrid, center: [f64; 3], width: f64) -> ScalarField {
    let l = grid.cells() as f64;
    let dim = grid.dim();
    ScalarField::from_fn(grid, |x| {
        let r2: f64 = (0..dim)
            .map(|a| {
                let mut dx = (x[a] - center[a]).rem_euclid(l);
                if dx > l / 2.0 {
                    dx -= l;
                }
                dx * dx
            })
            .sum();
        (-r2 / (2.0 * width * width)).exp()
    })
}

/// Gaussian of width `width` centered in `site`, truncated to that cell and
/// scaled to peak value `amplitude`.
pub fn cell_gaussian(grid: TorusGrid, site: Site, width: f64, amplitude: f64) -> ScalarField {
    let mut center = [0.0; 3];
    for (a, c) in center.iter_mut().enumerate().take(grid.dim()) {
        *c = site.0[a] as f64 + 0.5;
    }
    periodic_gaussian(grid, center, width)
        .scaled(amplitude)
        .restricted_to(&[site])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: TorusGrid, rng: &mut ChaCha8Rng) -> ScalarField {
        let v = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        ScalarField::from_values(grid, v).unwrap()
    }

    proptest! {
        #[test]
        fn convolution_is_linear_and_translation_covariant(seed in 0u64..500, shift in -4i64..4, a in -2.0f64..2.0) {
            let grid = TorusGrid::new(1, 6, 4).unwrap();
            let p = YukawaParams::new(0.8, 1).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_field(grid, &mut rng);
            let g = random_field(grid, &mut rng);
            let lhs = yukawa_convolve(&f.add_scaled(a, &g), &p);
            let rhs = yukawa_convolve(&f, &p).add_scaled(a, &yukawa_convolve(&g, &p));
            prop_assert!(lhs.sub(&rhs).sup_norm() < 1e-12);
            let shifted = yukawa_convolve(&f.translated([shift, 0, 0]), &p);
            let expect = yukawa_convolve(&f, &p).translated([shift, 0, 0]);
            prop_assert!(shifted.sub(&expect).sup_norm() < 1e-12);
        }

        #[test]
        fn interaction_is_symmetric_and_cauchy_schwarz(seed in 0u64..500) {
            let grid = TorusGrid::new(2, 2, 4).unwrap();
            let p = YukawaParams::new(1.2, 2).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_field(grid, &mut rng);
            let g = random_field(grid, &mut rng);
            let fg = interaction_energy(&f, &g, &p).unwrap();
            let gf = interaction_energy(&g, &f, &p).unwrap();
            let ff = interaction_energy(&f, &f, &p).unwrap();
            let gg = interaction_energy(&g, &g, &p).unwrap();
            prop_assert!((fg - gf).abs() <= 1e-12 * (ff * gg).sqrt());
            prop_assert!(ff > 0.0);
            prop_assert!(fg * fg <= ff * gg * (1.0 + 1e-12));
        }
    }

    #[test]
    fn interaction_matches_real_space_double_sum() {
        // Discrete periodic kernel from an explicit cosine sum, then O(N²) pairing.
        let grid = TorusGrid::new(1, 4, 3).unwrap();
        let p = YukawaParams::new(1.0, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = random_field(grid, &mut rng);
        let g = random_field(grid, &mut rng);
        let n = grid.len();
        let h = grid.spacing();
        let kernel = |delta: i64| -> f64 {
            (0..n)
                .map(|j| {
                    let k = grid.frequency(j);
                    p.symbol(k * k) * (k * delta as f64 * h).cos()
                })
                .sum::<f64>()
                / grid.volume()
        };
        let mut direct = 0.0;
        for x in 0..n {
            for y in 0..n {
                direct += f.values()[x] * kernel(x as i64 - y as i64) * g.values()[y] * h * h;
            }
        }
        let fast = interaction_energy(&f, &g, &p).unwrap();
        assert!((direct - fast).abs() < 1e-11 * direct.abs().max(1.0));
    }

    #[test]
    fn sup_norm_bounded_by_uniform_l2() {
        // ‖Y*f‖∞ ≤ C ‖f‖_{L²_unif} with C = max_x Σ_cells ‖K(x − ·)‖_{L²(cell)}
        // computed from the discrete kernel.
        let grid = TorusGrid::new(1, 8, 8).unwrap();
        let p = YukawaParams::new(1.0, 1).unwrap();
        let h = grid.spacing();
        let mut delta = ScalarField::zeros(grid);
        delta.values_mut()[0] = 1.0 / h;
        let kernel = yukawa_convolve(&delta, &p);
        let n = grid.len();
        let ppc = grid.points_per_cell();
        let c = (0..ppc)
            .map(|x| {
                (0..grid.cells())
                    .map(|cell| {
                        (0..ppc)
                            .map(|j| {
                                let y = cell * ppc + j;
                                kernel.values()[(x + n - y) % n].powi(2) * h
                            })
                            .sum::<f64>()
                            .sqrt()
                    })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let f = random_field(grid, &mut rng);
            assert!(yukawa_convolve(&f, &p).sup_norm() <= c * f.l2_unif() * (1.0 + 1e-12));
        }
        let bump = cell_gaussian(grid, Site([3, 0, 0]), 0.05, 1.0);
        assert!(yukawa_convolve(&bump, &p).sup_norm() <= c * bump.l2_unif() * (1.0 + 1e-12));
    }

    #[test]
    fn cell_gaussian_is_supported_in_one_cell() {
        let grid = TorusGrid::new(1, 5, 8).unwrap();
        let g = cell_gaussian(grid, Site([2, 0, 0]), 0.1, 0.2);
        assert_eq!(g.support_sites(), vec![Site([2, 0, 0])]);
        assert!((g.sup_norm() - 0.2).abs() < 1e-12);
    }
}
