use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rhf_lab::fields::*;
use rhf_lab::spectral::*;

fn random_potential(grid: TorusGrid, amp: f64, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ScalarField::from_values(grid, (0..grid.len()).map(|_| rng.gen_range(-amp..amp)).collect()).unwrap()
}

/// Cell-periodic potential: the same profile repeated in every cell.
fn cell_periodic(grid: TorusGrid) -> ScalarField {
    ScalarField::from_fn(grid, |x| -3.0 * (2.0 * PI * x[0]).cos() - (4.0 * PI * x[0]).sin())
}

/// Number of eigenvalues below `lambda` from the inertia of `A − λ` (LDLᵀ).
fn count_below(a: &Mat<f64>, lambda: f64) -> usize {
    let n = a.nrows();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)] - if i == j { lambda } else { 0.0 }).collect())
        .collect();
    let mut negative = 0;
    for k in 0..n {
        let pivot = m[k][k];
        if pivot < 0.0 {
            negative += 1;
        }
        for i in k + 1..n {
            let f = m[i][k] / pivot;
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    negative
}

/// Eigenvalues by bisection on the inertia count.
fn bisection_eigenvalues(a: &Mat<f64>) -> Vec<f64> {
    let n = a.nrows();
    let radius = (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    (0..n)
        .map(|k| {
            let (mut lo, mut hi) = (-radius - 1.0, radius + 1.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if count_below(a, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

#[test]
fn free_spectrum_is_laplacian_modes() {
    let grid = TorusGrid::new(1, 8, 1).unwrap();
    let s = diagonalize(&Hamiltonian::free(grid)).unwrap();
    let mut expected: Vec<f64> = (-3..=4).map(|j: i32| 0.5 * (2.0 * PI * j as f64 / 8.0).powi(2)).collect();
    expected.sort_by(f64::total_cmp);
    for (a, b) in s.eigenvalues().iter().zip(&expected) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}

#[test]
fn constant_potential_shifts_spectrum() {
    let grid = TorusGrid::new(1, 4, 4).unwrap();
    let free = diagonalize(&Hamiltonian::free(grid)).unwrap();
    let shifted = diagonalize(&Hamiltonian::new(ScalarField::constant(grid, 0.75))).unwrap();
    for (a, b) in free.eigenvalues().iter().zip(shifted.eigenvalues()) {
        assert!((a + 0.75 - b).abs() < 1e-12);
    }
}

#[test]
fn random_eight_point_instance_matches_bisection_oracle() {
    let grid = TorusGrid::new(1, 2, 4).unwrap();
    for seed in 0..5 {
        let h = Hamiltonian::new(random_potential(grid, 2.0, seed));
        let s = diagonalize(&h).unwrap();
        let oracle = bisection_eigenvalues(&h.matrix());
        for (a, b) in s.eigenvalues().iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10, "seed {seed}: {a} vs {b}");
        }
    }
}

#[test]
fn densities_of_trivial_fillings() {
    let grid = TorusGrid::new(1, 4, 4).unwrap();
    let s = diagonalize(&Hamiltonian::free(grid)).unwrap();
    let empty = s.clone().with_fermi_level(-1.0);
    assert!(empty.density(0.1).unwrap().is_zero());
    let one = s.with_filling(1).unwrap();
    let rho = one.density(0.1).unwrap();
    for v in rho.values() {
        assert!((v - 1.0 / grid.volume()).abs() < 1e-13);
    }
}

#[test]
fn two_point_projector_diagonal() {
    // L = 2 cells, one point each: T = (π²/4)[[1, −1], [−1, 1]].
    let grid = TorusGrid::new(1, 2, 1).unwrap();
    let (a, b) = (0.3, -0.5);
    let h = Hamiltonian::new(ScalarField::from_values(grid, vec![a, b]).unwrap());
    let t = PI * PI / 4.0;
    let lambda = t + (a + b) / 2.0 - (((a - b) / 2.0).powi(2) + t * t).sqrt();
    let (u0, u1) = (t, t + a - lambda);
    let norm = u0 * u0 + u1 * u1;
    let s = diagonalize(&h).unwrap().with_filling(1).unwrap();
    assert!((s.eigenvalues()[0] - lambda).abs() < 1e-12);
    let rho = s.density(0.1).unwrap();
    assert!((rho.values()[0] - u0 * u0 / norm).abs() < 1e-12);
    assert!((rho.values()[1] - u1 * u1 / norm).abs() < 1e-12);
}

#[test]
fn traces_of_test_functions() {
    let grid = TorusGrid::new(1, 4, 4).unwrap();
    let s = diagonalize(&Hamiltonian::free(grid)).unwrap();
    assert_eq!(s.trace_of_function(&TestFunction::zero()), 0.0);
    let wide = TestFunction::gaussian(0.0, 1e6);
    assert!((s.trace_of_function(&wide) - grid.len() as f64).abs() < 1e-6);
    let phi = TestFunction::gaussian(2.0, 1.5);
    let modes: f64 = (-7..=8)
        .map(|j: i32| phi.eval(0.5 * (2.0 * PI * j as f64 / 4.0).powi(2)))
        .sum();
    assert!((s.trace_of_function(&phi) - modes).abs() < 1e-12 * modes);
}

#[test]
fn local_traces_are_stationary_and_sum_to_the_trace() {
    let grid = TorusGrid::new(1, 6, 8).unwrap();
    let s = diagonalize(&Hamiltonian::new(cell_periodic(grid))).unwrap();
    let phi = TestFunction::gaussian(-1.0, 2.0);
    let locals: Vec<f64> = grid.sites().map(|c| s.local_trace_of_function(&phi, c)).collect();
    for l in &locals {
        assert!((l - locals[0]).abs() < 1e-10);
    }
    let total = s.trace_of_function(&phi);
    assert!((locals.iter().sum::<f64>() - total).abs() <= 1e-10 * total.abs());
    assert_eq!(s.local_trace_of_function(&TestFunction::zero(), Site::ORIGIN), 0.0);
}

#[test]
fn local_projector_distances() {
    let grid = TorusGrid::new(1, 4, 4).unwrap();
    let h = Hamiltonian::new(cell_periodic(grid));
    let s = diagonalize(&h).unwrap().with_filling(4).unwrap();
    let all: Vec<Site> = grid.sites().collect();
    assert_eq!(local_projector_distance(&s, &s, &all, 0.01).unwrap(), 0.0);
    // Against the empty projector the distance is the occupied mass of B.
    let region = [Site([1, 0, 0])];
    let d = projector_distance_of_columns(&grid, s.occupied_vectors(), s.occupied_vectors().subcols(0, 0), &region).unwrap();
    let mass = s.density(0.01).unwrap().restricted_to(&region).integral();
    assert!((d - mass).abs() < 1e-12);
}

#[test]
fn two_point_projector_distance_matches_rotation_angle() {
    let grid = TorusGrid::new(1, 2, 1).unwrap();
    let spec = |v: Vec<f64>| {
        diagonalize(&Hamiltonian::new(ScalarField::from_values(grid, v).unwrap()))
            .unwrap()
            .with_filling(1)
            .unwrap()
    };
    let (s1, s2) = (spec(vec![0.4, -0.6]), spec(vec![-1.0, 0.2]));
    let (u, v) = (s1.vectors(), s2.vectors());
    let cos = (u[(0, 0)] * v[(0, 0)] + u[(1, 0)] * v[(1, 0)]).abs().min(1.0);
    let sin = (1.0 - cos * cos).sqrt();
    // P₁ − P₂ has eigenvalues ±sin θ.
    let all = [Site([0, 0, 0]), Site([1, 0, 0])];
    let d = local_projector_distance(&s1, &s2, &all, 0.01).unwrap();
    assert!((d - 2.0 * sin).abs() < 1e-12);
    let one = [Site([0, 0, 0])];
    let d = local_projector_distance(&s1, &s2, &one, 0.01).unwrap();
    assert!((d - (u[(0, 0)].powi(2) - v[(0, 0)].powi(2)).abs()).abs() < 1e-12);
}

#[test]
fn fermi_projector_is_idempotent_and_gauge_invariant() {
    let grid = TorusGrid::new(1, 4, 8).unwrap();
    let h = Hamiltonian::new(cell_periodic(grid).add(&random_potential(grid, 0.3, 9)));
    let s = diagonalize(&h).unwrap().with_filling(4).unwrap();
    let occ = s.occupied_vectors();
    let p = occ * occ.transpose();
    let defect = &p * &p - &p;
    assert!(defect.norm_l2() <= 1e-8);
    // Flip the sign of every other eigenvector.
    let mut flipped = s.vectors().to_owned();
    for j in (0..flipped.ncols()).step_by(2) {
        for i in 0..flipped.nrows() {
            flipped[(i, j)] = -flipped[(i, j)];
        }
    }
    let g = Spectrum::from_parts(grid, s.eigenvalues().to_vec(), flipped)
        .unwrap()
        .with_filling(4)
        .unwrap();
    assert_eq!(g.density(0.01).unwrap(), s.density(0.01).unwrap());
    let phi = TestFunction::gaussian(0.0, 1.0);
    assert_eq!(g.trace_of_function(&phi), s.trace_of_function(&phi));
    for c in grid.sites() {
        assert_eq!(g.local_trace_of_function(&phi, c), s.local_trace_of_function(&phi, c));
    }
    let all: Vec<Site> = grid.sites().collect();
    assert!(local_projector_distance(&g, &s, &all, 0.01).unwrap() < 1e-12);
}

#[test]
fn free_resolvent_rate_matches_closed_form() {
    let grid = TorusGrid::new(1, 32, 16).unwrap();
    let s = diagonalize(&Hamiltonian::free(grid)).unwrap();
    let z = -2.0;
    let probe = resolvent_kernel_decay(&s, Complex64::new(z, 0.0), Site([16, 0, 0]), &[2, 3, 4, 5, 6, 7, 8]).unwrap();
    let exact = (2.0f64 * -z).sqrt();
    assert!((probe.rate() - exact).abs() <= 0.05 * exact, "rate {}", probe.rate());
    assert!(probe.fit.r_squared >= 0.99);
}

#[test]
fn gapped_resolvent_decays_faster_farther_from_spectrum() {
    let grid = TorusGrid::new(1, 24, 8).unwrap();
    let h = Hamiltonian::new(cell_periodic(grid).add(&random_potential(grid, 0.5, 4)));
    let s = diagonalize(&h).unwrap();
    let bottom = s.eigenvalues()[0];
    let radii: Vec<usize> = (2..=10).collect();
    let mut last_rate = 0.0;
    for d in [0.1, 0.2, 0.4] {
        let p = resolvent_kernel_decay(&s, Complex64::new(bottom - d, 0.0), Site([12, 0, 0]), &radii).unwrap();
        assert!(p.fit.r_squared >= 0.99);
        assert!(p.rate() > last_rate);
        last_rate = p.rate();
        let shells: Vec<f64> = p.shell_norms.clone();
        assert!(shells.windows(2).all(|w| w[1] <= w[0]), "{shells:?}");
    }
    // Inside the spectrum the probe refuses to run.
    let z = Complex64::new(s.eigenvalues()[3], 0.0);
    assert!(resolvent_kernel_decay(&s, z, Site::ORIGIN, &radii).is_err());
}

#[test]
fn csv_export_lists_every_eigenvalue() {
    let grid = TorusGrid::new(1, 2, 4).unwrap();
    let s = diagonalize(&Hamiltonian::free(grid)).unwrap();
    let mut buf = Vec::new();
    s.write_csv(&mut buf, true).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,eigenvalue,w0,w1"));
    assert_eq!(lines.count(), 8);
}
