mod common;

use common::{kernel_fidelity, lattice_sum, unit_bump};
use rhf_lab::fields::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn kernel_table_values() {
    assert!((yukawa_kernel_closed_form(1, 1.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
    assert!((yukawa_kernel_closed_form(3, 2.0, 1.0).unwrap() - 0.1353352832366127).abs() < 1e-12);
    // K₀(1) by trapezoid quadrature of ∫₀^∞ e^{−cosh t} dt.
    let h = 1e-3;
    let quad: f64 = (0..20_000)
        .map(|i| {
            let t = i as f64 * h;
            let w = if i == 0 { 0.5 } else { 1.0 };
            w * (-t.cosh()).exp() * h
        })
        .sum();
    assert!((yukawa_kernel_closed_form(2, 1.0, 1.0).unwrap() - quad).abs() < 1e-10);
}

#[test]
fn narrow_bump_field_matches_exponential_kernel() {
    let grid = TorusGrid::new(1, 32, 16).unwrap();
    let v = yukawa_convolve(&unit_bump(grid, 0.1), &YukawaParams::new(1.0, 1).unwrap());
    let idx = 4 * 16;
    assert!((grid.position(idx)[0] - 4.0).abs() < 1e-14);
    let periodized = (-4.0f64).exp() + (-28.0f64).exp();
    let rel = (v.values()[idx] - periodized).abs() / periodized;
    assert!(rel < 1e-2, "relative error {rel}");
    // With the gaussian moment factor the agreement is to round-off.
    let rel = (v.values()[idx] - lattice_sum(1, 1.0, 32.0, 0.1, [4.0, 0.0, 0.0])).abs() / periodized;
    assert!(rel < 1e-4, "relative error {rel}");
}

#[test]
fn periodized_kernel_fidelity_in_one_dimension() {
    for (cells, mass) in [(8, 1.0), (16, 0.5), (8, 2.0)] {
        let err = kernel_fidelity(1, cells, 16, mass);
        assert!(err <= 1e-6, "L={cells} m={mass}: {err:e}");
    }
}

#[test]
fn periodized_kernel_fidelity_in_two_dimensions() {
    let err = kernel_fidelity(2, 8, 16, 1.0);
    assert!(err <= 1e-4, "{err:e}");
}

#[test]
fn norms_of_simple_fields() {
    let grid = TorusGrid::new(1, 6, 8).unwrap();
    let zero = ScalarField::zeros(grid);
    for kind in [NormKind::L2, NormKind::L2Unif, NormKind::Hminus1, NormKind::H2Unif] {
        assert_eq!(field_norm(&zero, kind, 1.0), 0.0);
    }
    let ind = ScalarField::cell_indicator(grid, &[Site([2, 0, 0])]);
    assert!((field_norm(&ind, NormKind::L2, 1.0) - 1.0).abs() < 1e-14);
    assert!((field_norm(&ind, NormKind::L2Unif, 1.0) - 1.0).abs() < 1e-14);
}

#[test]
fn interaction_of_unit_constant_on_eight_cells() {
    let grid = TorusGrid::new(1, 8, 4).unwrap();
    let p = YukawaParams::new(1.0, 1).unwrap();
    let one = ScalarField::constant(grid, 1.0);
    assert!((interaction_energy(&one, &one, &p).unwrap() - 16.0).abs() < 1e-12);
    assert_eq!(interaction_energy(&ScalarField::zeros(grid), &one, &p).unwrap(), 0.0);
}

#[test]
fn interaction_vanishes_only_at_zero() {
    let grid = TorusGrid::new(2, 3, 4).unwrap();
    let p = YukawaParams::new(0.7, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let f = ScalarField::from_values(grid, (0..grid.len()).map(|_| rng.gen_range(-1e-3..1e-3)).collect()).unwrap();
        assert!(interaction_energy(&f, &f, &p).unwrap() > 0.0);
    }
}

#[test]
fn translation_commutes_exactly_with_convolution() {
    let grid = TorusGrid::new(2, 4, 4).unwrap();
    let p = YukawaParams::new(1.0, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f = ScalarField::from_values(grid, (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    let shift = [1, 3, 0];
    let a = yukawa_convolve(&f.translated(shift), &p);
    let b = yukawa_convolve(&f, &p).translated(shift);
    assert!(a.sub(&b).sup_norm() <= 1e-13 * b.sup_norm());
}

#[test]
fn binary_files_roundtrip_through_disk() {
    let grid = TorusGrid::new(3, 2, 3).unwrap();
    let f = ScalarField::from_fn(grid, |x| x[0] - 2.0 * x[1] + x[2].sin());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.bin");
    io::write_binary(std::fs::File::create(&path).unwrap(), &f, 0.5).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(bytes.len(), io::HEADER_BYTES + 8 * grid.len());
    let (g, m) = io::read_binary(&bytes[..]).unwrap();
    assert_eq!(m, 0.5);
    assert_eq!(g.values(), f.values());
}
