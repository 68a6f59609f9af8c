//! Fourier transforms and multipliers on the torus grid.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::grid::TorusGrid;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place unnormalized DFT along every axis (`inverse` flips the sign of
/// the exponent; no `1/N` factor is applied in either direction).
pub fn fft_nd(grid: &TorusGrid, data: &mut [Complex64], inverse: bool) {
    let n = grid.axis_len();
    let dim = grid.dim();
    debug_assert_eq!(data.len(), grid.len());
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    });
    // Axis `dim-1` is contiguous; other axes are gathered into a line buffer.
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        if stride == 1 {
            fft.process(data);
            continue;
        }
        let block = stride * n;
        for start in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + j * stride];
                }
                fft.process(&mut line);
                for (j, value) in line.iter().enumerate() {
                    data[base + j * stride] = *value;
                }
            }
        }
    }
}

/// Forward transform of real values.
pub fn forward_real(grid: &TorusGrid, values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(grid, &mut buf, false);
    buf
}

/// Inverse transform returning the real part, normalized by `1/N`.
pub fn inverse_real(grid: &TorusGrid, mut coeffs: Vec<Complex64>) -> Vec<f64> {
    fft_nd(grid, &mut coeffs, true);
    let scale = 1.0 / grid.len() as f64;
    coeffs.into_iter().map(|c| c.re * scale).collect()
}

/// Applies the Fourier multiplier `symbol(|k|²)` to real grid values.
pub fn apply_multiplier<F>(grid: &TorusGrid, values: &[f64], symbol: F) -> Vec<f64>
where
    F: Fn(f64) -> f64,
{
    let k2 = grid.wavenumbers_sq();
    let mut coeffs = forward_real(grid, values);
    for (c, &k) in coeffs.iter_mut().zip(&k2) {
        *c *= symbol(k);
    }
    inverse_real(grid, coeffs)
}
