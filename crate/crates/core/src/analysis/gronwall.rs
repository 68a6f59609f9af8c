//! Extremal sequences of the recursion `x_R ≤ (C/R)e^{−C′R}x₀ + (C/R)x_{R/a}`
//! and their `log²` decay envelope.

use serde::Serialize;

use super::fit::{linear_fit, LinearFit};
use crate::error::{LabError, Result};

/// Grid points per factor `a` in `R`.
const SUBSTEPS: usize = 16;

#[derive(Debug, Clone, Serialize)]
pub struct GronwallReport {
    pub c: f64,
    pub c_prime: f64,
    pub a: f64,
    pub x0: f64,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// Fitted `C″` in `x_R ≤ C″ e^{−C‴ (log R)²} x₀` (envelope-adjusted).
    pub c_double_prime: f64,
    /// Fitted `C‴`.
    pub c_triple_prime: f64,
    /// `exp(max residual)` of the `log²` least-squares fit.
    pub envelope_factor: f64,
    pub log_squared_fit: LinearFit,
    pub power_law_fit: LinearFit,
    /// Bound holds for every grid `R ≥ 2` with `C‴ > 0`.
    pub holds: bool,
}

/// The extremal (equality) sequence, kept non-increasing, on the geometric
/// grid `R_j = a^{j/SUBSTEPS − 1}` up to `r_max`. Below the grid `x_R = x₀`.
pub fn extremal_sequence(c: f64, c_prime: f64, a: f64, x0: f64, r_max: f64) -> (Vec<f64>, Vec<f64>) {
    let step = a.powf(1.0 / SUBSTEPS as f64);
    let mut radii = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut r = 1.0 / a;
    while r <= r_max * (1.0 + 1e-12) {
        let j = radii.len();
        let back = if j >= SUBSTEPS { values[j - SUBSTEPS] } else { x0 };
        let bound = c / r * (-c_prime * r).exp() * x0 + c / r * back;
        let prev = values.last().copied().unwrap_or(x0);
        values.push(bound.min(prev));
        radii.push(r);
        r *= step;
    }
    (radii, values)
}

pub fn gronwall_extremal_check(
    c: f64,
    c_prime: f64,
    a: f64,
    r_max: f64,
    x0: f64,
) -> Result<GronwallReport> {
    if !(c >= 0.0) || !(c_prime > 0.0) || !(a > 1.0) || !(r_max >= 2.0) || !(x0 >= 0.0) {
        return Err(LabError::InvalidParameter(
            "need C >= 0, C' > 0, a > 1, R_max >= 2, x0 >= 0".into(),
        ));
    }
    let (radii, values) = extremal_sequence(c, c_prime, a, x0, r_max);
    let tail: Vec<(f64, f64)> = radii
        .iter()
        .zip(&values)
        .filter(|(r, _)| **r >= 2.0)
        .map(|(r, v)| (*r, *v))
        .collect();
    let base = GronwallReport {
        c,
        c_prime,
        a,
        x0,
        radii: radii.clone(),
        values: values.clone(),
        c_double_prime: 0.0,
        c_triple_prime: 0.0,
        envelope_factor: 1.0,
        log_squared_fit: linear_fit(&[], &[]),
        power_law_fit: linear_fit(&[], &[]),
        holds: true,
    };
    if x0 == 0.0 || tail.iter().all(|(_, v)| *v <= 0.0) {
        return Ok(base);
    }
    let positive: Vec<(f64, f64)> = tail.iter().copied().filter(|(_, v)| *v > 0.0).collect();
    let ys: Vec<f64> = positive.iter().map(|(_, v)| (v / x0).ln()).collect();
    let log_r: Vec<f64> = positive.iter().map(|(r, _)| r.ln()).collect();
    let log_r2: Vec<f64> = log_r.iter().map(|l| l * l).collect();
    let fit = linear_fit(&log_r2, &ys);
    let power = linear_fit(&log_r, &ys);
    let max_residual = log_r2
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - (fit.intercept + fit.slope * x))
        .fold(f64::NEG_INFINITY, f64::max);
    let c2 = (fit.intercept + max_residual).exp();
    let c3 = -fit.slope;
    let holds = c3 > 0.0
        && tail
            .iter()
            .all(|(r, v)| *v <= c2 * (-c3 * r.ln().powi(2)).exp() * x0 * (1.0 + 1e-12));
    Ok(GronwallReport {
        c_double_prime: c2,
        c_triple_prime: c3,
        envelope_factor: max_residual.exp(),
        log_squared_fit: fit,
        power_law_fit: power,
        holds,
        ..base
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_start_stays_zero() {
        let r = gronwall_extremal_check(1.0, 1.0, 4.0, 1e3, 0.0).unwrap();
        assert!(r.values.iter().all(|&v| v == 0.0));
        assert!(r.holds);
    }

    #[test]
    fn sequence_is_non_increasing_and_satisfies_recursion() {
        let (radii, values) = extremal_sequence(1.0, 1.0, 4.0, 1.0, 1e4);
        assert!(values.windows(2).all(|w| w[1] <= w[0]));
        for j in SUBSTEPS..radii.len() {
            let r = radii[j];
            let bound = (-r).exp() / r + values[j - SUBSTEPS] / r;
            assert!(values[j] <= bound * (1.0 + 1e-14));
        }
    }

    #[test]
    fn log_squared_beats_power_law() {
        let r = gronwall_extremal_check(1.0, 1.0, 4.0, 1e6, 1.0).unwrap();
        assert!(r.holds);
        assert!(r.log_squared_fit.rss < r.power_law_fit.rss);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(gronwall_extremal_check(1.0, 0.0, 4.0, 10.0, 1.0).is_err());
        assert!(gronwall_extremal_check(1.0, 1.0, 1.0, 10.0, 1.0).is_err());
    }
}
