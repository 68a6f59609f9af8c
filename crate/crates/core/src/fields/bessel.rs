//! Modified Bessel function of the second kind, order zero.

use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Switch between the power series and the continued fraction.
pub const SERIES_LIMIT: f64 = 2.0;

/// `K₀(x)` for `x > 0`. Returns `+∞` at zero.
pub fn k0(x: f64) -> f64 {
    if x <= 0.0 {
        return f64::INFINITY;
    }
    if x <= SERIES_LIMIT {
        k0_series(x)
    } else {
        k0_continued_fraction(x)
    }
}

/// `K₀(x) = −(ln(x/2) + γ) I₀(x) + Σ_{k≥1} (x²/4)^k / (k!)² · H_k`.
pub fn k0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut i0 = 1.0;
    let mut tail = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * kf);
        harmonic += 1.0 / kf;
        i0 += term;
        tail += term * harmonic;
        if term * (1.0 + harmonic) < 1e-18 * (i0 + tail.abs()) {
            break;
        }
    }
    -log_term * i0 + tail
}

/// Steed's continued fraction (Temme's CF2 at order zero), the resummed form
/// of the large-`x` asymptotic expansion.
pub fn k0_continued_fraction(x: f64) -> f64 {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < f64::EPSILON {
            break;
        }
    }
    (PI / (2.0 * x)).sqrt() * (-x).exp() / s
}
