//! Least-squares fits on log-transformed decay data.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    /// Coefficient of determination.
    pub r_squared: f64,
    /// Sum of squared residuals.
    pub rss: f64,
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    let n = xs.len().min(ys.len());
    if n == 0 {
        return LinearFit {
            intercept: 0.0,
            slope: 0.0,
            r_squared: 0.0,
            rss: 0.0,
        };
    }
    let nf = n as f64;
    let mx = xs[..n].iter().sum::<f64>() / nf;
    let my = ys[..n].iter().sum::<f64>() / nf;
    let sxx: f64 = xs[..n].iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs[..n]
        .iter()
        .zip(&ys[..n])
        .map(|(x, y)| (x - mx) * (y - my))
        .sum();
    let syy: f64 = ys[..n].iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = xs[..n]
        .iter()
        .zip(&ys[..n])
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - rss / syy } else { 1.0 };
    LinearFit {
        intercept,
        slope,
        r_squared,
        rss,
    }
}

/// Decay-model fits of positive samples `y(R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFits {
    /// `log y = a − b·R`.
    pub exponential: LinearFit,
    /// `log y = a − b·(log R)²`.
    pub log_squared: LinearFit,
    /// `log y = a − b·log R`.
    pub power_law: LinearFit,
}

impl DecayFits {
    /// Best goodness-of-fit among the two superpolynomial models.
    pub fn best_superpolynomial_r2(&self) -> f64 {
        self.exponential.r_squared.max(self.log_squared.r_squared)
    }
}

/// Fits the three decay models; non-positive samples are dropped.
pub fn fit_decay(radii: &[f64], values: &[f64]) -> DecayFits {
    let (rs, ls): (Vec<f64>, Vec<f64>) = radii
        .iter()
        .zip(values)
        .filter(|(r, v)| **r > 0.0 && **v > 0.0)
        .map(|(r, v)| (*r, v.ln()))
        .unzip();
    let log_r: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let log_r2: Vec<f64> = log_r.iter().map(|l| l * l).collect();
    DecayFits {
        exponential: linear_fit(&rs, &ls),
        log_squared: linear_fit(&log_r2, &ls),
        power_law: linear_fit(&log_r, &ls),
    }
}

/// Local power-law exponents `−Δlog y / Δlog R` between consecutive samples.
pub fn local_exponents(radii: &[f64], values: &[f64]) -> Vec<f64> {
    radii
        .windows(2)
        .zip(values.windows(2))
        .map(|(r, v)| -(v[1].ln() - v[0].ln()) / (r[1].ln() - r[0].ln()))
        .collect()
}

/// Log-log slopes `Δlog y / Δlog x` between consecutive samples.
pub fn log_log_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (y[1].ln() - y[0].ln()) / (x[1].ln() - x[0].ln()))
        .collect()
}
