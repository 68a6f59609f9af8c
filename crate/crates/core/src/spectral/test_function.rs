//! Rapidly decaying test functions `φ(x) = A·P(u)·e^{−u²/2}`, `u = (x − c)/w`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `e^{−u²/2}`.
    Gaussian,
    /// `(d/du)^degree e^{−u²/2}`.
    GaussianDerivative,
    /// `u^degree e^{−u²/2}`.
    PolynomialDamped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub family: Family,
    pub center: f64,
    pub width: f64,
    #[serde(default)]
    pub degree: usize,
    #[serde(default = "one")]
    pub amplitude: f64,
    /// Polynomial in `u` (ascending coefficients), derived from the family.
    #[serde(skip)]
    poly: Vec<f64>,
}

fn one() -> f64 {
    1.0
}

impl TestFunction {
    pub fn new(family: Family, center: f64, width: f64, degree: usize) -> Self {
        let mut f = Self {
            family,
            center,
            width,
            degree,
            amplitude: 1.0,
            poly: Vec::new(),
        };
        f.rebuild();
        f
    }

    pub fn gaussian(center: f64, width: f64) -> Self {
        Self::new(Family::Gaussian, center, width, 0)
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    /// Zero function.
    pub fn zero() -> Self {
        Self::gaussian(0.0, 1.0).with_amplitude(0.0)
    }

    /// Recomputes the polynomial factor (call after deserializing).
    pub fn rebuild(&mut self) {
        self.poly = match self.family {
            Family::Gaussian => vec![1.0],
            Family::PolynomialDamped => {
                let mut p = vec![0.0; self.degree + 1];
                p[self.degree] = 1.0;
                p
            }
            Family::GaussianDerivative => {
                let mut p = vec![1.0];
                for _ in 0..self.degree {
                    p = derive(&p);
                }
                p
            }
        };
    }

    fn poly(&self) -> std::borrow::Cow<'_, [f64]> {
        if self.poly.is_empty() {
            let mut tmp = self.clone();
            tmp.rebuild();
            std::borrow::Cow::Owned(tmp.poly)
        } else {
            std::borrow::Cow::Borrowed(&self.poly)
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// `∂^β φ(x)`, exact.
    pub fn derivative(&self, x: f64, beta: usize) -> f64 {
        let mut p = self.poly().into_owned();
        for _ in 0..beta {
            p = derive(&p);
        }
        let u = (x - self.center) / self.width;
        let value = p.iter().rev().fold(0.0, |acc, c| acc * u + c);
        self.amplitude * value * (-0.5 * u * u).exp() / self.width.powi(beta as i32)
    }

    /// Estimate of `𝒩_{α,β}(φ) = sup_x |x^α ∂^β φ(x)|` on a sampling grid
    /// covering `center ± 40·width`.
    pub fn seminorm(&self, alpha: usize, beta: usize) -> f64 {
        let samples = 8001;
        let half = 40.0 * self.width;
        (0..samples)
            .map(|i| {
                let x = self.center - half + 2.0 * half * i as f64 / (samples - 1) as f64;
                (x.powi(alpha as i32) * self.derivative(x, beta)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Seminorm table for `α ≤ alpha_max`, `β ≤ beta_max` (`[α][β]`).
    pub fn seminorm_report(&self, alpha_max: usize, beta_max: usize) -> Vec<Vec<f64>> {
        (0..=alpha_max)
            .map(|a| (0..=beta_max).map(|b| self.seminorm(a, b)).collect())
            .collect()
    }
}

/// `d/du [P(u) e^{−u²/2}] = (P′(u) − u P(u)) e^{−u²/2}`.
fn derive(p: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + 1];
    for (k, &c) in p.iter().enumerate() {
        if k > 0 {
            out[k - 1] += k as f64 * c;
        }
        out[k + 1] -= c;
    }
    out
}
