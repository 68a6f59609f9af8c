//! Bernoulli defect ensembles: exact enumeration, Monte Carlo and the small-p
//! expansion `⟨n_p,φ⟩ = ⟨n₀,φ⟩ + p⟨μ₁,φ⟩ + p²⟨μ₂,φ⟩ + O(p³)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ensemble::{DefectConfig, DefectEnsemble, TraceMode};
use crate::analysis::log_log_slopes;
use crate::error::{LabError, Result};
use crate::spectral::TestFunction;

/// Largest site count handled by exact enumeration (`2^10` configurations).
pub const DEFAULT_ENUMERATION_BUDGET: usize = 10;

/// Fraction of failed Monte Carlo samples that aborts a run.
const MAX_FAILURE_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ExactEnumeration,
    MonteCarlo,
    MuTerm,
}

#[derive(Debug, Clone, Serialize)]
pub struct DosPairing {
    /// `⟨n, φ⟩`.
    pub value: f64,
    /// `⟨n, φ⟩ − ⟨n₀, φ⟩`, accumulated from trace differences.
    pub excess: f64,
    pub stderr: f64,
    pub provenance: Provenance,
    pub samples: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub p: f64,
    pub seed: u64,
    pub samples: usize,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(LabError::InvalidParameter("p must lie in [0, 1]".into()));
        }
        if self.samples < 2 {
            return Err(LabError::InvalidParameter("need at least 2 samples".into()));
        }
        Ok(())
    }

    /// Configuration of sample `index`: sites drawn in index order from a
    /// ChaCha stream selected by the sample index.
    pub fn draw(&self, index: usize, sites: usize) -> DefectConfig {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        let chosen = (0..sites).filter(|_| rng.gen_bool(self.p)).collect();
        DefectConfig::new(chosen).expect("indices are distinct")
    }
}

/// `⟨μ_j, φ⟩` with its per-shell decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct MuPairing {
    pub j: usize,
    pub pairing: DosPairing,
    /// `(|k|, Σ_{sites at distance |k|} ½(T_{0,k} − 2T_0))`, ascending `|k|`.
    pub shells: Vec<(f64, f64)>,
    /// Contribution of the outermost shell.
    pub tail: f64,
}

fn enumerate_all(ensemble: &DefectEnsemble<'_>) -> Result<Vec<DefectConfig>> {
    let n = ensemble.num_sites();
    if n > DEFAULT_ENUMERATION_BUDGET {
        return Err(LabError::EnumerationBudget {
            sites: n,
            budget: DEFAULT_ENUMERATION_BUDGET,
        });
    }
    Ok((0..1u64 << n).map(DefectConfig::from_mask).collect())
}

fn first_failure(results: Vec<Result<()>>) -> Result<()> {
    results.into_iter().collect::<Result<Vec<()>>>().map(|_| ())
}

/// `⟨μ₁,φ⟩ = T_{{0}}(φ)`; `⟨μ₂,φ⟩ = Σ_{0<|k|≤cutoff} ½(T_{{0,k}} − 2T_{{0}})`,
/// per unit cell.
pub fn mu_pairing(
    j: usize,
    phi: &TestFunction,
    cutoff: f64,
    ensemble: &DefectEnsemble<'_>,
) -> Result<MuPairing> {
    let mode = TraceMode::PerVolume;
    let grid = *ensemble.ground_state().grid();
    if cutoff > grid.half_width() {
        return Err(LabError::RadiusTooLarge {
            radius: cutoff,
            limit: grid.half_width(),
        });
    }
    let single = DefectConfig::new(vec![0])?;
    let wrap = |value: f64| DosPairing {
        value,
        excess: value,
        stderr: 0.0,
        provenance: Provenance::MuTerm,
        samples: 0,
        failed: 0,
    };
    match j {
        1 => {
            let t0 = ensemble.shift(&single, phi, mode)?;
            Ok(MuPairing {
                j,
                pairing: wrap(t0),
                shells: Vec::new(),
                tail: 0.0,
            })
        }
        2 => {
            let origin = grid.site_from_index(0);
            let partners: Vec<(f64, DefectConfig)> = (1..ensemble.num_sites())
                .map(|k| (grid.site_distance(origin, grid.site_from_index(k)), k))
                .filter(|(d, _)| *d <= cutoff + 1e-12)
                .map(|(d, k)| Ok((d, DefectConfig::new(vec![0, k])?)))
                .collect::<Result<_>>()?;
            let mut configs: Vec<DefectConfig> = partners.iter().map(|(_, c)| c.clone()).collect();
            configs.push(single.clone());
            first_failure(ensemble.prefetch(&configs))?;
            let t0 = ensemble.shift(&single, phi, mode)?;
            let mut shells: Vec<(f64, f64)> = Vec::new();
            for (d, c) in &partners {
                let term = 0.5 * (ensemble.shift(c, phi, mode)? - 2.0 * t0);
                match shells.iter_mut().find(|(sd, _)| (sd - d).abs() < 1e-9) {
                    Some(entry) => entry.1 += term,
                    None => shells.push((*d, term)),
                }
            }
            shells.sort_by(|a, b| a.0.total_cmp(&b.0));
            let value = shells.iter().map(|(_, t)| t).sum();
            Ok(MuPairing {
                j,
                pairing: wrap(value),
                tail: shells.last().map(|s| s.1).unwrap_or(0.0),
                shells,
            })
        }
        _ => Err(LabError::InvalidParameter(
            "only μ₁ and μ₂ are defined".into(),
        )),
    }
}

/// Bernoulli weight `p^{|K|}(1−p)^{N−|K|}`.
pub fn bernoulli_weight(p: f64, occupied: usize, sites: usize) -> f64 {
    p.powi(occupied as i32) * (1.0 - p).powi((sites - occupied) as i32)
}

/// Exact `⟨n_p, φ⟩` over all `2^N` configurations (spectra cached across calls).
pub fn dos_exact_enumeration(
    p: f64,
    phi: &TestFunction,
    ensemble: &DefectEnsemble<'_>,
) -> Result<DosPairing> {
    dos_exact_enumeration_with(p, phi, ensemble, TraceMode::PerVolume)
}

pub fn dos_exact_enumeration_with(
    p: f64,
    phi: &TestFunction,
    ensemble: &DefectEnsemble<'_>,
    mode: TraceMode,
) -> Result<DosPairing> {
    if !(0.0..=1.0).contains(&p) {
        return Err(LabError::InvalidParameter("p must lie in [0, 1]".into()));
    }
    let configs = enumerate_all(ensemble)?;
    let n = ensemble.num_sites();
    let relevant: Vec<DefectConfig> = configs
        .into_iter()
        .filter(|c| bernoulli_weight(p, c.len(), n) > 0.0)
        .collect();
    first_failure(ensemble.prefetch(&relevant))?;
    let mut excess = 0.0;
    for c in &relevant {
        excess += bernoulli_weight(p, c.len(), n) * ensemble.shift(c, phi, mode)?;
    }
    excess *= ensemble.volume_factor(mode);
    Ok(DosPairing {
        value: ensemble.host_pairing(phi, mode) + excess,
        excess,
        stderr: 0.0,
        provenance: Provenance::ExactEnumeration,
        samples: relevant.len(),
        failed: 0,
    })
}

/// `Σ_K p^{|K|}(1−p)^{N−|K|}` over all configurations.
pub fn enumeration_weight_sum(p: f64, sites: usize) -> f64 {
    (0..=sites)
        .map(|k| binomial(sites, k) * bernoulli_weight(p, k, sites))
        .sum()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Seeded Monte Carlo estimate; deterministic for a given `(seed, samples)`.
pub fn dos_monte_carlo(
    spec: &EnsembleSpec,
    phi: &TestFunction,
    ensemble: &DefectEnsemble<'_>,
) -> Result<DosPairing> {
    spec.validate()?;
    let n = ensemble.num_sites();
    let draws: Vec<DefectConfig> = (0..spec.samples)
        .into_par_iter()
        .map(|i| spec.draw(i, n))
        .collect();
    let outcomes = ensemble.prefetch(&draws);
    let mut values = Vec::with_capacity(draws.len());
    let mut failed = 0usize;
    for (c, ok) in draws.iter().zip(&outcomes) {
        match ok {
            Ok(()) => values.push(ensemble.shift(c, phi, TraceMode::PerVolume)?),
            Err(e) => {
                log::warn!("{e}");
                failed += 1;
            }
        }
    }
    if failed as f64 > MAX_FAILURE_FRACTION * spec.samples as f64 {
        return Err(LabError::TooManyFailures {
            failed,
            total: spec.samples,
        });
    }
    let m = values.len() as f64;
    let scale = ensemble.volume_factor(TraceMode::PerVolume);
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
    let excess = mean * scale;
    Ok(DosPairing {
        value: ensemble.host_pairing(phi, TraceMode::PerVolume) + excess,
        excess,
        stderr: (var / m).sqrt() * scale,
        provenance: Provenance::MonteCarlo,
        samples: values.len(),
        failed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SlopesReport {
    pub p_values: Vec<f64>,
    pub mu1: f64,
    pub mu2: f64,
    pub mu2_tail: f64,
    /// `⟨n_p,φ⟩ − ⟨n₀,φ⟩` per p.
    pub excess: Vec<f64>,
    /// `residuals[J][i] = |excess_i − Σ_{1≤j≤J} μ_j p_i^j|`, J = 0, 1, 2.
    pub residuals: Vec<Vec<f64>>,
    /// Log-log slopes of each residual row between consecutive p values.
    pub slopes: Vec<Vec<f64>>,
    pub configurations_solved: usize,
}

/// Remainder orders of the truncated expansion against exact enumeration.
pub fn expansion_residual_slopes(
    p_values: &[f64],
    phi: &TestFunction,
    cutoff: f64,
    ensemble: &DefectEnsemble<'_>,
) -> Result<SlopesReport> {
    if p_values.len() < 3 || p_values.iter().any(|&p| !(p > 0.0 && p <= 0.15)) {
        return Err(LabError::InvalidParameter(
            "need at least three p values in (0, 0.15]".into(),
        ));
    }
    let mu1 = mu_pairing(1, phi, cutoff, ensemble)?;
    let mu2 = mu_pairing(2, phi, cutoff, ensemble)?;
    let excess = p_values
        .iter()
        .map(|&p| Ok(dos_exact_enumeration(p, phi, ensemble)?.excess))
        .collect::<Result<Vec<f64>>>()?;
    let (m1, m2) = (mu1.pairing.value, mu2.pairing.value);
    let residuals: Vec<Vec<f64>> = (0..3)
        .map(|jmax| {
            p_values
                .iter()
                .zip(&excess)
                .map(|(&p, &e)| {
                    let mut r = e;
                    if jmax >= 1 {
                        r -= m1 * p;
                    }
                    if jmax >= 2 {
                        r -= m2 * p * p;
                    }
                    r.abs()
                })
                .collect()
        })
        .collect();
    let slopes = residuals
        .iter()
        .map(|r| log_log_slopes(p_values, r))
        .collect();
    Ok(SlopesReport {
        p_values: p_values.to_vec(),
        mu1: m1,
        mu2: m2,
        mu2_tail: mu2.tail,
        excess,
        residuals,
        slopes,
        configurations_solved: ensemble.solved(),
    })
}
