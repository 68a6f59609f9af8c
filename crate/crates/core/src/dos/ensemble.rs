//! Defect configurations `ν_K = Σ_{k∈K} χ(· − k)` on the host crystal and a
//! cache of their self-consistent spectra.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fields::{ScalarField, Site};
use crate::scf::{solve_defect_scf, PeriodicGroundState};
use crate::spectral::{Spectrum, TestFunction};

/// A finite set of distinct lattice sites, stored as sorted site indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DefectConfig {
    sites: Vec<usize>,
}

impl DefectConfig {
    pub fn empty() -> Self {
        Self { sites: Vec::new() }
    }

    /// Rejects repeated sites.
    pub fn new(mut sites: Vec<usize>) -> Result<Self> {
        sites.sort_unstable();
        if sites.windows(2).any(|w| w[0] == w[1]) {
            return Err(LabError::InvalidParameter(
                "defect sites must be distinct".into(),
            ));
        }
        Ok(Self { sites })
    }

    /// Configuration of the set bits of `mask` (bit `i` ↔ site index `i`).
    pub fn from_mask(mask: u64) -> Self {
        Self {
            sites: (0..64).filter(|i| mask >> i & 1 == 1).collect(),
        }
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }
}

/// How a configuration's trace enters the density of states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TraceMode {
    /// `Tr φ(H_K) / |Γ_L|`; equal in expectation to the local trace by
    /// stationarity, with lower variance.
    #[default]
    PerVolume,
    /// `Tr 𝟙_Γ φ(H_K) 𝟙_Γ` on the origin cell.
    Localized,
}

/// Host ground state, defect shape and the memoized spectra of `H₀ + V_K`.
pub struct DefectEnsemble<'a> {
    gs: &'a PeriodicGroundState,
    chi: ScalarField,
    anchor: Site,
    cache: Mutex<BTreeMap<DefectConfig, Arc<Spectrum>>>,
}

impl<'a> DefectEnsemble<'a> {
    /// `chi` must be supported in a single cell (its anchor).
    pub fn new(gs: &'a PeriodicGroundState, chi: ScalarField) -> Result<Self> {
        chi.ensure_same_grid(&gs.rho_per)?;
        let support = chi.support_sites();
        if support.len() > 1 {
            return Err(LabError::InvalidParameter(
                "defect shape must be supported in one cell".into(),
            ));
        }
        Ok(Self {
            gs,
            anchor: support.first().copied().unwrap_or(Site::ORIGIN),
            chi,
            cache: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn ground_state(&self) -> &PeriodicGroundState {
        self.gs
    }

    pub fn num_sites(&self) -> usize {
        self.gs.grid().num_cells()
    }

    /// Number of distinct configurations solved so far.
    pub fn solved(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }

    /// `ν_K = Σ_{k∈K} χ(· − k)`.
    pub fn nu(&self, config: &DefectConfig) -> ScalarField {
        let grid = *self.gs.grid();
        let mut out = ScalarField::zeros(grid);
        for &idx in config.sites() {
            let site = grid.site_from_index(idx);
            let mut shift = [0i64; 3];
            for (a, s) in shift.iter_mut().enumerate() {
                *s = site.0[a] as i64 - self.anchor.0[a] as i64;
            }
            out = out.add(&self.chi.translated(shift));
        }
        out
    }

    fn solve(&self, config: &DefectConfig) -> Result<Spectrum> {
        if config.sites().iter().any(|&i| i >= self.num_sites()) {
            return Err(LabError::InvalidParameter(format!(
                "site index out of range in {:?}",
                config.sites()
            )));
        }
        let nu = self.nu(config);
        solve_defect_scf(&nu, self.gs)
            .map(|sol| sol.spectrum)
            .map_err(|e| LabError::ConfigurationFailed {
                sites: config.sites().to_vec(),
                source: Box::new(e),
            })
    }

    /// Spectrum of `H₀ + V_K` (cached).
    pub fn spectrum(&self, config: &DefectConfig) -> Result<Arc<Spectrum>> {
        if let Some(s) = self.cache.lock().expect("cache lock").get(config) {
            return Ok(s.clone());
        }
        let s = Arc::new(self.solve(config)?);
        self.cache
            .lock()
            .expect("cache lock")
            .insert(config.clone(), s.clone());
        Ok(s)
    }

    /// Solves every uncached configuration concurrently; per-configuration
    /// outcomes are returned in input order.
    pub fn prefetch(&self, configs: &[DefectConfig]) -> Vec<Result<()>> {
        let missing: Vec<DefectConfig> = {
            let cache = self.cache.lock().expect("cache lock");
            let mut m: Vec<DefectConfig> = configs
                .iter()
                .filter(|c| !cache.contains_key(*c))
                .cloned()
                .collect();
            m.sort();
            m.dedup();
            m
        };
        let solved: Vec<(DefectConfig, Result<Spectrum>)> = missing
            .into_par_iter()
            .map(|c| {
                let r = self.solve(&c);
                (c, r)
            })
            .collect();
        let mut failures = BTreeMap::new();
        {
            let mut cache = self.cache.lock().expect("cache lock");
            for (c, r) in solved {
                match r {
                    Ok(s) => {
                        cache.insert(c, Arc::new(s));
                    }
                    Err(e) => {
                        failures.insert(c, e.to_string());
                    }
                }
            }
        }
        configs
            .iter()
            .map(|c| match failures.get(c) {
                None => Ok(()),
                Some(msg) => Err(LabError::ConfigurationFailed {
                    sites: c.sites().to_vec(),
                    source: Box::new(LabError::Config(msg.clone())),
                }),
            })
            .collect()
    }

    fn trace(&self, s: &Spectrum, phi: &TestFunction, mode: TraceMode) -> f64 {
        match mode {
            TraceMode::PerVolume => s.trace_of_function(phi),
            TraceMode::Localized => s.local_trace_of_function(phi, Site::ORIGIN),
        }
    }

    /// `Tr φ(H_K) − Tr φ(H₀)` (or its localized counterpart); zero for `K = ∅`.
    pub fn shift(&self, config: &DefectConfig, phi: &TestFunction, mode: TraceMode) -> Result<f64> {
        if config.is_empty() {
            return Ok(0.0);
        }
        let s = self.spectrum(config)?;
        Ok(self.trace(&s, phi, mode) - self.trace(&self.gs.spectrum, phi, mode))
    }

    /// `⟨n₀, φ⟩`: host trace per unit cell (or on the origin cell).
    pub fn host_pairing(&self, phi: &TestFunction, mode: TraceMode) -> f64 {
        let t = self.trace(&self.gs.spectrum, phi, mode);
        match mode {
            TraceMode::PerVolume => t / self.num_sites() as f64,
            TraceMode::Localized => t,
        }
    }

    /// Normalization turning a shift into a per-cell contribution.
    pub(crate) fn volume_factor(&self, mode: TraceMode) -> f64 {
        match mode {
            TraceMode::PerVolume => 1.0 / self.num_sites() as f64,
            TraceMode::Localized => 1.0,
        }
    }
}

/// `T_K(φ) = Tr φ(H_K) − Tr φ(H₀)` with `H_K = H₀ + V_K` self-consistent.
pub fn spectral_shift_pairing(
    config: &DefectConfig,
    phi: &TestFunction,
    ensemble: &DefectEnsemble<'_>,
) -> Result<f64> {
    ensemble.shift(config, phi, TraceMode::PerVolume)
}
