//! Declarative experiment configuration (TOML). Unknown keys are rejected and
//! every parameter is validated before any computation starts.

use std::path::{Component, Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fields::{cell_gaussian, ScalarField, Site, TorusGrid, YukawaParams};
use crate::scf::{CrystalSpec, SolverOptions};
use crate::spectral::{Family, TestFunction};

/// Host crystal and grid. Defaults are the reference instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub dim: usize,
    pub cells: usize,
    pub points_per_cell: usize,
    pub mass: f64,
    /// Nuclear charge per cell, `∫_Γ ν_per`.
    pub nuclear_charge: f64,
    pub nuclear_width: f64,
    pub electrons_per_cell: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            cells: 32,
            points_per_cell: 16,
            mass: 1.0,
            nuclear_charge: 4.0,
            nuclear_width: 0.1,
            electrons_per_cell: 1,
        }
    }
}

impl ModelConfig {
    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.dim, self.cells, self.points_per_cell)
    }

    pub fn crystal(&self) -> Result<CrystalSpec> {
        let spec = CrystalSpec {
            grid: self.grid()?,
            yukawa: YukawaParams::new(self.mass, self.dim)?,
            nuclear_charge: self.nuclear_charge,
            nuclear_width: self.nuclear_width,
            electrons_per_cell: self.electrons_per_cell,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Defect shape `χ`: a gaussian centered in its cell and truncated to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DefectShapeConfig {
    pub amplitude: f64,
    pub width: f64,
}

impl Default for DefectShapeConfig {
    fn default() -> Self {
        Self {
            amplitude: 0.2,
            width: 0.05,
        }
    }
}

impl DefectShapeConfig {
    pub fn chi(&self, grid: TorusGrid, site: Site) -> ScalarField {
        cell_gaussian(grid, site, self.width, self.amplitude)
    }
}

/// Test function `φ`, centered relative to the host Fermi level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhiConfig {
    pub family: Family,
    pub center_offset: f64,
    pub width: f64,
    pub degree: usize,
}

impl Default for PhiConfig {
    fn default() -> Self {
        Self {
            family: Family::Gaussian,
            center_offset: 0.0,
            width: 0.5,
            degree: 0,
        }
    }
}

impl PhiConfig {
    pub fn build(&self, fermi_level: f64) -> TestFunction {
        TestFunction::new(
            self.family,
            fermi_level + self.center_offset,
            self.width,
            self.degree,
        )
    }
}

fn default_beta() -> f64 {
    2.0
}
fn default_one() -> f64 {
    1.0
}

/// The experiment to run and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    /// Periodic ground state.
    Periodic {},
    /// Single defect `s·χ` at a cell (default: torus center).
    Defect {
        #[serde(default = "default_one")]
        scale: f64,
        #[serde(default)]
        site: Option<usize>,
    },
    /// Shell-norm decay of a single defect's response.
    Decay {
        #[serde(default)]
        radii: Vec<f64>,
    },
    /// Truncation error of a periodic defect lattice.
    Locality {
        truncations: Vec<usize>,
        #[serde(default = "default_beta")]
        beta: f64,
    },
    /// Nonlinear interaction of two defects against separation.
    Superposition {
        separations: Vec<usize>,
        #[serde(default = "default_beta")]
        beta: f64,
    },
    /// Local trace-norm distance of truncated lattices.
    Thermo {
        truncations: Vec<usize>,
        #[serde(default)]
        region_radius: f64,
    },
    /// Resolvent-kernel decay of `H_per` below its spectrum.
    CtProbe {
        /// Distances `d(z, σ(H))` below the bottom of the spectrum.
        distances: Vec<f64>,
        radii: Vec<usize>,
    },
    /// Block norms of `(1 + L)⁻¹` against cell separation.
    OffdiagL { separations: Vec<usize> },
    /// Exact enumeration of `⟨n_p, φ⟩`.
    DosEnum {
        p_values: Vec<f64>,
        #[serde(default)]
        phi: PhiConfig,
    },
    /// Monte Carlo `⟨n_p, φ⟩` (uses the top-level seed).
    DosMc {
        p: f64,
        samples: usize,
        #[serde(default)]
        phi: PhiConfig,
        /// Also run exact enumeration for comparison.
        #[serde(default)]
        compare_exact: bool,
    },
    /// Remainder orders of the small-p expansion.
    DosSlopes {
        p_values: Vec<f64>,
        #[serde(default)]
        cutoff: Option<f64>,
        #[serde(default)]
        phi: PhiConfig,
    },
    /// Extremal sequence of the Gronwall-type recursion.
    Gronwall {
        c: f64,
        c_prime: f64,
        a: f64,
        r_max: f64,
        #[serde(default = "default_one")]
        x0: f64,
    },
}

/// `(name, description)` of every experiment kind.
pub const EXPERIMENTS: &[(&str, &str)] = &[
    ("periodic", "periodic ground state, gap and Fermi level"),
    ("defect", "single-defect SCF with consistency diagnostics"),
    ("decay", "shell-norm decay profile of V_nu and rho_nu"),
    ("locality", "truncation error of a periodic defect lattice"),
    ("superposition", "two-defect nonlinear interaction vs separation"),
    ("thermo", "local trace-norm distance of truncated lattices"),
    ("ct-probe", "resolvent-kernel decay for several distances to the spectrum"),
    ("offdiag-l", "cell-block norms of (1 + L)^-1"),
    ("dos-enum", "exact enumeration of <n_p, phi>"),
    ("dos-mc", "Monte Carlo estimate of <n_p, phi>"),
    ("dos-slopes", "residual slopes of the small-p expansion"),
    ("gronwall", "extremal Gronwall-type sequence and log^2 envelope"),
];

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Periodic {} => "periodic",
            Experiment::Defect { .. } => "defect",
            Experiment::Decay { .. } => "decay",
            Experiment::Locality { .. } => "locality",
            Experiment::Superposition { .. } => "superposition",
            Experiment::Thermo { .. } => "thermo",
            Experiment::CtProbe { .. } => "ct-probe",
            Experiment::OffdiagL { .. } => "offdiag-l",
            Experiment::DosEnum { .. } => "dos-enum",
            Experiment::DosMc { .. } => "dos-mc",
            Experiment::DosSlopes { .. } => "dos-slopes",
            Experiment::Gronwall { .. } => "gronwall",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Relative paths are resolved against the output root.
    pub directory: PathBuf,
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec![OutputFormat::Csv, OutputFormat::Json, OutputFormat::Binary],
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: OutputFormat) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub defect: DefectShapeConfig,
    #[serde(default)]
    pub solver: SolverOptions,
    pub experiment: Experiment,
    #[serde(default)]
    pub output: OutputConfig,
}

fn invalid(msg: impl Into<String>) -> LabError {
    LabError::Config(msg.into())
}

/// Parses a scalar override value as TOML, falling back to a plain string.
fn parse_override_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

/// Sets `dotted.path = value` in a TOML table, creating intermediate tables.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| invalid(format!("override '{assignment}' is not key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(invalid(format!("bad override path '{path}'")));
    }
    let mut current = table;
    for key in &keys[..keys.len() - 1] {
        let entry = current
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        current = entry
            .as_table_mut()
            .ok_or_else(|| invalid(format!("override path '{path}' crosses a non-table")))?;
    }
    current.insert(
        keys[keys.len() - 1].to_string(),
        parse_override_value(raw.trim()),
    );
    Ok(())
}

impl ExperimentConfig {
    /// Parses TOML text, applies dotted overrides, then validates.
    pub fn from_toml_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| invalid(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_toml_with_overrides(text, &[])
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_with_overrides(&text, overrides)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| invalid(e.to_string()))
    }

    /// Output directory under `root`; absolute directories ignore `root`.
    pub fn output_dir(&self, root: Option<&Path>) -> PathBuf {
        match root {
            Some(r) if self.output.directory.is_relative() => r.join(&self.output.directory),
            _ => self.output.directory.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        if !(1..=3).contains(&m.dim) {
            return Err(invalid("model.dim must be 1, 2 or 3"));
        }
        if m.cells == 0 || m.points_per_cell == 0 {
            return Err(invalid("model.cells and model.points_per_cell must be positive"));
        }
        let positive = [
            ("model.mass", m.mass),
            ("model.nuclear_charge", m.nuclear_charge),
            ("model.nuclear_width", m.nuclear_width),
            ("defect.width", self.defect.width),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive")));
            }
        }
        if !self.defect.amplitude.is_finite() {
            return Err(invalid("defect.amplitude must be finite"));
        }
        if m.electrons_per_cell == 0 {
            return Err(invalid("model.electrons_per_cell must be positive"));
        }
        let s = &self.solver;
        if !(s.tol_scf > 0.0) || !(s.krylov_tol > 0.0) || !(s.g_min > 0.0) {
            return Err(invalid("solver tolerances and g_min must be positive"));
        }
        if !(s.mixing > 0.0 && s.mixing <= 1.0) {
            return Err(invalid("solver.mixing must lie in (0, 1]"));
        }
        if s.max_iter == 0 || s.krylov_max_iter == 0 {
            return Err(invalid("iteration limits must be positive"));
        }
        let grid = m.grid().map_err(|e| invalid(e.to_string()))?;
        let n_points = grid.len();
        if !matches!(self.experiment, Experiment::Gronwall { .. }) {
            if n_points > s.dense_budget {
                return Err(invalid(format!(
                    "grid has {n_points} points, above solver.dense_budget = {}",
                    s.dense_budget
                )));
            }
            if m.electrons_per_cell * grid.num_cells() >= n_points {
                return Err(invalid("more occupied states than grid points"));
            }
        }
        if self.output.directory.components().any(|c| c == Component::ParentDir) {
            return Err(invalid("output.directory must not contain '..'"));
        }
        self.validate_experiment(&grid)
    }

    fn validate_experiment(&self, grid: &TorusGrid) -> Result<()> {
        let half = grid.half_width();
        let cells = grid.cells();
        let nonempty = |v: usize, what: &str| {
            if v == 0 {
                Err(invalid(format!("{what} must not be empty")))
            } else {
                Ok(())
            }
        };
        match &self.experiment {
            Experiment::Periodic {} | Experiment::Gronwall { .. } => {}
            Experiment::Defect { scale, site } => {
                if !scale.is_finite() {
                    return Err(invalid("defect scale must be finite"));
                }
                if site.is_some_and(|s| s >= grid.num_cells()) {
                    return Err(invalid("defect site index out of range"));
                }
            }
            Experiment::Decay { radii } => {
                if radii.iter().any(|&r| !(r > 0.0) || r > half) {
                    return Err(invalid(format!("decay radii must lie in (0, {half}]")));
                }
            }
            Experiment::Locality { truncations, beta } | Experiment::Thermo { truncations, region_radius: beta } => {
                nonempty(truncations.len(), "truncations")?;
                if truncations.iter().any(|&t| t == 0 || t > cells) {
                    return Err(invalid(format!("truncations must lie in 1..={cells}")));
                }
                if !(*beta >= 0.0) {
                    return Err(invalid("beta / region_radius must be non-negative"));
                }
            }
            Experiment::Superposition { separations, beta } => {
                nonempty(separations.len(), "separations")?;
                if separations.iter().any(|&r| r == 0 || r as f64 > half) {
                    return Err(invalid(format!("separations must lie in 1..={half}")));
                }
                if !(*beta >= 0.0) {
                    return Err(invalid("beta must be non-negative"));
                }
            }
            Experiment::CtProbe { distances, radii } => {
                nonempty(distances.len(), "distances")?;
                nonempty(radii.len(), "radii")?;
                if distances.iter().any(|&d| !(d > 0.0)) {
                    return Err(invalid("distances must be positive"));
                }
                if radii.iter().any(|&r| r as f64 > half) {
                    return Err(invalid(format!("radii must be at most {half}")));
                }
            }
            Experiment::OffdiagL { separations } => {
                nonempty(separations.len(), "separations")?;
                if separations.iter().any(|&r| r as f64 > half) {
                    return Err(invalid(format!("separations must be at most {half}")));
                }
            }
            Experiment::DosEnum { p_values, phi } => {
                nonempty(p_values.len(), "p_values")?;
                if p_values.iter().any(|p| !(0.0..=1.0).contains(p)) {
                    return Err(invalid("p values must lie in [0, 1]"));
                }
                validate_phi(phi)?;
            }
            Experiment::DosMc { p, samples, phi, .. } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(invalid("p must lie in [0, 1]"));
                }
                if *samples < 2 {
                    return Err(invalid("samples must be at least 2"));
                }
                validate_phi(phi)?;
            }
            Experiment::DosSlopes { p_values, cutoff, phi } => {
                if p_values.len() < 3 || p_values.iter().any(|&p| !(p > 0.0 && p <= 0.15)) {
                    return Err(invalid("need at least three p values in (0, 0.15]"));
                }
                if cutoff.is_some_and(|c| !(c > 0.0) || c > half) {
                    return Err(invalid(format!("cutoff must lie in (0, {half}]")));
                }
                validate_phi(phi)?;
            }
        }
        if let Experiment::Gronwall { c, c_prime, a, r_max, x0 } = &self.experiment {
            if !(*c >= 0.0 && *c_prime > 0.0 && *a > 1.0 && *r_max >= 2.0 && *x0 >= 0.0) {
                return Err(invalid("gronwall needs c >= 0, c_prime > 0, a > 1, r_max >= 2, x0 >= 0"));
            }
        }
        Ok(())
    }
}

fn validate_phi(phi: &PhiConfig) -> Result<()> {
    if !(phi.width > 0.0) || !phi.center_offset.is_finite() {
        return Err(invalid("phi.width must be positive and phi.center_offset finite"));
    }
    Ok(())
}
