//! Experiment runner: executes a validated [`ExperimentConfig`] and writes
//! its artifacts (manifest, JSON results, CSV tables, field binaries) into a
//! single output directory.
//!
//! Every data file is a deterministic function of the configuration; only the
//! `timings` block of `manifest.json` varies between reruns.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{
    ball, center_site, decay_profile, gronwall_extremal_check, locality_error,
    superposition_error, thermodynamic_limit_curve, DecayFits, ErrorCurve, LinearFit,
};
use crate::config::{Experiment, ExperimentConfig, OutputFormat};
use crate::dos::{
    dos_exact_enumeration, dos_monte_carlo, expansion_residual_slopes, DefectEnsemble,
    EnsembleSpec,
};
use crate::error::{LabError, Result};
use crate::fields::{io as field_io, ScalarField, Site};
use crate::scf::{
    defect_energy_of_spectrum, one_plus_l_offdiagonal_profile, projector_consistency,
    solve_defect_scf, solve_periodic, PeriodicGroundState,
};
use crate::spectral::resolvent_kernel_decay;

/// What a successful run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub directory: PathBuf,
    /// File names relative to `directory`, in write order.
    pub files: Vec<String>,
    /// Contents of `result.json`.
    pub result: Value,
}

#[derive(Debug, Clone, Serialize)]
struct Column {
    name: String,
    description: String,
}

/// Collects every file written by a run; all paths stay inside `dir`.
struct Artifacts {
    dir: PathBuf,
    formats: Vec<OutputFormat>,
    files: Vec<String>,
    schema: BTreeMap<String, Vec<Column>>,
}

impl Artifacts {
    fn new(dir: &Path, formats: &[OutputFormat]) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let stale = dir.join("error.json");
        if stale.exists() {
            fs::remove_file(stale)?;
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            formats: formats.to_vec(),
            files: Vec::new(),
            schema: BTreeMap::new(),
        })
    }

    fn wants(&self, f: OutputFormat) -> bool {
        self.formats.contains(&f)
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        debug_assert!(!name.contains('/') && !name.contains(".."));
        self.files.push(name.to_string());
        Ok(BufWriter::new(File::create(self.dir.join(name))?))
    }

    fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    /// CSV table with documented columns; rows are formatted with the
    /// shortest round-trip representation.
    fn table(&mut self, name: &str, columns: &[(&str, &str)], rows: &[Vec<f64>]) -> Result<()> {
        if !self.wants(OutputFormat::Csv) {
            return Ok(());
        }
        let w = self.create(name)?;
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(columns.iter().map(|(c, _)| *c))
            .map_err(csv_error)?;
        for row in rows {
            csv.write_record(row.iter().map(|v| v.to_string()))
                .map_err(csv_error)?;
        }
        csv.flush()?;
        self.document(name, columns);
        Ok(())
    }

    fn document(&mut self, name: &str, columns: &[(&str, &str)]) {
        self.schema.insert(
            name.to_string(),
            columns
                .iter()
                .map(|(n, d)| Column {
                    name: n.to_string(),
                    description: d.to_string(),
                })
                .collect(),
        );
    }

    fn field(&mut self, stem: &str, field: &ScalarField, mass: f64) -> Result<()> {
        if self.wants(OutputFormat::Binary) {
            let mut w = self.create(&format!("{stem}.bin"))?;
            field_io::write_binary(&mut w, field, mass)?;
            w.flush()?;
        }
        if self.wants(OutputFormat::Csv) {
            let name = format!("{stem}.csv");
            let mut w = self.create(&name)?;
            field_io::write_csv(&mut w, field)?;
            w.flush()?;
            let mut cols: Vec<(&str, &str)> = ["i0", "i1", "i2"]
                .iter()
                .take(field.grid().dim())
                .map(|c| (*c, "grid index along one axis"))
                .collect();
            cols.push(("value", "field value at the grid point"));
            self.document(&name, &cols);
        }
        Ok(())
    }

    fn spectrum(&mut self, name: &str, spectrum: &crate::spectral::Spectrum) -> Result<()> {
        if !self.wants(OutputFormat::Csv) {
            return Ok(());
        }
        let mut w = self.create(name)?;
        spectrum.write_csv(&mut w, true)?;
        w.flush()?;
        self.document(
            name,
            &[
                ("index", "eigenvalue index, ascending"),
                ("eigenvalue", "eigenvalue of the Hamiltonian"),
                ("w<k>", "weight of the eigenvector on cell k (one column per cell)"),
            ],
        );
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> LabError {
    LabError::Io(std::io::Error::other(e))
}

/// Machine-readable failure record, written as `error.json`.
pub fn error_record(err: &LabError) -> Value {
    json!({
        "status": "error",
        "kind": err.kind(),
        "message": err.to_string(),
        "exit_code": err.exit_code(),
    })
}

pub fn write_error_record(dir: &Path, err: &LabError) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut f = File::create(dir.join("error.json"))?;
    serde_json::to_writer_pretty(&mut f, &error_record(err))?;
    writeln!(f)?;
    Ok(())
}

fn fitted(fit: &LinearFit, x: f64) -> f64 {
    (fit.intercept + fit.slope * x).exp()
}

fn decay_fit_columns(fits: &DecayFits, r: f64) -> [f64; 3] {
    [
        fitted(&fits.exponential, r),
        fitted(&fits.log_squared, r.ln().powi(2)),
        fitted(&fits.power_law, r.ln()),
    ]
}

fn curve_rows(curve: &ErrorCurve) -> Vec<Vec<f64>> {
    curve
        .parameters
        .iter()
        .zip(&curve.errors)
        .map(|(&p, &e)| vec![p, e, fitted(&curve.power_law, p.ln())])
        .collect()
}

fn solution_summary(sol: &crate::scf::DefectSolution, gs: &PeriodicGroundState) -> Result<Value> {
    Ok(json!({
        "iterations": sol.iterations,
        "residuals": sol.residuals,
        "contraction_estimate": sol.contraction_estimate,
        "response_constant": sol.response_constant,
        "gap": sol.gap(),
        "fermi_level": gs.fermi_level,
        "consistency": projector_consistency(sol, gs)?,
        "defect_energy": defect_energy_of_spectrum(&sol.spectrum, &sol.nu, gs)?,
    }))
}

/// `Σ_k χ(· − k)` over every cell of the torus.
fn defect_lattice(chi: &ScalarField) -> ScalarField {
    let grid = *chi.grid();
    let origin = grid.site_index(chi.support_sites().first().copied().unwrap_or(Site::ORIGIN));
    grid.sites().fold(ScalarField::zeros(grid), |acc, s| {
        let from = grid.site_from_index(origin).0;
        let shift = [
            s.0[0] as i64 - from[0] as i64,
            s.0[1] as i64 - from[1] as i64,
            s.0[2] as i64 - from[2] as i64,
        ];
        acc.add(&chi.translated(shift))
    })
}

const CURVE_COLUMNS: [(&str, &str); 3] = [
    ("parameter", "truncation size or separation in cells"),
    ("error", "measured norm"),
    ("fitted_power_law", "least-squares power-law fit evaluated at the parameter"),
];

/// Runs the experiment of `cfg` into `dir`. The configuration is validated
/// again before anything is computed.
pub fn run_experiment(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome> {
    cfg.validate()?;
    let started = Instant::now();
    let mut art = Artifacts::new(dir, &cfg.output.formats)?;
    let mut timings = BTreeMap::new();

    let gs = match cfg.experiment {
        Experiment::Gronwall { .. } => None,
        _ => {
            let t = Instant::now();
            let crystal = cfg.model.crystal()?;
            let gs = solve_periodic(&crystal, &cfg.solver)?;
            timings.insert("ground_state_s", t.elapsed().as_secs_f64());
            log::info!(
                "ground state: gap {:.4}, fermi level {:.4}, {} iterations",
                gs.gap,
                gs.fermi_level,
                gs.residuals.len()
            );
            Some(gs)
        }
    };
    let t = Instant::now();
    let result = match (&cfg.experiment, &gs) {
        (Experiment::Gronwall { c, c_prime, a, r_max, x0 }, _) => {
            let rep = gronwall_extremal_check(*c, *c_prime, *a, *r_max, *x0)?;
            let rows: Vec<Vec<f64>> = rep
                .radii
                .iter()
                .zip(&rep.values)
                .map(|(&r, &v)| {
                    let env = rep.c_double_prime
                        * (-rep.c_triple_prime * r.max(1.0).ln().powi(2)).exp()
                        * rep.x0;
                    vec![r, v, env]
                })
                .collect();
            art.table(
                "gronwall.csv",
                &[
                    ("radius", "R on the geometric grid"),
                    ("value", "extremal sequence x_R"),
                    ("envelope", "fitted C'' exp(-C''' log(R)^2) x0"),
                ],
                &rows,
            )?;
            serde_json::to_value(&rep)?
        }
        (_, None) => unreachable!("ground state is solved for every other experiment"),
        (exp, Some(gs)) => run_with_ground_state(cfg, exp, gs, &mut art)?,
    };
    timings.insert("experiment_s", t.elapsed().as_secs_f64());

    art.json("result.json", &result)?;
    if art.wants(OutputFormat::Csv) {
        let schema = std::mem::take(&mut art.schema);
        art.json("csv_schema.json", &schema)?;
    }
    timings.insert("total_s", started.elapsed().as_secs_f64());
    let mut files = art.files.clone();
    files.push("manifest.json".into());
    let manifest = json!({
        "status": "ok",
        "program": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": cfg.experiment.name(),
        "seed": cfg.seed,
        "config": cfg,
        "config_toml": cfg.to_toml()?,
        "files": files,
        "timings": timings,
    });
    art.json("manifest.json", &manifest)?;
    Ok(RunOutcome {
        directory: dir.to_path_buf(),
        files: art.files,
        result,
    })
}

fn run_with_ground_state(
    cfg: &ExperimentConfig,
    exp: &Experiment,
    gs: &PeriodicGroundState,
    art: &mut Artifacts,
) -> Result<Value> {
    let grid = *gs.grid();
    let mass = cfg.model.mass;
    let center = center_site(&grid);
    let chi_at = |site: Site| cfg.defect.chi(grid, site);
    Ok(match exp {
        Experiment::Periodic {} => {
            art.field("nu_per", &gs.nu_per, mass)?;
            art.field("rho_per", &gs.rho_per, mass)?;
            art.field("v_per", &gs.v_per, mass)?;
            art.spectrum("spectrum.csv", &gs.spectrum)?;
            let rows: Vec<Vec<f64>> = gs
                .residuals
                .iter()
                .enumerate()
                .map(|(i, &r)| vec![(i + 1) as f64, r])
                .collect();
            art.table(
                "scf_residuals.csv",
                &[("iteration", "SCF iteration"), ("residual", "L2 density update norm")],
                &rows,
            )?;
            json!({
                "fermi_level": gs.fermi_level,
                "gap": gs.gap,
                "iterations": gs.residuals.len(),
                "residuals": gs.residuals,
                "occupied_states": gs.crystal.occupied_states(),
                "lowest_eigenvalue": gs.spectrum.eigenvalues()[0],
            })
        }
        Experiment::Defect { scale, site } => {
            let site = site.map(|s| grid.site_from_index(s)).unwrap_or(center);
            let nu = chi_at(site).scaled(*scale);
            let sol = solve_defect_scf(&nu, gs)?;
            art.field("nu", &sol.nu, mass)?;
            art.field("rho_nu", &sol.rho_nu, mass)?;
            art.field("v_nu", &sol.v_nu, mass)?;
            let rows: Vec<Vec<f64>> = sol
                .residuals
                .iter()
                .enumerate()
                .map(|(i, &r)| vec![(i + 1) as f64, r])
                .collect();
            art.table(
                "scf_residuals.csv",
                &[("iteration", "SCF iteration"), ("residual", "L2_unif density update norm")],
                &rows,
            )?;
            let mut v = solution_summary(&sol, gs)?;
            v["site"] = json!(grid.site_index(site));
            v["scale"] = json!(scale);
            v
        }
        Experiment::Decay { radii } => {
            let radii: Vec<f64> = if radii.is_empty() {
                (1..=grid.half_width().floor() as usize).map(|r| r as f64).collect()
            } else {
                radii.clone()
            };
            let sol = solve_defect_scf(&chi_at(center), gs)?;
            let prof = decay_profile(&sol, &radii)?;
            let rows: Vec<Vec<f64>> = prof
                .radii
                .iter()
                .enumerate()
                .map(|(i, &r)| {
                    let mut row = vec![r, prof.potential_norms[i], prof.density_norms[i]];
                    row.extend(decay_fit_columns(&prof.potential_fits, r));
                    row
                })
                .collect();
            art.table(
                "decay.csv",
                &[
                    ("radius", "distance R from the defect support, in cells"),
                    ("potential_norm", "sup of local H2 norm of V_nu beyond R"),
                    ("density_norm", "sup of local L2 norm of rho_nu beyond R"),
                    ("fit_exponential", "exponential fit of potential_norm"),
                    ("fit_log_squared", "exp(-b log(R)^2) fit of potential_norm"),
                    ("fit_power_law", "power-law fit of potential_norm"),
                ],
                &rows,
            )?;
            art.field("v_nu", &sol.v_nu, mass)?;
            art.field("rho_nu", &sol.rho_nu, mass)?;
            json!({ "solution": solution_summary(&sol, gs)?, "profile": prof })
        }
        Experiment::Locality { truncations, beta } => {
            let nu = defect_lattice(&chi_at(center));
            let curve = locality_error(&nu, truncations, *beta, gs)?;
            art.table("locality.csv", &CURVE_COLUMNS, &curve_rows(&curve))?;
            json!({ "beta": beta, "curve": curve, "max_ratio": curve.max_ratio() })
        }
        Experiment::Superposition { separations, beta } => {
            let rep = superposition_error(&chi_at(center), separations, *beta, gs)?;
            art.table("superposition.csv", &CURVE_COLUMNS, &curve_rows(&rep.curve))?;
            json!({ "beta": beta, "report": rep, "max_ratio": rep.curve.max_ratio() })
        }
        Experiment::Thermo { truncations, region_radius } => {
            let nu = defect_lattice(&chi_at(center));
            let region = ball(&grid, center, *region_radius);
            let curve = thermodynamic_limit_curve(&nu, truncations, &region, gs)?;
            art.table("thermo.csv", &CURVE_COLUMNS, &curve_rows(&curve))?;
            json!({
                "region": region.iter().map(|s| grid.site_index(*s)).collect::<Vec<_>>(),
                "curve": curve,
                "max_ratio": curve.max_ratio(),
            })
        }
        Experiment::CtProbe { distances, radii } => {
            let bottom = gs.spectrum.eigenvalues()[0];
            let mut rows = Vec::new();
            let mut probes = Vec::new();
            for &d in distances {
                let z = Complex64::new(bottom - d, 0.0);
                let probe = resolvent_kernel_decay(&gs.spectrum, z, center, radii)?;
                for (&r, &n) in probe.radii.iter().zip(&probe.shell_norms) {
                    rows.push(vec![d, r as f64, n, fitted(&probe.fit, r as f64)]);
                }
                probes.push(json!({ "probe": probe, "rate": probe.rate() }));
            }
            art.table(
                "ct_probe.csv",
                &[
                    ("distance", "distance from z to the spectrum"),
                    ("radius", "shell distance from the source cell"),
                    ("shell_norm", "L2 norm of the resolvent column on the shell"),
                    ("fitted", "exponential fit evaluated at the radius"),
                ],
                &rows,
            )?;
            json!({ "spectrum_bottom": bottom, "probes": probes })
        }
        Experiment::OffdiagL { separations } => {
            let prof = one_plus_l_offdiagonal_profile(gs, separations)?;
            let rows: Vec<Vec<f64>> = prof
                .separations
                .iter()
                .zip(&prof.block_norms)
                .map(|(&s, &b)| vec![s as f64, b, b / prof.diagonal_norm])
                .collect();
            art.table(
                "offdiag_l.csv",
                &[
                    ("separation", "cell separation"),
                    ("block_norm", "operator norm of the off-diagonal cell block"),
                    ("relative", "block_norm divided by the diagonal block norm"),
                ],
                &rows,
            )?;
            serde_json::to_value(&prof)?
        }
        Experiment::DosEnum { p_values, phi } => {
            let ens = DefectEnsemble::new(gs, chi_at(Site::ORIGIN))?;
            let phi = phi.build(gs.fermi_level);
            let pairings = p_values
                .iter()
                .map(|&p| dos_exact_enumeration(p, &phi, &ens))
                .collect::<Result<Vec<_>>>()?;
            let rows: Vec<Vec<f64>> = p_values
                .iter()
                .zip(&pairings)
                .map(|(&p, d)| vec![p, d.value, d.excess])
                .collect();
            art.table("dos_enum.csv", &DOS_COLUMNS[..3], &rows)?;
            json!({ "phi": phi, "p_values": p_values, "pairings": pairings, "configurations_solved": ens.solved() })
        }
        Experiment::DosMc { p, samples, phi, compare_exact } => {
            let ens = DefectEnsemble::new(gs, chi_at(Site::ORIGIN))?;
            let phi = phi.build(gs.fermi_level);
            let spec = EnsembleSpec { p: *p, seed: cfg.seed, samples: *samples };
            let mc = dos_monte_carlo(&spec, &phi, &ens)?;
            let exact = if *compare_exact {
                Some(dos_exact_enumeration(*p, &phi, &ens)?)
            } else {
                None
            };
            let z = exact.as_ref().map(|e| (mc.excess - e.excess) / mc.stderr);
            art.table(
                "dos_mc.csv",
                &DOS_COLUMNS,
                &[vec![*p, mc.value, mc.excess, mc.stderr]],
            )?;
            json!({ "phi": phi, "ensemble": spec, "monte_carlo": mc, "exact": exact, "z_score": z })
        }
        Experiment::DosSlopes { p_values, cutoff, phi } => {
            let ens = DefectEnsemble::new(gs, chi_at(Site::ORIGIN))?;
            let phi = phi.build(gs.fermi_level);
            let cutoff = cutoff.unwrap_or_else(|| grid.half_width());
            let rep = expansion_residual_slopes(p_values, &phi, cutoff, &ens)?;
            let rows: Vec<Vec<f64>> = rep
                .p_values
                .iter()
                .enumerate()
                .map(|(i, &p)| {
                    vec![
                        p,
                        rep.excess[i],
                        rep.residuals[0][i],
                        rep.residuals[1][i],
                        rep.residuals[2][i],
                    ]
                })
                .collect();
            art.table(
                "dos_slopes.csv",
                &[
                    ("p", "Bernoulli defect probability"),
                    ("excess", "<n_p, phi> - <n_0, phi>"),
                    ("residual_j0", "|excess|"),
                    ("residual_j1", "|excess - mu1 p|"),
                    ("residual_j2", "|excess - mu1 p - mu2 p^2|"),
                ],
                &rows,
            )?;
            json!({ "phi": phi, "cutoff": cutoff, "report": rep })
        }
        Experiment::Gronwall { .. } => unreachable!("handled without a ground state"),
    })
}

const DOS_COLUMNS: [(&str, &str); 4] = [
    ("p", "Bernoulli defect probability"),
    ("pairing", "<n_p, phi> per unit cell"),
    ("excess", "<n_p, phi> - <n_0, phi>"),
    ("stderr", "Monte Carlo standard error of the excess"),
];
