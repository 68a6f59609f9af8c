//! Dense Hamiltonians `−½Δ + V`, spectra, Fermi projectors and their
//! densities, traces of functions of operators and resolvent decay probes.

mod hamiltonian;
mod resolvent;
mod spectrum;
mod test_function;

pub use hamiltonian::{Hamiltonian, DEFAULT_DENSE_BUDGET};
pub use resolvent::{resolvent_kernel_decay, ResolventDecay};
pub use spectrum::{
    density_of_columns, diagonalize, diagonalize_with_budget, local_projector_distance,
    projector_distance_of_columns, Spectrum,
};
pub use test_function::{Family, TestFunction};

use crate::error::Result;
use crate::fields::{ScalarField, Site};

/// Density of the Fermi projector of a gapped spectrum.
pub fn density_from_fermi(s: &Spectrum, gap_threshold: f64) -> Result<ScalarField> {
    s.density(gap_threshold)
}

pub fn trace_of_function(s: &Spectrum, phi: &TestFunction) -> f64 {
    s.trace_of_function(phi)
}

pub fn local_trace_of_function(s: &Spectrum, phi: &TestFunction, cell: Site) -> f64 {
    s.local_trace_of_function(phi, cell)
}
