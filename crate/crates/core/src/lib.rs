//! Numerical laboratory for reduced Hartree-Fock crystals with Yukawa
//! interaction on periodic tori.
//!
//! The crate is organized bottom-up:
//! - [`fields`]: grids, scalar fields, norms, the Yukawa interaction;
//! - [`spectral`]: dense Hamiltonians, spectra, traces, resolvent decay;
//! - [`scf`]: periodic ground state, dielectric operator, defect SCF, energies;
//! - [`analysis`]: decay, locality, superposition, thermodynamic limit, Gronwall;
//! - [`dos`]: Bernoulli defect ensembles and density-of-states expansions;
//! - [`config`] and [`experiments`]: declarative experiment runner.

pub mod error;
pub mod fields;

pub use error::{LabError, Result};
pub mod spectral;
pub mod analysis;
pub mod scf;
pub mod dos;
pub mod config;
pub mod experiments;
