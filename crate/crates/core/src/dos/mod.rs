//! Anderson–Bernoulli defect ensembles and the density-of-states expansion.

pub mod ensemble;
pub mod expansion;

pub use ensemble::{spectral_shift_pairing, DefectConfig, DefectEnsemble, TraceMode};
pub use expansion::{
    bernoulli_weight, dos_exact_enumeration, dos_exact_enumeration_with, dos_monte_carlo,
    enumeration_weight_sum, expansion_residual_slopes, mu_pairing, DosPairing,
    EnsembleSpec, MuPairing, Provenance, SlopesReport, DEFAULT_ENUMERATION_BUDGET,
};
