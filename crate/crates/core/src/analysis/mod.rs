//! Empirical decay, locality, superposition and thermodynamic-limit studies,
//! plus the Gronwall-type recursion utility.

pub mod decay;
pub mod fit;
pub mod gronwall;
pub mod locality;

pub use decay::{decay_profile, DecayProfile};
pub use fit::{fit_decay, linear_fit, local_exponents, log_log_slopes, DecayFits, LinearFit};
pub use gronwall::{gronwall_extremal_check, GronwallReport};
pub use locality::{
    ball, center_site, locality_error, neighborhood, superposition_error,
    thermodynamic_limit_curve, truncate, ErrorCurve, SuperpositionCurve,
};
